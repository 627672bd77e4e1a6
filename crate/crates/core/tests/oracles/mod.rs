//! Independent reference computations shared by the integration suites.
//! Nothing here calls into the library's numerical code.
#![allow(dead_code)]

pub mod fuzzy;
pub mod geometry;
pub mod gradcheck;
pub mod gridworld;
