pub mod course;
pub mod export;
pub mod fuzzy;
pub mod reward;
pub mod rl;
pub mod sim;

pub type Vec3 = nalgebra::Vector3<f64>;
