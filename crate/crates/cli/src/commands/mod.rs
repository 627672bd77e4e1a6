pub mod course;
pub mod eval;
pub mod surface;
pub mod train;
