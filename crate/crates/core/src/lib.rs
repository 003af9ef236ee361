pub mod diagram;
pub mod linalg;
pub mod coloring;
pub mod families;
pub mod moves;
pub mod experiments;
