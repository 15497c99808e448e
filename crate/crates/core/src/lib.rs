pub mod basic_family;
pub mod cli;
pub mod cubic_solver;
pub mod poly;
pub mod polynomiograph;
pub mod sampling;
pub mod voronoi;
