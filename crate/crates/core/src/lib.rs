pub mod error;
pub mod io;
pub mod qalgebra;
pub mod solvers;
pub mod spectral;
pub mod tba;
