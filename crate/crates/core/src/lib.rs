pub mod asymptotics;
pub mod discretization;
pub mod eigensolver;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod kernels;
pub mod optimizer;
pub mod oracles;
pub mod validation;
