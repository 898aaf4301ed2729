//! Time-dependent coefficient machinery: parameter paths, quadrature and
//! the 2x2 fundamental solution.

pub mod mat2;
pub mod path;
pub mod quadrature;

pub use mat2::{
    commute_residual, exp_of_integral, fundamental_solution, mat2_exp, ode_oracle, Fundamental,
    Mat2C,
};
pub use path::{ComplexPath, ScalarPath};
pub use quadrature::{integrate, QuadratureConfig};
