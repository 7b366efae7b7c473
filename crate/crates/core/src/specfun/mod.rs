//! Special functions, interference kernels and adaptive quadrature.

pub mod hyper;
pub mod kernels;
pub mod quad;

pub use hyper::gauss_2f1;
pub use kernels::{kernel_z1, kernel_z2, kernel_z3, kernel_z3_weighted, tail_integral};
pub use quad::{
    integrate, integrate_semi_infinite, try_integrate, try_integrate_semi_infinite, Integral, QuadratureSpec,
    TruncationPolicy,
};
