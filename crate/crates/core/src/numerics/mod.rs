//! Quadrature, special functions, 1-D minimization and interpolation.

pub mod interp;
pub mod optimize;
pub mod quad;
pub mod special;

pub use interp::Pchip;
pub use optimize::{minimize_scalar, probe_unimodal};
pub use quad::{
    integrate_detailed, integrate_finite, integrate_piecewise, integrate_semi_infinite,
    integrate_with_tail_bound, kronrod_nodes, Estimate, QuadratureSpec,
};
pub use special::{bessel_i0, bessel_i0_scaled, hyp2f1_1b};
