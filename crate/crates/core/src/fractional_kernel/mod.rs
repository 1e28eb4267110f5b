//! Mittag-Leffler functions, the Zener memory kernel and the operator
//! `L = (1/θ) Id + l_α ∗`, the Riemann–Liouville derivative, and mollified
//! kernel families.

mod kernel;
mod mittag_leffler;
mod mollifier;
mod riemann_liouville;

pub use kernel::{
    mollification_l1_error, mollified_l2_norm, mollify_kernel, zener_kernel, ClConstants, FractionalKernel,
    KernelSource, ZenerKernelFn,
};
pub use mittag_leffler::{e_alpha, e_alpha_prime, mittag_leffler, MlParams, MlTable};
pub use mollifier::{
    bump, bump_cdf, bump_d1, bump_d2, bump_l2_norm_sq, bump_max, bump_normalization, GammaRule, MollifierSpec,
    Placement, ScaledMollifier,
};
pub use riemann_liouville::{convolve_l, riemann_liouville, verify_zener};

/// Tabulates the raw kernel; see [`FractionalKernel::build`].
pub fn build_kernel(alpha: f64, theta: f64, horizon: f64, dt: f64) -> crate::Result<FractionalKernel> {
    FractionalKernel::build(alpha, theta, horizon, dt)
}
