//! Real-argument Mittag-Leffler functions
//!
//! ```text
//! E_{α,β}(z) = Σ_{k≥0} z^k / Γ(αk + β)
//! ```
//!
//! and the relaxation function `e_α(t, λ) = E_{α,1}(−λ t^α)` with its
//! derivative.
//!
//! Evaluation strategy:
//!
//! * the power series, accepted only when its cancellation estimate
//!   `max|term| · u / |sum|` is small (always true for `|z| ≲ 1`);
//! * for `0 < α < 1`, `z < 0`, `β < 1 + α` the Hankel contour collapsed onto
//!   the negative real axis,
//!
//!   ```text
//!   E_{α,β}(−x) = 1/π ∫₀^∞ e^{−r} r^{α−β} (r^α sin πβ + x sin π(β−α))
//!                         / (r^{2α} + 2 x r^α cos πα + x²) dr,
//!   ```
//!
//!   integrated with exp-sinh quadrature;
//! * `α = 1` through `exp`/`expm1`.

use std::f64::consts::PI;

use libm::{lgamma as ln_gamma, tgamma as gamma};

use crate::quadrature::exp_sinh;
use crate::{Error, Result};

const SERIES_MAX_TERMS: usize = 250;
const SERIES_MAX_ABS_Z: f64 = 40.0;
const SERIES_CANCELLATION_LIMIT: f64 = 2e-13;
const INTEGRAL_TOL: f64 = 1e-14;

/// Parameters `(α, β)` of the two-parameter Mittag-Leffler function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    alpha: f64,
    beta: f64,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1]")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", format!("{beta} must be positive")));
        }
        Ok(Self { alpha, beta })
    }

    /// One-parameter function `E_α = E_{α,1}`.
    pub fn one(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `E_{α,β}(z)` for real `z`, to about 1e-10 relative accuracy on `|z| ≤ 50`.
pub fn mittag_leffler(params: MlParams, z: f64) -> Result<f64> {
    let MlParams { alpha, beta } = params;
    let fail = || Error::MittagLeffler { alpha, beta, z };
    if !z.is_finite() {
        return Err(fail());
    }
    if z == 0.0 {
        return Ok(1.0 / gamma(beta));
    }
    if alpha == 1.0 {
        if beta == 1.0 {
            return Ok(z.exp());
        }
        if beta == 2.0 {
            return Ok(z.exp_m1() / z);
        }
    }
    if z.abs() <= SERIES_MAX_ABS_Z {
        if let Some(v) = series(alpha, beta, z) {
            return Ok(v);
        }
    }
    if z < 0.0 && alpha < 1.0 && beta < 1.0 + alpha {
        let v = negative_axis_integral(alpha, beta, -z);
        if v.is_finite() {
            return Ok(v);
        }
    }
    Err(fail())
}

/// Power series; `None` when it fails to converge within the term cap or
/// loses too many digits to cancellation.
fn series(alpha: f64, beta: f64, z: f64) -> Option<f64> {
    let ln_abs_z = z.abs().ln();
    let mut sum = 0.0;
    let mut max_term = 0.0_f64;
    let mut small_run = 0;
    for k in 0..SERIES_MAX_TERMS {
        let arg = alpha * k as f64 + beta;
        let term = if arg < 170.0 {
            z.powi(k as i32) / gamma(arg)
        } else {
            let mag = (k as f64 * ln_abs_z - ln_gamma(arg)).exp();
            if z < 0.0 && k % 2 == 1 {
                -mag
            } else {
                mag
            }
        };
        if !term.is_finite() {
            return None;
        }
        sum += term;
        max_term = max_term.max(term.abs());
        if term.abs() <= 1e-16 * sum.abs() {
            small_run += 1;
            if small_run >= 2 {
                let lost = max_term * f64::EPSILON / sum.abs();
                return (lost < SERIES_CANCELLATION_LIMIT).then_some(sum);
            }
        } else {
            small_run = 0;
        }
    }
    None
}

fn sin_pi(x: f64) -> f64 {
    if x == x.round() {
        0.0
    } else {
        (PI * x).sin()
    }
}

fn negative_axis_integral(alpha: f64, beta: f64, x: f64) -> f64 {
    let s_beta = sin_pi(beta);
    let s_beta_alpha = sin_pi(beta - alpha);
    let c_alpha = (PI * alpha).cos();
    let integrand = |r: f64| {
        let ra = r.powf(alpha);
        let num = ra * s_beta + x * s_beta_alpha;
        let den = ra * ra + 2.0 * x * ra * c_alpha + x * x;
        (-r).exp() * r.powf(alpha - beta) * num / den
    };
    exp_sinh(integrand, INTEGRAL_TOL) / PI
}

/// Relaxation function `e_α(t, λ) = E_α(−λ t^α)`, `t ≥ 0`.
pub fn e_alpha(t: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("e_alpha requires t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    mittag_leffler(MlParams::one(alpha)?, -lambda * t.powf(alpha))
}

/// `d/dt e_α(t, λ) = −λ t^{α−1} E_{α,α}(−λ t^α)` for `t > 0`.
pub fn e_alpha_prime(t: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if t <= 0.0 || t.is_nan() {
        return Err(Error::Domain(format!(
            "e_alpha_prime requires t > 0 (integrable singularity at 0), got {t}"
        )));
    }
    let ta = t.powf(alpha);
    let ml = mittag_leffler(MlParams::new(alpha, alpha)?, -lambda * ta)?;
    Ok(-lambda * ta / t * ml)
}

const TABLE_NODES: usize = 28;

/// `τ ↦ E_{α,β}(−λτ)` on `[0, τ_max]` as a piecewise Chebyshev interpolant,
/// for repeated evaluation with fixed parameters. Panels have width `1/(2λ)`.
#[derive(Debug, Clone)]
pub struct MlTable {
    params: MlParams,
    lambda: f64,
    tau_max: f64,
    width: f64,
    coeffs: Vec<[f64; TABLE_NODES]>,
}

impl MlTable {
    pub fn new(params: MlParams, lambda: f64, tau_max: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("{lambda} must be positive")));
        }
        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(Error::invalid("tau_max", format!("{tau_max} must be positive")));
        }
        let width = 0.5 / lambda;
        let n_panels = (tau_max / width).ceil().max(1.0) as usize;
        let n = TABLE_NODES;
        let nodes: Vec<f64> = (0..n).map(|k| (PI * (k as f64 + 0.5) / n as f64).cos()).collect();
        let mut coeffs = Vec::with_capacity(n_panels);
        for p in 0..n_panels {
            let a = p as f64 * width;
            let vals = nodes
                .iter()
                .map(|x| mittag_leffler(params, -lambda * (a + 0.5 * width * (x + 1.0))))
                .collect::<Result<Vec<_>>>()?;
            let mut c = [0.0; TABLE_NODES];
            for (j, cj) in c.iter_mut().enumerate() {
                let s: f64 = (0..n)
                    .map(|k| vals[k] * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                *cj = 2.0 * s / n as f64;
            }
            c[0] *= 0.5;
            coeffs.push(c);
        }
        Ok(Self {
            params,
            lambda,
            tau_max: n_panels as f64 * width,
            width,
            coeffs,
        })
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// `E_{α,β}(−λτ)`; falls back to direct evaluation beyond the table.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::Domain(format!("table argument must be >= 0, got {tau}")));
        }
        if tau >= self.tau_max {
            return mittag_leffler(self.params, -self.lambda * tau);
        }
        let p = ((tau / self.width) as usize).min(self.coeffs.len() - 1);
        let x = 2.0 * (tau - p as f64 * self.width) / self.width - 1.0;
        let c = &self.coeffs[p];
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c[1..].iter().rev() {
            let b0 = 2.0 * x * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        Ok(x * b1 - b2 + c[0])
    }
}
