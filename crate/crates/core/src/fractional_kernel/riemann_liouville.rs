use libm::tgamma as gamma;

use super::kernel::FractionalKernel;
use crate::{Error, Result};

/// L1-scheme approximation of the left Riemann–Liouville derivative
///
/// ```text
/// D^α u(t) = 1/Γ(1−α) d/dt ∫₀ᵗ u(τ) (t−τ)^{−α} dτ
///          = u(0) t^{−α}/Γ(1−α) + (Caputo part)
/// ```
///
/// on the grid `t_n = n·dt`. The Caputo part uses piecewise-linear `u`, so
/// constants and linear functions are differentiated exactly. At `t = 0` the
/// result is `0` when `u(0) = 0` and `±∞` otherwise.
pub fn riemann_liouville(alpha: f64, u: &[f64], dt: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "Riemann-Liouville order must lie in (0,1), got {alpha}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("{dt} must be positive")));
    }
    let Some(&u0) = u.first() else {
        return Ok(Vec::new());
    };
    let b: Vec<f64> = (0..u.len())
        .map(|k| ((k + 1) as f64).powf(1.0 - alpha) - (k as f64).powf(1.0 - alpha))
        .collect();
    let scale = dt.powf(-alpha) / gamma(2.0 - alpha);
    let g1 = gamma(1.0 - alpha);
    let mut out = Vec::with_capacity(u.len());
    out.push(if u0 == 0.0 { 0.0 } else { u0.signum() * f64::INFINITY });
    for n in 1..u.len() {
        let caputo: f64 = (0..n).map(|k| b[k] * (u[n - k] - u[n - k - 1])).sum();
        let t = n as f64 * dt;
        out.push(scale * caputo + u0 * t.powf(-alpha) / g1);
    }
    Ok(out)
}

/// `max_n |D^α u + u − θ D^α g − g|` over the grid points `n ≥ 1`.
///
/// For `g = L u` this residual vanishes as the grid is refined, which is the
/// equivalence between the fractional Zener law and the convolution form.
pub fn verify_zener(u: &[f64], g: &[f64], alpha: f64, theta: f64, dt: f64) -> Result<f64> {
    if u.len() != g.len() {
        return Err(Error::Shape {
            expected: u.len(),
            got: g.len(),
        });
    }
    let du = riemann_liouville(alpha, u, dt)?;
    let dg = riemann_liouville(alpha, g, dt)?;
    Ok((1..u.len())
        .map(|n| (du[n] + u[n] - theta * dg[n] - g[n]).abs())
        .fold(0.0, f64::max))
}

/// `L u` for a scalar series on the kernel grid.
pub fn convolve_l(u: &[f64], kernel: &FractionalKernel) -> Result<Vec<f64>> {
    kernel.convolve_scalar(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear_are_exact() {
        let alpha = 0.4;
        let dt = 0.01;
        let n = 101;
        let ones = vec![1.0; n];
        let lin: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let d1 = riemann_liouville(alpha, &ones, dt).unwrap();
        let dl = riemann_liouville(alpha, &lin, dt).unwrap();
        for k in 1..n {
            let t = k as f64 * dt;
            let e1 = t.powf(-alpha) / gamma(1.0 - alpha);
            let el = t.powf(1.0 - alpha) / gamma(2.0 - alpha);
            assert!(((d1[k] - e1) / e1).abs() < 1e-12, "k={k}");
            assert!(((dl[k] - el) / el).abs() < 1e-12, "k={k}");
        }
        assert!(d1[0].is_infinite());
        assert_eq!(dl[0], 0.0);
    }

    #[test]
    fn near_one_recovers_first_derivative() {
        let dt = 1e-3;
        let u: Vec<f64> = (0..=1000).map(|k| (k as f64 * dt).sin()).collect();
        let d = riemann_liouville(0.999, &u, dt).unwrap();
        for k in [200, 500, 1000] {
            let t = k as f64 * dt;
            assert!((d[k] - t.cos()).abs() < 2e-2, "t={t}: {} vs {}", d[k], t.cos());
        }
    }

    #[test]
    fn domain_checks() {
        assert!(riemann_liouville(1.0, &[0.0, 1.0], 0.1).is_err());
        assert!(riemann_liouville(0.0, &[0.0, 1.0], 0.1).is_err());
        assert!(verify_zener(&[0.0; 3], &[0.0; 4], 0.5, 0.5, 0.1).is_err());
    }

    #[test]
    fn zero_and_identity_residuals() {
        let z = vec![0.0; 50];
        assert_eq!(verify_zener(&z, &z, 0.5, 0.5, 0.02).unwrap(), 0.0);
        let u: Vec<f64> = (0..50).map(|k| (k as f64 * 0.1).sin()).collect();
        assert!(verify_zener(&u, &u, 0.5, 1.0, 0.02).unwrap() < 1e-12);
    }

    #[test]
    fn linearity_is_exact_on_samples() {
        let dt = 0.05;
        let a: Vec<f64> = (0..40).map(|k| (k as f64 * dt).powi(2)).collect();
        let b: Vec<f64> = (0..40).map(|k| (3.0 * k as f64 * dt).cos() - 1.0).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 0.5 * y).collect();
        let da = riemann_liouville(0.3, &a, dt).unwrap();
        let db = riemann_liouville(0.3, &b, dt).unwrap();
        let ds = riemann_liouville(0.3, &sum, dt).unwrap();
        for k in 1..40 {
            assert!((ds[k] - (2.0 * da[k] - 0.5 * db[k])).abs() < 1e-12 * (1.0 + ds[k].abs()));
        }
    }
}
