//! Numerical integration rules: Gauss–Legendre for smooth integrands and
//! double-exponential rules (tanh-sinh, exp-sinh) for integrands with
//! algebraic endpoint singularities.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes mapped to `[a, b]` with matching weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

pub fn gauss4() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(4))
}

pub fn gauss8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

pub fn gauss64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

const TANH_SINH_TMAX: f64 = 5.0;
const MAX_LEVEL: u32 = 9;

/// Tanh-sinh quadrature of `f` over `[a, b]`.
///
/// `f` is never evaluated at the endpoints, so integrable singularities there
/// are fine. Abscissae near `a` are formed as `a + small` (and near `b` as
/// `b - small`), so a singularity at `a = 0` is resolved without cancellation.
pub fn tanh_sinh(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let width = b - a;
    let mut eval = |t: f64| -> f64 {
        let q = FRAC_PI_2 * t.sinh();
        let cq = q.cosh();
        let w = 0.5 * width * FRAC_PI_2 * t.cosh() / (cq * cq);
        if w == 0.0 || !w.is_finite() {
            return 0.0;
        }
        let x = if t <= 0.0 {
            a + width / (1.0 + (-2.0 * q).exp())
        } else {
            b - width / (1.0 + (2.0 * q).exp())
        };
        if x <= a.min(b) || x >= a.max(b) {
            return 0.0;
        }
        let v = f(x);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let mut sum = eval(0.0);
    let n0 = (TANH_SINH_TMAX / h) as i64;
    for k in 1..=n0 {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
    }
    let mut estimate = h * sum;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let n = (TANH_SINH_TMAX / h) as i64;
        let mut k = 1;
        while k <= n {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = h * sum;
        let converged = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

const EXP_SINH_TMIN: f64 = -6.5;
const EXP_SINH_TMAX: f64 = 4.0;

/// Exp-sinh quadrature of `f` over `[0, ∞)`.
///
/// Intended for integrands with at most an algebraic singularity at the
/// origin and exponential decay at infinity.
pub fn exp_sinh(mut f: impl FnMut(f64) -> f64, rel_tol: f64) -> f64 {
    let mut eval = |t: f64| -> f64 {
        let x = (FRAC_PI_2 * t.sinh()).exp();
        if x == 0.0 || !x.is_finite() {
            return 0.0;
        }
        let v = f(x);
        let w = x * FRAC_PI_2 * t.cosh();
        let r = w * v;
        if r.is_finite() {
            r
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let mut sum = 0.0;
    let mut k = (EXP_SINH_TMIN / h).ceil() as i64;
    while (k as f64) * h <= EXP_SINH_TMAX {
        sum += eval(k as f64 * h);
        k += 1;
    }
    let mut estimate = h * sum;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = (EXP_SINH_TMIN / h).ceil() as i64;
        if k % 2 == 0 {
            k += 1;
        }
        while (k as f64) * h <= EXP_SINH_TMAX {
            sum += eval(k as f64 * h);
            k += 2;
        }
        let next = h * sum;
        let converged = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in [1usize, 2, 4, 7, 8, 64] {
            let rule = GaussLegendre::new(n);
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - exact).abs() < 1e-13, "n={n}");
            let even = if n > 1 { deg - 1 } else { 0 };
            let got = rule.integrate(0.0, 2.0, |x| x.powi(even as i32));
            let exact = 2f64.powi(even as i32 + 1) / (even as f64 + 1.0);
            assert!((got - exact).abs() < 1e-11 * exact, "n={n}");
        }
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 t^{-0.7} dt = 1/0.3
        let got = tanh_sinh(|t| t.powf(-0.7), 0.0, 1.0, 1e-13);
        assert!((got - 1.0 / 0.3).abs() < 1e-9 * (1.0 / 0.3), "{got}");
        // both endpoints: ∫_0^1 1/sqrt(t(1-t)) = π
        let got = tanh_sinh(|t| 1.0 / (t * (1.0 - t)).sqrt(), 0.0, 1.0, 1e-13);
        // 1 − t loses the last ~1e-16 of the interval near t = 1
        assert!((got - PI).abs() < 1e-7, "{got}");
    }

    #[test]
    fn exp_sinh_gamma_function() {
        // ∫_0^∞ t^{-0.5} e^{-t} dt = Γ(1/2) = √π
        let got = exp_sinh(|t| t.powf(-0.5) * (-t).exp(), 1e-14);
        assert!((got - PI.sqrt()).abs() < 1e-12, "{got}");
        let got = exp_sinh(|t| t.powf(2.3) * (-t).exp(), 1e-14);
        let exact = libm::tgamma(3.3);
        assert!((got - exact).abs() < 1e-12 * exact, "{got}");
    }
}
