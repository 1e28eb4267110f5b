//! The standard bump mollifier and its ε-scaling rules.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::quadrature::{gauss64, tanh_sinh};
use crate::{Error, Result};

/// Rule mapping ε to the mollifier scale `γ_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GammaRule {
    /// `γ_ε = scale · log(1/ε)`.
    Log {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `γ_ε = scale · ε^{−exponent}`.
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for GammaRule {
    fn default() -> Self {
        GammaRule::Log { scale: 1.0 }
    }
}

impl GammaRule {
    pub fn log() -> Self {
        GammaRule::Log { scale: 1.0 }
    }

    pub fn power(exponent: f64) -> Self {
        GammaRule::Power { exponent, scale: 1.0 }
    }

    pub fn gamma(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid("eps", format!("{eps} not in (0, 1]")));
        }
        let g = match *self {
            GammaRule::Log { scale } => scale * (1.0 / eps).ln(),
            GammaRule::Power { exponent, scale } => scale * eps.powf(-exponent),
        };
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::invalid(
                "eps",
                format!("gamma_eps = {g} for eps = {eps}; the rule needs a positive scale"),
            ));
        }
        Ok(g)
    }
}

/// Where the scaled bump sits relative to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// `ρ_ε(t) = γ ρ(γ t)`, supported in `(−1/γ, 1/γ)`.
    #[default]
    Centered,
    /// `ρ⁺_ε(t) = 2γ ρ(2γ t − 1)`, supported in `(0, 1/γ)`; keeps kernel
    /// mollification causal.
    Causal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MollifierSpec {
    pub rule: GammaRule,
    pub placement: Placement,
}

impl MollifierSpec {
    pub fn new(rule: GammaRule) -> Self {
        Self {
            rule,
            placement: Placement::Centered,
        }
    }

    pub fn causal(rule: GammaRule) -> Self {
        Self {
            rule,
            placement: Placement::Causal,
        }
    }

    pub fn gamma(&self, eps: f64) -> Result<f64> {
        self.rule.gamma(eps)
    }

    pub fn scaled(&self, eps: f64) -> Result<ScaledMollifier> {
        Ok(ScaledMollifier {
            gamma: self.gamma(eps)?,
            placement: self.placement,
        })
    }
}

/// `ρ_ε` for a fixed ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMollifier {
    pub gamma: f64,
    pub placement: Placement,
}

impl ScaledMollifier {
    pub fn eval(&self, t: f64) -> f64 {
        match self.placement {
            Placement::Centered => self.gamma * bump(self.gamma * t),
            Placement::Causal => 2.0 * self.gamma * bump(2.0 * self.gamma * t - 1.0),
        }
    }

    /// Open support interval.
    pub fn support(&self) -> (f64, f64) {
        match self.placement {
            Placement::Centered => (-1.0 / self.gamma, 1.0 / self.gamma),
            Placement::Causal => (0.0, 1.0 / self.gamma),
        }
    }

    pub fn max_value(&self) -> f64 {
        match self.placement {
            Placement::Centered => self.gamma * bump_max(),
            Placement::Causal => 2.0 * self.gamma * bump_max(),
        }
    }

    /// `∫_{−∞}^{t} ρ_ε`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self.placement {
            Placement::Centered => bump_cdf(self.gamma * t),
            Placement::Causal => bump_cdf(2.0 * self.gamma * t - 1.0),
        }
    }
}

fn unnormalized(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Normalization `∫_{−1}^{1} exp(−1/(1−t²)) dt`, by 64-point Gauss–Legendre.
pub fn bump_normalization() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| gauss64().integrate(-1.0, 1.0, unnormalized))
}

/// Normalized bump `ρ(t) = exp(−1/(1−t²)) / Z` on `(−1, 1)`.
pub fn bump(t: f64) -> f64 {
    unnormalized(t) / bump_normalization()
}

/// `ρ'(t)`.
pub fn bump_d1(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - t * t;
    bump(t) * (-2.0 * t / (s * s))
}

/// `ρ''(t)`.
pub fn bump_d2(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - t * t;
    let g = -2.0 * t / (s * s);
    // g' = d/dt(−2t/s²) = (−2s² − 8t² s)/s⁴ = −2/s² − 8t²/s³
    let dg = -2.0 / (s * s) - 8.0 * t * t / (s * s * s);
    bump(t) * (g * g + dg)
}

/// `max ρ = ρ(0) = e^{−1}/Z`.
pub fn bump_max() -> f64 {
    (-1.0f64).exp() / bump_normalization()
}

/// `∫_{−1}^{1} ρ²`.
pub fn bump_l2_norm_sq() -> f64 {
    static N: OnceLock<f64> = OnceLock::new();
    *N.get_or_init(|| tanh_sinh(|t| bump(t).powi(2), -1.0, 1.0, 1e-15))
}

/// Cumulative distribution `Φ(s) = ∫_{−1}^{s} ρ`; `Φ(0) = 1/2` exactly.
pub fn bump_cdf(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else if s == 0.0 {
        0.5
    } else if s > 0.0 {
        1.0 - bump_cdf(-s)
    } else {
        gauss64().integrate(-1.0, s, unnormalized) / bump_normalization()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::tanh_sinh;

    #[test]
    fn normalization_constant() {
        // 0.44399381616807943782... (60-digit mpmath quadrature)
        assert!((bump_normalization() - 0.443_993_816_168_079_4).abs() < 1e-11);
        let total = tanh_sinh(bump, -1.0, 1.0, 1e-15);
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for t in [-0.8, -0.3, 0.0, 0.25, 0.7] {
            let h = 1e-5;
            let fd1 = (bump(t + h) - bump(t - h)) / (2.0 * h);
            let fd2 = (bump_d1(t + h) - bump_d1(t - h)) / (2.0 * h);
            assert!((fd1 - bump_d1(t)).abs() < 1e-7, "t={t}");
            assert!((fd2 - bump_d2(t)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn cdf_properties() {
        assert_eq!(bump_cdf(0.0), 0.5);
        assert_eq!(bump_cdf(-1.0), 0.0);
        assert_eq!(bump_cdf(1.5), 1.0);
        let mut prev = 0.0;
        for i in 1..200 {
            let s = -1.0 + i as f64 / 100.0;
            let c = bump_cdf(s);
            assert!(c >= prev);
            prev = c;
            let direct = tanh_sinh(bump, -1.0, s, 1e-14);
            assert!((c - direct).abs() < 1e-10, "s={s}");
        }
    }

    #[test]
    fn scaled_mollifier_support_and_mass() {
        for placement in [Placement::Centered, Placement::Causal] {
            let m = ScaledMollifier { gamma: 7.5, placement };
            let (lo, hi) = m.support();
            assert_eq!(m.eval(lo), 0.0);
            assert_eq!(m.eval(hi), 0.0);
            let mass = tanh_sinh(|t| m.eval(t), lo, hi, 1e-15);
            assert!((mass - 1.0).abs() < 1e-10);
            assert!((m.cdf(hi) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_rules() {
        let eps = 2f64.powi(-10);
        assert!((GammaRule::log().gamma(eps).unwrap() - 10.0 * 2f64.ln()).abs() < 1e-12);
        assert!((GammaRule::power(0.5).gamma(eps).unwrap() - 32.0).abs() < 1e-12);
        assert!(GammaRule::log().gamma(1.0).is_err());
        assert!(GammaRule::log().gamma(0.0).is_err());
        assert!(GammaRule::power(1.0).gamma(1.5).is_err());
    }
}
