//! Physical coefficient fields and their ε-regularized families.
//!
//! * bending stiffness `A(x) = EI₁ + H(x − x₀) EI₂`, mollified to `c_ε`;
//! * axial force `P(t) = P₀ + P₁ δ(t − t₁)`, mollified to `b_ε`;
//! * moving load `h(x, t) = H₀ δ(x − c t)`, mollified in `x` to `h_ε`.
//!
//! [`probe_asymptotics`] measures how norms of a family scale with `1/ε`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fit::{log_log_rate, LinearFit};
use crate::fractional_kernel::{bump_d1, bump_d2, GammaRule, MollifierSpec, ScaledMollifier};
use crate::quadrature::tanh_sinh;
use crate::{Error, Result};

/// A coefficient depending on `x ∈ (0, 1)` only.
pub trait SpaceField: Send + Sync {
    fn value(&self, x: f64) -> f64;

    /// Points where the field changes character (edges of a mollified
    /// transition); quadrature splits elements there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Smallest length scale of the field, if it has one.
    fn feature_width(&self) -> Option<f64> {
        None
    }
}

/// A coefficient depending on `(x, t)`.
pub trait SpaceTimeField: Send + Sync {
    fn value(&self, x: f64, t: f64) -> f64;

    /// Interval of `x` outside of which the field vanishes at time `t`.
    fn support_x(&self, _t: f64) -> Option<(f64, f64)> {
        None
    }

    fn breakpoints_x(&self, _t: f64) -> Vec<f64> {
        Vec::new()
    }

    /// `true` if the field does not depend on `x`.
    fn is_uniform_in_x(&self) -> bool {
        false
    }

    /// `sup |field|` over `(0, 1) × (0, T)`.
    fn sup_norm(&self) -> f64;

    /// `∫₀¹ field(x, t)² dx`.
    fn l2_norm_sq_at(&self, t: f64) -> f64 {
        let mut pts = vec![0.0];
        if let Some((a, b)) = self.support_x(t) {
            pts.extend([a, b].into_iter().filter(|p| *p > 0.0 && *p < 1.0));
        }
        pts.extend(self.breakpoints_x(t).into_iter().filter(|p| *p > 0.0 && *p < 1.0));
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| tanh_sinh(|x| self.value(x, t).powi(2), w[0], w[1], 1e-12))
            .sum()
    }
}

/// A field constant in space and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl SpaceField for Constant {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }
}

impl SpaceTimeField for Constant {
    fn value(&self, _x: f64, _t: f64) -> f64 {
        self.0
    }

    fn is_uniform_in_x(&self) -> bool {
        true
    }

    fn sup_norm(&self) -> f64 {
        self.0.abs()
    }

    fn l2_norm_sq_at(&self, _t: f64) -> f64 {
        self.0 * self.0
    }
}

/// A space-time field given by a closure, with a caller-supplied sup norm.
#[derive(Clone)]
pub struct FnField<F> {
    f: F,
    sup_norm: f64,
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> FnField<F> {
    pub fn new(f: F, sup_norm: f64) -> Self {
        Self { f, sup_norm }
    }
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> SpaceTimeField for FnField<F> {
    fn value(&self, x: f64, t: f64) -> f64 {
        (self.f)(x, t)
    }

    fn sup_norm(&self) -> f64 {
        self.sup_norm
    }
}

/// Optional line density `R(x) = R₀ + H(x − x₀)(R₁ − R₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Density {
    pub r0: f64,
    pub r1_minus_r2: f64,
}

/// Physical parameters of the beam model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamMaterial {
    pub ei1: f64,
    pub ei2: f64,
    /// Location of the stiffness jump.
    pub x0: f64,
    pub p0: f64,
    pub p1: f64,
    /// Time of the axial impulse.
    pub t1: f64,
    pub h0: f64,
    pub speed: f64,
    pub density: Option<Density>,
}

impl Default for BeamMaterial {
    fn default() -> Self {
        Self {
            ei1: 1.0,
            ei2: 0.0,
            x0: 0.5,
            p0: 0.0,
            p1: 0.0,
            t1: 0.5,
            h0: 0.0,
            speed: 1.0,
            density: None,
        }
    }
}

impl BeamMaterial {
    pub fn validate(&self, horizon: f64) -> Result<()> {
        if !(self.ei1 > 0.0) {
            return Err(Error::invalid("ei1", "EI1 must be positive"));
        }
        if !(self.ei1 + self.ei2 > 0.0) {
            return Err(Error::invalid("ei2", "EI1 + EI2 must be positive"));
        }
        if !(self.x0 > 0.0 && self.x0 < 1.0) {
            return Err(Error::invalid("x0", "x0 must lie in (0,1)"));
        }
        if self.p1 != 0.0 && !(self.t1 > 0.0 && self.t1 < horizon) {
            return Err(Error::invalid("t1", format!("t1 must lie in (0,{horizon})")));
        }
        if self.h0 != 0.0 && !(self.speed > 0.0) {
            return Err(Error::invalid("speed", "load speed must be positive"));
        }
        if let Some(d) = self.density {
            if !(d.r0 > 0.0 && d.r0 + d.r1_minus_r2 > 0.0) {
                return Err(Error::invalid("density", "line density must stay positive"));
            }
        }
        Ok(())
    }
}

/// Mollified step `left + jump · H_ε(x − x0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifiedStep {
    pub left: f64,
    pub jump: f64,
    pub x0: f64,
    pub rho: ScaledMollifier,
}

impl MollifiedStep {
    /// `d^order/dx^order`, `order ≤ 2`.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        let g = self.rho.gamma;
        let s = g * (x - self.x0);
        match order {
            0 => self.value(x),
            1 => self.jump * self.rho.eval(x - self.x0),
            2 => self.jump * g * g * bump_d1(s),
            _ => panic!("derivative order {order} not supported"),
        }
    }

    pub fn lower_bound(&self) -> f64 {
        self.left.min(self.left + self.jump)
    }

    pub fn upper_bound(&self) -> f64 {
        self.left.max(self.left + self.jump)
    }
}

impl SpaceField for MollifiedStep {
    fn value(&self, x: f64) -> f64 {
        if self.jump == 0.0 {
            return self.left;
        }
        self.left + self.jump * self.rho.cdf(x - self.x0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.jump == 0.0 {
            return Vec::new();
        }
        let (a, b) = self.rho.support();
        vec![self.x0 + a, self.x0 + b]
    }

    fn feature_width(&self) -> Option<f64> {
        (self.jump != 0.0).then(|| 1.0 / self.rho.gamma)
    }
}

/// `c_ε` together with its uniform bounds `0 < c₀ ≤ c_ε ≤ c₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stiffness {
    pub step: MollifiedStep,
    pub c0: f64,
    pub c1: f64,
    /// The mollified transition reaches past an end of `(0, 1)`.
    pub boundary_smearing: bool,
}

impl SpaceField for Stiffness {
    fn value(&self, x: f64) -> f64 {
        self.step.value(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.step.breakpoints()
    }

    fn feature_width(&self) -> Option<f64> {
        self.step.feature_width()
    }
}

pub fn make_stiffness(material: &BeamMaterial, spec: &MollifierSpec, eps: f64) -> Result<Stiffness> {
    if !(material.ei1 > 0.0 && material.ei1 + material.ei2 > 0.0) {
        return Err(Error::invalid("ei1", "EI1 and EI1 + EI2 must be positive"));
    }
    let rho = MollifierSpec::new(spec.rule).scaled(eps)?;
    let step = MollifiedStep {
        left: material.ei1,
        jump: material.ei2,
        x0: material.x0,
        rho,
    };
    let w = 1.0 / rho.gamma;
    let boundary_smearing = material.ei2 != 0.0 && (material.x0 - w < 0.0 || material.x0 + w > 1.0);
    if boundary_smearing {
        log::warn!(
            "stiffness jump at x0={} lies within 1/gamma={w:.3e} of the boundary (eps={eps})",
            material.x0
        );
    }
    Ok(Stiffness {
        c0: step.lower_bound(),
        c1: step.upper_bound(),
        step,
        boundary_smearing,
    })
}

/// `b_ε(x, t) = P₀ + P₁ ρ_ε(t − t₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialForce {
    pub p0: f64,
    pub p1: f64,
    pub t1: f64,
    pub rho: ScaledMollifier,
}

impl AxialForce {
    pub fn at_time(&self, t: f64) -> f64 {
        if self.p1 == 0.0 {
            return self.p0;
        }
        self.p0 + self.p1 * self.rho.eval(t - self.t1)
    }

    /// `∫₀ᵀ (b_ε − P₀) dt / P₁`, the mass of the mollified impulse.
    pub fn impulse_mass(&self, horizon: f64) -> f64 {
        self.rho.cdf(horizon - self.t1) - self.rho.cdf(-self.t1)
    }
}

impl SpaceTimeField for AxialForce {
    fn value(&self, _x: f64, t: f64) -> f64 {
        self.at_time(t)
    }

    fn is_uniform_in_x(&self) -> bool {
        true
    }

    fn sup_norm(&self) -> f64 {
        let peak = self.p0 + self.p1 * self.rho.max_value();
        self.p0.abs().max(peak.abs())
    }

    fn l2_norm_sq_at(&self, t: f64) -> f64 {
        self.at_time(t).powi(2)
    }
}

pub fn make_axial(material: &BeamMaterial, spec: &MollifierSpec, eps: f64) -> Result<AxialForce> {
    Ok(AxialForce {
        p0: material.p0,
        p1: material.p1,
        t1: material.t1,
        rho: MollifierSpec::new(spec.rule).scaled(eps)?,
    })
}

/// `h_ε(x, t) = H₀ ρ_ε(x − c t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingLoad {
    pub h0: f64,
    pub speed: f64,
    pub rho: ScaledMollifier,
}

impl MovingLoad {
    /// `∂ₓ^order h_ε`, `order ≤ 2`.
    pub fn derivative_x(&self, x: f64, t: f64, order: usize) -> f64 {
        let g = self.rho.gamma;
        let s = g * (x - self.speed * t);
        match order {
            0 => self.value(x, t),
            1 => self.h0 * g * g * bump_d1(s),
            2 => self.h0 * g * g * g * bump_d2(s),
            _ => panic!("derivative order {order} not supported"),
        }
    }

    /// `∫₀¹ h_ε(x, t) dx`.
    pub fn mass_at(&self, t: f64) -> f64 {
        let c = self.speed * t;
        self.h0 * (self.rho.cdf(1.0 - c) - self.rho.cdf(-c))
    }
}

impl SpaceTimeField for MovingLoad {
    fn value(&self, x: f64, t: f64) -> f64 {
        if self.h0 == 0.0 {
            return 0.0;
        }
        self.h0 * self.rho.eval(x - self.speed * t)
    }

    fn support_x(&self, t: f64) -> Option<(f64, f64)> {
        let (a, b) = self.rho.support();
        let c = self.speed * t;
        Some((c + a, c + b))
    }

    fn sup_norm(&self) -> f64 {
        self.h0.abs() * self.rho.max_value()
    }
}

pub fn make_load(material: &BeamMaterial, spec: &MollifierSpec, eps: f64) -> Result<MovingLoad> {
    if material.h0 != 0.0 && !(material.speed > 0.0) {
        return Err(Error::invalid("speed", "load speed must be positive"));
    }
    Ok(MovingLoad {
        h0: material.h0,
        speed: material.speed,
        rho: MollifierSpec::new(spec.rule).scaled(eps)?,
    })
}

/// Scaling rule for each coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyRules {
    pub c: GammaRule,
    pub b: GammaRule,
    pub h: GammaRule,
}

impl Default for FamilyRules {
    fn default() -> Self {
        Self {
            c: GammaRule::power(0.5),
            b: GammaRule::log(),
            h: GammaRule::power(0.5),
        }
    }
}

/// All regularized coefficients for one ε.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFamily {
    pub eps: f64,
    pub stiffness: Stiffness,
    pub axial: AxialForce,
    pub load: MovingLoad,
    pub density: Option<MollifiedStep>,
}

impl CoefficientFamily {
    pub fn new(material: &BeamMaterial, rules: &FamilyRules, eps: f64) -> Result<Self> {
        let stiffness = make_stiffness(material, &MollifierSpec::new(rules.c), eps)?;
        let density = material.density.map(|d| MollifiedStep {
            left: d.r0,
            jump: d.r1_minus_r2,
            x0: material.x0,
            rho: stiffness.step.rho,
        });
        Ok(Self {
            eps,
            stiffness,
            axial: make_axial(material, &MollifierSpec::new(rules.b), eps)?,
            load: make_load(material, &MollifierSpec::new(rules.h), eps)?,
            density,
        })
    }

    pub fn c0(&self) -> f64 {
        self.stiffness.c0
    }

    pub fn c1(&self) -> f64 {
        self.stiffness.c1
    }
}

/// Measured ε-asymptotics of a family of norms.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticProbe {
    pub eps_grid: Vec<f64>,
    pub orders: Vec<usize>,
    /// `norms[i][k]`: order `orders[i]` at `eps_grid[k]`.
    pub norms: Vec<Vec<f64>>,
    /// Slope of `log‖·‖` against `log(1/ε)` per order; `−∞` for an
    /// identically zero family.
    pub fitted_rate: Vec<f64>,
    pub fits: Vec<Option<LinearFit>>,
}

impl AsymptoticProbe {
    /// Every requested derivative grows at most polynomially in `1/ε`.
    pub fn is_moderate(&self) -> bool {
        self.fitted_rate
            .iter()
            .all(|r| r.is_finite() || *r == f64::NEG_INFINITY)
    }

    /// Smallest power `p` with all norms `O(ε^{−p})`, clamped at zero.
    pub fn moderate_power(&self) -> f64 {
        self.fitted_rate
            .iter()
            .copied()
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max)
    }

    /// Largest `q` with all norms `O(ε^q)`, if every norm decays.
    pub fn negligible_order(&self) -> Option<f64> {
        let q = self.fitted_rate.iter().map(|r| -r).fold(f64::INFINITY, f64::min);
        (q > 0.0).then_some(q)
    }
}

/// Fits `log norm(ε, order)` against `log(1/ε)` for each order.
pub fn probe_asymptotics(
    eps_grid: &[f64],
    orders: &[usize],
    norm: impl Fn(f64, usize) -> f64,
) -> Result<AsymptoticProbe> {
    if eps_grid.len() < 4 {
        return Err(Error::invalid("eps_grid", "need at least 4 samples"));
    }
    if eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("eps_grid", "must be strictly decreasing"));
    }
    if eps_grid[0] / eps_grid[eps_grid.len() - 1] < 100.0 {
        return Err(Error::invalid("eps_grid", "must span at least two decades"));
    }
    let mut norms = Vec::with_capacity(orders.len());
    let mut fitted_rate = Vec::with_capacity(orders.len());
    let mut fits = Vec::with_capacity(orders.len());
    for &order in orders {
        let row: Vec<f64> = eps_grid.iter().map(|&e| norm(e, order)).collect();
        if let Some((k, _)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::Probe {
                eps: eps_grid[k],
                reason: format!("norm of derivative order {order} is {}", row[k]),
            });
        }
        if row.iter().all(|v| *v == 0.0) {
            fitted_rate.push(f64::NEG_INFINITY);
            fits.push(None);
        } else {
            if let Some(k) = row.iter().position(|v| *v == 0.0) {
                return Err(Error::Probe {
                    eps: eps_grid[k],
                    reason: "norm vanishes at some but not all eps".into(),
                });
            }
            let fit = log_log_rate(eps_grid, &row).ok_or(Error::Probe {
                eps: eps_grid[0],
                reason: "degenerate fit".into(),
            })?;
            fitted_rate.push(fit.slope);
            fits.push(Some(fit));
        }
        norms.push(row);
    }
    Ok(AsymptoticProbe {
        eps_grid: eps_grid.to_vec(),
        orders: orders.to_vec(),
        norms,
        fitted_rate,
        fits,
    })
}

/// `ε = 2^{−k}` for `k = 3..=12`.
pub fn default_eps_grid() -> Vec<f64> {
    (3..=12).map(|k| 2f64.powi(-k)).collect()
}

/// `‖f‖_{L²(a,b)}`, splitting the interval at `breakpoints`.
pub fn l2_norm(f: impl Fn(f64) -> f64, a: f64, b: f64, breakpoints: &[f64]) -> f64 {
    let mut pts = vec![a];
    pts.extend(breakpoints.iter().copied().filter(|p| *p > a && *p < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .map(|w| tanh_sinh(|x| f(x).powi(2), w[0], w[1], 1e-12))
        .sum::<f64>()
        .sqrt()
}

/// Writes `x,c_eps` at `n + 1` uniform points of `[0, 1]`.
pub fn write_stiffness_csv(path: &Path, field: &dyn SpaceField, n: usize) -> Result<()> {
    let rows = (0..=n).map(|i| {
        let x = i as f64 / n as f64;
        (x, field.value(x))
    });
    write_pairs(path, "x,c_eps", rows)
}

/// Writes `t,b_eps_at_x` at the given times.
pub fn write_axial_csv(path: &Path, field: &dyn SpaceTimeField, x: f64, times: &[f64]) -> Result<()> {
    write_pairs(path, "t,b_eps_at_x", times.iter().map(|&t| (t, field.value(x, t))))
}

fn write_pairs(path: &Path, header: &str, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let go = || -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for (a, b) in rows {
            writeln!(w, "{a:.16e},{b:.16e}")?;
        }
        w.flush()
    };
    go().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional_kernel::{bump_l2_norm_sq, bump_max};

    fn material() -> BeamMaterial {
        BeamMaterial {
            ei1: 1.0,
            ei2: 2.0,
            x0: 0.4,
            p0: 0.5,
            p1: 1.0,
            t1: 0.5,
            h0: 2.0,
            speed: 0.8,
            density: None,
        }
    }

    #[test]
    fn stiffness_without_jump_is_constant() {
        let m = BeamMaterial { ei2: 0.0, ..material() };
        for eps in default_eps_grid() {
            let c = make_stiffness(&m, &MollifierSpec::new(GammaRule::power(0.5)), eps).unwrap();
            for i in 0..=20 {
                assert_eq!(c.value(i as f64 / 20.0), 1.0);
            }
        }
    }

    #[test]
    fn stiffness_plateaus_and_midpoint() {
        let m = material();
        let spec = MollifierSpec::new(GammaRule::power(0.5));
        for eps in default_eps_grid() {
            let c = make_stiffness(&m, &spec, eps).unwrap();
            let w = 1.0 / c.step.rho.gamma;
            if m.x0 - 2.0 * w > 0.0 {
                assert_eq!(c.value(m.x0 - 2.0 * w), m.ei1);
            }
            if m.x0 + 2.0 * w < 1.0 {
                assert_eq!(c.value(m.x0 + 2.0 * w), m.ei1 + m.ei2);
            }
            assert_eq!(c.value(m.x0), m.ei1 + m.ei2 / 2.0);
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=400 {
                let v = c.value(i as f64 / 400.0);
                assert!(v >= prev && v >= c.c0 && v <= c.c1);
                prev = v;
            }
        }
    }

    #[test]
    fn stiffness_boundary_warning_flag() {
        let m = BeamMaterial { x0: 0.05, ..material() };
        let c = make_stiffness(&m, &MollifierSpec::new(GammaRule::log()), 0.125).unwrap();
        assert!(c.boundary_smearing);
        let c = make_stiffness(&material(), &MollifierSpec::new(GammaRule::power(1.0)), 0.01).unwrap();
        assert!(!c.boundary_smearing);
    }

    #[test]
    fn axial_impulse_normalized_and_log_type() {
        let m = material();
        let spec = MollifierSpec::new(GammaRule::log());
        let grid = default_eps_grid();
        let mut sups = Vec::new();
        for &eps in &grid {
            let b = make_axial(&m, &spec, eps).unwrap();
            let (lo, hi) = b.rho.support();
            let mass = tanh_sinh(|t| b.at_time(t) - m.p0, m.t1 + lo, m.t1 + hi, 1e-14) / m.p1;
            assert!((mass - 1.0).abs() < 1e-10, "eps={eps}: {mass}");
            assert!((b.impulse_mass(1.0) - 1.0).abs() < 1e-12);
            sups.push(b.sup_norm());
        }
        let xs: Vec<f64> = grid.iter().map(|e| (1.0 / e).ln()).collect();
        let fit = crate::fit::linear_fit(&xs, &sups).unwrap();
        assert!(fit.correlation > 0.999);
        assert!((fit.slope - m.p1 * bump_max()).abs() < 0.05 * m.p1 * bump_max());
    }

    #[test]
    fn axial_without_impulse_is_constant() {
        let m = BeamMaterial { p1: 0.0, ..material() };
        let b = make_axial(&m, &MollifierSpec::default(), 0.01).unwrap();
        assert_eq!(b.at_time(m.t1), m.p0);
        assert_eq!(b.sup_norm(), m.p0);
    }

    #[test]
    fn moving_load_mass_and_zero() {
        let m = material();
        let spec = MollifierSpec::new(GammaRule::power(0.5));
        let h = make_load(&m, &spec, 2f64.powi(-8)).unwrap();
        for t in [0.2, 0.5, 1.0] {
            let (a, b) = h.support_x(t).unwrap();
            let mass = tanh_sinh(|x| h.value(x, t), a.max(0.0), b.min(1.0), 1e-14);
            assert!((mass - m.h0).abs() < 1e-9, "t={t}: {mass}");
            assert!((h.mass_at(t) - m.h0).abs() < 1e-12);
        }
        let zero = make_load(&BeamMaterial { h0: 0.0, ..m }, &spec, 0.01).unwrap();
        assert_eq!(zero.value(0.3, 0.375), 0.0);
        assert!(make_load(
            &BeamMaterial {
                speed: 0.0,
                ..material()
            },
            &spec,
            0.1
        )
        .is_err());
    }

    #[test]
    fn moving_load_l2_matches_scaling() {
        let h = make_load(&material(), &MollifierSpec::new(GammaRule::power(0.5)), 2f64.powi(-10)).unwrap();
        let g = h.rho.gamma;
        let expected = material().h0.powi(2) * g * bump_l2_norm_sq();
        assert!((h.l2_norm_sq_at(0.5) - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn probes_classify_families() {
        let grid = default_eps_grid();
        let p = probe_asymptotics(&grid, &[0], |_, _| 1.0).unwrap();
        assert!(p.is_moderate());
        assert_eq!(p.fitted_rate[0], 0.0);
        assert!(p.negligible_order().is_none());

        let p = probe_asymptotics(&grid, &[0], |e, _| e * 3.0).unwrap();
        assert!((p.fitted_rate[0] + 1.0).abs() < 1e-12);
        assert!((p.negligible_order().unwrap() - 1.0).abs() < 1e-12);

        // mollified Dirac with γ = 1/ε: ‖δ_ε‖² = γ ‖ρ‖²
        let spec = MollifierSpec::new(GammaRule::power(1.0));
        let p = probe_asymptotics(&grid, &[0], |e, _| {
            let rho = spec.scaled(e).unwrap();
            let (a, b) = rho.support();
            l2_norm(|x| rho.eval(x), a, b, &[])
        })
        .unwrap();
        assert!((p.fitted_rate[0] - 0.5).abs() < 1e-6, "{}", p.fitted_rate[0]);
    }

    #[test]
    fn probe_input_validation() {
        assert!(probe_asymptotics(&[0.1, 0.01, 0.001], &[0], |_, _| 1.0).is_err());
        assert!(probe_asymptotics(&[0.1, 0.05, 0.02, 0.01], &[0], |_, _| 1.0).is_err());
        assert!(probe_asymptotics(&[0.1, 0.01, 0.02, 0.001], &[0], |_, _| 1.0).is_err());
        let err = probe_asymptotics(&default_eps_grid(), &[0], |e, _| if e < 0.01 { f64::NAN } else { 1.0 });
        assert!(matches!(err, Err(Error::Probe { .. })));
    }

    #[test]
    fn weak_association_of_stiffness() {
        // ∫ c_ε φ → ∫ A φ for a fixed smooth φ
        let m = material();
        let spec = MollifierSpec::new(GammaRule::power(0.5));
        let phi = |x: f64| (std::f64::consts::PI * x).sin() * (1.0 + x);
        let exact = tanh_sinh(|x| m.ei1 * phi(x), 0.0, 1.0, 1e-14) + tanh_sinh(|x| m.ei2 * phi(x), m.x0, 1.0, 1e-14);
        let mut prev = f64::INFINITY;
        for eps in default_eps_grid() {
            let c = make_stiffness(&m, &spec, eps).unwrap();
            let approx = l2_pieces(|x| c.value(x) * phi(x), &c.breakpoints());
            let err = (approx - exact).abs();
            assert!(err <= prev + 1e-13, "eps={eps}");
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    fn l2_pieces(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
        let mut pts = vec![0.0];
        pts.extend(breaks.iter().copied().filter(|p| *p > 0.0 && *p < 1.0));
        pts.push(1.0);
        pts.windows(2).map(|w| tanh_sinh(&f, w[0], w[1], 1e-14)).sum()
    }
}
