//! A-priori energy bound along computed trajectories.
//!
//! ```text
//! ‖u(t)‖²_V + ‖u'(t)‖²_H ≤ (D_T ‖f₁‖²_V + (‖f₂‖²_H + ∫₀ᵗ ‖h‖²_H) / ν) · e^{t F_T}
//! ν   = min{1, μ}
//! D_T = (C₀ + λ(1 + T)) / ν
//! F_T = max{(C₀' + C₁ + C_L) / ν, (C₁ + 2 + λ(1 + T)) / ν}
//! γ_T = C_L √T e^{T F_T / 2}
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beam_fem::{BeamSystem, CoercivityConstants};
use crate::coefficients::SpaceTimeField;
use crate::fit::{linear_fit, log_log_rate};
use crate::fractional_kernel::{FractionalKernel, KernelSource};
use crate::time_integration::Trajectory;
use crate::{Error, Result};

/// Relative slack of the inequality check.
pub const INEQUALITY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstants {
    pub horizon: f64,
    pub mu: f64,
    pub lambda: f64,
    pub c0_cap: f64,
    pub c0_prime: f64,
    pub c1_cap: f64,
    pub c_l: f64,
    pub nu: f64,
    pub d_t: f64,
    pub f_t: f64,
    pub gamma_t: f64,
}

/// Bound constants from the coercivity data, `C_L` and the horizon `T`.
pub fn constants(coercivity: &CoercivityConstants, c_l: f64, horizon: f64) -> EnergyConstants {
    let CoercivityConstants {
        mu,
        lambda,
        c0_cap,
        c0_prime,
        c1_cap,
        ..
    } = *coercivity;
    let nu = mu.min(1.0);
    let lt = lambda * (1.0 + horizon);
    let f_t = ((c0_prime + c1_cap + c_l) / nu).max((c1_cap + 2.0 + lt) / nu);
    EnergyConstants {
        horizon,
        mu,
        lambda,
        c0_cap,
        c0_prime,
        c1_cap,
        c_l,
        nu,
        d_t: (c0_cap + lt) / nu,
        f_t,
        gamma_t: c_l * horizon.sqrt() * (horizon * f_t / 2.0).exp(),
    }
}

impl EnergyConstants {
    /// `C_L √T₁ e^{T₁ F_T / 2}`.
    pub fn gamma_at(&self, t1: f64) -> f64 {
        self.c_l * t1.sqrt() * (t1 * self.f_t / 2.0).exp()
    }

    /// Right-hand side of the estimate at time `t`.
    pub fn bound(&self, f1_v_sq: f64, f2_h_sq: f64, h_integral: f64, t: f64) -> f64 {
        let data = self.d_t * f1_v_sq + (f2_h_sq + h_integral) / self.nu;
        if data == 0.0 {
            return 0.0;
        }
        (data.ln() + t * self.f_t).exp()
    }
}

/// `C_L` for the foundation: zero without one, the L¹ form for the raw
/// kernel and the L² form for a mollified one.
pub fn c_l_for(kernel: Option<&FractionalKernel>) -> Result<f64> {
    let Some(k) = kernel else {
        return Ok(0.0);
    };
    let c = k.c_l()?;
    Ok(match k.source() {
        KernelSource::Raw => c.young,
        KernelSource::Mollified { .. } => c.l2_form,
    })
}

/// `½ (vᵀ M v + uᵀ K0 u)`.
pub fn mechanical_energy(system: &BeamSystem, u: &nalgebra::DVector<f64>, v: &nalgebra::DVector<f64>) -> f64 {
    0.5 * (system.mass.bilinear(v, v) + system.k0.bilinear(u, u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub norm_v_u: f64,
    pub norm_h_v: f64,
    /// `∫₀ᵗ ‖h‖²_H`.
    pub h_integral: f64,
    pub bound: f64,
    /// `bound − (‖u‖²_V + ‖u'‖²_H)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub constants: EnergyConstants,
    pub f1_norm_v: f64,
    pub f2_norm_h: f64,
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    /// Ledger from per-step norms and `‖h(t_n)‖²_H` samples.
    pub fn from_norms(constants: EnergyConstants, dt: f64, norms: &[(f64, f64)], h_sq: &[f64]) -> Result<Self> {
        if norms.len() != h_sq.len() || norms.is_empty() {
            return Err(Error::Shape {
                expected: norms.len(),
                got: h_sq.len(),
            });
        }
        let (f1, f2) = norms[0];
        let mut integral = 0.0;
        let rows = norms
            .iter()
            .enumerate()
            .map(|(n, &(nv, nh))| {
                if n > 0 {
                    integral += 0.5 * dt * (h_sq[n - 1] + h_sq[n]);
                }
                let t = n as f64 * dt;
                let bound = constants.bound(f1 * f1, f2 * f2, integral, t);
                LedgerRow {
                    t,
                    norm_v_u: nv,
                    norm_h_v: nh,
                    h_integral: integral,
                    bound,
                    margin: bound - (nv * nv + nh * nh),
                }
            })
            .collect();
        Ok(Self {
            constants,
            f1_norm_v: f1,
            f2_norm_h: f2,
            rows,
        })
    }

    pub fn from_trajectory(
        system: &BeamSystem,
        trajectory: &Trajectory,
        load: &dyn SpaceTimeField,
        constants: EnergyConstants,
    ) -> Result<Self> {
        let norms = trajectory.norms(system)?;
        let h_sq: Vec<f64> = trajectory.times().into_iter().map(|t| load.l2_norm_sq_at(t)).collect();
        Self::from_norms(constants, trajectory.dt, &norms, &h_sq)
    }

    /// Copy with the measured norms scaled by `factor` (the bound is kept).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.norm_v_u *= factor;
            r.norm_h_v *= factor;
            r.margin = r.bound - (r.norm_v_u.powi(2) + r.norm_h_v.powi(2));
        }
        out
    }

    /// Largest `(‖u‖²_V + ‖u'‖²_H)^{1/2}` over the run.
    pub fn max_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.norm_v_u.powi(2) + r.norm_h_v.powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn final_bound(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.bound)
    }

    /// `ln` of the bound at the last step, finite even where the bound
    /// overflows.
    pub fn final_log_bound(&self) -> f64 {
        let Some(r) = self.rows.last() else {
            return f64::NEG_INFINITY;
        };
        let k = &self.constants;
        let data = k.d_t * self.f1_norm_v.powi(2) + (self.f2_norm_h.powi(2) + r.h_integral) / k.nu;
        data.ln() + r.t * k.f_t
    }

    /// Writes `t,normV_u,normH_v,bound,margin`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let go = |w: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
            writeln!(w, "t,normV_u,normH_v,bound,margin")?;
            for r in &self.rows {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    r.t, r.norm_v_u, r.norm_h_v, r.bound, r.margin
                )?;
            }
            w.flush()
        };
        go(&mut w).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub holds: bool,
    /// Smallest `margin`, over the run.
    pub worst_margin: f64,
    /// Smallest `margin / bound` (zero for a vanishing bound).
    pub worst_relative_margin: f64,
    pub worst_step: usize,
}

/// Checks `‖u‖²_V + ‖u'‖²_H ≤ bound · (1 + slack)` at every step.
pub fn check_inequality(ledger: &EnergyLedger) -> InequalityVerdict {
    let mut verdict = InequalityVerdict {
        holds: true,
        worst_margin: f64::INFINITY,
        worst_relative_margin: f64::INFINITY,
        worst_step: 0,
    };
    for (n, r) in ledger.rows.iter().enumerate() {
        let measured = r.norm_v_u.powi(2) + r.norm_h_v.powi(2);
        if !(measured <= r.bound * (1.0 + INEQUALITY_SLACK)) {
            verdict.holds = false;
        }
        let rel = if r.bound > 0.0 {
            r.margin / r.bound
        } else if measured > 0.0 {
            -1.0
        } else {
            0.0
        };
        if r.margin < verdict.worst_margin || (r.margin.is_nan() && !verdict.worst_margin.is_nan()) {
            verdict.worst_margin = r.margin;
            verdict.worst_step = n;
        }
        verdict.worst_relative_margin = verdict.worst_relative_margin.min(rel);
    }
    verdict
}

/// One member of an ε-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    /// `max_t (‖u‖²_V + ‖u'‖²_H)^{1/2}`.
    pub measured_norm: f64,
    /// `ln` of the square root of the bound at `T`.
    pub log_envelope: f64,
    pub f_t: f64,
}

impl SweepPoint {
    pub fn from_ledger(eps: f64, ledger: &EnergyLedger) -> Self {
        Self {
            eps,
            measured_norm: ledger.max_norm(),
            log_envelope: 0.5 * ledger.final_log_bound(),
            f_t: ledger.constants.f_t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Fitted power `M` of the measured norms in `1/ε`.
    pub fitted_power: f64,
    pub measured_correlation: f64,
    /// Fitted power of the bound-side envelope, the square root of the bound.
    pub envelope_power: f64,
    pub envelope_correlation: f64,
    /// Ratio of the last to the first local log-log slope of the envelope.
    pub slope_growth: f64,
    /// Measured norms never exceed the envelope.
    pub bracketed: bool,
    /// The envelope grows faster than any power of `1/ε`.
    pub super_polynomial: bool,
}

impl SweepReport {
    /// Finite power, well-fitted envelope, bracketed measurements.
    pub fn is_moderate(&self) -> bool {
        self.fitted_power.is_finite() && self.envelope_power.is_finite() && self.bracketed && !self.super_polynomial
    }

    /// Writes `eps,measured_norm,fitted_power`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(Error::from)?;
        w.write_record(["eps", "measured_norm", "fitted_power"])?;
        for p in &self.points {
            w.write_record([
                format!("{:.16e}", p.eps),
                format!("{:.16e}", p.measured_norm),
                format!("{:.16e}", self.fitted_power),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Minimum envelope correlation for a polynomial verdict.
pub const MODERATE_CORRELATION: f64 = 0.99;

/// Fits the growth of measured norms and of the envelope in `1/ε`.
pub fn sweep_verdict(points: &[SweepPoint]) -> Result<SweepReport> {
    if points.len() < 3 {
        return Err(Error::invalid("eps", "a sweep needs at least three ε values"));
    }
    for p in points {
        if !(p.measured_norm.is_finite() && p.log_envelope.is_finite() && p.measured_norm > 0.0) {
            return Err(Error::Probe {
                eps: p.eps,
                reason: format!(
                    "norm {} / log envelope {} not finite and positive",
                    p.measured_norm, p.log_envelope
                ),
            });
        }
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let eps: Vec<f64> = pts.iter().map(|p| p.eps).collect();
    let measured: Vec<f64> = pts.iter().map(|p| p.measured_norm).collect();
    let log_env: Vec<f64> = pts.iter().map(|p| p.log_envelope).collect();
    let distinct = || Error::invalid("eps", "ε values must be distinct");
    let m = log_log_rate(&eps, &measured).ok_or_else(distinct)?;
    let inv: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let env = linear_fit(&inv, &log_env).ok_or_else(distinct)?;
    let local: Vec<f64> = inv
        .windows(2)
        .zip(log_env.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let first = local.first().copied().unwrap_or(0.0);
    let last = local.last().copied().unwrap_or(0.0);
    let slope_growth = if first.abs() > 1e-12 {
        last / first
    } else if last.abs() > 1e-12 {
        f64::INFINITY
    } else {
        1.0
    };
    let bracketed = pts
        .iter()
        .all(|p| p.measured_norm.ln() <= p.log_envelope + INEQUALITY_SLACK);
    let super_polynomial = env.correlation < MODERATE_CORRELATION || slope_growth > 2.0;
    Ok(SweepReport {
        points: pts,
        fitted_power: m.slope,
        measured_correlation: m.correlation,
        envelope_power: env.slope,
        envelope_correlation: env.correlation,
        slope_growth,
        bracketed,
        super_polynomial,
    })
}
