use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::DVector;
use rayon::prelude::*;

use super::mittag_leffler::{e_alpha, e_alpha_prime, MlParams, MlTable};
use super::mollifier::MollifierSpec;
use crate::quadrature::{exp_sinh, gauss8, tanh_sinh};
use crate::{Error, Result};

/// Zener memory kernel `l_α(t) = (1/θ − 1) e'_α(t, 1/θ)` for `t > 0`, zero for
/// `t ≤ 0`.
pub fn zener_kernel(t: f64, alpha: f64, theta: f64) -> Result<f64> {
    if t <= 0.0 || theta == 1.0 {
        return Ok(0.0);
    }
    Ok((1.0 / theta - 1.0) * e_alpha_prime(t, 1.0 / theta, alpha)?)
}

/// Table-backed evaluator of `l_α` and `e_α(·, 1/θ)` for fixed `(α, θ)`.
///
/// Exact to about 1e-12 relative on `[0, t_max]`; larger arguments fall back
/// to direct Mittag-Leffler evaluation.
#[derive(Debug, Clone)]
pub struct ZenerKernelFn {
    alpha: f64,
    scale: f64,
    tables: Option<(MlTable, MlTable)>,
}

impl ZenerKernelFn {
    pub fn new(alpha: f64, theta: f64, t_max: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::invalid("theta", "theta must lie in (0,1]"));
        }
        let lambda = 1.0 / theta;
        let tables = if theta == 1.0 {
            None
        } else {
            let tau_max = t_max.max(1e-3).powf(alpha);
            Some((
                MlTable::new(MlParams::one(alpha)?, lambda, tau_max)?,
                MlTable::new(MlParams::new(alpha, alpha)?, lambda, tau_max)?,
            ))
        };
        Ok(Self {
            alpha,
            scale: -(1.0 / theta - 1.0) * lambda,
            tables,
        })
    }

    /// `l_α(t)`, zero for `t ≤ 0`.
    pub fn value(&self, t: f64) -> Result<f64> {
        let Some((_, deriv)) = &self.tables else {
            return Ok(0.0);
        };
        if t <= 0.0 {
            return Ok(0.0);
        }
        let ta = t.powf(self.alpha);
        Ok(self.scale * ta / t * deriv.eval(ta)?)
    }

    /// `e_α(t, 1/θ)` for `t ≥ 0`.
    pub fn relaxation(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::Domain(format!("e_alpha requires t >= 0, got {t}")));
        }
        match &self.tables {
            Some((relax, _)) => relax.eval(t.powf(self.alpha)),
            None => e_alpha(t, 1.0, self.alpha),
        }
    }
}

/// Where the tabulated kernel came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSource {
    /// The analytic kernel, singular like `t^{α−1}` at the origin.
    Raw,
    /// `l ∗ ρ_ε` for the given mollifier scale.
    Mollified { gamma: f64 },
}

/// The causal operator `L u = (1/θ) u + l_α ∗ u` tabulated for product
/// integration on a uniform grid.
///
/// For a piecewise-linear `u` on the grid the history integral is exact: on
/// cell `k` (`s ∈ [t_k, t_{k+1}]`) the kernel enters through its mass
/// `A_k = ∫ l` and first moment `B_k = ∫ (s − t_k) l(s) ds`.
#[derive(Debug, Clone)]
pub struct FractionalKernel {
    alpha: f64,
    theta: f64,
    dt: f64,
    n_cells: usize,
    atom: f64,
    cell_mass: Vec<f64>,
    cell_moment: Vec<f64>,
    samples: Vec<f64>,
    source: KernelSource,
    end_value: f64,
}

fn validate(alpha: f64, theta: f64, horizon: f64, dt: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid("theta", "theta must lie in (0,1]"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("{dt} must be positive")));
    }
    if !(horizon >= dt && horizon.is_finite()) {
        return Err(Error::invalid("T", format!("horizon {horizon} shorter than dt {dt}")));
    }
    Ok((horizon / dt - 1e-9).ceil() as usize)
}

/// Evaluates `f` over `items` in parallel; the first failure is reported.
fn par_eval<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> Result<Vec<f64>> {
    items.par_iter().map(f).collect()
}

impl FractionalKernel {
    /// Tabulate the analytic kernel on `[0, horizon]` with step `dt`.
    pub fn build(alpha: f64, theta: f64, horizon: f64, dt: f64) -> Result<Self> {
        let n_cells = validate(alpha, theta, horizon, dt)?;
        let mut kernel = Self::zero(alpha, theta, dt, n_cells, KernelSource::Raw);
        if theta == 1.0 {
            return Ok(kernel);
        }
        let c = 1.0 / theta - 1.0;
        let f = ZenerKernelFn::new(alpha, theta, n_cells as f64 * dt)?;
        let idx: Vec<usize> = (0..=n_cells).collect();
        let e = par_eval(&idx, |&k| f.relaxation(k as f64 * dt))?;
        kernel.cell_mass = e.windows(2).map(|w| c * (w[1] - w[0])).collect();
        kernel.end_value = e[n_cells];

        let failed = AtomicBool::new(false);
        let l = |s: f64| match f.value(s) {
            Ok(v) => v,
            Err(_) => {
                failed.store(true, Ordering::Relaxed);
                f64::NAN
            }
        };
        let cells: Vec<usize> = (0..n_cells).collect();
        kernel.cell_moment = cells
            .par_iter()
            .map(|&k| {
                let t0 = k as f64 * dt;
                if k == 0 {
                    tanh_sinh(|s| s * l(s), 0.0, dt, 1e-13)
                } else {
                    gauss8().integrate(t0, t0 + dt, |s| (s - t0) * l(s))
                }
            })
            .collect();
        kernel.samples = idx
            .par_iter()
            .map(|&j| if j == 0 { 0.0 } else { l(j as f64 * dt) })
            .collect();
        if failed.load(Ordering::Relaxed) {
            return Err(Error::MittagLeffler {
                alpha,
                beta: alpha,
                z: f64::NAN,
            });
        }
        kernel.samples[0] = kernel.cell_mass[0] / dt;
        Ok(kernel)
    }

    /// Tabulate the causally mollified kernel `l ∗ ρ⁺_ε`, which is smooth and
    /// square integrable for every `α`.
    pub fn build_mollified(
        alpha: f64,
        theta: f64,
        horizon: f64,
        dt: f64,
        spec: &MollifierSpec,
        eps: f64,
    ) -> Result<Self> {
        let n_cells = validate(alpha, theta, horizon, dt)?;
        let rho = spec.scaled(eps)?;
        let mut kernel = Self::zero(alpha, theta, dt, n_cells, KernelSource::Mollified { gamma: rho.gamma });
        if theta == 1.0 {
            return Ok(kernel);
        }
        let (lo, hi) = rho.support();
        let width = hi - lo;
        let f = ZenerKernelFn::new(alpha, theta, n_cells as f64 * dt + hi)?;
        let l_eps = |t: f64| mollified_value(t, &f, &rho_eval(&rho), (lo, hi));
        let cells: Vec<usize> = (0..n_cells).collect();
        let moments: Vec<(f64, f64)> = cells
            .par_iter()
            .map(|&k| {
                let t0 = k as f64 * dt;
                // resolve the mollifier scale where it matters
                let panels = if t0 < hi + width {
                    ((4.0 * dt / width).ceil() as usize).clamp(1, 256)
                } else {
                    1
                };
                let h = dt / panels as f64;
                let mut mass = 0.0;
                let mut moment = 0.0;
                for p in 0..panels {
                    let a = t0 + p as f64 * h;
                    for (s, w) in gauss8().mapped(a, a + h) {
                        let v = l_eps(s)?;
                        mass += w * v;
                        moment += w * (s - t0) * v;
                    }
                }
                Ok((mass, moment))
            })
            .collect::<Result<_>>()?;
        kernel.cell_mass = moments.iter().map(|m| m.0).collect();
        kernel.cell_moment = moments.iter().map(|m| m.1).collect();
        let idx: Vec<usize> = (0..=n_cells).collect();
        kernel.samples = par_eval(&idx, |&j| l_eps(j as f64 * dt))?;
        kernel.end_value = f.relaxation(n_cells as f64 * dt)?;
        Ok(kernel)
    }

    fn zero(alpha: f64, theta: f64, dt: f64, n_cells: usize, source: KernelSource) -> Self {
        Self {
            alpha,
            theta,
            dt,
            n_cells,
            atom: 1.0 / theta,
            cell_mass: vec![0.0; n_cells],
            cell_moment: vec![0.0; n_cells],
            samples: vec![0.0; n_cells + 1],
            source,
            end_value: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_cells
    }

    pub fn horizon(&self) -> f64 {
        self.n_cells as f64 * self.dt
    }

    pub fn source(&self) -> KernelSource {
        self.source
    }

    /// Weight `1/θ` of the instantaneous part of `L`.
    pub fn atom(&self) -> f64 {
        self.atom
    }

    /// `true` when `L` is the identity (θ = 1).
    pub fn is_identity(&self) -> bool {
        self.theta == 1.0
    }

    /// Grid samples `l(t_j)`; the `j = 0` entry holds the cell average
    /// `A_0/dt` in place of the singular value.
    pub fn values(&self) -> &[f64] {
        &self.samples
    }

    pub fn cell_masses(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn cell_moments(&self) -> &[f64] {
        &self.cell_moment
    }

    /// `∫₀ᵀ |l|`, summed from the exact cell masses (`l` has one sign).
    pub fn l1_norm(&self) -> f64 {
        self.cell_mass.iter().map(|a| a.abs()).sum()
    }

    /// `(1/θ − 1)(1 − e_α(T, 1/θ))`.
    pub fn l1_norm_closed_form(&self) -> f64 {
        (1.0 / self.theta - 1.0) * (1.0 - self.end_value)
    }

    /// `‖l‖_{L²(0,T)}`; infinite for the raw kernel when `α ≤ 1/2`.
    pub fn l2_norm(&self) -> Result<f64> {
        if self.is_identity() {
            return Ok(0.0);
        }
        match self.source {
            KernelSource::Raw => {
                if self.alpha <= 0.5 {
                    return Ok(f64::INFINITY);
                }
                let failed = AtomicBool::new(false);
                let f = ZenerKernelFn::new(self.alpha, self.theta, self.horizon())?;
                let sq = tanh_sinh(
                    |s| match f.value(s) {
                        Ok(v) => v * v,
                        Err(_) => {
                            failed.store(true, Ordering::Relaxed);
                            0.0
                        }
                    },
                    0.0,
                    self.horizon(),
                    1e-12,
                );
                if failed.into_inner() {
                    return Err(Error::Domain("kernel evaluation failed in L2 norm".into()));
                }
                Ok(sq.sqrt())
            }
            KernelSource::Mollified { .. } => {
                // trapezoid on the (smooth) samples
                let s = &self.samples;
                let inner: f64 = s[1..self.n_cells].iter().map(|v| v * v).sum();
                let ends = 0.5 * (s[0] * s[0] + s[self.n_cells] * s[self.n_cells]);
                Ok(((inner + ends) * self.dt).sqrt())
            }
        }
    }

    /// Both forms of the bound `‖Lu‖_{E_H} ≤ C_L ‖u‖_{E_H}`.
    pub fn c_l(&self) -> Result<ClConstants> {
        let young = self.atom + self.l1_norm_closed_form().abs();
        let t = self.horizon();
        let l2_form = self.atom + self.l2_norm()? * t.max(t.sqrt());
        Ok(ClConstants {
            young,
            l2_form,
            classical_l1: 1.0 + self.l1_norm_closed_form().abs(),
        })
    }

    /// Numerical Laplace transform of `(1/θ) δ + l`, for the raw kernel.
    pub fn laplace_symbol(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("Laplace variable must be positive, got {s}")));
        }
        if self.is_identity() {
            return Ok(1.0);
        }
        let failed = AtomicBool::new(false);
        let f = ZenerKernelFn::new(self.alpha, self.theta, 40.0 / s)?;
        let integral = exp_sinh(
            |t| {
                if s * t > 745.0 {
                    return 0.0;
                }
                match f.value(t) {
                    Ok(v) => (-s * t).exp() * v,
                    Err(_) => {
                        failed.store(true, Ordering::Relaxed);
                        0.0
                    }
                }
            },
            1e-13,
        );
        if failed.into_inner() {
            return Err(Error::Domain("kernel evaluation failed in Laplace transform".into()));
        }
        Ok(self.atom + integral)
    }

    /// `(1 + s^α)/(1 + θ s^α)`.
    pub fn laplace_symbol_exact(&self, s: f64) -> f64 {
        let sa = s.powf(self.alpha);
        (1.0 + sa) / (1.0 + self.theta * sa)
    }

    /// Coefficient of `u_n` in `(L u)_n` for `n ≥ 1`.
    pub fn implicit_weight(&self) -> f64 {
        if self.n_cells == 0 {
            return self.atom;
        }
        self.atom + self.cell_mass[0] - self.cell_moment[0] / self.dt
    }

    /// Coefficient of `u_{n−j}` in `(L u)_n`, `1 ≤ j ≤ n`.
    pub fn history_weight(&self, n: usize, j: usize) -> f64 {
        debug_assert!(j >= 1 && j <= n && n <= self.n_cells);
        let q_prev = self.cell_moment[j - 1] / self.dt;
        if j == n {
            q_prev
        } else {
            self.cell_mass[j] - self.cell_moment[j] / self.dt + q_prev
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len > self.n_cells + 1 {
            return Err(Error::Shape {
                expected: self.n_cells + 1,
                got: len,
            });
        }
        Ok(())
    }

    /// Memory part `Σ_{j=1}^{n} w_j u_{n−j}` of `(L u)_n`, using
    /// `series[0..n]`.
    pub fn history_sum(&self, n: usize, series: &[DVector<f64>], out: &mut DVector<f64>) {
        out.fill(0.0);
        if self.is_identity() {
            return;
        }
        for j in 1..=n {
            out.axpy(self.history_weight(n, j), &series[n - j], 1.0);
        }
    }

    /// `L u` on the kernel grid; `u` is taken as zero before `t = 0`.
    pub fn convolve(&self, series: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        self.check_len(series.len())?;
        if self.is_identity() {
            return Ok(series.to_vec());
        }
        let mut out = Vec::with_capacity(series.len());
        for (n, u) in series.iter().enumerate() {
            let mut acc = DVector::zeros(u.len());
            self.history_sum(n, series, &mut acc);
            let w = if n == 0 { self.atom } else { self.implicit_weight() };
            acc.axpy(w, u, 1.0);
            out.push(acc);
        }
        Ok(out)
    }

    pub fn convolve_scalar(&self, series: &[f64]) -> Result<Vec<f64>> {
        self.check_len(series.len())?;
        if self.is_identity() {
            return Ok(series.to_vec());
        }
        let w0 = self.implicit_weight();
        Ok((0..series.len())
            .map(|n| {
                let hist: f64 = (1..=n).map(|j| self.history_weight(n, j) * series[n - j]).sum();
                let w = if n == 0 { self.atom } else { w0 };
                w * series[n] + hist
            })
            .collect())
    }

    /// Writes `t,l_alpha` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let write = |w: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
            writeln!(w, "t,l_alpha")?;
            for (j, v) in self.samples.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e}", j as f64 * self.dt, v)?;
            }
            w.flush()
        };
        write(&mut w).map_err(|e| Error::io(path, e))
    }
}

/// The constants `C_L` of `‖Lu‖_{E_H} ≤ C_L ‖u‖_{E_H}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClConstants {
    /// Young's inequality: `1/θ + ‖l‖_{L¹(0,T)}`.
    pub young: f64,
    /// `1/θ + ‖l‖_{L²(0,T)} · max(T, √T)`; infinite for raw kernels with α ≤ 1/2.
    pub l2_form: f64,
    /// `1 + ‖l‖_{L¹(0,T)}`, ignoring the excess atom; reported only.
    pub classical_l1: f64,
}

fn rho_eval(rho: &super::mollifier::ScaledMollifier) -> impl Fn(f64) -> f64 + '_ {
    move |t| rho.eval(t)
}

fn mollified_value(t: f64, f: &ZenerKernelFn, rho: &impl Fn(f64) -> f64, (lo, hi): (f64, f64)) -> Result<f64> {
    // l_ε(t) = ∫ l(s) ρ_ε(t − s) ds over t − s ∈ (lo, hi), s > 0
    let a = (t - hi).max(0.0);
    let b = t - lo;
    if b <= 0.0 {
        return Ok(0.0);
    }
    let failed = AtomicBool::new(false);
    let v = tanh_sinh(
        |s| match f.value(s) {
            Ok(l) => l * rho(t - s),
            Err(_) => {
                failed.store(true, Ordering::Relaxed);
                0.0
            }
        },
        a,
        b,
        1e-12,
    );
    if failed.into_inner() {
        return Err(Error::Domain(format!("kernel evaluation failed mollifying at t={t}")));
    }
    Ok(v)
}

/// Samples of `l ∗ ρ_ε` at `times`, for a kernel `l` supported on
/// `[0, ∞)` with at most an integrable singularity at the origin.
pub fn mollify_kernel(
    l: impl Fn(f64) -> f64 + Sync,
    spec: &MollifierSpec,
    eps: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    let rho = spec.scaled(eps)?;
    let (lo, hi) = rho.support();
    Ok(times
        .par_iter()
        .map(|&t| {
            let a = (t - hi).max(0.0);
            let b = t - lo;
            if b <= 0.0 {
                0.0
            } else {
                tanh_sinh(|s| l(s) * rho.eval(t - s), a, b, 1e-12)
            }
        })
        .collect())
}

/// Integral of `f` over `(0, horizon)` on panels graded geometrically around
/// the length scale `width`, each by tanh-sinh.
fn graded_integral(f: impl Fn(f64) -> f64 + Sync, horizon: f64, width: f64, rel_tol: f64) -> f64 {
    let mut pts = vec![0.0];
    let mut x = width * 2f64.powi(-12);
    while x < horizon {
        pts.push(x);
        x *= 2.0;
    }
    for k in [1.0, 2.0] {
        if k * width < horizon {
            pts.push(k * width);
        }
    }
    pts.push(horizon);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let parts: Vec<f64> = pts.par_windows(2).map(|w| tanh_sinh(&f, w[0], w[1], rel_tol)).collect();
    parts.iter().sum()
}

/// `‖l ∗ ρ_ε − l‖_{L¹(0,T)}` for the Zener kernel.
pub fn mollification_l1_error(alpha: f64, theta: f64, horizon: f64, spec: &MollifierSpec, eps: f64) -> Result<f64> {
    validate(alpha, theta, horizon, horizon)?;
    let rho = spec.scaled(eps)?;
    let support = rho.support();
    let f = ZenerKernelFn::new(alpha, theta, horizon + support.1)?;
    let failed = AtomicBool::new(false);
    let v = graded_integral(
        |t| {
            let l = f.value(t);
            let le = mollified_value(t, &f, &rho_eval(&rho), support);
            match (l, le) {
                (Ok(l), Ok(le)) => (le - l).abs(),
                _ => {
                    failed.store(true, Ordering::Relaxed);
                    0.0
                }
            }
        },
        horizon,
        support.1 - support.0,
        1e-9,
    );
    if failed.into_inner() {
        return Err(Error::Domain("kernel evaluation failed".into()));
    }
    Ok(v)
}

/// `‖l ∗ ρ_ε‖_{L²(0,T)}` for the Zener kernel.
pub fn mollified_l2_norm(alpha: f64, theta: f64, horizon: f64, spec: &MollifierSpec, eps: f64) -> Result<f64> {
    validate(alpha, theta, horizon, horizon)?;
    let rho = spec.scaled(eps)?;
    let support = rho.support();
    let f = ZenerKernelFn::new(alpha, theta, horizon + support.1)?;
    let failed = AtomicBool::new(false);
    let v = graded_integral(
        |t| match mollified_value(t, &f, &rho_eval(&rho), support) {
            Ok(le) => le * le,
            Err(_) => {
                failed.store(true, Ordering::Relaxed);
                0.0
            }
        },
        horizon,
        support.1 - support.0,
        1e-9,
    );
    if failed.into_inner() {
        return Err(Error::Domain("kernel evaluation failed".into()));
    }
    Ok(v.sqrt())
}
