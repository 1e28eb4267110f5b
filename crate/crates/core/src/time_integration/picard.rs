use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::newmark::{BeamProblem, Marcher};
use super::trajectory::{e_norm, Trajectory};
use crate::{Error, Result};

/// How the instantaneous part `(1/θ) u` of `L u` is treated inside an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomSplit {
    /// All of `L u_{k−1}` is frozen on the right-hand side.
    #[default]
    Explicit,
    /// `(1/θ) u_k` stays in the operator; only the kernel part is frozen.
    Folded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardOptions {
    /// Relative tolerance on `‖u_k − u_{k−1}‖_{E_V}`.
    pub tol: f64,
    pub max_iter: usize,
    pub split: AtomSplit,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            split: AtomSplit::Explicit,
        }
    }
}

/// Steps `start..=end` of the time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

/// Partition of `[0, T]` into Picard segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonPlan {
    pub segments: Vec<Segment>,
    /// Contraction factor over the full horizon.
    pub gamma_t: f64,
    /// Segment length (all but possibly the last).
    pub t1: f64,
    pub gamma_t1: f64,
}

impl HorizonPlan {
    pub fn single(n_steps: usize, dt: f64, gamma_t: f64) -> Self {
        Self {
            segments: vec![Segment { start: 0, end: n_steps }],
            gamma_t,
            t1: n_steps as f64 * dt,
            gamma_t1: gamma_t,
        }
    }
}

/// Root of an increasing `f` on `[lo, hi]` by bisection.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Splits `[0, T]` into segments of length `T₁` with `γ(T₁) ≤ target`, where
/// `γ` is increasing with `γ(0) = 0`.
pub fn restart_horizon(horizon: f64, dt: f64, target: f64, gamma: impl Fn(f64) -> f64) -> Result<HorizonPlan> {
    if !(dt > 0.0 && horizon >= dt) {
        return Err(Error::Config(format!(
            "horizon {horizon} and dt {dt} do not form a grid"
        )));
    }
    let n_steps = (horizon / dt).round() as usize;
    let gamma_t = gamma(horizon);
    if gamma_t < target {
        return Ok(HorizonPlan::single(n_steps, dt, gamma_t));
    }
    let t1 = bisect_root(|t| gamma(t) - target, 0.0, horizon, 1e-14);
    let m = (t1 / dt + 1e-9).floor() as usize;
    if m < 2 {
        return Err(Error::Config(format!(
            "restart segment T1 = {t1:e} is shorter than 2 dt = {:e}",
            2.0 * dt
        )));
    }
    let segments = (0..n_steps)
        .step_by(m)
        .map(|start| Segment {
            start,
            end: (start + m).min(n_steps),
        })
        .collect();
    let t1 = m as f64 * dt;
    Ok(HorizonPlan {
        segments,
        gamma_t,
        t1,
        gamma_t1: gamma(t1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDiagnostics {
    pub segment: Segment,
    /// `‖u_k − u_{k−1}‖_{E_V}` over the segment, `u_0 ≡ 0`.
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardDiagnostics {
    /// Differences of all segments, in order.
    pub iterates: Vec<f64>,
    /// Successive-difference quotients of all segments (iterations ≥ 2).
    pub ratio: Vec<f64>,
    pub gamma_t: f64,
    pub t1: f64,
    pub gamma_t1: f64,
    pub segments: Vec<SegmentDiagnostics>,
}

impl PicardDiagnostics {
    pub fn max_ratio(&self) -> f64 {
        self.ratio.iter().fold(0.0, |m, r| m.max(*r))
    }

    pub fn iterations(&self) -> usize {
        self.segments.iter().map(|s| s.differences.len()).sum()
    }
}

/// Picard iteration: each iterate solves the memory-free problem with the
/// memory forcing frozen at the previous iterate, starting from `u ≡ 0`.
pub fn solve_picard(
    problem: BeamProblem<'_>,
    options: &PicardOptions,
    plan: &HorizonPlan,
) -> Result<(Trajectory, PicardDiagnostics)> {
    problem.validate()?;
    if !(options.tol > 0.0) || options.max_iter == 0 {
        return Err(Error::invalid("picard", "tol must be positive and max_iter at least 1"));
    }
    let n_steps = problem.n_steps;
    if plan.segments.first().map(|s| s.start) != Some(0)
        || plan.segments.last().map(|s| s.end) != Some(n_steps)
        || plan.segments.windows(2).any(|w| w[0].end != w[1].start)
        || plan.segments.iter().any(|s| s.end <= s.start)
    {
        return Err(Error::Config("Picard segments must tile the time grid".into()));
    }
    let sys = problem.system;
    let dim = sys.n_dofs();
    let atom = problem.atom();
    let kernel = problem.kernel;
    let (kappa, constant_map) = match options.split {
        AtomSplit::Explicit => (0.0, kernel.is_none()),
        AtomSplit::Folded => (atom, kernel.is_none_or(|k| k.is_identity())),
    };
    let loads = problem.loads()?;
    let mut marcher = Marcher::new(problem, kappa);
    let a0 = marcher.initial_acceleration(&loads[0], &(problem.u0 * (atom - kappa)))?;

    let mut u = vec![DVector::zeros(dim); n_steps + 1];
    let mut v = u.clone();
    let mut a = u.clone();
    u[0] = problem.u0.clone();
    v[0] = problem.v0.clone();
    a[0] = a0;

    let v_sq = |x: &DVector<f64>| sys.v_gram.bilinear(x, x);
    let mut memory = DVector::zeros(dim);
    let mut diagnostics = PicardDiagnostics {
        iterates: Vec::new(),
        ratio: Vec::new(),
        gamma_t: plan.gamma_t,
        t1: plan.t1,
        gamma_t1: plan.gamma_t1,
        segments: Vec::new(),
    };

    for &seg in &plan.segments {
        let (s, e) = (seg.start, seg.end);
        let mut seg_diag = SegmentDiagnostics {
            segment: seg,
            differences: Vec::new(),
            ratios: Vec::new(),
            converged: false,
        };
        for _ in 0..options.max_iter {
            let mut nu = Vec::with_capacity(e - s);
            let mut nv = Vec::with_capacity(e - s);
            let mut na = Vec::with_capacity(e - s);
            for n in s..e {
                match kernel {
                    Some(k) => {
                        k.history_sum(n + 1, &u, &mut memory);
                        memory.axpy(k.implicit_weight() - kappa, &u[n + 1], 1.0);
                    }
                    None => memory.fill(0.0),
                }
                let prev = if n == s {
                    (&u[s], &v[s], &a[s])
                } else {
                    let i = n - s - 1;
                    (&nu[i], &nv[i], &na[i])
                };
                let (un, vn, an) = marcher.advance(n, prev, &loads[n + 1], &memory)?;
                nu.push(un);
                nv.push(vn);
                na.push(an);
            }
            let mut delta: Vec<DVector<f64>> = Vec::with_capacity(e - s + 1);
            delta.push(DVector::zeros(dim));
            delta.extend(nu.iter().zip(&u[s + 1..=e]).map(|(x, y)| x - y));
            let diff = e_norm(&delta, problem.dt, v_sq);
            let mut window = vec![u[s].clone()];
            window.extend(nu.iter().cloned());
            let norm = e_norm(&window, problem.dt, v_sq);
            for (i, ((x, y), z)) in nu.into_iter().zip(nv).zip(na).enumerate() {
                u[s + 1 + i] = x;
                v[s + 1 + i] = y;
                a[s + 1 + i] = z;
            }
            if let Some(&prev) = seg_diag.differences.last() {
                seg_diag.ratios.push(if prev > 0.0 { diff / prev } else { 0.0 });
            }
            seg_diag.differences.push(diff);
            log::debug!("picard segment {s}..{e}: difference {diff:e}, norm {norm:e}");
            if constant_map || diff <= options.tol * norm {
                seg_diag.converged = true;
                break;
            }
        }
        diagnostics.iterates.extend(&seg_diag.differences);
        diagnostics.ratio.extend(&seg_diag.ratios);
        let converged = seg_diag.converged;
        let ratios = seg_diag.ratios.clone();
        diagnostics.segments.push(seg_diag);
        if !converged {
            return Err(Error::PicardNonConvergence {
                iterations: options.max_iter,
                gamma_t: plan.gamma_t1,
                ratios,
            });
        }
    }
    Ok((
        Trajectory {
            dt: problem.dt,
            u,
            v,
            a,
        },
        diagnostics,
    ))
}
