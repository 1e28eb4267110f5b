use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{KernelChoice, RunConfig, Scenario, SolverMode};
use crate::beam_fem::{coercivity_constants, BeamMesh, BeamSystem};
use crate::coefficients::{CoefficientFamily, SpaceField, SpaceTimeField};
use crate::energy::{
    c_l_for, check_inequality, constants, sweep_verdict, EnergyConstants, EnergyLedger, InequalityVerdict, SweepPoint,
    SweepReport,
};
use crate::fractional_kernel::{FractionalKernel, MollifierSpec};
use crate::time_integration::{
    e_norm, restart_horizon, solve_direct, solve_picard, BeamProblem, HorizonPlan, PicardDiagnostics, Trajectory,
};
use crate::{Error, Result};

/// Environment variable holding the worker count for sweeps.
pub const WORKERS_ENV: &str = "ZENER_BEAM_WORKERS";

/// One solved member of a scenario: fixed ε and load speed.
#[derive(Debug, Clone)]
pub struct MemberRun {
    pub eps: f64,
    pub speed: Option<f64>,
    pub system: BeamSystem,
    pub trajectory: Trajectory,
    pub ledger: EnergyLedger,
    pub verdict: InequalityVerdict,
    pub picard: Option<PicardDiagnostics>,
}

/// Everything a member run needs besides the solver mode.
pub struct MemberSetup {
    pub family: CoefficientFamily,
    pub system: BeamSystem,
    pub kernel: Option<FractionalKernel>,
    pub u0: DVector<f64>,
    pub v0: DVector<f64>,
    pub constants: EnergyConstants,
}

impl MemberSetup {
    pub fn new(config: &RunConfig, eps: f64, speed: Option<f64>) -> Result<Self> {
        let mut material = config.material.clone();
        if let Some(v) = speed {
            material.speed = v;
        }
        let family = CoefficientFamily::new(&material, &config.regularization.rules, eps)?;
        let mesh = BeamMesh::new(config.mesh.n_elems)?;
        let density = family.density.as_ref().map(|d| d as &dyn SpaceField);
        let system = BeamSystem::assemble(&mesh, &family.stiffness, density)?;
        let t = &config.time;
        let m = &config.model;
        let kernel = if m.foundation {
            Some(match m.kernel {
                KernelChoice::Raw => FractionalKernel::build(m.alpha, m.theta, t.t_end, t.dt())?,
                KernelChoice::Mollified => FractionalKernel::build_mollified(
                    m.alpha,
                    m.theta,
                    t.t_end,
                    t.dt(),
                    &MollifierSpec::causal(m.kernel_rule),
                    eps,
                )?,
            })
        } else {
            None
        };
        let bubble = |s: f64| {
            mesh.interpolate(
                |x| s * 16.0 * x * x * (1.0 - x) * (1.0 - x) + 0.0,
                |x| s * 32.0 * x * (1.0 - x) * (1.0 - 2.0 * x) + 0.0,
            )
        };
        let u0 = bubble(config.initial.amplitude);
        let v0 = bubble(config.initial.velocity);
        let coercivity = coercivity_constants(&system, family.c0(), family.c1(), family.axial.sup_norm())?;
        let constants = constants(&coercivity, c_l_for(kernel.as_ref())?, t.t_end);
        Ok(Self {
            family,
            system,
            kernel,
            u0,
            v0,
            constants,
        })
    }

    pub fn problem<'a>(&'a self, config: &RunConfig) -> BeamProblem<'a> {
        BeamProblem {
            system: &self.system,
            axial: &self.family.axial,
            load: &self.family.load,
            kernel: self.kernel.as_ref(),
            u0: &self.u0,
            v0: &self.v0,
            dt: config.time.dt(),
            n_steps: config.time.n_steps(),
            newmark: config.time.newmark,
        }
    }

    /// Restart plan for the configured horizon.
    pub fn plan(&self, config: &RunConfig) -> Result<HorizonPlan> {
        let t = &config.time;
        let k = self.constants;
        if config.solver.restart {
            restart_horizon(t.t_end, t.dt(), config.solver.restart_target, |s| k.gamma_at(s))
        } else {
            Ok(HorizonPlan::single(t.n_steps(), t.dt(), k.gamma_t))
        }
    }
}

pub fn run_member(config: &RunConfig, eps: f64, speed: Option<f64>, mode: SolverMode) -> Result<MemberRun> {
    let setup = MemberSetup::new(config, eps, speed)?;
    let problem = setup.problem(config);
    let (trajectory, picard) = match mode {
        SolverMode::Direct => (solve_direct(problem)?, None),
        SolverMode::Picard => {
            let (t, d) = solve_picard(problem, &config.solver.picard_options(), &setup.plan(config)?)?;
            (t, Some(d))
        }
    };
    let ledger = EnergyLedger::from_trajectory(&setup.system, &trajectory, &setup.family.load, setup.constants)?;
    let verdict = check_inequality(&ledger);
    Ok(MemberRun {
        eps,
        speed,
        system: setup.system,
        trajectory,
        ledger,
        verdict,
        picard,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub label: String,
    pub eps: f64,
    pub speed: Option<f64>,
    pub verdict: InequalityVerdict,
    pub gamma_t: f64,
    pub f_t: f64,
    pub picard_iterations: Option<usize>,
    pub picard_max_ratio: Option<f64>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub members: Vec<MemberSummary>,
    pub sweep: Option<SweepReport>,
}

impl RunReport {
    /// Every inequality holds and a sweep, if any, is moderate.
    pub fn passed(&self) -> bool {
        self.members.iter().all(|m| m.verdict.holds) && self.sweep.as_ref().is_none_or(|s| s.is_moderate())
    }
}

/// Runs `f` on the sweep worker pool.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let n = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|n| *n > 0);
    match n.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn label(config: &RunConfig, index: usize, speed: Option<f64>) -> String {
    let mut parts = Vec::new();
    if config.regularization.eps.len() > 1 {
        parts.push(format!("eps{index:02}"));
    }
    if let Some(v) = speed {
        parts.push(format!("speed{v}"));
    }
    parts.join("_")
}

fn named(stem: &str, label: &str) -> String {
    if label.is_empty() {
        format!("{stem}.csv")
    } else {
        format!("{stem}_{label}.csv")
    }
}

fn write_member(config: &RunConfig, dir: &Path, label: &str, run: &MemberRun) -> Result<Vec<PathBuf>> {
    let traj = dir.join(named("trajectory", label));
    run.trajectory.write_csv(&traj, config.output.stride)?;
    let ledger = dir.join(named("ledger", label));
    run.ledger.write_csv(&ledger)?;
    let mut files = vec![traj, ledger];
    if config.scenario == Scenario::FreeVibration {
        let path = dir.join(named("midspan", label));
        let mesh = run.system.mesh();
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["t", "w_mid"])?;
        for (n, u) in run.trajectory.u.iter().enumerate() {
            w.write_record([
                format!("{:.16e}", run.trajectory.time(n)),
                format!("{:.16e}", mesh.evaluate(u, 0.5, 0)),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        files.push(path);
    }
    Ok(files)
}

/// Runs every member of the configured scenario and writes the artifacts
/// into `dir`.
pub fn run_scenario(config: &RunConfig, dir: &Path) -> Result<RunReport> {
    config.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let speeds: Vec<Option<f64>> = match config.scenario {
        Scenario::MovingLoad if !config.loading.speeds.is_empty() => {
            config.loading.speeds.iter().map(|v| Some(*v)).collect()
        }
        _ => vec![None],
    };
    let jobs: Vec<(usize, f64, Option<f64>)> = config
        .regularization
        .eps
        .iter()
        .enumerate()
        .flat_map(|(i, e)| speeds.iter().map(move |s| (i, *e, *s)))
        .collect();
    let results: Vec<Result<(MemberSummary, SweepPoint)>> = with_workers(|| {
        jobs.par_iter()
            .map(|&(i, eps, speed)| {
                let run = run_member(config, eps, speed, config.solver.mode)?;
                let label = label(config, i, speed);
                let files = write_member(config, dir, &label, &run)?;
                log::info!(
                    "{} eps={eps:e}: worst margin {:e}, holds {}",
                    config.scenario.name(),
                    run.verdict.worst_margin,
                    run.verdict.holds
                );
                let point = SweepPoint::from_ledger(eps, &run.ledger);
                let k = run.ledger.constants;
                Ok((
                    MemberSummary {
                        label,
                        eps,
                        speed,
                        verdict: run.verdict,
                        gamma_t: k.gamma_t,
                        f_t: k.f_t,
                        picard_iterations: run.picard.as_ref().map(|d| d.iterations()),
                        picard_max_ratio: run.picard.as_ref().map(|d| d.max_ratio()),
                        files,
                    },
                    point,
                ))
            })
            .collect()
    });
    let mut members = Vec::new();
    let mut points = Vec::new();
    for r in results {
        let (m, p) = r?;
        members.push(m);
        points.push(p);
    }
    let sweep = if config.scenario == Scenario::EpsSweep {
        let report = sweep_verdict(&points)?;
        report.write_csv(&dir.join("report.csv"))?;
        Some(report)
    } else {
        None
    };
    let report = RunReport {
        scenario: config.scenario,
        members,
        sweep,
    };
    write_json(&dir.join("summary.json"), &report)?;
    Ok(report)
}

/// Runs the configuration as an ε-sweep regardless of its scenario.
pub fn run_sweep(config: &RunConfig, dir: &Path) -> Result<RunReport> {
    let mut c = config.clone();
    c.scenario = Scenario::EpsSweep;
    run_scenario(&c, dir)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub eps: f64,
    /// `‖u_direct − u_picard‖_{E_V}`.
    pub distance: f64,
    /// `distance / ‖u_direct‖_{E_V}`.
    pub relative_distance: f64,
    pub tol: f64,
    pub passed: bool,
    pub picard: PicardDiagnostics,
}

/// Distance between direct and Picard trajectories for the first ε.
pub fn compare_modes(config: &RunConfig) -> Result<CompareReport> {
    config.validate()?;
    let eps = config.regularization.eps[0];
    let speed = config
        .loading
        .speeds
        .first()
        .copied()
        .filter(|_| config.scenario == Scenario::MovingLoad);
    let setup = MemberSetup::new(config, eps, speed)?;
    let problem = setup.problem(config);
    let direct = solve_direct(problem)?;
    let (picard, diag) = solve_picard(problem, &config.solver.picard_options(), &setup.plan(config)?)?;
    let diff: Vec<DVector<f64>> = direct.u.iter().zip(&picard.u).map(|(a, b)| a - b).collect();
    let v = &setup.system.v_gram;
    let distance = e_norm(&diff, direct.dt, |x| v.bilinear(x, x));
    let scale = direct.e_v_norm(&setup.system);
    let relative_distance = if scale > 0.0 { distance / scale } else { distance };
    let tol = config.solver.tol;
    Ok(CompareReport {
        eps,
        distance,
        relative_distance,
        tol,
        passed: relative_distance < 10.0 * tol,
        picard: diag,
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
