use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::trajectory::{Trajectory, TrajectoryState};
use crate::beam_fem::{BandLu, BandMatrix, BeamSystem};
use crate::coefficients::SpaceTimeField;
use crate::fractional_kernel::FractionalKernel;
use crate::{Error, Result};

/// Newmark parameters; the default is the average-acceleration rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewmarkParams {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for NewmarkParams {
    fn default() -> Self {
        Self { beta: 0.25, gamma: 0.5 }
    }
}

impl NewmarkParams {
    /// Requires `2β ≥ γ ≥ 1/2`.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.5 && 2.0 * self.beta >= self.gamma && self.beta.is_finite()) {
            return Err(Error::invalid(
                "newmark",
                format!("need 2β ≥ γ ≥ 1/2, got β = {}, γ = {}", self.beta, self.gamma),
            ));
        }
        Ok(())
    }
}

/// The semi-discrete problem `M u'' + K0 u + K1(t) u + H (L u) = F(t)` with
/// `u(0) = u0`, `u'(0) = v0`, on `n_steps` steps of size `dt`.
///
/// `kernel = None` switches the foundation off (`L = 0`).
#[derive(Clone, Copy)]
pub struct BeamProblem<'a> {
    pub system: &'a BeamSystem,
    pub axial: &'a dyn SpaceTimeField,
    pub load: &'a dyn SpaceTimeField,
    pub kernel: Option<&'a FractionalKernel>,
    pub u0: &'a DVector<f64>,
    pub v0: &'a DVector<f64>,
    pub dt: f64,
    pub n_steps: usize,
    pub newmark: NewmarkParams,
}

impl BeamProblem<'_> {
    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn validate(&self) -> Result<()> {
        self.newmark.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("{} must be positive", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "need at least one step"));
        }
        let n = self.system.n_dofs();
        for len in [self.u0.len(), self.v0.len()] {
            if len != n {
                return Err(Error::Shape { expected: n, got: len });
            }
        }
        if let Some(k) = self.kernel {
            if (k.dt() - self.dt).abs() > 1e-12 * self.dt {
                return Err(Error::invalid(
                    "dt",
                    format!("kernel grid {} differs from {}", k.dt(), self.dt),
                ));
            }
            if k.n_steps() < self.n_steps {
                return Err(Error::Shape {
                    expected: self.n_steps,
                    got: k.n_steps(),
                });
            }
        }
        Ok(())
    }

    /// `(L u)_0 = (1/θ) u_0`, zero without foundation.
    pub(crate) fn atom(&self) -> f64 {
        self.kernel.map_or(0.0, |k| k.atom())
    }

    pub(crate) fn loads(&self) -> Result<Vec<DVector<f64>>> {
        (0..=self.n_steps)
            .map(|n| self.system.load(self.load, n as f64 * self.dt))
            .collect()
    }
}

/// Linear algebra of one Newmark step with `κ H u_{n+1}` implicit and a
/// memory vector `m_{n+1}` entering as `−H m_{n+1}`.
pub(crate) struct Marcher<'a> {
    problem: BeamProblem<'a>,
    kappa: f64,
    base: BandMatrix,
    k1: BandMatrix,
    eff: BandMatrix,
    cached: Option<(f64, BandLu)>,
    scratch: DVector<f64>,
}

impl<'a> Marcher<'a> {
    pub(crate) fn new(problem: BeamProblem<'a>, kappa: f64) -> Self {
        let sys = problem.system;
        let c = 1.0 / (problem.newmark.beta * problem.dt * problem.dt);
        let mut base = sys.k0.clone();
        base.axpy(c, &sys.mass);
        if kappa != 0.0 {
            base.axpy(kappa, &sys.h_gram);
        }
        let k1 = BandMatrix::zeros(base.dim(), base.half_bandwidth());
        Self {
            eff: base.clone(),
            base,
            k1,
            problem,
            kappa,
            cached: None,
            scratch: DVector::zeros(sys.n_dofs()),
        }
    }

    fn fail(step: usize, e: impl std::fmt::Display) -> Error {
        Error::StepFailure {
            step,
            reason: e.to_string(),
        }
    }

    /// `M a₀ = F₀ − (K0 + K1(0)) u₀ − H (κ u₀ + m₀)`.
    pub(crate) fn initial_acceleration(
        &mut self,
        load0: &DVector<f64>,
        memory0: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let p = self.problem;
        let sys = p.system;
        let u0 = p.u0;
        sys.k1_into(p.axial, 0.0, &mut self.k1).map_err(|e| Self::fail(0, e))?;
        let mut rhs = load0.clone();
        rhs -= sys.k0.mul_vec(u0);
        rhs -= self.k1.mul_vec(u0);
        let mut mem = memory0.clone();
        mem.axpy(self.kappa, u0, 1.0);
        rhs -= sys.h_gram.mul_vec(&mem);
        let lu = sys.mass.lu().map_err(|e| Self::fail(0, e))?;
        lu.solve_in_place(&mut rhs);
        // clears signed zeros
        rhs.apply(|x| *x += 0.0);
        Ok(rhs)
    }

    fn factor(&mut self, step: usize, t: f64) -> Result<()> {
        let p = self.problem;
        if p.axial.is_uniform_in_x() {
            let b = p.axial.value(0.5, t);
            if !b.is_finite() {
                return Err(Self::fail(step, format!("axial force {b} at t = {t}")));
            }
            if matches!(&self.cached, Some((c, _)) if *c == b) {
                return Ok(());
            }
            self.eff.clone_from(&self.base);
            if b != 0.0 {
                self.eff.axpy(b, &p.system.b_gram);
            }
            let lu = self.eff.lu().map_err(|e| Self::fail(step, e))?;
            self.cached = Some((b, lu));
        } else {
            p.system
                .k1_into(p.axial, t, &mut self.k1)
                .map_err(|e| Self::fail(step, e))?;
            self.eff.clone_from(&self.base);
            self.eff.axpy(1.0, &self.k1);
            let lu = self.eff.lu().map_err(|e| Self::fail(step, e))?;
            self.cached = Some((f64::NAN, lu));
        }
        Ok(())
    }

    /// Advances `(u, v, a)` from step `n` to `n + 1`.
    pub(crate) fn advance(
        &mut self,
        n: usize,
        (u, v, a): (&DVector<f64>, &DVector<f64>, &DVector<f64>),
        load: &DVector<f64>,
        memory: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let p = self.problem;
        let (beta, gamma, dt) = (p.newmark.beta, p.newmark.gamma, p.dt);
        let step = n + 1;
        self.factor(step, step as f64 * dt)?;
        let c = 1.0 / (beta * dt * dt);
        let mut pred = u.clone();
        pred.axpy(dt, v, 1.0);
        pred *= c;
        pred.axpy(1.0 / (2.0 * beta) - 1.0, a, 1.0);
        let sys = p.system;
        let mut rhs = load.clone();
        sys.mass.mul_vec_into(&pred, &mut self.scratch);
        rhs += &self.scratch;
        sys.h_gram.mul_vec_into(memory, &mut self.scratch);
        rhs -= &self.scratch;
        let lu = &self.cached.as_ref().expect("factored").1;
        lu.solve_in_place(&mut rhs);
        let mut u_next = rhs;
        u_next.apply(|x| *x += 0.0);
        // a_{n+1} = c u_{n+1} − pred
        let mut a_next = &u_next * c;
        a_next -= &pred;
        let mut v_next = v.clone();
        v_next.axpy(dt * (1.0 - gamma), a, 1.0);
        v_next.axpy(dt * gamma, &a_next, 1.0);
        a_next.apply(|x| *x += 0.0);
        v_next.apply(|x| *x += 0.0);
        if u_next
            .iter()
            .chain(v_next.iter())
            .chain(a_next.iter())
            .any(|x| !x.is_finite())
        {
            return Err(Self::fail(step, "non-finite state"));
        }
        Ok((u_next, v_next, a_next))
    }
}

/// Steps the problem with the instantaneous part of `L` implicit and the
/// kernel history explicit.
pub struct NewmarkStepper<'a> {
    marcher: Marcher<'a>,
    problem: BeamProblem<'a>,
    state: TrajectoryState,
    velocities: Vec<DVector<f64>>,
    accelerations: Vec<DVector<f64>>,
    load: DVector<f64>,
    memory: DVector<f64>,
}

impl<'a> NewmarkStepper<'a> {
    pub fn new(problem: BeamProblem<'a>) -> Result<Self> {
        problem.validate()?;
        let kappa = problem.kernel.map_or(0.0, |k| k.implicit_weight());
        let mut marcher = Marcher::new(problem, kappa);
        let load0 = problem.system.load(problem.load, 0.0)?;
        let memory0 = problem.u0 * (problem.atom() - kappa);
        let a0 = marcher.initial_acceleration(&load0, &memory0)?;
        let n = problem.system.n_dofs();
        Ok(Self {
            marcher,
            problem,
            state: TrajectoryState {
                step: 0,
                t: 0.0,
                u: problem.u0.clone(),
                v: problem.v0.clone(),
                a: a0.clone(),
                history: vec![problem.u0.clone()],
            },
            velocities: vec![problem.v0.clone()],
            accelerations: vec![a0],
            load: load0,
            memory: DVector::zeros(n),
        })
    }

    pub fn state(&self) -> &TrajectoryState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.step >= self.problem.n_steps
    }

    /// One step; returns the new state.
    pub fn step(&mut self) -> Result<&TrajectoryState> {
        let p = self.problem;
        let n = self.state.step;
        if n >= p.n_steps {
            return Err(Error::StepFailure {
                step: n + 1,
                reason: format!("horizon of {} steps exhausted", p.n_steps),
            });
        }
        let t = (n + 1) as f64 * p.dt;
        p.system.load_into(p.load, t, &mut self.load)?;
        match p.kernel {
            Some(k) => k.history_sum(n + 1, &self.state.history, &mut self.memory),
            None => self.memory.fill(0.0),
        }
        let s = &self.state;
        let (u, v, a) = self.marcher.advance(n, (&s.u, &s.v, &s.a), &self.load, &self.memory)?;
        self.state.history.push(u.clone());
        self.velocities.push(v.clone());
        self.accelerations.push(a.clone());
        self.state = TrajectoryState {
            step: n + 1,
            t,
            u,
            v,
            a,
            history: std::mem::take(&mut self.state.history),
        };
        Ok(&self.state)
    }

    pub fn run(mut self) -> Result<Trajectory> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(self.into_trajectory())
    }

    /// The trajectory computed so far.
    pub fn into_trajectory(self) -> Trajectory {
        Trajectory {
            dt: self.problem.dt,
            u: self.state.history,
            v: self.velocities,
            a: self.accelerations,
        }
    }
}

/// Direct solve over the whole horizon.
pub fn solve_direct(problem: BeamProblem<'_>) -> Result<Trajectory> {
    NewmarkStepper::new(problem)?.run()
}
