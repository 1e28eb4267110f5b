use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use crate::beam_fem::BeamSystem;
use crate::{Error, Result};

/// Stepper state at `t = step · dt`; `history` holds `u_0 … u_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub step: usize,
    pub t: f64,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub a: DVector<f64>,
    pub history: Vec<DVector<f64>>,
}

impl TrajectoryState {
    pub fn is_finite(&self) -> bool {
        [&self.u, &self.v, &self.a]
            .iter()
            .all(|x| x.iter().all(|v| v.is_finite()))
    }
}

/// Displacement, velocity and acceleration DOFs on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub u: Vec<DVector<f64>>,
    pub v: Vec<DVector<f64>>,
    pub a: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }

    /// `(‖u_n‖_V, ‖v_n‖_H)` for every step.
    pub fn norms(&self, system: &BeamSystem) -> Result<Vec<(f64, f64)>> {
        self.u.iter().zip(&self.v).map(|(u, v)| system.norms(u, v)).collect()
    }

    /// `‖u‖_{E_V} = (∫ ‖u‖²_V dt)^{1/2}` by the trapezoid rule.
    pub fn e_v_norm(&self, system: &BeamSystem) -> f64 {
        e_norm(&self.u, self.dt, |x| system.v_gram.bilinear(x, x))
    }

    /// `‖u‖_{E_H}`.
    pub fn e_h_norm(&self, system: &BeamSystem) -> f64 {
        e_norm(&self.u, self.dt, |x| system.h_gram.bilinear(x, x))
    }

    /// Largest absolute DOF value over all steps.
    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, x| m.max(x.amax()))
    }

    /// Writes `t,d0,d1,…` rows for every `stride`-th step (and the last).
    pub fn write_csv(&self, path: &Path, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let go = |w: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
            write!(w, "t")?;
            for i in 0..self.u.first().map_or(0, |u| u.len()) {
                write!(w, ",d{i}")?;
            }
            writeln!(w)?;
            let last = self.len().saturating_sub(1);
            for (n, u) in self.u.iter().enumerate() {
                if n % stride != 0 && n != last {
                    continue;
                }
                write!(w, "{:.16e}", self.time(n))?;
                for x in u.iter() {
                    write!(w, ",{x:.16e}")?;
                }
                writeln!(w)?;
            }
            w.flush()
        };
        go(&mut w).map_err(|e| Error::io(path, e))
    }
}

/// Trapezoid `(Σ wₙ q(xₙ))^{1/2}` over a uniform grid.
pub fn e_norm(series: &[DVector<f64>], dt: f64, q: impl Fn(&DVector<f64>) -> f64) -> f64 {
    let n = series.len();
    if n < 2 {
        return 0.0;
    }
    let sum: f64 = series
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            w * q(x)
        })
        .sum();
    (sum * dt).max(0.0).sqrt()
}

/// Angular frequency of the largest peak of the Hann-windowed spectrum of
/// `signal`, refined between neighbouring DFT bins by golden-section search.
pub fn dominant_frequency(signal: &[f64], dt: f64) -> Option<f64> {
    let n = signal.len();
    if n < 8 {
        return None;
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let windowed: Vec<f64> = signal
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
            w * (x - mean)
        })
        .collect();
    let power = |omega: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, x) in windowed.iter().enumerate() {
            let (s, c) = (omega * k as f64 * dt).sin_cos();
            re += x * c;
            im -= x * s;
        }
        re * re + im * im
    };
    let bin = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let best = (1..n / 2)
        .map(|k| (k, power(k as f64 * bin)))
        .max_by(|a, b| a.1.total_cmp(&b.1))?
        .0;
    let (mut lo, mut hi) = ((best as f64 - 1.0) * bin, (best as f64 + 1.0) * bin);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if power(a) > power(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    Some(0.5 * (lo + hi))
}
