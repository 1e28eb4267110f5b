use nalgebra::DVector;

use crate::{Error, Result};

/// Uniform mesh of `(0, 1)` with cubic Hermite elements.
///
/// Each node carries a deflection and a slope. The four DOFs at `x = 0` and
/// `x = 1` are clamped, so the active DOFs are the `2(n − 1)` unknowns of the
/// interior nodes, ordered `(w₁, w₁', w₂, w₂', …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamMesh {
    n_elems: usize,
    h: f64,
}

impl BeamMesh {
    pub fn new(n_elems: usize) -> Result<Self> {
        if n_elems < 2 {
            return Err(Error::NoInteriorDofs { n_elems });
        }
        Ok(Self {
            n_elems,
            h: 1.0 / n_elems as f64,
        })
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_elems {
            1.0
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_elems).map(|i| self.node(i)).collect()
    }

    pub fn n_raw_dofs(&self) -> usize {
        2 * (self.n_elems + 1)
    }

    pub fn n_active(&self) -> usize {
        2 * (self.n_elems + 1) - 4
    }

    /// Global `(deflection, slope)` indices of node `i` before clamping.
    pub fn dof_map(&self, node: usize) -> (usize, usize) {
        (2 * node, 2 * node + 1)
    }

    pub fn is_clamped(&self, raw: usize) -> bool {
        raw < 2 || raw >= 2 * self.n_elems
    }

    pub fn active_index(&self, raw: usize) -> Option<usize> {
        (!self.is_clamped(raw)).then(|| raw - 2)
    }

    /// Active indices of the four local DOFs of element `e`.
    pub fn element_dofs(&self, e: usize) -> [Option<usize>; 4] {
        let base = 2 * e;
        [0, 1, 2, 3].map(|k| self.active_index(base + k))
    }

    /// Element containing `x` and the local coordinate `ξ ∈ [0, 1]`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = x.clamp(0.0, 1.0) * self.n_elems as f64;
        let e = (s as usize).min(self.n_elems - 1);
        (e, s - e as f64)
    }

    /// `d^order/dx^order` of the discrete function with active DOFs `dofs`.
    pub fn evaluate(&self, dofs: &DVector<f64>, x: f64, order: usize) -> f64 {
        let (e, xi) = self.locate(x);
        let shape = hermite(xi, self.h, order);
        self.element_dofs(e)
            .iter()
            .zip(shape)
            .map(|(d, s)| d.map_or(0.0, |i| dofs[i] * s))
            .sum()
    }

    /// Hermite interpolant of `f` with slope `df` at the interior nodes.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_active());
        for i in 1..self.n_elems {
            let x = self.node(i);
            out[2 * (i - 1)] = f(x);
            out[2 * (i - 1) + 1] = df(x);
        }
        out
    }
}

/// Hermite cubic shape functions (or derivatives in `x`) on an element of
/// length `h`, local DOF order `(w_a, w_a', w_b, w_b')`.
pub fn hermite(xi: f64, h: f64, order: usize) -> [f64; 4] {
    let x2 = xi * xi;
    let x3 = x2 * xi;
    match order {
        0 => [
            1.0 - 3.0 * x2 + 2.0 * x3,
            h * (xi - 2.0 * x2 + x3),
            3.0 * x2 - 2.0 * x3,
            h * (x3 - x2),
        ],
        1 => [
            (6.0 * x2 - 6.0 * xi) / h,
            1.0 - 4.0 * xi + 3.0 * x2,
            (6.0 * xi - 6.0 * x2) / h,
            3.0 * x2 - 2.0 * xi,
        ],
        2 => [
            (12.0 * xi - 6.0) / (h * h),
            (6.0 * xi - 4.0) / h,
            (6.0 - 12.0 * xi) / (h * h),
            (6.0 * xi - 2.0) / h,
        ],
        3 => [12.0 / (h * h * h), 6.0 / (h * h), -12.0 / (h * h * h), 6.0 / (h * h)],
        _ => [0.0; 4],
    }
}
