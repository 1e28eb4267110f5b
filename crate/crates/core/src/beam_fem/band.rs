use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Square matrix with entries only for `|i − j| ≤ k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    k: usize,
    /// Row-major, `2k + 1` slots per row; entry `(i, j)` at `i(2k+1) + j − i + k`.
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            data: vec![0.0; n * (2 * k + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.k
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        (i < self.n && j < self.n && i.abs_diff(j) <= self.k).then(|| i * (2 * self.k + 1) + j + self.k - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band of width {}", self.k));
        self.data[s] += v;
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &BandMatrix) {
        assert_eq!((self.n, self.k), (other.n, other.k));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        let w = 2 * self.k + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.k);
            let hi = (i + self.k).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += row[j + self.k - i] * x[j];
            }
            y[i] = acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&self.mul_vec(y))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.n, self.k);
        for i in 0..self.n {
            for j in i.saturating_sub(self.k)..=(i + self.k).min(self.n - 1) {
                t.add(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// LU factorization without pivoting; fill stays inside the band.
    pub fn lu(&self) -> Result<BandLu> {
        let mut a = self.clone();
        let n = self.n;
        let k = self.k;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for p in 0..n {
            let pivot = a.get(p, p);
            if !(pivot.abs() > 1e-14 * scale) || !pivot.is_finite() {
                return Err(Error::Domain(format!("zero pivot {pivot:e} at row {p}")));
            }
            for i in p + 1..=(p + k).min(n - 1) {
                let f = a.get(i, p) / pivot;
                if f == 0.0 {
                    continue;
                }
                let s = a.slot(i, p).expect("in band");
                a.data[s] = f;
                for j in p + 1..=(p + k).min(n - 1) {
                    let v = a.get(p, j);
                    if v != 0.0 {
                        a.add(i, j, -f * v);
                    }
                }
            }
        }
        Ok(BandLu { lu: a })
    }

    /// Writes `row,col,value` for every stored nonzero.
    pub fn write_coo(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let go = |w: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
            writeln!(w, "row,col,value")?;
            for i in 0..self.n {
                for j in i.saturating_sub(self.k)..=(i + self.k).min(self.n - 1) {
                    let v = self.get(i, j);
                    if v != 0.0 {
                        writeln!(w, "{i},{j},{v:.16e}")?;
                    }
                }
            }
            w.flush()
        };
        go(&mut w).map_err(|e| Error::io(path, e))
    }
}

/// Factors of [`BandMatrix::lu`], unit lower triangle stored below the diagonal.
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
}

impl BandLu {
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut DVector<f64>) {
        let a = &self.lu;
        let (n, k) = (a.n, a.k);
        for i in 0..n {
            let mut acc = x[i];
            for j in i.saturating_sub(k)..i {
                acc -= a.get(i, j) * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..=(i + k).min(n - 1) {
                acc -= a.get(i, j) * x[j];
            }
            x[i] = acc / a.get(i, i);
        }
    }
}
