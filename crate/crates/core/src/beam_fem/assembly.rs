use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::band::BandMatrix;
use super::mesh::{hermite, BeamMesh};
use crate::coefficients::{SpaceField, SpaceTimeField};
use crate::quadrature::{gauss4, gauss8};
use crate::{Error, Result};

const HALF_BANDWIDTH: usize = 3;

type Local = [[f64; 4]; 4];

/// Assembled operators of the clamped beam on the active DOFs.
#[derive(Debug, Clone)]
pub struct BeamSystem {
    mesh: BeamMesh,
    /// `∫ R φᵢ φⱼ` (equal to `h_gram` when no density is given).
    pub mass: BandMatrix,
    /// `∫ φᵢ φⱼ`, the Gram matrix of `H = L²(0, 1)`.
    pub h_gram: BandMatrix,
    /// `∫ c φᵢ'' φⱼ''`.
    pub k0: BandMatrix,
    /// `∫ (φᵢ φⱼ + φᵢ' φⱼ' + φᵢ'' φⱼ'')`, the Gram matrix of `V = H²₀`.
    pub v_gram: BandMatrix,
    /// `∫ φⱼ'' φᵢ`; `K1(t) = b(t) · b_gram` when `b` is uniform in `x`.
    pub b_gram: BandMatrix,
}

/// Sub-intervals of `[a, b]` split at `breaks`, each split into four when the
/// coefficient varies on a scale shorter than the piece.
fn pieces(a: f64, b: f64, breaks: &[f64], feature: Option<f64>) -> Vec<(f64, f64)> {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|p| *p > a && *p < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        let sub = match feature {
            Some(f) if f < len => 4,
            _ => 1,
        };
        let step = len / sub as f64;
        for s in 0..sub {
            out.push((w[0] + s as f64 * step, w[0] + (s + 1) as f64 * step));
        }
    }
    out
}

fn quadrature_points(mesh: &BeamMesh, e: usize, breaks: &[f64], feature: Option<f64>) -> Vec<(f64, f64)> {
    let a = mesh.node(e);
    let b = mesh.node(e + 1);
    let near = breaks.iter().copied().filter(|p| *p > a && *p < b).collect::<Vec<_>>();
    let feature = feature.filter(|_| !near.is_empty() || breaks.is_empty());
    pieces(a, b, &near, feature)
        .into_iter()
        .flat_map(|(lo, hi)| gauss4().mapped(lo, hi).collect::<Vec<_>>())
        .collect()
}

fn scatter(mesh: &BeamMesh, e: usize, local: &Local, out: &mut BandMatrix) {
    let dofs = mesh.element_dofs(e);
    for (a, da) in dofs.iter().enumerate() {
        let Some(i) = da else { continue };
        for (b, db) in dofs.iter().enumerate() {
            let Some(j) = db else { continue };
            if local[a][b] != 0.0 {
                out.add(*i, *j, local[a][b]);
            }
        }
    }
}

fn check(local: &Local, element: usize) -> Result<()> {
    if local.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Assembly { element })
    }
}

struct ElementBlock {
    mass: Local,
    h: Local,
    k0: Local,
    v: Local,
    b: Local,
}

impl BeamSystem {
    /// Assembles `M`, `H`, `K0`, `V` and the `b`-template on `mesh`.
    pub fn assemble(mesh: &BeamMesh, c: &dyn SpaceField, density: Option<&dyn SpaceField>) -> Result<Self> {
        let mut breaks = c.breakpoints();
        let mut feature = c.feature_width();
        if let Some(r) = density {
            breaks.extend(r.breakpoints());
            feature = match (feature, r.feature_width()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        let h = mesh.h();
        let blocks: Vec<ElementBlock> = (0..mesh.n_elems())
            .into_par_iter()
            .map(|e| {
                let x0 = mesh.node(e);
                let mut blk = ElementBlock {
                    mass: [[0.0; 4]; 4],
                    h: [[0.0; 4]; 4],
                    k0: [[0.0; 4]; 4],
                    v: [[0.0; 4]; 4],
                    b: [[0.0; 4]; 4],
                };
                for (x, w) in quadrature_points(mesh, e, &breaks, feature) {
                    let xi = (x - x0) / h;
                    let n0 = hermite(xi, h, 0);
                    let n1 = hermite(xi, h, 1);
                    let n2 = hermite(xi, h, 2);
                    let cv = c.value(x);
                    let rv = density.map_or(1.0, |r| r.value(x));
                    for a in 0..4 {
                        for b in 0..4 {
                            let vv = n0[a] * n0[b];
                            blk.h[a][b] += w * vv;
                            blk.mass[a][b] += w * rv * vv;
                            blk.k0[a][b] += w * cv * n2[a] * n2[b];
                            blk.v[a][b] += w * (vv + n1[a] * n1[b] + n2[a] * n2[b]);
                            blk.b[a][b] += w * n2[b] * n0[a];
                        }
                    }
                }
                for m in [&blk.mass, &blk.k0] {
                    check(m, e)?;
                }
                Ok(blk)
            })
            .collect::<Result<_>>()?;

        let n = mesh.n_active();
        let mut sys = Self {
            mesh: mesh.clone(),
            mass: BandMatrix::zeros(n, HALF_BANDWIDTH),
            h_gram: BandMatrix::zeros(n, HALF_BANDWIDTH),
            k0: BandMatrix::zeros(n, HALF_BANDWIDTH),
            v_gram: BandMatrix::zeros(n, HALF_BANDWIDTH),
            b_gram: BandMatrix::zeros(n, HALF_BANDWIDTH),
        };
        for (e, blk) in blocks.iter().enumerate() {
            scatter(mesh, e, &blk.mass, &mut sys.mass);
            scatter(mesh, e, &blk.h, &mut sys.h_gram);
            scatter(mesh, e, &blk.k0, &mut sys.k0);
            scatter(mesh, e, &blk.v, &mut sys.v_gram);
            scatter(mesh, e, &blk.b, &mut sys.b_gram);
        }
        Ok(sys)
    }

    pub fn mesh(&self) -> &BeamMesh {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_active()
    }

    /// `K1(t)_{ij} = ∫ b(x, t) φⱼ'' φᵢ`, written into `out`.
    pub fn k1_into(&self, b: &dyn SpaceTimeField, t: f64, out: &mut BandMatrix) -> Result<()> {
        out.fill(0.0);
        if b.is_uniform_in_x() {
            let s = b.value(0.5, t);
            if !s.is_finite() {
                return Err(Error::Assembly { element: 0 });
            }
            if s != 0.0 {
                out.axpy(s, &self.b_gram);
            }
            return Ok(());
        }
        let mesh = &self.mesh;
        let h = mesh.h();
        let breaks = b.breakpoints_x(t);
        for e in 0..mesh.n_elems() {
            let x0 = mesh.node(e);
            let mut local = [[0.0; 4]; 4];
            for (x, w) in quadrature_points(mesh, e, &breaks, None) {
                let xi = (x - x0) / h;
                let n0 = hermite(xi, h, 0);
                let n2 = hermite(xi, h, 2);
                let bv = b.value(x, t);
                for a in 0..4 {
                    for c in 0..4 {
                        local[a][c] += w * bv * n2[c] * n0[a];
                    }
                }
            }
            check(&local, e)?;
            scatter(mesh, e, &local, out);
        }
        Ok(())
    }

    pub fn k1(&self, b: &dyn SpaceTimeField, t: f64) -> Result<BandMatrix> {
        let mut out = BandMatrix::zeros(self.n_dofs(), HALF_BANDWIDTH);
        self.k1_into(b, t, &mut out)?;
        Ok(out)
    }

    /// Load vector `Fᵢ = ∫ h(x, t) φᵢ`, written into `out`.
    pub fn load_into(&self, field: &dyn SpaceTimeField, t: f64, out: &mut DVector<f64>) -> Result<()> {
        out.fill(0.0);
        let mesh = &self.mesh;
        let h = mesh.h();
        let support = field.support_x(t);
        for e in 0..mesh.n_elems() {
            let (mut a, mut b) = (mesh.node(e), mesh.node(e + 1));
            let x0 = a;
            if let Some((lo, hi)) = support {
                a = a.max(lo);
                b = b.min(hi);
                if a >= b {
                    continue;
                }
            }
            let dofs = mesh.element_dofs(e);
            let mut local = [0.0; 4];
            let panel = (b - a) / 4.0;
            for p in 0..4 {
                let lo = a + p as f64 * panel;
                for (x, w) in gauss8().mapped(lo, lo + panel) {
                    let v = field.value(x, t);
                    if v == 0.0 {
                        continue;
                    }
                    let n0 = hermite((x - x0) / h, h, 0);
                    for k in 0..4 {
                        local[k] += w * v * n0[k];
                    }
                }
            }
            if local.iter().any(|v| !v.is_finite()) {
                return Err(Error::Assembly { element: e });
            }
            for (k, d) in dofs.iter().enumerate() {
                if let Some(i) = d {
                    out[*i] += local[k];
                }
            }
        }
        Ok(())
    }

    pub fn load(&self, field: &dyn SpaceTimeField, t: f64) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.n_dofs());
        self.load_into(field, t, &mut out)?;
        Ok(out)
    }

    /// `(‖u‖_V, ‖v‖_H)`.
    pub fn norms(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<(f64, f64)> {
        discrete_norms(self, u, v)
    }
}

/// `(‖u‖_V, ‖v‖_H)` with `‖u‖²_V = uᵀ V u` and `‖v‖²_H = vᵀ H v`.
pub fn discrete_norms(system: &BeamSystem, u: &DVector<f64>, v: &DVector<f64>) -> Result<(f64, f64)> {
    let n = system.n_dofs();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(Error::Shape { expected: n, got: len });
        }
    }
    let nv = system.v_gram.bilinear(u, u).max(0.0).sqrt();
    let nh = system.h_gram.bilinear(v, v).max(0.0).sqrt();
    Ok((nv, nh))
}

/// Constants of the Gårding inequality `a₀(u, u) ≥ μ‖u‖²_V − λ‖u‖²_H` and the
/// continuity bounds of `a₀`, `a₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityConstants {
    pub mu: f64,
    pub lambda: f64,
    /// `C₀ = ‖c‖_∞`.
    pub c0_cap: f64,
    /// `C₀'`, zero for time-independent `c`.
    pub c0_prime: f64,
    /// `C₁ = ‖b‖_∞`.
    pub c1_cap: f64,
    pub c0: f64,
    pub c1: f64,
    /// Implied interpolation constant `λ / c₀`.
    pub c_half: f64,
    /// `min eig(K0 + λH − μV)` with the computed constants.
    pub garding_min_eig: f64,
}

fn min_generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Eigen("Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    let mut s = &linv * a * linv.transpose();
    s = 0.5 * (&s + s.transpose());
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigen solver did not converge".into()))?;
    Ok(eig.eigenvalues.min())
}

/// `μ = c₀/2` and the smallest `λ ≥ 0` making `K0 + λH − μV` positive
/// semidefinite, from the generalized eigenproblem `(K0 − μV) x = σ H x`.
pub fn coercivity_constants(system: &BeamSystem, c0: f64, c1: f64, b_inf: f64) -> Result<CoercivityConstants> {
    if !(c0 > 0.0 && c1 >= c0) {
        return Err(Error::invalid("c0", format!("need 0 < c0 <= c1, got {c0}, {c1}")));
    }
    let mu = c0 / 2.0;
    let k0 = system.k0.to_dense();
    let v = system.v_gram.to_dense();
    let h = system.h_gram.to_dense();
    let a = &k0 - mu * &v;
    let sigma = min_generalized_eig(&a, &h)?;
    let lambda = (-sigma).max(0.0);
    let check = &a + lambda * &h;
    let check = 0.5 * (&check + check.transpose());
    let garding_min_eig = SymmetricEigen::try_new(check, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigen solver did not converge".into()))?
        .eigenvalues
        .min();
    Ok(CoercivityConstants {
        mu,
        lambda,
        c0_cap: c1,
        c0_prime: 0.0,
        c1_cap: b_inf.abs(),
        c0,
        c1,
        c_half: lambda / c0,
        garding_min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Constant;

    fn classical_bending(c: f64, h: f64) -> [[f64; 4]; 4] {
        let s = c / h.powi(3);
        [
            [12.0 * s, 6.0 * h * s, -12.0 * s, 6.0 * h * s],
            [6.0 * h * s, 4.0 * h * h * s, -6.0 * h * s, 2.0 * h * h * s],
            [-12.0 * s, -6.0 * h * s, 12.0 * s, -6.0 * h * s],
            [6.0 * h * s, 2.0 * h * h * s, -6.0 * h * s, 4.0 * h * h * s],
        ]
    }

    fn classical_mass(h: f64) -> [[f64; 4]; 4] {
        let s = h / 420.0;
        [
            [156.0 * s, 22.0 * h * s, 54.0 * s, -13.0 * h * s],
            [22.0 * h * s, 4.0 * h * h * s, 13.0 * h * s, -3.0 * h * h * s],
            [54.0 * s, 13.0 * h * s, 156.0 * s, -22.0 * h * s],
            [-13.0 * h * s, -3.0 * h * h * s, -22.0 * h * s, 4.0 * h * h * s],
        ]
    }

    /// Element matrices recovered from the interior block of a 2-element
    /// mesh would mix elements, so integrate one element directly.
    fn element(c: f64, h: f64) -> (Local, Local) {
        let mut k = [[0.0; 4]; 4];
        let mut m = [[0.0; 4]; 4];
        for (xi, w) in gauss4().mapped(0.0, 1.0) {
            let n0 = hermite(xi, h, 0);
            let n2 = hermite(xi, h, 2);
            for a in 0..4 {
                for b in 0..4 {
                    k[a][b] += w * h * c * n2[a] * n2[b];
                    m[a][b] += w * h * n0[a] * n0[b];
                }
            }
        }
        (k, m)
    }

    #[test]
    fn element_matrices_match_closed_forms() {
        for (c, h) in [(1.0, 0.5), (3.5, 0.1), (0.7, 1.0 / 64.0)] {
            let (k, m) = element(c, h);
            let (kc, mc) = (classical_bending(c, h), classical_mass(h));
            for a in 0..4 {
                for b in 0..4 {
                    assert!((k[a][b] - kc[a][b]).abs() < 1e-12 * kc[0][0].abs(), "K[{a}][{b}]");
                    assert!((m[a][b] - mc[a][b]).abs() < 1e-14, "M[{a}][{b}]");
                }
            }
        }
    }

    #[test]
    fn two_element_mesh_assembles_interior_node() {
        let mesh = BeamMesh::new(2).unwrap();
        let sys = BeamSystem::assemble(&mesh, &Constant(1.0), None).unwrap();
        let h = 0.5;
        let kc = classical_bending(1.0, h);
        let mc = classical_mass(h);
        assert!((sys.k0.get(0, 0) - 2.0 * kc[0][0]).abs() < 1e-10);
        assert!((sys.k0.get(1, 1) - 2.0 * kc[1][1]).abs() < 1e-10);
        assert!(sys.k0.get(0, 1).abs() < 1e-10);
        assert!((sys.mass.get(0, 0) - 2.0 * mc[0][0]).abs() < 1e-14);
    }

    #[test]
    fn stiffness_is_linear_in_c() {
        let mesh = BeamMesh::new(6).unwrap();
        let a = BeamSystem::assemble(&mesh, &Constant(1.3), None).unwrap();
        let b = BeamSystem::assemble(&mesh, &Constant(2.6), None).unwrap();
        let mut twice = a.k0.clone();
        twice.scale(2.0);
        assert_eq!(twice, b.k0);
    }

    #[test]
    fn symmetry() {
        let mesh = BeamMesh::new(10).unwrap();
        let sys = BeamSystem::assemble(&mesh, &Constant(2.0), None).unwrap();
        for m in [&sys.k0, &sys.mass, &sys.v_gram, &sys.h_gram] {
            let d = m.to_dense();
            assert!((&d - d.transpose()).amax() <= 1e-13 * d.amax());
        }
    }

    #[test]
    fn norms_and_shape_errors() {
        let mesh = BeamMesh::new(4).unwrap();
        let sys = BeamSystem::assemble(&mesh, &Constant(1.0), None).unwrap();
        let z = DVector::zeros(sys.n_dofs());
        assert_eq!(sys.norms(&z, &z).unwrap(), (0.0, 0.0));
        let u = DVector::from_fn(sys.n_dofs(), |i, _| 1.0 + i as f64);
        let (nv, nh) = sys.norms(&u, &u).unwrap();
        assert!(nh <= nv);
        assert!(matches!(
            sys.norms(&DVector::zeros(3), &z),
            Err(Error::Shape { expected: 6, got: 3 })
        ));
    }

    #[test]
    fn coercivity_constants_scale_with_c() {
        let mesh = BeamMesh::new(16).unwrap();
        let a = BeamSystem::assemble(&mesh, &Constant(1.0), None).unwrap();
        let ca = coercivity_constants(&a, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(ca.mu, 0.5);
        assert_eq!(ca.c1_cap, 0.0);
        assert!(ca.garding_min_eig >= -1e-10 * a.k0.max_abs());
        let b = BeamSystem::assemble(&mesh, &Constant(3.0), None).unwrap();
        let cb = coercivity_constants(&b, 3.0, 3.0, 0.0).unwrap();
        assert!((cb.lambda - 3.0 * ca.lambda).abs() <= 1e-8 * cb.lambda.max(1.0));
    }

    #[test]
    fn pieces_split_at_breakpoints() {
        let p = pieces(0.0, 1.0, &[0.25], Some(0.1));
        assert_eq!(p.len(), 8);
        assert_eq!(p[3].1, 0.25);
        assert_eq!(pieces(0.0, 1.0, &[], None), vec![(0.0, 1.0)]);
    }
}
