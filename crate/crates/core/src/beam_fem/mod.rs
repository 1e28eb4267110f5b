//! Cubic Hermite discretization of the clamped beam on `(0, 1)`.
//!
//! Operators act on the active (interior) DOFs:
//!
//! ```text
//! a₀(u, v) = ∫ c u'' v''    →  K0
//! a₁(u, v) = ∫ b u'' v      →  K1(t)
//! ⟨u, v⟩   = ∫ u v          →  H  (M when a density is given)
//! ```

mod assembly;
mod band;
mod mesh;

pub use assembly::{coercivity_constants, discrete_norms, BeamSystem, CoercivityConstants};
pub use band::{BandLu, BandMatrix};
pub use mesh::{hermite, BeamMesh};

/// See [`BeamMesh::new`].
pub fn build_mesh(n_elems: usize) -> crate::Result<BeamMesh> {
    BeamMesh::new(n_elems)
}
