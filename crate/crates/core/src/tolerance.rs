//! Every numerical threshold in the crate lives here.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity: `‖M − M*‖_F ≤ herm · ‖M‖_F`.
    pub herm: f64,
    /// Eigenvalues down to `−psd` (and up to `1 + psd` for effects) are clipped, not rejected.
    pub psd: f64,
    pub orth: f64,
    pub recon: f64,
    /// Relative singular-value threshold for [`crate::linalg::nullspace`].
    pub nullspace: f64,
    /// Eigenvalues closer than this are one cluster; also the bin-edge snapping width.
    pub cluster: f64,
    /// Commutators are zero below `comm · max‖Ei‖`.
    pub comm: f64,
    /// An effect set is a resolution when `‖Σ Ei² − I‖ ≤ norm`.
    pub norm: f64,
    /// Projector Frobenius distance under which two subspaces are equal.
    pub subspace: f64,
    /// A block `P B Q` is nonzero when `‖P B Q‖ > witness · ‖B‖`.
    pub witness: f64,
    pub jacobi_sweeps: usize,
    /// Jacobi stops once the off-diagonal Frobenius mass is below `jacobi_offdiag · ‖M‖_F`.
    pub jacobi_offdiag: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        herm: 1e-10,
        psd: 1e-10,
        orth: 1e-9,
        recon: 1e-9,
        nullspace: 1e-10,
        cluster: 1e-9,
        comm: 1e-9,
        norm: 1e-9,
        subspace: 1e-8,
        witness: 1e-9,
        jacobi_sweeps: 30,
        jacobi_offdiag: 1e-13,
    };
}
