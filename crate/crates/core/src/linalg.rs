//! Dense Hermitian kernel: Jacobi eigensolver, norms, nullspaces, PSD roots and
//! operator-subspace comparison.
//!
//! Everything downstream goes through [`hermitian_eigendecompose`]. Degenerate
//! eigenvectors are never used individually; callers group eigenvalues with
//! [`HermitianEigensystem::clusters`] and work with the resulting spectral projectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::tolerance::Tolerances;

/// Eigenvalues in ascending order and the unitary whose columns are the eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// A maximal run of eigenvalues within the clustering tolerance of each other.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    /// Mean of the member eigenvalues.
    pub value: f64,
    /// Indices into the ascending eigenvalue list.
    pub members: std::ops::Range<usize>,
}

impl HermitianEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(f(λ)) U*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let ui = u[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += ui * u[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    /// Projector onto the span of the eigenvectors with the given indices.
    pub fn projector(&self, indices: impl IntoIterator<Item = usize>) -> ComplexMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in indices {
            for i in 0..n {
                let ui = u[(i, k)];
                for j in 0..n {
                    out[(i, j)] += ui * u[(j, k)].conj();
                }
            }
        }
        out
    }

    /// Groups consecutive eigenvalues whose gap is at most `tol`.
    pub fn clusters(&self, tol: f64) -> Vec<EigenCluster> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.dim() {
            if k == self.dim() || self.eigenvalues[k] - self.eigenvalues[k - 1] > tol {
                let members = start..k;
                let value =
                    self.eigenvalues[members.clone()].iter().sum::<f64>() / members.len() as f64;
                out.push(EigenCluster { value, members });
                start = k;
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigendecompose(m: &ComplexMatrix) -> Result<HermitianEigensystem> {
    hermitian_eigendecompose_with(m, &Tolerances::DEFAULT)
}

pub fn hermitian_eigendecompose_with(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<HermitianEigensystem> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.frobenius_norm();
    let defect = m.hermitian_defect();
    if defect > tol.herm * scale {
        return Err(Error::NotHermitian { defect });
    }

    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol.jacobi_offdiag * scale;

    let mut converged = scale == 0.0;
    for _ in 0..tol.jacobi_sweeps {
        if converged || off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence {
            sweeps: tol.jacobi_sweeps,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigensystem {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi step zeroing `a[p][q]`: `A ← J* A J`, `V ← V J`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // below rounding level relative to the diagonal: nothing to gain
    if g_abs < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let theta = (aqq - app) / (2.0 * g_abs);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = g.conj() / g_abs;

    // J restricted to (p, q): [[c, s], [-s·phase, c·phase]]
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = phase * (-s);
    let jqq = phase * c;

    let n = a.rows();
    for r in 0..n {
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        a[(r, p)] = arp * jpp + arq * jqp;
        a[(r, q)] = arp * jpq + arq * jqq;
    }
    for col in 0..n {
        let apc = a[(p, col)];
        let aqc = a[(q, col)];
        a[(p, col)] = jpp.conj() * apc + jqp.conj() * aqc;
        a[(q, col)] = jpq.conj() * apc + jqq.conj() * aqc;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp * jpp + vrq * jqp;
        v[(r, q)] = vrp * jpq + vrq * jqq;
    }
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.frobenius_norm() == 0.0 {
        return 0.0;
    }
    let gram = &m.adjoint() * m;
    match hermitian_eigendecompose(&gram) {
        Ok(eig) => eig
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt(),
        // the Gram matrix is Hermitian by construction; fall back to the Frobenius bound
        Err(_) => m.frobenius_norm(),
    }
}

/// Orthonormal basis (as column vectors) of `{x : ‖Mx‖ ≤ tol·‖M‖·‖x‖}`.
pub fn nullspace(m: &ComplexMatrix, tol: f64) -> Vec<Vec<C64>> {
    nullspace_scaled(m, tol, operator_norm(m))
}

/// Orthonormal basis of `{x : ‖Mx‖ ≤ tol·scale·‖x‖}` for a caller-chosen scale.
///
/// Candidate directions are eigenvectors of `M` itself when it is Hermitian and of
/// `M*M` otherwise; each one is accepted on its directly measured residual `‖M v‖`,
/// which is far more accurate than the square root of a tiny Gram eigenvalue.
pub fn nullspace_scaled(m: &ComplexMatrix, tol: f64, scale: f64) -> Vec<Vec<C64>> {
    let n = m.cols();
    if m.frobenius_norm() == 0.0 {
        return OperatorSubspace::full_vectors(n);
    }
    let hermitian = m.is_square() && m.hermitian_defect() <= 1e-12 * m.frobenius_norm();
    let candidates = if hermitian {
        m.hermitian_part()
    } else {
        (&m.adjoint() * m).hermitian_part()
    };
    let eig = match hermitian_eigendecompose(&candidates) {
        Ok(e) => e,
        Err(_) => return Vec::new(),
    };
    let threshold = tol * scale;
    (0..n)
        .map(|k| eig.eigenvectors.column(k))
        .filter(|col| vector_norm(&m.mul_vec(col)) <= threshold)
        .collect()
}

/// `n − dim nullspace(M)` at the given tolerance.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> usize {
    m.cols() - nullspace(m, tol).len()
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    sqrt_psd_with(m, &Tolerances::DEFAULT)
}

pub fn sqrt_psd_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = hermitian_eigendecompose_with(m, tol)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -tol.psd {
            return Err(Error::NotPositive { eigenvalue: lowest });
        }
    }
    Ok(eig.map_spectrum(|x| x.max(0.0).sqrt()).hermitian_part())
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt with one reorthogonalization pass; vectors whose
/// residual falls below `drop_tol` are discarded.
pub fn gram_schmidt(vectors: &[Vec<C64>], drop_tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let norm = vector_norm(&w);
        if norm > drop_tol {
            basis.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// A linear subspace of `d × d` matrices with an orthonormal basis under `tr(A*B)`.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    dim_hilbert: usize,
    basis: Vec<ComplexMatrix>,
}

impl OperatorSubspace {
    pub fn zero(dim_hilbert: usize) -> Self {
        Self {
            dim_hilbert,
            basis: Vec::new(),
        }
    }

    /// Wraps vectorized basis vectors that are already orthonormal.
    pub fn from_orthonormal_vecs(dim_hilbert: usize, vecs: &[Vec<C64>]) -> Self {
        let basis = vecs
            .iter()
            .map(|v| ComplexMatrix::unvec(v, dim_hilbert))
            .collect();
        Self { dim_hilbert, basis }
    }

    /// Orthonormalizes an arbitrary spanning set, dropping dependent members.
    pub fn span(dim_hilbert: usize, spanning: &[ComplexMatrix], drop_tol: f64) -> Self {
        let vecs: Vec<Vec<C64>> = spanning.iter().map(ComplexMatrix::vec).collect();
        Self::from_orthonormal_vecs(dim_hilbert, &gram_schmidt(&vecs, drop_tol))
    }

    /// All `d²` matrix units.
    pub fn full(dim_hilbert: usize) -> Self {
        let vecs = Self::full_vectors(dim_hilbert * dim_hilbert);
        Self::from_orthonormal_vecs(dim_hilbert, &vecs)
    }

    /// Standard basis of `C^n`.
    pub fn full_vectors(n: usize) -> Vec<Vec<C64>> {
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| if i == k { C64::new(1.0, 0.0) } else { ZERO })
                    .collect()
            })
            .collect()
    }

    pub fn dim_hilbert(&self) -> usize {
        self.dim_hilbert
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.hs_inner(b) - target).norm());
            }
        }
        worst
    }
}

/// Orthogonal projector onto `S` acting on column-stacked `d²` coordinates.
pub fn subspace_projector(s: &OperatorSubspace) -> ComplexMatrix {
    let d2 = s.dim_hilbert * s.dim_hilbert;
    let mut p = ComplexMatrix::zeros(d2, d2);
    for b in &s.basis {
        let v = b.vec();
        for i in 0..d2 {
            if v[i] == ZERO {
                continue;
            }
            for j in 0..d2 {
                p[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubspaceComparison {
    pub equal: bool,
    pub dim_a: usize,
    pub dim_b: usize,
    /// Frobenius distance between the two orthogonal projectors.
    pub distance: f64,
}

pub fn subspaces_equal(
    a: &OperatorSubspace,
    b: &OperatorSubspace,
    tol: f64,
) -> Result<SubspaceComparison> {
    if a.dim_hilbert != b.dim_hilbert {
        return Err(Error::DimensionMismatch {
            expected: a.dim_hilbert,
            found: b.dim_hilbert,
        });
    }
    let distance = (&subspace_projector(a) - &subspace_projector(b)).frobenius_norm();
    Ok(SubspaceComparison {
        equal: distance <= tol,
        dim_a: a.dim(),
        dim_b: b.dim(),
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random_hermitian(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
        rng.gaussian_matrix(n, n).hermitian_part()
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = hermitian_eigendecompose(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_is_sorted() {
        let m = ComplexMatrix::from_real_diagonal(&[0.75, 0.25]);
        let eig = hermitian_eigendecompose(&m).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.25, 0.75]);
        // permutation of the standard basis
        assert!((eig.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = SeededRng::new(6);
        let m = random_hermitian(&mut rng, 6);
        let eig = hermitian_eigendecompose(&m).unwrap();
        let err = (&eig.reconstruct() - &m).frobenius_norm() / m.frobenius_norm();
        assert!(err < 1e-10, "reconstruction error {err}");
        let u = &eig.eigenvectors;
        let gram = &u.adjoint() * u;
        assert!((&gram - &ComplexMatrix::identity(6)).frobenius_norm() < 1e-9);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigendecompose_errors() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eigendecompose(&rect),
            Err(Error::NotSquare { .. })
        ));
        let jordan = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eigendecompose(&jordan),
            Err(Error::NotHermitian { .. })
        ));
        let mut strict = Tolerances::DEFAULT;
        strict.jacobi_sweeps = 0;
        let mut rng = SeededRng::new(1);
        let m = random_hermitian(&mut rng, 5);
        assert!(matches!(
            hermitian_eigendecompose_with(&m, &strict),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
        let d = ComplexMatrix::from_real_diagonal(&[0.3, 0.8]);
        assert!((operator_norm(&d) - 0.8).abs() < 1e-15);
        let jordan = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((operator_norm(&jordan) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nullspace_examples() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let ns = nullspace(&d, 1e-10);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][1].norm() - 1.0).abs() < 1e-14);

        let inv =
            ComplexMatrix::from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 3.0]])
                .unwrap();
        assert!(nullspace(&inv, 1e-10).is_empty());

        let mut rng = SeededRng::new(85);
        let left = rng.gaussian_matrix(8, 5);
        let right = rng.gaussian_matrix(5, 8);
        let m = &left * &right;
        let ns = nullspace(&m, 1e-10);
        assert_eq!(ns.len(), 3);
        for x in &ns {
            assert!(vector_norm(&m.mul_vec(x)) < 1e-10 * operator_norm(&m));
        }
    }

    #[test]
    fn sqrt_psd_examples() {
        let i = ComplexMatrix::identity(3);
        assert!((&sqrt_psd(&i).unwrap() - &i).frobenius_norm() < 1e-15);
        let d = ComplexMatrix::from_real_diagonal(&[4.0, 0.25]);
        let r = sqrt_psd(&d).unwrap();
        let want = ComplexMatrix::from_real_diagonal(&[2.0, 0.5]);
        assert!((&r - &want).frobenius_norm() < 1e-15);

        let mut rng = SeededRng::new(4);
        let g = rng.gaussian_matrix(5, 5);
        let m = &g.adjoint() * &g;
        let r = sqrt_psd(&m).unwrap();
        assert!((&(&r * &r) - &m).frobenius_norm() < 1e-10 * m.frobenius_norm());

        let neg = ComplexMatrix::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(sqrt_psd(&neg), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn projector_examples() {
        let empty = OperatorSubspace::zero(2);
        assert_eq!(subspace_projector(&empty).frobenius_norm(), 0.0);
        let full = OperatorSubspace::full(2);
        assert_eq!(subspace_projector(&full), ComplexMatrix::identity(4));
    }

    #[test]
    fn subspace_distance_examples() {
        let e11 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let e22 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let s1 = OperatorSubspace::span(2, &[e11], 1e-12);
        let s2 = OperatorSubspace::span(2, &[e22], 1e-12);
        let same = subspaces_equal(&s1, &s1, 1e-8).unwrap();
        assert!(same.equal && same.distance == 0.0);
        let diff = subspaces_equal(&s1, &s2, 1e-8).unwrap();
        assert!(!diff.equal);
        assert!((diff.distance - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            subspaces_equal(&s1, &OperatorSubspace::zero(3), 1e-8),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rotated_basis_is_same_subspace() {
        let mut rng = SeededRng::new(21);
        let mats: Vec<ComplexMatrix> = (0..3).map(|_| rng.gaussian_matrix(3, 3)).collect();
        let s1 = OperatorSubspace::span(3, &mats, 1e-12);
        // second basis: unitary mixing of the first
        let u = rng.haar_unitary(3);
        let mixed: Vec<ComplexMatrix> = (0..3)
            .map(|j| {
                let mut acc = ComplexMatrix::zeros(3, 3);
                for (k, b) in s1.basis().iter().enumerate() {
                    acc = &acc + &b.scale(u[(k, j)]);
                }
                acc
            })
            .collect();
        let s2 = OperatorSubspace::span(3, &mixed, 1e-12);
        let cmp = subspaces_equal(&s1, &s2, 1e-8).unwrap();
        assert!(cmp.equal, "distance {}", cmp.distance);
    }
}
