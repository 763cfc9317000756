//! The Lüders operation `Φ(B) = Σ Ei B Ei` and everything computed from it:
//! the vectorized superoperator, fixed points, the commutant, joint eigenspaces,
//! the fixed-point/commutant equality checks, the channel norm, the equation
//! `Φ(X) = I − X`, and the undisturbed-state test.
//!
//! Vectorization is column stacking, `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::effects::{EffectSet, Normalization};
use crate::error::{Error, Result};
use crate::linalg::{
    gram_schmidt, hermitian_eigendecompose, nullspace_scaled, operator_norm, subspaces_equal,
    OperatorSubspace,
};
use crate::matrix::{ComplexMatrix, C64, ONE};
use crate::rng::SeededRng;

pub struct LuedersOperation {
    set: EffectSet,
    superop: OnceLock<ComplexMatrix>,
}

impl LuedersOperation {
    pub fn new(set: EffectSet) -> Self {
        Self {
            set,
            superop: OnceLock::new(),
        }
    }

    pub fn effect_set(&self) -> &EffectSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// `Σ Ei B Ei`.
    pub fn apply(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        if b.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: b.rows(),
            });
        }
        let mut acc = ComplexMatrix::zeros(d, d);
        for e in self.set.matrices() {
            acc = &acc + &(&(e * b) * e);
        }
        Ok(acc)
    }

    /// The `d² × d²` matrix `Σ Eiᵀ ⊗ Ei`, built on first use.
    pub fn superoperator(&self) -> &ComplexMatrix {
        self.superop.get_or_init(|| {
            let d2 = self.dim() * self.dim();
            let mut s = ComplexMatrix::zeros(d2, d2);
            for e in self.set.matrices() {
                s = &s + &e.transpose().kron(e);
            }
            s
        })
    }

    /// Orthonormal basis of `{B : ‖Φ(B) − B‖_F ≤ tol·‖B‖_F}`.
    pub fn fixed_point_space(&self, tol: f64) -> OperatorSubspace {
        let d = self.dim();
        let shifted = self.superoperator() - &ComplexMatrix::identity(d * d);
        OperatorSubspace::from_orthonormal_vecs(d, &nullspace_scaled(&shifted, tol, 1.0))
    }

    /// `‖Φ‖ = ‖Σ Ei²‖`, with a sampled certificate that no unit-norm operator exceeds it.
    pub fn channel_norm(&self, samples: usize, seed: u64) -> NormCertificate {
        let d = self.dim();
        let norm = operator_norm(self.set.sum_of_squares());
        let image = self
            .apply(&ComplexMatrix::identity(d))
            .expect("identity has the right shape");
        let identity_image_norm = operator_norm(&image);
        let mut rng = SeededRng::new(seed);
        let mut max_sampled: f64 = 0.0;
        for _ in 0..samples {
            let g = rng.gaussian_matrix(d, d);
            let b = g.scale_real(1.0 / operator_norm(&g));
            let out = self.apply(&b).expect("sample has the right shape");
            max_sampled = max_sampled.max(operator_norm(&out));
        }
        NormCertificate {
            norm,
            identity_image_norm,
            max_sampled,
            samples,
            passed: identity_image_norm == norm && max_sampled <= norm + 1e-10,
        }
    }

    /// Solves `Φ(X) = I − X` as the least-squares problem `(S + I) vec(X) = vec(I)`.
    pub fn solve_complement(&self) -> Result<ComplementSolution> {
        let d = self.dim();
        let d2 = d * d;
        let a = self.superoperator() + &ComplexMatrix::identity(d2);
        let normal = (&a.adjoint() * &a).hermitian_part();
        let eig = hermitian_eigendecompose(&normal)?;
        let top = eig.eigenvalues.last().copied().unwrap_or(0.0);
        let bottom = eig.eigenvalues.first().copied().unwrap_or(0.0);
        if bottom <= 1e-12 * top {
            return Err(Error::SingularSystem {
                eigenvalue: bottom.max(0.0).sqrt(),
            });
        }
        let rhs = a.adjoint().mul_vec(&ComplexMatrix::identity(d).vec());
        let mut x = vec![C64::new(0.0, 0.0); d2];
        for (k, &mu) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            let coeff: C64 = v
                .iter()
                .zip(&rhs)
                .map(|(vi, ri)| vi.conj() * ri)
                .sum::<C64>()
                / mu;
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi += coeff * vi;
            }
        }
        let solution = ComplexMatrix::unvec(&x, d);
        let residual =
            (&(&self.apply(&solution)? + &solution) - &ComplexMatrix::identity(d)).frobenius_norm();
        let is_effect = is_effect_matrix(&solution);
        Ok(ComplementSolution {
            solution,
            residual,
            is_effect,
        })
    }

    /// Whether `ρ` is left unchanged by `Φ` and whether it commutes with every effect.
    pub fn is_undisturbed_state(&self, rho: &ComplexMatrix, tol: f64) -> Result<Undisturbed> {
        check_density(rho, self.dim())?;
        let moved = (&self.apply(rho)? - rho).frobenius_norm();
        let max_commutator = self
            .set
            .matrices()
            .map(|e| rho.commutator(e).frobenius_norm())
            .fold(0.0, f64::max);
        Ok(Undisturbed {
            is_fixed: moved <= tol,
            commutes_with_all: max_commutator <= tol,
            displacement: moved,
            max_commutator,
        })
    }
}

fn is_effect_matrix(x: &ComplexMatrix) -> bool {
    let scale = x.frobenius_norm().max(1.0);
    if x.hermitian_defect() > 1e-9 * scale {
        return false;
    }
    match hermitian_eigendecompose(&x.hermitian_part()) {
        Ok(eig) => eig
            .eigenvalues
            .iter()
            .all(|&l| (-1e-9..=1.0 + 1e-9).contains(&l)),
        Err(_) => false,
    }
}

fn check_density(rho: &ComplexMatrix, d: usize) -> Result<()> {
    if rho.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.rows(),
        });
    }
    let reject = |reason: String| Err(Error::NotDensityMatrix { reason });
    if rho.hermitian_defect() > 1e-9 {
        return reject("not Hermitian".into());
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return reject(format!("trace {tr} ≠ 1"));
    }
    let eig = hermitian_eigendecompose(&rho.hermitian_part())?;
    if let Some(&lo) = eig.eigenvalues.first() {
        if lo < -1e-10 {
            return reject(format!("eigenvalue {lo:.3e} < 0"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormCertificate {
    pub norm: f64,
    pub identity_image_norm: f64,
    pub max_sampled: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ComplementSolution {
    pub solution: ComplexMatrix,
    /// `‖Φ(X) + X − I‖_F`.
    pub residual: f64,
    /// Whether the solution is an effect, `0 ≤ X ≤ I`.
    pub is_effect: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Undisturbed {
    pub is_fixed: bool,
    pub commutes_with_all: bool,
    pub displacement: f64,
    pub max_commutator: f64,
}

/// Orthonormal basis of `{B : B Ei = Ei B for all i}`.
///
/// The nullspaces of the commutator maps `ad_E = I ⊗ E − Eᵀ ⊗ I` are intersected one
/// effect at a time. `ad_E` is Hermitian for Hermitian `E`; whenever it leaves the
/// nullspace accumulated so far invariant (always the case for a commuting family)
/// its compression onto that space is diagonalized directly, which avoids squaring
/// small singular values. Otherwise the tall image `ad_E V` goes through the Gram route.
pub fn commutant(set: &EffectSet, tol: f64) -> OperatorSubspace {
    let d = set.dim();
    let d2 = d * d;
    let id = ComplexMatrix::identity(d);
    let scale = set
        .effects()
        .iter()
        .map(|e| e.spectrum().last().copied().unwrap_or(0.0))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let threshold = tol * scale;
    let mut basis = ComplexMatrix::identity(d2);
    for e in set.matrices() {
        if basis.cols() == 0 {
            break;
        }
        let ad = &id.kron(e) - &e.transpose().kron(&id);
        let image = &ad * &basis;
        let compressed = &basis.adjoint() * &image;
        let leak = (&image - &(&basis * &compressed)).frobenius_norm();
        let kept = if leak <= threshold {
            nullspace_scaled(&compressed.hermitian_part(), tol, scale)
        } else {
            nullspace_scaled(&image, tol, scale)
        };
        let cols: Vec<Vec<C64>> = kept.iter().map(|w| basis.mul_vec(w)).collect();
        basis = ComplexMatrix::from_columns(d2, &cols);
    }
    let vecs: Vec<Vec<C64>> = (0..basis.cols()).map(|k| basis.column(k)).collect();
    OperatorSubspace::from_orthonormal_vecs(d, &gram_schmidt(&vecs, 0.5))
}

/// One joint eigenspace of a commuting family.
#[derive(Debug, Clone)]
pub struct JointBlock {
    /// Eigenvalue of each effect on this block.
    pub eigenvalues: Vec<f64>,
    /// `d × dim` matrix with orthonormal columns.
    pub basis: ComplexMatrix,
}

impl JointBlock {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * &self.basis.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct JointEigenstructure {
    pub blocks: Vec<JointBlock>,
}

impl JointEigenstructure {
    /// `Σ dj²`, the dimension of the commutant.
    pub fn commutant_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim() * b.dim()).sum()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(JointBlock::dim).collect()
    }
}

/// Splits the space into joint eigenspaces by refining the eigenvalue clusters of
/// each effect in turn inside the blocks found so far.
pub fn joint_eigenspaces(set: &EffectSet) -> Result<JointEigenstructure> {
    set.require_commuting()?;
    let d = set.dim();
    let cluster_tol = set.tolerances().cluster;
    let mut blocks = vec![JointBlock {
        eigenvalues: Vec::new(),
        basis: ComplexMatrix::identity(d),
    }];
    for e in set.matrices() {
        let mut refined = Vec::with_capacity(blocks.len());
        for block in blocks {
            let v = &block.basis;
            let compressed = (&(&v.adjoint() * e) * v).hermitian_part();
            let eig = hermitian_eigendecompose(&compressed)?;
            for cluster in eig.clusters(cluster_tol) {
                let w = ComplexMatrix::from_fn(v.cols(), cluster.members.len(), |i, j| {
                    eig.eigenvectors[(i, cluster.members.start + j)]
                });
                let mut eigenvalues = block.eigenvalues.clone();
                eigenvalues.push(cluster.value);
                refined.push(JointBlock {
                    eigenvalues,
                    basis: v * &w,
                });
            }
        }
        blocks = refined;
    }
    Ok(JointEigenstructure { blocks })
}

/// Which fixed-point identity a report checks: fixed points = commutant for
/// resolutions, fixed points = `P·A′` for commuting subnormalized sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    FixedEqualsCommutant,
    FixedEqualsProjectedCommutant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub claim: Claim,
    pub fixed_dim: usize,
    pub target_dim: usize,
    pub distance: f64,
    pub verdict: bool,
    #[serde(skip)]
    pub details: String,
}

/// For a resolution `Σ Ei² = I`, checks that the fixed points of `Φ` are exactly the commutant.
pub fn verify_fixed_equals_commutant(set: &EffectSet) -> Result<FixedPointReport> {
    if set.normalization() != Normalization::Resolution {
        return Err(Error::NotResolution);
    }
    let tol = set.tolerances();
    let op = LuedersOperation::new(set.clone());
    let fixed = op.fixed_point_space(tol.nullspace);
    let target = commutant(set, tol.nullspace);
    report(
        Claim::FixedEqualsCommutant,
        &fixed,
        &target,
        tol.subspace,
        "commutant",
    )
}

/// For a commuting subnormalized set, checks that the fixed points of `Φ` are
/// `P·A′`, where `P` projects onto the eigenvalue-1 eigenspace of `Σ Ei²`.
pub fn verify_fixed_equals_projected_commutant(set: &EffectSet) -> Result<FixedPointReport> {
    set.require_commuting()?;
    if set.normalization() == Normalization::Resolution {
        return Err(Error::IsResolution);
    }
    let tol = set.tolerances();
    let op = LuedersOperation::new(set.clone());
    let fixed = op.fixed_point_space(tol.nullspace);
    let p = unit_eigenprojector(set)?;
    let target = projected_commutant(set, &p);
    report(
        Claim::FixedEqualsProjectedCommutant,
        &fixed,
        &target,
        tol.subspace,
        "P·commutant",
    )
}

/// Spectral projector of `Σ Ei²` onto eigenvalues with `|λ − 1| ≤ τ_cluster`.
pub fn unit_eigenprojector(set: &EffectSet) -> Result<ComplexMatrix> {
    let eig = hermitian_eigendecompose(&set.sum_of_squares().hermitian_part())?;
    let cluster = set.tolerances().cluster;
    let members = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| (l - 1.0).abs() <= cluster)
        .map(|(k, _)| k);
    Ok(eig.projector(members))
}

/// `{P B : B ∈ A′}`: the commutant basis multiplied by `P`, near-zero images dropped,
/// re-orthonormalized.
pub fn projected_commutant(set: &EffectSet, p: &ComplexMatrix) -> OperatorSubspace {
    let d = set.dim();
    let tol = set.tolerances();
    let images: Vec<Vec<C64>> = commutant(set, tol.nullspace)
        .basis()
        .iter()
        .map(|b| (p * b).vec())
        .filter(|v| crate::linalg::vector_norm(v) >= 1e-10)
        .collect();
    OperatorSubspace::from_orthonormal_vecs(d, &gram_schmidt(&images, 1e-10))
}

fn report(
    claim: Claim,
    fixed: &OperatorSubspace,
    target: &OperatorSubspace,
    tol: f64,
    target_name: &str,
) -> Result<FixedPointReport> {
    let cmp = subspaces_equal(fixed, target, tol)?;
    let verdict = cmp.equal && cmp.dim_a == cmp.dim_b;
    Ok(FixedPointReport {
        claim,
        fixed_dim: cmp.dim_a,
        target_dim: cmp.dim_b,
        distance: cmp.distance,
        verdict,
        details: format!(
            "dim fixed = {}, dim {target_name} = {}, projector distance = {:.3e}",
            cmp.dim_a, cmp.dim_b, cmp.distance
        ),
    })
}

/// Dispatches on the normalization class.
pub fn verify(set: &EffectSet) -> Result<FixedPointReport> {
    match set.normalization() {
        Normalization::Resolution => verify_fixed_equals_commutant(set),
        Normalization::Subnormalized => verify_fixed_equals_projected_commutant(set),
    }
}

/// Identity check used by tests: `Φ` acts on matrix units as the superoperator columns.
pub fn superoperator_consistency(op: &LuedersOperation) -> f64 {
    let d = op.dim();
    let s = op.superoperator();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        for l in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(k, l)] = ONE;
            let direct = op.apply(&unit).expect("unit has the right shape").vec();
            let col = l * d + k;
            for (row, value) in direct.iter().enumerate() {
                worst = worst.max((s[(row, col)] - value).norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{
        commuting_family, generate_commuting_resolution, generate_commuting_subnormalized,
        generate_noncommuting_resolution, FamilyShape,
    };
    use crate::tolerance::Tolerances;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    fn pinching() -> LuedersOperation {
        LuedersOperation::new(EffectSet::new(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap())
    }

    #[test]
    fn identity_operation_is_identity() {
        let op = LuedersOperation::new(EffectSet::new(&[ComplexMatrix::identity(2)]).unwrap());
        let b = ComplexMatrix::from_fn(2, 2, |i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        assert_eq!(op.apply(&b).unwrap(), b);
        assert_eq!(op.superoperator(), &ComplexMatrix::identity(4));
        assert_eq!(op.fixed_point_space(1e-10).dim(), 4);
    }

    #[test]
    fn pinching_kills_off_diagonals() {
        let op = pinching();
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(op.apply(&b).unwrap(), diag(&[1.0, 4.0]));
        assert_eq!(op.superoperator(), &diag(&[1.0, 0.0, 0.0, 1.0]));
        assert_eq!(op.fixed_point_space(1e-10).dim(), 2);
        assert_eq!(commutant(op.effect_set(), 1e-10).dim(), 2);
    }

    #[test]
    fn apply_matches_superoperator() {
        let set = generate_noncommuting_resolution(3, 3, 12).unwrap();
        let op = LuedersOperation::new(set);
        assert!(superoperator_consistency(&op) < 1e-12);
        let mut rng = SeededRng::new(3);
        let b = rng.gaussian_matrix(3, 3);
        let via_superop = ComplexMatrix::unvec(&op.superoperator().mul_vec(&b.vec()), 3);
        assert!((&via_superop - &op.apply(&b).unwrap()).frobenius_norm() < 1e-11);
    }

    #[test]
    fn apply_rejects_wrong_shape() {
        assert!(matches!(
            pinching().apply(&ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_subnormal_effect_fixed_points() {
        let op = LuedersOperation::new(EffectSet::new(&[diag(&[1.0, 0.5])]).unwrap());
        let fixed = op.fixed_point_space(1e-10);
        assert_eq!(fixed.dim(), 1);
        let b = &fixed.basis()[0];
        assert!((b[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commutant_of_distinct_tuples_is_diagonal() {
        let set = generate_commuting_resolution(5, 3, 4).unwrap();
        assert_eq!(commutant(&set, 1e-10).dim(), 5);
        assert_eq!(joint_eigenspaces(&set).unwrap().commutant_dim(), 5);
    }

    #[test]
    fn joint_eigenspace_examples() {
        let id = EffectSet::new(&[ComplexMatrix::identity(3)]).unwrap();
        let js = joint_eigenspaces(&id).unwrap();
        assert_eq!(js.block_dims(), vec![3]);
        assert_eq!(js.commutant_dim(), 9);

        let single = EffectSet::new(&[diag(&[0.2, 0.2, 0.7])]).unwrap();
        let js = joint_eigenspaces(&single).unwrap();
        let mut dims = js.block_dims();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
        assert_eq!(js.commutant_dim(), 5);

        let nc = generate_noncommuting_resolution(3, 3, 0).unwrap();
        assert!(matches!(
            joint_eigenspaces(&nc),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn degenerate_blocks_match_commutant() {
        let shape = FamilyShape {
            unit_fraction: None,
            distinct_tuples: Some(3),
        };
        let set = commuting_family(7, 3, 9, shape)
            .effect_set(&Tolerances::DEFAULT)
            .unwrap();
        let js = joint_eigenspaces(&set).unwrap();
        assert_eq!(js.block_dims().iter().sum::<usize>(), 7);
        assert_eq!(commutant(&set, 1e-10).dim(), js.commutant_dim());
        for block in &js.blocks {
            for (e, lam) in set.matrices().zip(&block.eigenvalues) {
                let lhs = e * &block.basis;
                let rhs = block.basis.scale_real(*lam);
                assert!((&lhs - &rhs).frobenius_norm() < 1e-9);
            }
        }
    }

    #[test]
    fn resolution_verifier() {
        let r = verify_fixed_equals_commutant(pinching().effect_set()).unwrap();
        assert!(r.verdict);
        assert!(r.distance <= 1e-9);
        assert_eq!((r.fixed_dim, r.target_dim), (2, 2));

        let set = generate_commuting_resolution(4, 3, 1).unwrap();
        assert!(verify_fixed_equals_commutant(&set).unwrap().verdict);
        let set = generate_noncommuting_resolution(4, 3, 1).unwrap();
        assert!(verify_fixed_equals_commutant(&set).unwrap().verdict);

        let sub = generate_commuting_subnormalized(3, 2, 0, 0.0).unwrap();
        assert_eq!(
            verify_fixed_equals_commutant(&sub),
            Err(Error::NotResolution)
        );
    }

    #[test]
    fn subnormalized_verifier() {
        let scalar = EffectSet::new(&[ComplexMatrix::identity(2).scale_real(0.6)]).unwrap();
        let r = verify_fixed_equals_projected_commutant(&scalar).unwrap();
        assert!(r.verdict);
        assert_eq!(r.fixed_dim, 0);

        let single = EffectSet::new(&[diag(&[1.0, 0.5])]).unwrap();
        let p = unit_eigenprojector(&single).unwrap();
        assert!((&p - &diag(&[1.0, 0.0])).frobenius_norm() < 1e-12);
        let r = verify_fixed_equals_projected_commutant(&single).unwrap();
        assert!(r.verdict);
        assert_eq!((r.fixed_dim, r.target_dim), (1, 1));

        let set = generate_commuting_subnormalized(6, 3, 5, 0.5).unwrap();
        let r = verify_fixed_equals_projected_commutant(&set).unwrap();
        assert!(r.verdict, "{}", r.details);
        assert_eq!(r.fixed_dim, r.target_dim);

        assert_eq!(
            verify_fixed_equals_projected_commutant(pinching().effect_set()),
            Err(Error::IsResolution)
        );
    }

    #[test]
    fn channel_norm_examples() {
        let set = generate_commuting_resolution(3, 2, 0).unwrap();
        let cert = LuedersOperation::new(set).channel_norm(50, 1);
        assert!((cert.norm - 1.0).abs() < 1e-12);
        assert!(cert.passed);

        let scalar = EffectSet::new(&[ComplexMatrix::identity(3).scale_real(0.7)]).unwrap();
        let cert = LuedersOperation::new(scalar).channel_norm(10, 1);
        assert!((cert.norm - 0.49).abs() < 1e-14);

        let sub = generate_commuting_subnormalized(4, 3, 2, 0.25).unwrap();
        let cert = LuedersOperation::new(sub).channel_norm(200, 3);
        assert!(cert.max_sampled <= cert.norm + 1e-10);
        assert_eq!(cert.identity_image_norm, cert.norm);
    }

    #[test]
    fn complement_equation_examples() {
        let set = generate_commuting_resolution(4, 3, 2).unwrap();
        let sol = LuedersOperation::new(set).solve_complement().unwrap();
        let half = ComplexMatrix::identity(4).scale_real(0.5);
        assert!((&sol.solution - &half).frobenius_norm() < 1e-10);
        assert!(sol.residual < 1e-10);
        assert!(sol.is_effect);

        let theta: f64 = 0.3;
        let scalar = EffectSet::new(&[diag(&[theta.cos()]), diag(&[theta.sin()])]).unwrap();
        let sol = LuedersOperation::new(scalar).solve_complement().unwrap();
        assert!((sol.solution[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn undisturbed_state_examples() {
        let set = generate_commuting_resolution(3, 2, 6).unwrap();
        let op = LuedersOperation::new(set);
        let mixed = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        let u = op.is_undisturbed_state(&mixed, 1e-9).unwrap();
        assert!(u.is_fixed && u.commutes_with_all);

        let op = pinching();
        let u = op.is_undisturbed_state(&diag(&[0.5, 0.5]), 1e-9).unwrap();
        assert!(u.is_fixed && u.commutes_with_all);
        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let u = op.is_undisturbed_state(&plus, 1e-9).unwrap();
        assert!(!u.is_fixed && !u.commutes_with_all);

        assert!(matches!(
            op.is_undisturbed_state(&diag(&[0.5, 0.6]), 1e-9),
            Err(Error::NotDensityMatrix { .. })
        ));
        assert!(matches!(
            op.is_undisturbed_state(&diag(&[1.5, -0.5]), 1e-9),
            Err(Error::NotDensityMatrix { .. })
        ));
    }
}
