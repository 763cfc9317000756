//! Quantum effects (`0 ≤ E ≤ I`), effect sets normalized by `Σ Ei² ≤ I`, and the
//! half-open spectral windows `P^E(a, b]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose_with, operator_norm, HermitianEigensystem};
use crate::matrix::ComplexMatrix;
use crate::tolerance::Tolerances;

/// A Hermitian matrix with spectrum in `[0, 1]` and its cached eigensystem.
///
/// Eigenvalues in the cache are clipped to `[0, 1]`; the matrix itself is kept as given.
#[derive(Debug, Clone)]
pub struct Effect {
    matrix: ComplexMatrix,
    eig: HermitianEigensystem,
    cluster_tol: f64,
}

pub fn validate_effect(m: &ComplexMatrix, tol: &Tolerances) -> Result<Effect> {
    validate_effect_at(m, 0, tol)
}

fn validate_effect_at(m: &ComplexMatrix, index: usize, tol: &Tolerances) -> Result<Effect> {
    let mut eig = hermitian_eigendecompose_with(m, tol)?;
    if let Some(&lo) = eig.eigenvalues.first() {
        if lo < -tol.psd {
            return Err(Error::SpectrumBelowZero {
                index,
                eigenvalue: lo,
            });
        }
    }
    if let Some(&hi) = eig.eigenvalues.last() {
        if hi > 1.0 + tol.psd {
            return Err(Error::SpectrumAboveOne {
                index,
                eigenvalue: hi,
            });
        }
    }
    for lam in &mut eig.eigenvalues {
        *lam = lam.clamp(0.0, 1.0);
    }
    Ok(Effect {
        matrix: m.clone(),
        eig,
        cluster_tol: tol.cluster,
    })
}

impl Effect {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigensystem(&self) -> &HermitianEigensystem {
        &self.eig
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Clipped eigenvalues, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    /// `P^E(a, b]`.
    pub fn window(&self, a: f64, b: f64) -> Result<SpectralWindow> {
        spectral_window(self, a, b)
    }

    /// Index `k ∈ {−1, …, m−1}` of the bin `(k/m, (k+1)/m]` holding `lambda`.
    ///
    /// Values within the cluster tolerance of an edge `r/m` go to bin `r − 1`.
    pub fn bin_of(&self, lambda: f64, m: u64) -> i64 {
        bin_index(lambda, m, self.cluster_tol)
    }

    /// The nonzero windows at resolution `m`, keyed by ascending bin index.
    pub fn occupied_bins(&self, m: u64) -> Vec<(i64, ComplexMatrix)> {
        let mut out: Vec<(i64, Vec<usize>)> = Vec::new();
        for cluster in self.eig.clusters(self.cluster_tol) {
            let k = self.bin_of(cluster.value, m);
            match out.last_mut() {
                Some((last, members)) if *last == k => members.extend(cluster.members),
                _ => out.push((k, cluster.members.collect())),
            }
        }
        out.into_iter()
            .map(|(k, members)| (k, self.eig.projector(members)))
            .collect()
    }
}

pub(crate) fn bin_index(lambda: f64, m: u64, snap: f64) -> i64 {
    let x = lambda * m as f64;
    let r = x.round();
    let k = if (lambda - r / m as f64).abs() <= snap {
        r as i64 - 1
    } else {
        x.ceil() as i64 - 1
    };
    k.clamp(-1, m as i64 - 1)
}

/// Spectral projector of an effect on a half-open interval.
#[derive(Debug, Clone)]
pub struct SpectralWindow {
    pub a: f64,
    pub b: f64,
    pub projector: ComplexMatrix,
    pub rank: usize,
}

/// `P^E(a, b]`: the sum of eigenprojectors whose (clustered) eigenvalue lies in `(a, b]`.
///
/// A cluster within the snapping tolerance of an endpoint counts as sitting on it,
/// so it is excluded at `a` and included at `b`.
pub fn spectral_window(e: &Effect, a: f64, b: f64) -> Result<SpectralWindow> {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidInterval { a, b });
    }
    let snap = e.cluster_tol;
    let mut members = Vec::new();
    for cluster in e.eig.clusters(snap) {
        let lam = cluster.value;
        if lam > a + snap && lam <= b + snap {
            members.extend(cluster.members);
        }
    }
    let rank = members.len();
    Ok(SpectralWindow {
        a,
        b,
        projector: e.eig.projector(members),
        rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `Σ Ei² = I`.
    Resolution,
    /// `Σ Ei² ≤ I`, not equal to `I`.
    Subnormalized,
}

/// An ordered family of effects on the same space with `Σ Ei² ≤ I`.
#[derive(Debug, Clone)]
pub struct EffectSet {
    effects: Vec<Effect>,
    sum_of_squares: ComplexMatrix,
    commuting: bool,
    normalization: Normalization,
    max_commutator: f64,
    tol: Tolerances,
}

pub fn build_effect_set(ms: &[ComplexMatrix], tol: &Tolerances) -> Result<EffectSet> {
    let first = ms
        .first()
        .ok_or_else(|| Error::InvalidArgument("effect set must be nonempty".into()))?;
    if !first.is_square() {
        return Err(Error::NotSquare {
            rows: first.rows(),
            cols: first.cols(),
        });
    }
    let d = first.rows();
    for m in ms {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.rows(),
            });
        }
    }
    let effects = ms
        .iter()
        .enumerate()
        .map(|(i, m)| validate_effect_at(m, i, tol))
        .collect::<Result<Vec<_>>>()?;

    let mut f = ComplexMatrix::zeros(d, d);
    for e in &effects {
        f = &f + &(e.matrix() * e.matrix());
    }
    let f_eig = hermitian_eigendecompose_with(&f.hermitian_part(), tol)?;
    let top = f_eig.eigenvalues.last().copied().unwrap_or(0.0);
    if top > 1.0 + tol.psd {
        return Err(Error::NotSubnormalized { eigenvalue: top });
    }

    let max_norm = effects
        .iter()
        .map(|e| operator_norm(e.matrix()))
        .fold(0.0, f64::max);
    let mut max_commutator: f64 = 0.0;
    for i in 0..effects.len() {
        for j in (i + 1)..effects.len() {
            let c = effects[i].matrix().commutator(effects[j].matrix());
            max_commutator = max_commutator.max(operator_norm(&c));
        }
    }
    let commuting = max_commutator <= tol.comm * max_norm.max(f64::MIN_POSITIVE);
    let defect = operator_norm(&(&f - &ComplexMatrix::identity(d)));
    let normalization = if defect <= tol.norm {
        Normalization::Resolution
    } else {
        Normalization::Subnormalized
    };

    Ok(EffectSet {
        effects,
        sum_of_squares: f,
        commuting,
        normalization,
        max_commutator,
        tol: *tol,
    })
}

impl EffectSet {
    pub fn new(ms: &[ComplexMatrix]) -> Result<Self> {
        build_effect_set(ms, &Tolerances::DEFAULT)
    }

    pub fn dim(&self) -> usize {
        self.sum_of_squares.rows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn matrices(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.effects.iter().map(Effect::matrix)
    }

    /// `F = Σ Ei²`.
    pub fn sum_of_squares(&self) -> &ComplexMatrix {
        &self.sum_of_squares
    }

    pub fn is_commuting(&self) -> bool {
        self.commuting
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn max_commutator_norm(&self) -> f64 {
        self.max_commutator
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub(crate) fn require_commuting(&self) -> Result<()> {
        if self.commuting {
            Ok(())
        } else {
            Err(Error::NotCommuting {
                max_commutator: self.max_commutator,
            })
        }
    }

    /// Commutation threshold scaled to the largest effect.
    pub fn commutator_threshold(&self) -> f64 {
        let max_norm = self
            .effects
            .iter()
            .map(|e| e.spectrum().last().copied().unwrap_or(0.0))
            .fold(0.0, f64::max);
        self.tol.comm * max_norm.max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sqrt_psd;
    use crate::rng::SeededRng;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    #[test]
    fn validate_effect_examples() {
        let tol = Tolerances::DEFAULT;
        assert!(validate_effect(&diag(&[0.5, 0.5]), &tol).is_ok());
        assert!(matches!(
            validate_effect(&diag(&[1.1, 0.0]), &tol),
            Err(Error::SpectrumAboveOne { .. })
        ));
        assert!(matches!(
            validate_effect(&diag(&[-0.2, 0.5]), &tol),
            Err(Error::SpectrumBelowZero { .. })
        ));
        let jordan = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            validate_effect(&jordan, &tol),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn dust_is_clipped() {
        let e = validate_effect(&diag(&[1.0 + 1e-12, -1e-12]), &Tolerances::DEFAULT).unwrap();
        assert_eq!(e.spectrum(), &[0.0, 1.0]);
    }

    #[test]
    fn effect_set_examples() {
        let s = EffectSet::new(&[ComplexMatrix::identity(3)]).unwrap();
        assert_eq!(s.normalization(), Normalization::Resolution);
        assert!(s.is_commuting());

        let pinch = EffectSet::new(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        assert_eq!(pinch.normalization(), Normalization::Resolution);
        assert!(pinch.is_commuting());

        let mut rng = SeededRng::new(5);
        let g = rng.gaussian_matrix(4, 4);
        let h = &g.adjoint() * &g;
        let e = h.scale_real(1.0 / operator_norm(&h)).hermitian_part();
        let rest = sqrt_psd(&(&ComplexMatrix::identity(4) - &(&e * &e))).unwrap();
        let pair = EffectSet::new(&[e.clone(), rest.clone()]).unwrap();
        assert_eq!(pair.normalization(), Normalization::Resolution);
        // oracle: direct commutator
        assert!(operator_norm(&e.commutator(&rest)) < 1e-12);
        assert!(pair.is_commuting());
    }

    #[test]
    fn effect_set_errors() {
        assert!(matches!(
            EffectSet::new(&[diag(&[0.5, 0.5]), diag(&[0.5])]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            EffectSet::new(&[diag(&[0.9, 0.1]), diag(&[0.9, 0.1])]),
            Err(Error::NotSubnormalized { .. })
        ));
        assert!(matches!(
            EffectSet::new(&[diag(&[0.5, 0.5]), diag(&[1.5, 0.0])]),
            Err(Error::SpectrumAboveOne { index: 1, .. })
        ));
        assert!(EffectSet::new(&[]).is_err());
    }

    #[test]
    fn window_examples() {
        let e = validate_effect(&diag(&[0.2, 0.6]), &Tolerances::DEFAULT).unwrap();
        assert_eq!(e.window(0.5, 1.0).unwrap().projector, diag(&[0.0, 1.0]));
        assert_eq!(e.window(0.2, 0.6).unwrap().projector, diag(&[0.0, 1.0]));
        assert_eq!(e.window(-0.5, 0.2).unwrap().projector, diag(&[1.0, 0.0]));
        assert_eq!(e.window(0.7, 0.9).unwrap().rank, 0);
        assert!(matches!(
            e.window(0.6, 0.6),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn bin_edges_go_to_the_lower_bin() {
        assert_eq!(bin_index(0.0, 4, 1e-9), -1);
        assert_eq!(bin_index(0.25, 4, 1e-9), 0);
        assert_eq!(bin_index(0.25 + 1e-12, 4, 1e-9), 0);
        assert_eq!(bin_index(0.2500001, 4, 1e-9), 1);
        assert_eq!(bin_index(1.0, 4, 1e-9), 3);
        assert_eq!(bin_index(0.6, 2, 1e-9), 1);
    }
}
