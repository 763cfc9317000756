//! Spectral-bin certificates of non-commutation.
//!
//! For a commuting family the bins `F^m_{k1..kn} = Π P^{Ei}(ki/m, (ki+1)/m]` are
//! orthogonal projections with `ki ∈ {−1, …, m−1}`; the `−1` bin is `(−1/m, 0]`
//! and holds the kernel. An operator that fails to commute with an effect has a
//! nonzero block between two bins at least two steps apart, and such a block
//! can be refined into one that the Lüders operation strictly contracts.

use serde::Serialize;

use crate::effects::{Effect, EffectSet};
use crate::error::{Error, Result};
use crate::linalg::operator_norm;
use crate::lueders::LuedersOperation;
use crate::matrix::ComplexMatrix;

/// Upper limit of the dyadic refinement in [`witness_search`].
pub const M_MAX: u64 = 1 << 20;

/// A bin at resolution `m`: one index per effect, each in `−1..m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BinIndex {
    pub m: u64,
    pub ks: Vec<i64>,
}

impl BinIndex {
    pub fn new(m: u64, ks: Vec<i64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "resolution m must be positive".into(),
            ));
        }
        if let Some(&bad) = ks.iter().find(|&&k| k < -1 || k >= m as i64) {
            return Err(Error::IndexOutOfRange { index: bad, m });
        }
        Ok(Self { m, ks })
    }
}

/// `F^m_{ks}` as the product of the per-effect windows.
pub fn bin_projection(set: &EffectSet, index: &BinIndex) -> Result<ComplexMatrix> {
    set.require_commuting()?;
    if index.ks.len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: index.ks.len(),
        });
    }
    let index = BinIndex::new(index.m, index.ks.clone())?;
    let m = index.m as f64;
    let mut acc = ComplexMatrix::identity(set.dim());
    for (e, &k) in set.effects().iter().zip(&index.ks) {
        let w = e.window(k as f64 / m, (k + 1) as f64 / m)?;
        acc = &acc * &w.projector;
    }
    Ok(acc.hermitian_part())
}

/// Every nonzero bin at resolution `m`, in lexicographic index order.
pub fn occupied_bins(set: &EffectSet, m: u64) -> Result<Vec<(BinIndex, ComplexMatrix)>> {
    set.require_commuting()?;
    let mut partial: Vec<(Vec<i64>, ComplexMatrix)> =
        vec![(Vec::new(), ComplexMatrix::identity(set.dim()))];
    for e in set.effects() {
        let windows = e.occupied_bins(m);
        let mut next = Vec::new();
        for (ks, f) in &partial {
            for (k, w) in &windows {
                let g = f * w;
                // projector ranks are integers
                if g.trace().re >= 0.5 {
                    let mut ks = ks.clone();
                    ks.push(*k);
                    next.push((ks, g));
                }
            }
        }
        partial = next;
    }
    Ok(partial
        .into_iter()
        .map(|(ks, f)| (BinIndex { m, ks }, f.hermitian_part()))
        .collect())
}

/// Whether `B` commutes with every bin projection at resolution `m`.
pub fn bin_commutation_check(set: &EffectSet, b: &ComplexMatrix, m: u64) -> Result<bool> {
    let threshold = set.tolerances().comm * operator_norm(b);
    for (_, f) in occupied_bins(set, m)? {
        if operator_norm(&b.commutator(&f)) > threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A nonzero block `F_{ks} B F_{ks'}` between two different bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagonalBlock {
    pub left: BinIndex,
    pub right: BinIndex,
    pub block_norm: f64,
}

pub fn offdiagonal_block_search(
    set: &EffectSet,
    b: &ComplexMatrix,
    m: u64,
) -> Result<Option<OffDiagonalBlock>> {
    let threshold = set.tolerances().witness * operator_norm(b);
    let bins = occupied_bins(set, m)?;
    for (left, f) in &bins {
        let fb = f * b;
        for (right, g) in &bins {
            if left == right {
                continue;
            }
            let block_norm = operator_norm(&(&fb * g));
            if block_norm > threshold {
                return Ok(Some(OffDiagonalBlock {
                    left: left.clone(),
                    right: right.clone(),
                    block_norm,
                }));
            }
        }
    }
    Ok(None)
}

/// Bins `(k/m, (k+1)/m]` and `(j/m, (j+1)/m]` with `|k − j| ≥ 2` and a nonzero block of `B`.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessCertificate {
    pub m: u64,
    pub k: i64,
    pub j: i64,
    pub block_norm: f64,
    #[serde(skip)]
    pub left_projector: ComplexMatrix,
    #[serde(skip)]
    pub right_projector: ComplexMatrix,
}

/// Dyadic search `m = 2, 4, 8, …` for a certificate that `B` does not commute with `E`.
///
/// At each resolution the ordered pairs `(k, j)` of nonzero windows are scanned
/// lexicographically and the first block with `|k − j| ≥ 2` and norm above
/// `rel_tol · ‖B‖` is returned. Pairs that only couple adjacent bins are resolved
/// by doubling `m`.
pub fn witness_search(e: &Effect, b: &ComplexMatrix, rel_tol: f64) -> Result<WitnessCertificate> {
    if b.dim() != e.matrix().dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: b.rows(),
        });
    }
    let b_norm = operator_norm(b);
    let e_norm = e.spectrum().last().copied().unwrap_or(0.0);
    let comm = operator_norm(&b.commutator(e.matrix()));
    if comm <= rel_tol * b_norm * e_norm.max(f64::MIN_POSITIVE) || b_norm == 0.0 {
        return Err(Error::CommutesNoWitness);
    }
    let threshold = rel_tol * b_norm;
    let mut m = 2;
    while m <= M_MAX {
        let bins = e.occupied_bins(m);
        for (k, pk) in &bins {
            let left = pk * b;
            for (j, pj) in &bins {
                if (k - j).abs() < 2 {
                    continue;
                }
                let block_norm = operator_norm(&(&left * pj));
                if block_norm > threshold {
                    return Ok(WitnessCertificate {
                        m,
                        k: *k,
                        j: *j,
                        block_norm,
                        left_projector: pk.clone(),
                        right_projector: pj.clone(),
                    });
                }
            }
        }
        m *= 2;
    }
    Err(Error::ResolutionExhausted { m_max: M_MAX })
}

/// Re-derives a certificate from scratch: fresh windows, fresh block norm.
pub fn verify_certificate(
    e: &Effect,
    b: &ComplexMatrix,
    cert: &WitnessCertificate,
    rel_tol: f64,
) -> Result<bool> {
    if (cert.k - cert.j).abs() < 2 {
        return Ok(false);
    }
    let m = cert.m as f64;
    let left = e.window(cert.k as f64 / m, (cert.k + 1) as f64 / m)?;
    let right = e.window(cert.j as f64 / m, (cert.j + 1) as f64 / m)?;
    let norm = operator_norm(&(&(&left.projector * b) * &right.projector));
    Ok(norm > rel_tol * operator_norm(b) && (norm - cert.block_norm).abs() <= 1e-10)
}

/// Lower bound `(p² − 4√n·m·p − 2n) / (2(pm)²)` on the relative contraction of the
/// refined block. Negative for small `p`.
pub fn contraction_bound(n: u64, m: u64, p: u64) -> f64 {
    let (n, m, p) = (n as f64, m as f64, p as f64);
    (p * p - 4.0 * n.sqrt() * m * p - 2.0 * n) / (2.0 * (p * m).powi(2))
}

/// The variant `(p² − 4√n·m − 2n) / (2(pm)²)`, reported alongside for comparison.
pub fn contraction_bound_alt(n: u64, m: u64, p: u64) -> f64 {
    let (n, m, p) = (n as f64, m as f64, p as f64);
    (p * p - 4.0 * n.sqrt() * m - 2.0 * n) / (2.0 * (p * m).powi(2))
}

/// Smallest `p ≥ 1` with a positive [`contraction_bound`].
pub fn positive_bound_threshold(n: u64, m: u64) -> u64 {
    let (nf, mf) = (n as f64, m as f64);
    let root = 2.0 * nf.sqrt() * mf + (4.0 * nf * mf * mf + 2.0 * nf).sqrt();
    let mut p = (root.floor() as u64).saturating_sub(2).max(1);
    while contraction_bound(n, m, p) <= 0.0 {
        p += 1;
    }
    p
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub p: u64,
    pub m: u64,
    pub n: u64,
    pub bound: f64,
    pub bound_alt: f64,
    pub achieved_ratio: f64,
    /// The coarse bins `(k, k2, …)` and `(j, k2', …)` at resolution `m`.
    pub coarse_left: BinIndex,
    pub coarse_right: BinIndex,
    /// The refined bins `s`, `s'` at resolution `p·m`.
    pub refined_left: BinIndex,
    pub refined_right: BinIndex,
    pub y_norm: f64,
    pub image_norm: f64,
    /// Largest `‖[P, Ei]‖`, `‖[Q, Ei]‖`.
    pub commutant_defect: f64,
    /// `‖P Q‖`.
    pub overlap: f64,
    #[serde(skip)]
    pub y: ComplexMatrix,
    #[serde(skip)]
    pub p_projector: ComplexMatrix,
    #[serde(skip)]
    pub q_projector: ComplexMatrix,
}

impl ContractionReport {
    /// `|s1 − s1'|`.
    pub fn refined_gap(&self) -> i64 {
        (self.refined_left.ks[0] - self.refined_right.ks[0]).abs()
    }
}

/// Builds projections `P, Q` in the commutant with `PQ = 0` and `Y = P X Q ≠ 0`
/// such that `(‖Y‖ − ‖Φ(Y)‖)/‖Y‖` is at least [`contraction_bound`].
///
/// A witness for `X` against `E1` at resolution `m` is expanded into coarse
/// joint bins, and one nonzero coarse block is cut down to a nonzero block
/// between joint bins at resolution `p·m`.
pub fn build_contractive_block(
    set: &EffectSet,
    x: &ComplexMatrix,
    p: u64,
) -> Result<ContractionReport> {
    set.require_commuting()?;
    if p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    let tol = *set.tolerances();
    let x_norm = operator_norm(x);
    let threshold = tol.witness * x_norm;
    let cert = witness_search(&set.effects()[0], x, tol.witness)?;
    let m = cert.m;

    let coarse = occupied_bins(set, m)?;
    let mut found = None;
    'coarse: for (left, p0) in coarse.iter().filter(|(b, _)| b.ks[0] == cert.k) {
        let p0x = p0 * x;
        for (right, q0) in coarse.iter().filter(|(b, _)| b.ks[0] == cert.j) {
            let y0 = &p0x * q0;
            if operator_norm(&y0) > threshold {
                found = Some((left.clone(), p0.clone(), right.clone(), q0.clone(), y0));
                break 'coarse;
            }
        }
    }
    // the coarse blocks sum to the certificate block, so one of them is nonzero
    let (coarse_left, p0, coarse_right, q0, y0) =
        found.ok_or(Error::RefinementVanished { pm: m })?;

    let pm = p * m;
    let refined = occupied_bins(set, pm)?;
    let lefts: Vec<_> = refined
        .iter()
        .filter_map(|(b, f)| {
            let pp = (f * &p0).hermitian_part();
            (pp.trace().re >= 0.5).then_some((b, pp))
        })
        .collect();
    let rights: Vec<_> = refined
        .iter()
        .filter_map(|(b, f)| {
            let qq = (&q0 * f).hermitian_part();
            (qq.trace().re >= 0.5).then_some((b, qq))
        })
        .collect();

    for (s, pp) in &lefts {
        let pyx = pp * &y0;
        for (s2, qq) in &rights {
            let y = &pyx * qq;
            let y_norm = operator_norm(&y);
            if y_norm <= threshold {
                continue;
            }
            let op = LuedersOperation::new(set.clone());
            let image_norm = operator_norm(&op.apply(&y)?);
            let commutant_defect = set
                .matrices()
                .flat_map(|e| {
                    [
                        operator_norm(&pp.commutator(e)),
                        operator_norm(&qq.commutator(e)),
                    ]
                })
                .fold(0.0, f64::max);
            let n = set.len() as u64;
            return Ok(ContractionReport {
                p,
                m,
                n,
                bound: contraction_bound(n, m, p),
                bound_alt: contraction_bound_alt(n, m, p),
                achieved_ratio: (y_norm - image_norm) / y_norm,
                coarse_left,
                coarse_right,
                refined_left: (*s).clone(),
                refined_right: (*s2).clone(),
                y_norm,
                image_norm,
                commutant_defect,
                overlap: operator_norm(&(pp * qq)),
                y,
                p_projector: pp.clone(),
                q_projector: qq.clone(),
            });
        }
    }
    Err(Error::RefinementVanished { pm })
}

/// `Σ max(ki, 0)² ≤ m²`: the coarse indices of a nonzero bin under `Σ Ei² ≤ I`.
pub fn squeeze_holds(index: &BinIndex) -> bool {
    let sum: i64 = index.ks.iter().map(|&k| k.max(0).pow(2)).sum();
    sum <= (index.m as i64).pow(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::validate_effect;
    use crate::generate::generate_commuting_resolution;
    use crate::matrix::C64;
    use crate::tolerance::Tolerances;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    fn flip() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn pinching() -> EffectSet {
        EffectSet::new(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn single_effect_bin() {
        let set = EffectSet::new(&[diag(&[0.2, 0.6])]).unwrap();
        let f = bin_projection(&set, &BinIndex::new(2, vec![0]).unwrap()).unwrap();
        assert_eq!(f, diag(&[1.0, 0.0]));
    }

    #[test]
    fn bins_partition_identity() {
        let set = generate_commuting_resolution(4, 3, 2).unwrap();
        for m in [1, 2, 3, 5] {
            let mut total = ComplexMatrix::zeros(4, 4);
            let bins = occupied_bins(&set, m).unwrap();
            for (_, f) in &bins {
                total = &total + f;
            }
            assert!((&total - &ComplexMatrix::identity(4)).frobenius_norm() < 1e-12);
            for (a, fa) in &bins {
                for (b, fb) in &bins {
                    if a != b {
                        assert!((fa * fb).frobenius_norm() < 1e-12);
                    }
                }
                let direct = bin_projection(&set, a).unwrap();
                assert!((&direct - fa).frobenius_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bin_index_range_checked() {
        assert!(matches!(
            BinIndex::new(2, vec![2]),
            Err(Error::IndexOutOfRange { index: 2, m: 2 })
        ));
        assert!(matches!(
            BinIndex::new(2, vec![-2]),
            Err(Error::IndexOutOfRange { .. })
        ));
        let set = pinching();
        let bad = BinIndex {
            m: 2,
            ks: vec![0, 5],
        };
        assert!(matches!(
            bin_projection(&set, &bad),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn commutation_check_examples() {
        let set = pinching();
        assert!(bin_commutation_check(&set, &diag(&[0.3, -2.0]), 2).unwrap());
        assert!(!bin_commutation_check(&set, &flip(), 2).unwrap());
    }

    #[test]
    fn offdiagonal_examples() {
        let set = pinching();
        assert!(offdiagonal_block_search(&set, &diag(&[1.0, 2.0]), 4)
            .unwrap()
            .is_none());
        let hit = offdiagonal_block_search(&set, &flip(), 2).unwrap().unwrap();
        assert_ne!(hit.left.ks, hit.right.ks);
        assert!((hit.block_norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn witness_on_projection() {
        let e = validate_effect(&diag(&[0.0, 1.0]), &Tolerances::DEFAULT).unwrap();
        let cert = witness_search(&e, &flip(), 1e-9).unwrap();
        assert_eq!((cert.m, cert.k, cert.j), (2, -1, 1));
        assert!((cert.block_norm - 1.0).abs() < 1e-14);
        let block = &(&cert.left_projector * &flip()) * &cert.right_projector;
        let want = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(block, want);
        assert!(verify_certificate(&e, &flip(), &cert, 1e-9).unwrap());
    }

    #[test]
    fn polynomial_of_effect_has_no_witness() {
        let e_mat = diag(&[0.1, 0.5, 0.9]);
        let e = validate_effect(&e_mat, &Tolerances::DEFAULT).unwrap();
        let poly = &(&e_mat * &e_mat).scale_real(3.0) + &ComplexMatrix::identity(3);
        assert!(matches!(
            witness_search(&e, &poly, 1e-9),
            Err(Error::CommutesNoWitness)
        ));
    }

    #[test]
    fn adjacent_coupling_needs_refinement() {
        // 0.30 and 0.45 share a bin at m = 2, 4 and are adjacent at m = 8
        let e = validate_effect(&diag(&[0.30, 0.45]), &Tolerances::DEFAULT).unwrap();
        let cert = witness_search(&e, &flip(), 1e-9).unwrap();
        assert_eq!(cert.m, 16);
        assert!((cert.k - cert.j).abs() >= 2);
    }

    #[test]
    fn bound_arithmetic() {
        assert!((contraction_bound(1, 2, 100) - 9198.0 / 80000.0).abs() < 1e-15);
        assert!((contraction_bound(1, 2, 1_000_000) - 0.125).abs() < 1e-4);
        assert!((contraction_bound(4, 3, 10) - (-148.0 / 1800.0)).abs() < 1e-15);
        assert_eq!(positive_bound_threshold(1, 2), 9);
        assert_eq!(positive_bound_threshold(4, 3), 25);
    }

    #[test]
    fn pinching_contraction_is_total() {
        let r = build_contractive_block(&pinching(), &flip(), 8).unwrap();
        assert!((r.achieved_ratio - 1.0).abs() < 1e-14);
        assert!(r.achieved_ratio >= r.bound);
        assert!(r.overlap < 1e-14);
        assert!(r.refined_gap() >= 8);
        // Y is a scaled off-diagonal matrix unit
        let nonzero: Vec<_> = r.y.as_slice().iter().filter(|z| z.norm() > 1e-14).collect();
        assert_eq!(nonzero.len(), 1);
    }

    #[test]
    fn contraction_needs_noncommuting_input() {
        let set = generate_commuting_resolution(3, 2, 4).unwrap();
        assert!(matches!(
            build_contractive_block(&set, &ComplexMatrix::identity(3), 16),
            Err(Error::CommutesNoWitness)
        ));
    }

    #[test]
    fn random_contractions_meet_bound() {
        for seed in 0..4 {
            let set = generate_commuting_resolution(6, 2, seed).unwrap();
            let x = ComplexMatrix::from_fn(6, 6, |i, j| {
                C64::new((i * 7 + j * 3) as f64 % 5.0, (i + j) as f64 % 2.0)
            });
            for p in [16, 64, 256] {
                let r = build_contractive_block(&set, &x, p).unwrap();
                assert!(r.achieved_ratio >= r.bound - 1e-12, "seed {seed} p {p}");
                assert!(r.refined_gap() >= p as i64);
                assert!(r.commutant_defect < 1e-9);
                assert!(r.overlap < 1e-10);
                assert!(squeeze_holds(&r.coarse_left) && squeeze_holds(&r.coarse_right));
            }
        }
    }
}
