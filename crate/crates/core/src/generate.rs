//! Seeded effect-set factories.
//!
//! Commuting families are built in a random unitary basis `U` with exact
//! per-column spectra, so commutation and `Σ Ei² = I` hold by construction.

use crate::effects::{build_effect_set, EffectSet};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, sqrt_psd_with};
use crate::matrix::{ComplexMatrix, C64};
use crate::rng::SeededRng;
use crate::tolerance::Tolerances;

/// Radius range for the non-unit columns of a subnormalized family.
const SUBNORMAL_RADII: (f64, f64) = (0.3, 0.95);

/// Headroom kept by the random part of a non-commuting resolution, `Σ_{i<n} Ei² ≤ (1 − ε) I`.
const NONCOMMUTING_HEADROOM: f64 = 0.1;
const MIN_COMMUTATOR: f64 = 0.01;

/// A commuting family `Ei = U diag(spectra[i]) U*` together with its construction data.
#[derive(Debug, Clone)]
pub struct CommutingFamily {
    pub basis: ComplexMatrix,
    /// `spectra[i][v]` is the eigenvalue of effect `i` on basis column `v`.
    pub spectra: Vec<Vec<f64>>,
}

impl CommutingFamily {
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn matrices(&self) -> Vec<ComplexMatrix> {
        let u = &self.basis;
        let ua = u.adjoint();
        self.spectra
            .iter()
            .map(|lam| {
                let d = ComplexMatrix::from_real_diagonal(lam);
                (&(u * &d) * &ua).hermitian_part()
            })
            .collect()
    }

    pub fn effect_set(&self, tol: &Tolerances) -> Result<EffectSet> {
        build_effect_set(&self.matrices(), tol)
    }

    /// Joint eigenvalue tuple of basis column `v`.
    pub fn tuple(&self, v: usize) -> Vec<f64> {
        self.spectra.iter().map(|s| s[v]).collect()
    }
}

/// Options for [`commuting_family`].
#[derive(Debug, Clone, Copy)]
pub struct FamilyShape {
    /// Fraction of columns with `Σi λi² = 1`; `None` means all of them.
    pub unit_fraction: Option<f64>,
    /// Draw only this many distinct joint tuples and spread them over the columns,
    /// producing degenerate joint eigenspaces.
    pub distinct_tuples: Option<usize>,
}

impl FamilyShape {
    pub const RESOLUTION: FamilyShape = FamilyShape {
        unit_fraction: None,
        distinct_tuples: None,
    };
}

pub fn commuting_family(d: usize, n: usize, seed: u64, shape: FamilyShape) -> CommutingFamily {
    assert!(d >= 1 && n >= 1, "commuting_family needs d, n >= 1");
    let mut rng = SeededRng::new(seed);
    if n == 1 && shape.unit_fraction.is_none() {
        // λ² = 1 forces E = I
        return CommutingFamily {
            basis: ComplexMatrix::identity(d),
            spectra: vec![vec![1.0; d]],
        };
    }
    let basis = rng.haar_unitary(d);

    let n_tuples = shape.distinct_tuples.unwrap_or(d).clamp(1, d);
    let mut tuples: Vec<Vec<f64>> = (0..n_tuples)
        .map(|_| rng.nonnegative_unit_vector(n))
        .collect();

    // column v gets tuple owner[v]; every tuple is used at least once
    let owner: Vec<usize> = (0..d)
        .map(|v| if v < n_tuples { v } else { rng.index(n_tuples) })
        .collect();

    if let Some(fraction) = shape.unit_fraction {
        let unit_count = (fraction.clamp(0.0, 1.0) * n_tuples as f64).round() as usize;
        let mut order: Vec<usize> = (0..n_tuples).collect();
        for i in 0..n_tuples {
            let j = i + rng.index(n_tuples - i);
            order.swap(i, j);
        }
        for &t in &order[unit_count..] {
            let r = rng.uniform_in(SUBNORMAL_RADII.0, SUBNORMAL_RADII.1);
            for x in &mut tuples[t] {
                *x *= r;
            }
        }
    }

    let spectra = (0..n)
        .map(|i| (0..d).map(|v| tuples[owner[v]][i]).collect())
        .collect();
    CommutingFamily { basis, spectra }
}

/// Commuting effects with `Σ Ei² = I`.
pub fn generate_commuting_resolution(d: usize, n: usize, seed: u64) -> Result<EffectSet> {
    commuting_family(d, n, seed, FamilyShape::RESOLUTION).effect_set(&Tolerances::DEFAULT)
}

/// Commuting effects with `Σ Ei² ≤ I` where `round(unit_fraction · d)` joint
/// eigenvectors keep `Σ λ² = 1` and the rest are scaled into `[0.3, 0.95]`.
pub fn generate_commuting_subnormalized(
    d: usize,
    n: usize,
    seed: u64,
    unit_fraction: f64,
) -> Result<EffectSet> {
    let shape = FamilyShape {
        unit_fraction: Some(unit_fraction),
        distinct_tuples: None,
    };
    commuting_family(d, n, seed, shape).effect_set(&Tolerances::DEFAULT)
}

/// `n − 1` random effects scaled under `(1 − ε) I`, closed by `En = √(I − Σ Ei²)`.
///
/// Regenerates on a derived stream until some pair has commutator norm ≥ 0.01.
pub fn generate_noncommuting_resolution(d: usize, n: usize, seed: u64) -> Result<EffectSet> {
    if d < 2 || n < 3 {
        return Err(Error::InvalidArgument(
            "non-commuting resolutions need d >= 2 and n >= 3".into(),
        ));
    }
    let tol = Tolerances::DEFAULT;
    for attempt in 0.. {
        let mut rng = SeededRng::derived(seed, attempt);
        let mats = noncommuting_candidate(&mut rng, d, n, &tol)?;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max(operator_norm(&mats[i].commutator(&mats[j])));
            }
        }
        if worst >= MIN_COMMUTATOR {
            return build_effect_set(&mats, &tol);
        }
    }
    unreachable!()
}

fn noncommuting_candidate(
    rng: &mut SeededRng,
    d: usize,
    n: usize,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let mut mats = Vec::with_capacity(n);
    for _ in 0..n - 1 {
        let g = rng.gaussian_matrix(d, d);
        let h = &g * &g.adjoint();
        mats.push(h.scale_real(1.0 / operator_norm(&h)).hermitian_part());
    }
    let mut s = ComplexMatrix::zeros(d, d);
    for m in &mats {
        s = &s + &(m * m);
    }
    let c = ((1.0 - NONCOMMUTING_HEADROOM) / operator_norm(&s)).sqrt();
    for m in &mut mats {
        *m = m.scale_real(c);
    }
    let rest = &ComplexMatrix::identity(d) - &s.scale(C64::new(c * c, 0.0));
    mats.push(sqrt_psd_with(&rest.hermitian_part(), tol)?);
    Ok(mats)
}
