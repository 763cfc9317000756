//! The acceptance battery: ten property checks over seeded instance pools, each
//! reported with its counts and worst observed value.

use std::time::Instant;

use serde::Serialize;

use crate::effects::{validate_effect, EffectSet, Normalization};
use crate::error::Error;
use crate::generate::{
    commuting_family, generate_commuting_subnormalized, generate_noncommuting_resolution,
    CommutingFamily, FamilyShape,
};
use crate::linalg::{hermitian_eigendecompose, operator_norm};
use crate::lueders::{
    commutant, joint_eigenspaces, verify_fixed_equals_commutant,
    verify_fixed_equals_projected_commutant, LuedersOperation,
};
use crate::matrix::{ComplexMatrix, C64};
use crate::rng::SeededRng;
use crate::tolerance::Tolerances;
use crate::witness::{
    build_contractive_block, contraction_bound, positive_bound_threshold, squeeze_holds,
    verify_certificate, witness_search,
};

/// Pool sizes and dimension caps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Scale {
    pub max_d: usize,
    pub resolutions: usize,
    pub subnormalized: usize,
    pub noncommuting: usize,
    pub witness_pairs: usize,
    pub contraction_instances: usize,
    pub density_trials: usize,
    pub hermitian_trials: usize,
    pub norm_samples: usize,
}

impl Scale {
    pub const DEFAULT: Scale = Scale {
        max_d: 8,
        resolutions: 200,
        subnormalized: 100,
        noncommuting: 100,
        witness_pairs: 100,
        contraction_instances: 50,
        density_trials: 500,
        hermitian_trials: 1000,
        norm_samples: 200,
    };

    pub const QUICK: Scale = Scale {
        max_d: 4,
        resolutions: 20,
        subnormalized: 20,
        noncommuting: 20,
        witness_pairs: 20,
        contraction_instances: 20,
        density_trials: 20,
        hermitian_trials: 20,
        norm_samples: 20,
    };
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    /// Largest value of the criterion's measured quantity (distance, residual, …).
    pub worst: f64,
    pub detail: String,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub scale: Scale,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

struct Tally {
    id: u32,
    name: &'static str,
    checked: usize,
    failures: usize,
    worst: f64,
    notes: Vec<String>,
    start: Instant,
}

impl Tally {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            checked: 0,
            failures: 0,
            worst: 0.0,
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn record(&mut self, ok: bool, value: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        if value.is_finite() {
            self.worst = self.worst.max(value);
        }
        if !ok {
            self.failures += 1;
            if self.notes.len() < 5 {
                self.notes.push(what());
            }
        }
    }

    fn finish(self, extra_ok: bool, summary: String) -> CriterionResult {
        let passed = self.failures == 0 && extra_ok && self.checked > 0;
        let mut detail = summary;
        if !self.notes.is_empty() {
            detail.push_str("; failures: ");
            detail.push_str(&self.notes.join(" | "));
        }
        CriterionResult {
            id: self.id,
            name: self.name,
            passed,
            checked: self.checked,
            failures: self.failures,
            worst: self.worst,
            detail,
            elapsed_ms: self.start.elapsed().as_millis(),
        }
    }
}

/// `(d, n)` for the `i`-th pool member, cycling `d ∈ 2..=max_d` and `n ∈ n_range`.
fn pool_shape(i: usize, max_d: usize, n_lo: usize, n_hi: usize) -> (usize, usize) {
    let span_d = max_d - 1;
    let d = 2 + i % span_d;
    let n = n_lo + (i / span_d) % (n_hi - n_lo + 1);
    (d, n)
}

/// Commuting resolutions; every third one has degenerate joint eigenspaces.
pub fn resolution_pool(scale: &Scale) -> Vec<(u64, CommutingFamily)> {
    (0..scale.resolutions)
        .map(|i| {
            let (d, n) = pool_shape(i, scale.max_d, 1, 5);
            let seed = 1000 + i as u64;
            let shape = FamilyShape {
                unit_fraction: None,
                distinct_tuples: (i % 3 == 2).then_some(d.div_ceil(2)),
            };
            (seed, commuting_family(d, n, seed, shape))
        })
        .collect()
}

const UNIT_FRACTIONS: [f64; 3] = [0.0, 0.25, 0.5];

pub fn subnormalized_pool(scale: &Scale) -> Vec<(f64, EffectSet)> {
    (0..scale.subnormalized)
        .map(|i| {
            let (d, n) = pool_shape(i, scale.max_d, 1, 5);
            let fraction = UNIT_FRACTIONS[i % UNIT_FRACTIONS.len()];
            let set = generate_commuting_subnormalized(d, n, 2000 + i as u64, fraction)
                .expect("generator output is a valid effect set");
            (fraction, set)
        })
        .collect()
}

pub fn noncommuting_pool(scale: &Scale) -> Vec<EffectSet> {
    (0..scale.noncommuting)
        .map(|i| {
            let (d, n) = pool_shape(i, scale.max_d, 3, 5);
            generate_noncommuting_resolution(d, n, 3000 + i as u64)
                .expect("generator output is a valid effect set")
        })
        .collect()
}

fn tol() -> Tolerances {
    Tolerances::DEFAULT
}

fn family_set(family: &CommutingFamily) -> EffectSet {
    family
        .effect_set(&tol())
        .expect("generator output is a valid effect set")
}

/// 1: fixed points equal the commutant for commuting resolutions.
pub fn criterion_1(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(1, "fixed points = commutant (commuting resolutions)");
    for (seed, family) in resolution_pool(scale) {
        let set = family_set(&family);
        match verify_fixed_equals_commutant(&set) {
            Ok(r) => {
                let ok = r.verdict && r.distance <= 1e-8 && r.fixed_dim == r.target_dim;
                t.record(ok, r.distance, || format!("seed {seed}: {}", r.details));
            }
            Err(e) => t.record(false, f64::NAN, || format!("seed {seed}: {e}")),
        }
    }
    let n = t.checked;
    let worst = t.worst;
    let elapsed = t.start.elapsed().as_secs_f64();
    t.finish(
        n >= scale.resolutions,
        format!("{n} sets, worst projector distance {worst:.2e}, {elapsed:.1} s"),
    )
}

/// 2: fixed points equal `P·A′` for commuting subnormalized sets.
pub fn criterion_2(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(2, "fixed points = P·commutant (commuting subnormalized)");
    for (i, (fraction, set)) in subnormalized_pool(scale).into_iter().enumerate() {
        if set.normalization() == Normalization::Resolution {
            // tiny d with fraction rounding up to every column; not a subnormalized instance
            t.record(false, f64::NAN, || {
                format!("pool member {i} is a resolution")
            });
            continue;
        }
        match verify_fixed_equals_projected_commutant(&set) {
            Ok(r) => {
                let zero_ok = fraction > 0.0 || r.fixed_dim == 0;
                let ok = r.verdict && r.distance <= 1e-8 && zero_ok;
                t.record(ok, r.distance, || {
                    format!("member {i} (fraction {fraction}): {}", r.details)
                });
            }
            Err(e) => t.record(false, f64::NAN, || format!("member {i}: {e}")),
        }
    }
    let (n, worst) = (t.checked, t.worst);
    t.finish(
        n >= scale.subnormalized,
        format!("{n} sets, worst projector distance {worst:.2e}"),
    )
}

/// 3: the same equality for non-commuting resolutions.
pub fn criterion_3(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(3, "fixed points = commutant (non-commuting resolutions)");
    for (i, set) in noncommuting_pool(scale).into_iter().enumerate() {
        let commuting = set.is_commuting();
        match verify_fixed_equals_commutant(&set) {
            Ok(r) => {
                let ok =
                    !commuting && r.verdict && r.distance <= 1e-8 && r.fixed_dim == r.target_dim;
                t.record(ok, r.distance, || format!("member {i}: {}", r.details));
            }
            Err(e) => t.record(false, f64::NAN, || format!("member {i}: {e}")),
        }
    }
    let (n, worst) = (t.checked, t.worst);
    t.finish(
        n >= scale.noncommuting,
        format!("{n} sets, worst projector distance {worst:.2e}"),
    )
}

/// 4: `Φ(X) = I − X` has the solution `I/2` on commuting resolutions.
pub fn criterion_4(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(4, "Φ(X) = I − X solved by I/2");
    for (seed, family) in resolution_pool(scale) {
        let set = family_set(&family);
        let d = set.dim();
        match LuedersOperation::new(set).solve_complement() {
            Ok(sol) => {
                let half = ComplexMatrix::identity(d).scale_real(0.5);
                let dist = (&sol.solution - &half).frobenius_norm();
                let ok = dist <= 1e-9 && sol.residual <= 1e-10 && sol.is_effect;
                t.record(ok, dist.max(sol.residual), || {
                    format!(
                        "seed {seed}: ‖X − I/2‖ = {dist:.2e}, residual {:.2e}",
                        sol.residual
                    )
                });
            }
            Err(e) => t.record(false, f64::NAN, || format!("seed {seed}: {e}")),
        }
    }
    let (n, worst) = (t.checked, t.worst);
    t.finish(
        true,
        format!("{n} sets, worst of distance/residual {worst:.2e}"),
    )
}

/// 5: `‖Φ‖ = ‖Σ Ei²‖`, exact at the identity and never exceeded by samples.
pub fn criterion_5(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(5, "‖Φ‖ = ‖Σ Ei²‖");
    let mut sets: Vec<EffectSet> = resolution_pool(scale)
        .iter()
        .map(|(_, f)| family_set(f))
        .collect();
    sets.extend(subnormalized_pool(scale).into_iter().map(|(_, s)| s));
    sets.extend(noncommuting_pool(scale));
    for (i, set) in sets.into_iter().enumerate() {
        let cert = LuedersOperation::new(set).channel_norm(scale.norm_samples, 5000 + i as u64);
        let excess = cert.max_sampled - cert.norm;
        t.record(cert.passed, excess.max(0.0), || {
            format!(
                "set {i}: ‖F‖ = {}, ‖Φ(I)‖ = {}, max sampled {}",
                cert.norm, cert.identity_image_norm, cert.max_sampled
            )
        });
    }
    let n = t.checked;
    t.finish(true, format!("{n} sets × {} samples", scale.norm_samples))
}

/// A random effect `U diag(λ) U*` whose eigenprojectors are known from the construction.
struct KnownEffect {
    basis: ComplexMatrix,
    spectrum: Vec<f64>,
}

impl KnownEffect {
    fn random(rng: &mut SeededRng, d: usize) -> Self {
        // a few distinct levels so some eigenvalues repeat
        let levels: Vec<f64> = (0..d.div_ceil(2).max(2)).map(|_| rng.uniform()).collect();
        let spectrum = (0..d)
            .map(|v| {
                levels[if v < levels.len() {
                    v
                } else {
                    rng.index(levels.len())
                }]
            })
            .collect();
        Self {
            basis: rng.haar_unitary(d),
            spectrum,
        }
    }

    fn matrix(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_real_diagonal(&self.spectrum);
        (&(&self.basis * &d) * &self.basis.adjoint()).hermitian_part()
    }

    /// Projector onto the constructed eigenvectors with `λ ∈ (k/m, (k+1)/m]`.
    fn window(&self, m: u64, k: i64) -> ComplexMatrix {
        let lo = k as f64 / m as f64;
        let hi = (k + 1) as f64 / m as f64;
        let cols: Vec<Vec<C64>> = self
            .spectrum
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > lo && l <= hi)
            .map(|(v, _)| self.basis.column(v))
            .collect();
        let w = ComplexMatrix::from_columns(self.basis.rows(), &cols);
        if cols.is_empty() {
            ComplexMatrix::zeros(self.basis.rows(), self.basis.rows())
        } else {
            &w * &w.adjoint()
        }
    }
}

/// 6: witness certificates are sound and match an eigenprojector oracle.
pub fn criterion_6(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(6, "witness search soundness");
    let tol = tol();
    for i in 0..scale.witness_pairs {
        let mut rng = SeededRng::new(6000 + i as u64);
        let d = 2 + i % (scale.max_d - 1);
        let known = KnownEffect::random(&mut rng, d);
        let effect = validate_effect(&known.matrix(), &tol).expect("constructed effect is valid");

        // non-commuting: a generic operator
        let b = rng.gaussian_matrix(d, d);
        match witness_search(&effect, &b, tol.witness) {
            Ok(cert) => {
                let oracle = operator_norm(
                    &(&(&known.window(cert.m, cert.k) * &b) * &known.window(cert.m, cert.j)),
                );
                let diff = (oracle - cert.block_norm).abs();
                let sound = verify_certificate(&effect, &b, &cert, tol.witness).unwrap_or(false);
                let ok = (cert.k - cert.j).abs() >= 2 && diff <= 1e-10 && sound;
                t.record(ok, diff, || {
                    format!(
                        "pair {i}: m={} k={} j={} norm {} oracle {oracle}",
                        cert.m, cert.k, cert.j, cert.block_norm
                    )
                });
            }
            Err(e) => t.record(false, f64::NAN, || format!("pair {i}: {e}")),
        }

        // commuting: a function of the same eigenbasis
        let g: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        let c = (&(&known.basis * &ComplexMatrix::from_real_diagonal(&g)) * &known.basis.adjoint())
            .hermitian_part();
        let ok = matches!(
            witness_search(&effect, &c, tol.witness),
            Err(Error::CommutesNoWitness)
        );
        t.record(ok, 0.0, || {
            format!("pair {i}: commuting operator produced a witness")
        });
    }
    let (n, worst) = (t.checked, t.worst);
    t.finish(
        true,
        format!("{n} searches, worst oracle mismatch {worst:.2e}"),
    )
}

/// 7: the contractive block meets the lower bound and its structural claims.
pub fn criterion_7(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(7, "contraction bound");
    let formatted = format!("{:.7}", contraction_bound(1, 2, 100));
    let limit = (contraction_bound(1, 2, 1_000_000) - 0.125).abs();
    let arithmetic_ok = formatted == "0.1149750" && limit <= 1e-4;
    t.record(arithmetic_ok, 0.0, || {
        format!("bound(1,2,100) = {formatted}, limit gap {limit:.2e}")
    });

    for i in 0..scale.contraction_instances {
        let seed = 7000 + i as u64;
        let (d, n) = pool_shape(i, scale.max_d.min(6), 1, 3);
        let set = if i % 2 == 0 {
            family_set(&commuting_family(d, n, seed, FamilyShape::RESOLUTION))
        } else {
            generate_commuting_subnormalized(d, n, seed, 0.5).expect("valid generator output")
        };
        let mut rng = SeededRng::new(seed);
        let x = rng.gaussian_matrix(d, d);
        let m = match witness_search(&set.effects()[0], &x, set.tolerances().witness) {
            Ok(c) => c.m,
            Err(Error::CommutesNoWitness) => {
                // E1 = I when n = 1 on a resolution; nothing to contract
                continue;
            }
            Err(e) => {
                t.record(false, f64::NAN, || format!("instance {i}: {e}"));
                continue;
            }
        };
        let p_star = positive_bound_threshold(n as u64, m);
        for p in [p_star, 2 * p_star] {
            match build_contractive_block(&set, &x, p) {
                Ok(r) => {
                    let ok = r.bound > 0.0
                        && r.achieved_ratio >= r.bound - 1e-12
                        && r.commutant_defect <= 1e-9
                        && r.overlap <= 1e-10
                        && r.refined_gap() >= p as i64
                        && squeeze_holds(&r.coarse_left)
                        && squeeze_holds(&r.coarse_right);
                    t.record(ok, r.bound - r.achieved_ratio, || {
                        format!(
                            "instance {i} p={p}: ratio {} bound {} defect {:.1e} overlap {:.1e} gap {}",
                            r.achieved_ratio, r.bound, r.commutant_defect, r.overlap, r.refined_gap()
                        )
                    });
                }
                Err(e) => t.record(false, f64::NAN, || format!("instance {i} p={p}: {e}")),
            }
        }
    }
    let n = t.checked;
    t.finish(
        n > scale.contraction_instances,
        format!("{n} checks, bound(1,2,100) = {formatted}"),
    )
}

/// 8: `dim A′ = Σ dj²` over joint eigenspaces.
pub fn criterion_8(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(8, "commutant dimension = Σ dj²");
    let mut sets: Vec<EffectSet> = resolution_pool(scale)
        .iter()
        .map(|(_, f)| family_set(f))
        .collect();
    sets.extend(subnormalized_pool(scale).into_iter().map(|(_, s)| s));
    for (i, set) in sets.into_iter().enumerate() {
        let tol = set.tolerances().nullspace;
        match joint_eigenspaces(&set) {
            Ok(js) => {
                let direct = commutant(&set, tol).dim();
                let formula = js.commutant_dim();
                t.record(direct == formula, 0.0, || {
                    format!(
                        "set {i}: nullspace {direct} vs Σ dj² {formula} (blocks {:?})",
                        js.block_dims()
                    )
                });
            }
            Err(e) => t.record(false, f64::NAN, || format!("set {i}: {e}")),
        }
    }
    let n = t.checked;
    t.finish(true, format!("{n} commuting sets"))
}

/// Random density matrix `G G* / tr(G G*)`.
fn random_density(rng: &mut SeededRng, d: usize) -> ComplexMatrix {
    let g = rng.gaussian_matrix(d, d);
    let h = &g * &g.adjoint();
    let tr = h.trace().re;
    h.scale_real(1.0 / tr).hermitian_part()
}

/// Density matrix block-diagonal over the joint eigenspaces of the construction.
fn commuting_density(rng: &mut SeededRng, family: &CommutingFamily) -> ComplexMatrix {
    let d = family.dim();
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for v in 0..d {
        let tuple = family.tuple(v);
        match groups.iter_mut().find(|(t, _)| *t == tuple) {
            Some((_, cols)) => cols.push(v),
            None => groups.push((tuple, vec![v])),
        }
    }
    let mut rho = ComplexMatrix::zeros(d, d);
    for (_, cols) in groups {
        let vecs: Vec<Vec<C64>> = cols.iter().map(|&v| family.basis.column(v)).collect();
        let w = ComplexMatrix::from_columns(d, &vecs);
        let r = random_density(rng, cols.len()).scale_real(rng.uniform() + 0.1);
        rho = &rho + &(&(&w * &r) * &w.adjoint());
    }
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr).hermitian_part()
}

/// 9: `Φ(ρ) = ρ` exactly when `ρ` commutes with every effect.
pub fn criterion_9(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(9, "undisturbed ⇔ commuting");
    let mut agree_fixed = 0;
    for i in 0..scale.density_trials {
        let seed = 9000 + i as u64;
        let (d, n) = pool_shape(i, scale.max_d, 1, 4);
        let shape = FamilyShape {
            unit_fraction: None,
            distinct_tuples: (i % 2 == 0).then_some(d.div_ceil(2)),
        };
        let family = commuting_family(d, n, seed, shape);
        let op = LuedersOperation::new(family_set(&family));
        let mut rng = SeededRng::new(seed);
        let rho = if i % 2 == 0 {
            commuting_density(&mut rng, &family)
        } else {
            random_density(&mut rng, d)
        };
        match op.is_undisturbed_state(&rho, 1e-9) {
            Ok(u) => {
                if u.is_fixed {
                    agree_fixed += 1;
                }
                t.record(u.is_fixed == u.commutes_with_all, 0.0, || {
                    format!(
                        "trial {i}: fixed {} ({:.2e}) vs commuting {} ({:.2e})",
                        u.is_fixed, u.displacement, u.commutes_with_all, u.max_commutator
                    )
                });
            }
            Err(e) => t.record(false, f64::NAN, || format!("trial {i}: {e}")),
        }
    }
    let n = t.checked;
    t.finish(true, format!("{n} trials, {agree_fixed} undisturbed"))
}

/// 10: eigendecomposition reconstruction and partition of unity of spectral bins.
pub fn criterion_10(scale: &Scale) -> CriterionResult {
    let mut t = Tally::new(10, "kernel health");
    let max_d = 12.min(scale.max_d.max(4) + 8);
    for i in 0..scale.hermitian_trials {
        let mut rng = SeededRng::new(10_000 + i as u64);
        let d = 1 + i % max_d;
        let m = rng.gaussian_matrix(d, d).hermitian_part();
        match hermitian_eigendecompose(&m) {
            Ok(eig) => {
                let rel = (&eig.reconstruct() - &m).frobenius_norm() / m.frobenius_norm();
                t.record(rel <= 1e-9, rel, || {
                    format!("trial {i}: relative error {rel:.2e}")
                });
            }
            Err(e) => t.record(false, f64::NAN, || format!("trial {i}: {e}")),
        }
    }
    let tol = tol();
    for i in 0..20 {
        let mut rng = SeededRng::new(11_000 + i);
        let d = 2 + (i as usize) % 7;
        let known = KnownEffect::random(&mut rng, d);
        let e = validate_effect(&known.matrix(), &tol).expect("constructed effect is valid");
        for m in [2u64, 3, 5, 8] {
            let mut total = ComplexMatrix::zeros(d, d);
            for k in -1..m as i64 {
                let w = e
                    .window(k as f64 / m as f64, (k + 1) as f64 / m as f64)
                    .expect("bins are nonempty intervals");
                total = &total + &w.projector;
            }
            let err = (&total - &ComplexMatrix::identity(d)).frobenius_norm();
            t.record(err <= 1e-10, err, || {
                format!("effect {i}, m={m}: ‖Σ P − I‖ = {err:.2e}")
            });
        }
    }
    let (n, worst) = (t.checked, t.worst);
    t.finish(
        true,
        format!("{n} checks, worst relative error {worst:.2e}"),
    )
}

pub type CriterionFn = fn(&Scale) -> CriterionResult;

pub const CRITERIA: [CriterionFn; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];

pub fn run_suite(scale: &Scale) -> SuiteSummary {
    let criteria: Vec<CriterionResult> = CRITERIA.iter().map(|f| f(scale)).collect();
    SuiteSummary {
        scale: *scale,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

impl CriterionResult {
    /// `"[PASS]  3 name: detail"`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}
