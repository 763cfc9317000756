//! Browser bindings for the static page in `www/`.
//!
//! Every export returns a JSON string; failures come back as `{"error": ...}` so the
//! page has a single rendering path. The `*_report` functions are plain Rust and are
//! what the native tests exercise.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use lueders::generate::{
    generate_commuting_resolution, generate_commuting_subnormalized,
    generate_noncommuting_resolution,
};
use lueders::lueders::{commutant, joint_eigenspaces, verify};
use lueders::rng::SeededRng;
use lueders::witness::{
    build_contractive_block, contraction_bound, contraction_bound_alt, positive_bound_threshold,
};
use lueders::{validate_effect, ComplexMatrix, EffectSet, LuedersOperation, Result, Tolerances};

/// Largest dimension the page may request; keeps the d² × d² superoperator small.
pub const MAX_DIM: usize = 12;

fn render(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({"error": e.kind(), "message": e.to_string()}).to_string(),
    }
}

/// Spectral bins of the effect `U diag(eigenvalues) U*` at resolution `m`, with `U`
/// a seeded random unitary.
#[wasm_bindgen]
pub fn spectral_bins(eigenvalues: Vec<f64>, m: u32, seed: u64) -> String {
    render(spectral_bins_report(&eigenvalues, m, seed))
}

/// Generates a set, then compares its fixed points with the commutant.
#[wasm_bindgen]
pub fn fixed_points(flavor: &str, d: usize, n: usize, seed: u64, unit_fraction: f64) -> String {
    render(fixed_points_report(flavor, d, n, seed, unit_fraction))
}

/// The contraction bound for `p = 1..=p_max` next to the ratio actually achieved on
/// a two-level example at powers of two.
#[wasm_bindgen]
pub fn contraction_curve(n: u32, m: u32, p_max: u32) -> String {
    render(contraction_curve_report(n as u64, m as u64, p_max as u64))
}

pub fn spectral_bins_report(eigenvalues: &[f64], m: u32, seed: u64) -> Result<Value> {
    let d = eigenvalues.len();
    if d == 0 || d > MAX_DIM || m == 0 {
        return Err(lueders::Error::InvalidArgument(format!(
            "need 1 to {MAX_DIM} eigenvalues and m >= 1"
        )));
    }
    let u = SeededRng::new(seed).haar_unitary(d);
    let matrix = &(&u * &ComplexMatrix::from_real_diagonal(eigenvalues)) * &u.adjoint();
    let effect = validate_effect(&matrix.hermitian_part(), &Tolerances::DEFAULT)?;
    let m = m as u64;
    let bins: Vec<Value> = effect
        .occupied_bins(m)
        .iter()
        .map(|(k, p)| {
            let lo = *k as f64 / m as f64;
            json!({
                "k": k,
                "a": lo,
                "b": lo + 1.0 / m as f64,
                "rank": p.trace().re.round() as usize,
            })
        })
        .collect();
    Ok(json!({
        "m": m,
        "spectrum": effect.spectrum(),
        "bins": bins,
    }))
}

fn generate(flavor: &str, d: usize, n: usize, seed: u64, unit_fraction: f64) -> Result<EffectSet> {
    if !(1..=MAX_DIM).contains(&d) || !(1..=16).contains(&n) {
        return Err(lueders::Error::InvalidArgument(format!(
            "d must be in 1..={MAX_DIM} and n in 1..=16"
        )));
    }
    match flavor {
        "commuting-resolution" => generate_commuting_resolution(d, n, seed),
        "commuting-subnormalized" => {
            generate_commuting_subnormalized(d, n, seed, unit_fraction.clamp(0.0, 1.0))
        }
        "noncommuting-resolution" => generate_noncommuting_resolution(d, n, seed),
        other => Err(lueders::Error::InvalidArgument(format!(
            "unknown flavor {other:?}"
        ))),
    }
}

pub fn fixed_points_report(
    flavor: &str,
    d: usize,
    n: usize,
    seed: u64,
    unit_fraction: f64,
) -> Result<Value> {
    let set = generate(flavor, d, n, seed, unit_fraction)?;
    let report = verify(&set)?;
    let tol = *set.tolerances();
    let op = LuedersOperation::new(set.clone());
    let mut out = json!({
        "normalization": set.normalization(),
        "commuting": set.is_commuting(),
        "max_commutator": set.max_commutator_norm(),
        "fixed_dim": report.fixed_dim,
        "target_dim": report.target_dim,
        "commutant_dim": commutant(&set, tol.nullspace).dim(),
        "distance": report.distance,
        "verdict": report.verdict,
        "channel_norm": op.channel_norm(0, 0).norm,
    });
    if set.is_commuting() {
        let joint = joint_eigenspaces(&set)?;
        out["block_dims"] = json!(joint.block_dims());
    }
    Ok(out)
}

pub fn contraction_curve_report(n: u64, m: u64, p_max: u64) -> Result<Value> {
    if n == 0 || m == 0 || !(1..=4096).contains(&p_max) {
        return Err(lueders::Error::InvalidArgument(
            "n and m must be positive and p_max in 1..=4096".into(),
        ));
    }
    let bound: Vec<f64> = (1..=p_max).map(|p| contraction_bound(n, m, p)).collect();
    let bound_alt: Vec<f64> = (1..=p_max)
        .map(|p| contraction_bound_alt(n, m, p))
        .collect();

    // eigenvalues 0.1 and 0.9 split at m = 4; an off-diagonal X couples them
    let set = EffectSet::new(&[
        ComplexMatrix::from_real_diagonal(&[0.1, 0.9]),
        ComplexMatrix::from_real_diagonal(&[0.3, 0.4]),
    ])?;
    let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?;
    let mut achieved = Vec::new();
    let mut p = 1;
    while p <= p_max {
        let r = build_contractive_block(&set, &x, p)?;
        achieved.push(json!({"p": p, "m": r.m, "ratio": r.achieved_ratio, "bound": r.bound}));
        p *= 2;
    }
    Ok(json!({
        "n": n,
        "m": m,
        "p_star": positive_bound_threshold(n, m),
        "bound": bound,
        "bound_alt": bound_alt,
        "example": achieved,
    }))
}
