//! `lueders`: generate, validate and analyze effect sets from the command line.
//!
//! Exit codes: 0 success or verdict true, 1 validation failure or verdict false,
//! 2 the operator commutes so no witness exists, 3 and up for usage, I/O and
//! internal errors.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lueders::generate::{
    generate_commuting_resolution, generate_commuting_subnormalized,
    generate_noncommuting_resolution,
};
use lueders::io::{
    contraction_json, matrix_json, parse_matrix, witness_json, EffectSetFile, SetMetadata,
};
use lueders::linalg::{operator_norm, subspaces_equal};
use lueders::lueders::{commutant, joint_eigenspaces, verify};
use lueders::suite::{run_suite, Scale};
use lueders::witness::{
    build_contractive_block, contraction_bound, contraction_bound_alt, positive_bound_threshold,
    witness_search,
};
use lueders::{ComplexMatrix, EffectSet, Error, LuedersOperation, Tolerances};

const EXIT_INVALID: u8 = 1;
const EXIT_NO_WITNESS: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lueders",
    version,
    about = "Lüders operations on finite effect sets"
)]
struct Cli {
    /// Write the report to this file (atomically) instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override a tolerance, e.g. `--tol comm=1e-8`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded effect set.
    Gen {
        #[arg(long, value_enum, default_value_t = Flavor::CommutingResolution)]
        flavor: Flavor,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Share of joint eigenvectors kept at unit weight (subnormalized flavor only).
        #[arg(long, default_value_t = 0.0)]
        unit_fraction: f64,
    },
    /// Check the effect and sum-of-squares invariants.
    Validate { set: PathBuf },
    /// Fixed points, commutant and joint eigenstructure of a set.
    Analyze { set: PathBuf },
    /// Check that the fixed points equal the commutant (or its unit-eigenspace compression).
    Verify { set: PathBuf },
    /// Find a spectral-window certificate that an operator does not commute with an effect.
    Witness {
        set: PathBuf,
        operator: PathBuf,
        /// Which effect of the set to test against.
        #[arg(long, default_value_t = 0)]
        effect: usize,
        /// Also build the refined contraction block at this refinement factor.
        #[arg(long)]
        p: Option<u64>,
        /// Include the projectors in the output.
        #[arg(long)]
        full: bool,
    },
    /// Evaluate the contraction lower bound and its positivity threshold.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Solve Φ(X) = I − X.
    #[command(alias = "nagy")]
    Complement { set: PathBuf },
    /// Run the full property battery.
    Suite {
        /// Small scale: d ≤ 4, 20 seeds per criterion.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    CommutingResolution,
    CommutingSubnormalized,
    NoncommutingResolution,
}

impl Flavor {
    fn name(self) -> &'static str {
        match self {
            Flavor::CommutingResolution => "commuting-resolution",
            Flavor::CommutingSubnormalized => "commuting-subnormalized",
            Flavor::NoncommutingResolution => "noncommuting-resolution",
        }
    }
}

/// What a command produced: the text to emit and the exit code.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn json(value: &Value, code: u8) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("json renders");
        text.push('\n');
        Self { text, code }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => match emit(cli.out.as_deref(), &outcome.text) {
            Ok(()) => ExitCode::from(outcome.code),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_ERROR)
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
        Some(path) => write_atomically(path, text),
    }
}

fn write_atomically(path: &Path, text: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn tolerances(overrides: &[String]) -> anyhow::Result<Tolerances> {
    let mut value = serde_json::to_value(Tolerances::DEFAULT)?;
    for item in overrides {
        let (name, raw) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--tol expects NAME=VALUE, got {item:?}"))?;
        let slot = value
            .get_mut(name)
            .ok_or_else(|| anyhow!("unknown tolerance {name:?}"))?;
        *slot = if name == "jacobi_sweeps" {
            json!(raw
                .parse::<usize>()
                .with_context(|| format!("--tol {item}"))?)
        } else {
            json!(raw
                .parse::<f64>()
                .with_context(|| format!("--tol {item}"))?)
        };
    }
    Ok(serde_json::from_value(value)?)
}

fn read_file(path: &Path) -> anyhow::Result<EffectSetFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(EffectSetFile::parse(&text)?)
}

fn load_set(path: &Path, tol: &Tolerances) -> anyhow::Result<EffectSet> {
    Ok(read_file(path)?.to_effect_set(tol)?)
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let tol = tolerances(&cli.tol)?;
    match &cli.command {
        Command::Gen {
            flavor,
            d,
            n,
            seed,
            unit_fraction,
        } => cmd_gen(*flavor, *d, *n, *seed, *unit_fraction),
        Command::Validate { set } => cmd_validate(set, &tol),
        Command::Analyze { set } => cmd_analyze(&load_set(set, &tol)?),
        Command::Verify { set } => {
            let report = verify(&load_set(set, &tol)?)?;
            let code = if report.verdict { 0 } else { EXIT_INVALID };
            Ok(Outcome::json(&serde_json::to_value(&report)?, code))
        }
        Command::Witness {
            set,
            operator,
            effect,
            p,
            full,
        } => cmd_witness(&load_set(set, &tol)?, operator, *effect, *p, *full),
        Command::Bound { n, m, p } => cmd_bound(*n, *m, *p),
        Command::Complement { set } => cmd_complement(&load_set(set, &tol)?),
        Command::Suite { quick } => {
            let scale = if *quick { Scale::QUICK } else { Scale::DEFAULT };
            let summary = run_suite(&scale);
            for c in &summary.criteria {
                eprintln!("{}", c.line());
            }
            let code = if summary.passed { 0 } else { EXIT_INVALID };
            Ok(Outcome::json(&serde_json::to_value(&summary)?, code))
        }
    }
}

fn cmd_gen(
    flavor: Flavor,
    d: usize,
    n: usize,
    seed: u64,
    unit_fraction: f64,
) -> anyhow::Result<Outcome> {
    for (name, v) in [("d", d), ("n", n)] {
        if !(1..=64).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} = {v} is outside [1, 64]")).into());
        }
    }
    if !(0.0..=1.0).contains(&unit_fraction) {
        return Err(Error::InvalidArgument(format!(
            "unit fraction {unit_fraction} is outside [0, 1]"
        ))
        .into());
    }
    let set = match flavor {
        Flavor::CommutingResolution => generate_commuting_resolution(d, n, seed)?,
        Flavor::CommutingSubnormalized => {
            generate_commuting_subnormalized(d, n, seed, unit_fraction)?
        }
        Flavor::NoncommutingResolution => generate_noncommuting_resolution(d, n, seed)?,
    };
    let meta = SetMetadata {
        flavor: Some(flavor.name().into()),
        seed: Some(seed),
    };
    Ok(Outcome {
        text: EffectSetFile::from_set(&set, meta).render(),
        code: 0,
    })
}

fn cmd_validate(path: &Path, tol: &Tolerances) -> anyhow::Result<Outcome> {
    let file = read_file(path)?;
    let set = match file.to_effect_set(tol) {
        Ok(set) => set,
        Err(e) => {
            let report = json!({
                "valid": false,
                "violation": e.kind(),
                "message": e.to_string(),
            });
            return Ok(Outcome::json(&report, EXIT_INVALID));
        }
    };
    let effects: Vec<Value> = set
        .effects()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let s = e.eigensystem().eigenvalues.as_slice();
            json!({"index": i, "min_eigenvalue": s[0], "max_eigenvalue": s[s.len() - 1]})
        })
        .collect();
    let mats: Vec<_> = set.matrices().collect();
    let mut commutators = Vec::new();
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            commutators
                .push(json!({"i": i, "j": j, "norm": operator_norm(&mats[i].commutator(mats[j]))}));
        }
    }
    let identity = ComplexMatrix::identity(set.dim());
    let report = json!({
        "valid": true,
        "d": set.dim(),
        "n": set.len(),
        "normalization": set.normalization(),
        "commuting": set.is_commuting(),
        "effects": effects,
        "commutators": commutators,
        "sum_of_squares_norm": operator_norm(set.sum_of_squares()),
        "distance_to_identity": operator_norm(&(set.sum_of_squares() - &identity)),
    });
    Ok(Outcome::json(&report, 0))
}

fn cmd_analyze(set: &EffectSet) -> anyhow::Result<Outcome> {
    let tol = *set.tolerances();
    let op = LuedersOperation::new(set.clone());
    let fixed = op.fixed_point_space(tol.nullspace);
    let comm = commutant(set, tol.nullspace);
    let cmp = subspaces_equal(&fixed, &comm, tol.subspace)?;
    let norm = op.channel_norm(0, 0);
    let mut report = json!({
        "d": set.dim(),
        "n": set.len(),
        "normalization": set.normalization(),
        "commuting": set.is_commuting(),
        "max_commutator": set.max_commutator_norm(),
        "fixed_dim": fixed.dim(),
        "commutant_dim": comm.dim(),
        "fixed_commutant_distance": cmp.distance,
        "channel_norm": norm.norm,
    });
    if set.is_commuting() {
        let joint = joint_eigenspaces(set)?;
        let blocks: Vec<Value> = joint
            .blocks
            .iter()
            .map(|b| json!({"eigenvalues": b.eigenvalues, "dim": b.basis.cols()}))
            .collect();
        report["joint_blocks"] = Value::Array(blocks);
        report["commutant_dim_from_blocks"] = json!(joint.commutant_dim());
    }
    Ok(Outcome::json(&report, 0))
}

fn cmd_witness(
    set: &EffectSet,
    operator: &Path,
    effect: usize,
    p: Option<u64>,
    full: bool,
) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(operator)
        .with_context(|| format!("reading {}", operator.display()))?;
    let b = parse_matrix(&text)?;
    let e = set.effects().get(effect).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "effect index {effect} but the set has {} effects",
            set.len()
        ))
    })?;
    let cert = match witness_search(e, &b, set.tolerances().witness) {
        Ok(cert) => cert,
        Err(Error::CommutesNoWitness) => {
            let report = json!({"witness": null, "result": Error::CommutesNoWitness.kind()});
            return Ok(Outcome::json(&report, EXIT_NO_WITNESS));
        }
        Err(e) => return Err(e.into()),
    };
    let mut report = json!({"effect": effect, "witness": witness_json(&cert, full)});
    if let Some(p) = p {
        let block = build_contractive_block(set, &b, p)?;
        report["contraction"] = contraction_json(&block, full);
    }
    Ok(Outcome::json(&report, 0))
}

fn cmd_bound(n: u64, m: u64, p: Option<u64>) -> anyhow::Result<Outcome> {
    if n == 0 || m == 0 || p == Some(0) {
        return Err(Error::InvalidArgument("n, m and p must be at least 1".into()).into());
    }
    let mut text = String::new();
    if let Some(p) = p {
        text.push_str(&format!(
            "bound(n={n}, m={m}, p={p}) = {:.7}\n",
            contraction_bound(n, m, p)
        ));
        text.push_str(&format!(
            "bound_alt(n={n}, m={m}, p={p}) = {:.7}\n",
            contraction_bound_alt(n, m, p)
        ));
    }
    text.push_str(&format!("p* = {}\n", positive_bound_threshold(n, m)));
    Ok(Outcome { text, code: 0 })
}

fn cmd_complement(set: &EffectSet) -> anyhow::Result<Outcome> {
    let op = LuedersOperation::new(set.clone());
    let sol = op.solve_complement()?;
    let half = ComplexMatrix::identity(set.dim()).scale_real(0.5);
    let report = json!({
        "residual": sol.residual,
        "is_effect": sol.is_effect,
        "distance_to_half_identity": (&sol.solution - &half).frobenius_norm(),
        "solution": matrix_json(&sol.solution),
    });
    Ok(Outcome::json(&report, 0))
}
