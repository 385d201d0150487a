//! Command-line front end. Every command prints one JSON document (or a
//! CSV table) built from the deterministic reporting layer, writes files
//! atomically, and uses three exit codes: 0 for success, 2 for invalid
//! input, 3 for a run whose claimed property failed to hold.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{
    compression_defect_pair, empirical_modulus, jensen_commutator_scan, ScanConfig, ScanRecord,
};
use crate::convexity::{
    epsilon_partition, find_affine_chord, verify_partition, ScalarFunction, CHORD_GRID, CHORD_TOL,
};
use crate::error::{Error, Result};
use crate::lab::{
    convergence_experiment, corner_sequence_instance, counterexample_2x2, interpolation_family,
    lifted_counterexample, multiplier_classify, shift_calculus_residuals, MultiplierClass,
    TestVectorSet, Thresholds,
};
use crate::report::{
    atomic_write, fmt_f64, function_to_json, matrix_to_json, CsvTable, Json,
};
use crate::rng::{random_symmetric_with_spectrum, SplitMix64};
use crate::spectral::{eig_sym, SubspaceProjection};
use crate::verify::{all_passed, run_all, VerifyOptions};

/// Seed default: the OPCONV_SEED environment variable when set and numeric,
/// otherwise 1. An explicit --seed always wins.
fn default_seed() -> u64 {
    std::env::var("OPCONV_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(1)
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "opconv",
    version,
    about = "Numerical lab for weak-vs-strong convergence of functions of symmetric matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the named self-check battery.
    #[command(name = "verify")]
    Verify(VerifyArgs),
    /// Build the truncated-shift counterexample for a function with an
    /// affine chord and report its residual curves.
    #[command(name = "counterexample")]
    Counterexample(CounterexampleArgs),
    /// Random scan of compression defect against commutator norm.
    #[command(name = "scan")]
    Scan(ScanArgs),
    /// Partition an interval so each piece has derivative oscillation
    /// below a chosen epsilon.
    #[command(name = "partition")]
    Partition(PartitionArgs),
    /// Show that functions commute with the truncated-shift embedding up
    /// to eigensolver roundoff.
    #[command(name = "shift-demo")]
    ShiftDemo(ShiftDemoArgs),
    /// Corner-versus-ambient spectral projection instance plus
    /// multiplier/quasi-multiplier classification examples.
    #[command(name = "prop38")]
    Prop38(Prop38Args),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the report here instead of stdout (atomic replace).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Extra function to push through the chord/scan pipeline.
    #[arg(long)]
    f: Option<String>,
    #[arg(long, default_value_t = default_seed())]
    seed: u64,
    /// Trial budget for the randomized checks.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    /// Function spec (must admit an affine chord, e.g. abs or a polyline).
    #[arg(long, default_value = "abs")]
    f: String,
    /// Length of the shift channel; ambient dimension is 1 + this.
    #[arg(long, default_value_t = 512)]
    shift_len: usize,
    /// Number of sequence terms.
    #[arg(long, default_value_t = 32)]
    steps: usize,
    /// Weak-residual tail threshold.
    #[arg(long, default_value_t = 1e-6)]
    tolw: f64,
    /// Strong-residual tail threshold.
    #[arg(long, default_value_t = 1e-6)]
    tols: f64,
    /// Compression-defect tolerance for the 2x2 seed.
    #[arg(long, default_value_t = 1e-10)]
    tolj: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Function spec.
    #[arg(long, default_value = "square")]
    f: String,
    /// Matrix dimension per trial.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Rank of the random compression subspace.
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = default_seed())]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// Function spec.
    #[arg(long, default_value = "square")]
    f: String,
    /// Left endpoint (defaults to the function's own interval, else -1).
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    /// Right endpoint (defaults to the function's own interval, else 1).
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    /// Derivative-oscillation budget per piece.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ShiftDemoArgs {
    /// Function spec applied to every term.
    #[arg(long, default_value = "exp")]
    f: String,
    /// Dimension of the random seed matrix.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Pinned block size.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Length of the shift channel; ambient dimension is m + this.
    #[arg(long, default_value_t = 64)]
    shift_len: usize,
    #[arg(long, default_value_t = 32)]
    steps: usize,
    /// Diagonal fill value (defaults to the seed's smallest eigenvalue;
    /// must lie in the seed's spectrum).
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, default_value_t = default_seed())]
    seed: u64,
    /// Tolerance for the calculus-identity residual.
    #[arg(long, default_value_t = 1e-10)]
    tolj: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct Prop38Args {
    /// Function spec for the corner instance.
    #[arg(long, default_value = "abs")]
    f: String,
    /// Spectral cut point; must lie strictly between 0 and 1.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 8)]
    steps: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolw: f64,
    #[arg(long, default_value_t = 1e-6)]
    tols: f64,
    #[arg(long, default_value_t = default_seed())]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses arguments, runs the chosen command, and returns the process exit
/// code. Library errors print to stderr and map to exit code 2; a report
/// whose claimed property does not hold maps to 3.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Verify(a) => cmd_verify(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Partition(a) => cmd_partition(a),
        Command::ShiftDemo(a) => cmd_shift_demo(a),
        Command::Prop38(a) => cmd_prop38(a),
    }
}

fn emit(output: &OutputArgs, json: &Json, csv: &CsvTable) -> Result<()> {
    let text = match output.format {
        Format::Json => json.render(),
        Format::Csv => csv.render(),
    };
    match &output.out {
        Some(path) => atomic_write(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_u64(v: u64) -> Json {
    if v <= i64::MAX as u64 {
        Json::Int(v as i64)
    } else {
        Json::Str(v.to_string())
    }
}

fn verdicts_json(v: &crate::lab::Verdicts) -> Json {
    Json::obj(vec![
        ("weak_ok", Json::Bool(v.weak_ok)),
        ("f_weak_ok", Json::Bool(v.f_weak_ok)),
        ("strong_ok", Json::Bool(v.strong_ok)),
        ("violation", Json::Bool(v.violation)),
    ])
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let custom_f = match &a.f {
        Some(spec) => Some(ScalarFunction::parse(spec)?),
        None => None,
    };
    let f_json = custom_f
        .as_ref()
        .map(function_to_json)
        .unwrap_or(Json::Null);
    let opts = VerifyOptions {
        seed: a.seed,
        trials: a.trials,
        custom_f,
    };
    let results = run_all(&opts);
    let passed = all_passed(&results);

    let checks: Vec<Json> = results
        .iter()
        .map(|r| {
            Json::obj(vec![
                ("name", Json::Str(r.name.clone())),
                ("passed", Json::Bool(r.passed)),
                ("detail", Json::Str(r.detail.clone())),
            ])
        })
        .collect();
    let doc = Json::obj(vec![
        ("command", Json::Str("verify".into())),
        ("seed", json_u64(a.seed)),
        ("trials", Json::Int(a.trials as i64)),
        ("f", f_json),
        ("checks", Json::Arr(checks)),
        ("passed", Json::Bool(passed)),
    ]);

    let mut csv = CsvTable::new(&["name", "passed", "detail"]);
    for r in &results {
        csv.push_row(vec![r.name.clone(), r.passed.to_string(), r.detail.clone()]);
    }
    emit(&a.output, &doc, &csv)?;

    if passed {
        Ok(0)
    } else {
        let failed: Vec<&str> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.as_str())
            .collect();
        eprintln!("verify: {} check(s) failed: {}", failed.len(), failed.join(" "));
        Ok(3)
    }
}

fn cmd_counterexample(a: &CounterexampleArgs) -> Result<i32> {
    let f = ScalarFunction::parse(&a.f)?;
    let (lo, hi) = f.interval().finite_bracket(-1.0, 1.0);
    let witness = find_affine_chord(&f, lo, hi, CHORD_GRID, CHORD_TOL)?
        .ok_or(Error::StrictlyConvexOnMesh)?;
    let seed = counterexample_2x2(&f, &witness)?;
    let total = 1 + a.shift_len;
    let seq = lifted_counterexample(&seed, total, a.steps)?;
    let tvs = TestVectorSet::basis(total, total.min(16))?;
    let th = Thresholds::new(a.tolw, a.tols)?;
    let rep = convergence_experiment(&seq, &f, &tvs, &th, true)?;
    let square = ScalarFunction::square();
    let sq = convergence_experiment(&seq, &square, &tvs, &th, false)?;
    let phi = rep.phi_strong.clone().unwrap_or_default();
    let min_phi = phi.iter().copied().fold(f64::INFINITY, f64::min);

    let doc = Json::obj(vec![
        ("command", Json::Str("counterexample".into())),
        ("f", function_to_json(&f)),
        ("bracket", Json::num_array(&[lo, hi])),
        (
            "witness",
            Json::obj(vec![
                ("x", Json::Num(witness.x)),
                ("y", Json::Num(witness.y)),
                ("t", Json::Num(witness.t)),
                ("defect", Json::Num(witness.defect)),
            ]),
        ),
        (
            "seed",
            Json::obj(vec![
                ("h0", matrix_to_json(&seed.h0)),
                ("jensen_defect", Json::Num(seed.jensen_defect)),
                ("commutator", Json::Num(seed.commutator)),
            ]),
        ),
        (
            "sequence",
            Json::obj(vec![
                ("total", Json::Int(total as i64)),
                ("steps", Json::Int(a.steps as i64)),
                ("pinned", Json::Int(1)),
                ("x0", Json::Num(witness.x)),
            ]),
        ),
        ("test_vectors", Json::Int(total.min(16) as i64)),
        (
            "thresholds",
            Json::obj(vec![
                ("weak", Json::Num(a.tolw)),
                ("strong", Json::Num(a.tols)),
                ("jensen", Json::Num(a.tolj)),
            ]),
        ),
        ("weak", Json::num_array(&rep.weak)),
        ("f_weak", Json::num_array(&rep.f_weak)),
        ("strong", Json::num_array(&rep.strong)),
        ("phi_strong", Json::num_array(&phi)),
        ("min_phi_strong", Json::Num(min_phi)),
        ("verdicts", verdicts_json(&rep.verdicts)),
        (
            "square_reference",
            Json::obj(vec![
                ("f_weak", Json::num_array(&sq.f_weak)),
                ("violation", Json::Bool(sq.verdicts.violation)),
            ]),
        ),
    ]);

    let mut csv = CsvTable::new(&["n", "weak", "f_weak", "strong", "phi_strong", "square_f_weak"]);
    for i in 0..rep.weak.len() {
        csv.push_row(vec![
            (i + 1).to_string(),
            fmt_f64(rep.weak[i]),
            fmt_f64(rep.f_weak[i]),
            fmt_f64(rep.strong[i]),
            fmt_f64(phi[i]),
            fmt_f64(sq.f_weak[i]),
        ]);
    }
    emit(&a.output, &doc, &csv)?;

    let ok = rep.verdicts.violation && seed.jensen_defect <= a.tolj && !sq.verdicts.violation;
    if ok {
        Ok(0)
    } else {
        eprintln!(
            "counterexample: expected a weak-but-not-strong violation (violation={} seed_defect={} square_violation={})",
            rep.verdicts.violation, seed.jensen_defect, sq.verdicts.violation
        );
        Ok(3)
    }
}

fn cmd_scan(a: &ScanArgs) -> Result<i32> {
    let f = ScalarFunction::parse(&a.f)?;
    let cfg = ScanConfig {
        dim: a.dim,
        m: a.m,
        trials: a.trials,
        seed: a.seed,
    };
    let records = jensen_commutator_scan(&f, &cfg)?;

    // Deterministic probe: when the function has an affine chord, its 2x2
    // seed pair joins the sample so the modulus curve includes the exact
    // zero-defect point.
    let (lo, hi) = f.interval().finite_bracket(-1.0, 1.0);
    let probe = match find_affine_chord(&f, lo, hi, CHORD_GRID, CHORD_TOL)? {
        Some(w) => {
            let seed = counterexample_2x2(&f, &w)?;
            let e0 = SubspaceProjection::standard(2, 1)?;
            let (defect, comm) = compression_defect_pair(&f, &seed.h0, &e0)?;
            Some((w, defect, comm))
        }
        None => None,
    };

    let mut all = records.clone();
    if let Some((_, defect, comm)) = &probe {
        all.push(ScanRecord {
            trial: all.len() as u64,
            jensen_defect: *defect,
            commutator: *comm,
        });
    }
    let modulus = empirical_modulus(&all);

    let rec_rows: Vec<Json> = records
        .iter()
        .map(|r| {
            Json::Arr(vec![
                json_u64(r.trial),
                Json::Num(r.jensen_defect),
                Json::Num(r.commutator),
            ])
        })
        .collect();
    let probe_json = match &probe {
        Some((w, defect, comm)) => Json::obj(vec![
            (
                "witness",
                Json::obj(vec![
                    ("x", Json::Num(w.x)),
                    ("y", Json::Num(w.y)),
                    ("t", Json::Num(w.t)),
                ]),
            ),
            ("jensen_defect", Json::Num(*defect)),
            ("commutator", Json::Num(*comm)),
        ]),
        None => Json::Null,
    };
    let modulus_json: Vec<Json> = modulus
        .iter()
        .map(|p| {
            Json::obj(vec![
                ("eps", Json::Num(p.eps)),
                ("delta_hat", Json::opt_num(p.delta_hat)),
            ])
        })
        .collect();
    let doc = Json::obj(vec![
        ("command", Json::Str("scan".into())),
        ("f", function_to_json(&f)),
        ("dim", Json::Int(a.dim as i64)),
        ("m", Json::Int(a.m as i64)),
        ("trials", Json::Int(a.trials as i64)),
        ("seed", json_u64(a.seed)),
        (
            "records_columns",
            Json::Arr(vec![
                Json::Str("trial".into()),
                Json::Str("jensen_defect".into()),
                Json::Str("commutator".into()),
            ]),
        ),
        ("records", Json::Arr(rec_rows)),
        ("probe", probe_json),
        ("modulus", Json::Arr(modulus_json)),
    ]);

    let mut csv = CsvTable::new(&["trial", "f", "dim", "m", "jensen_defect", "commutator"]);
    for r in &records {
        csv.push_row(vec![
            r.trial.to_string(),
            f.csv_token(),
            a.dim.to_string(),
            a.m.to_string(),
            fmt_f64(r.jensen_defect),
            fmt_f64(r.commutator),
        ]);
    }
    if let Some((_, defect, comm)) = &probe {
        csv.push_row(vec![
            "probe".into(),
            f.csv_token(),
            "2".into(),
            "1".into(),
            fmt_f64(*defect),
            fmt_f64(*comm),
        ]);
    }
    emit(&a.output, &doc, &csv)?;
    Ok(0)
}

fn cmd_partition(a: &PartitionArgs) -> Result<i32> {
    let f = ScalarFunction::parse(&a.f)?;
    let (dlo, dhi) = f.interval().finite_bracket(-1.0, 1.0);
    let lo = a.lo.unwrap_or(dlo);
    let hi = a.hi.unwrap_or(dhi);
    let partition = epsilon_partition(&f, lo, hi, a.eps)?;
    let records = verify_partition(&f, &partition)?;
    let verified = records.iter().all(|r| r.ok);

    let kinks: Vec<Json> = partition
        .kinks
        .iter()
        .map(|&(u, v)| Json::num_array(&[u, v]))
        .collect();
    let rec_json: Vec<Json> = records
        .iter()
        .map(|r| {
            Json::obj(vec![
                ("lo", Json::Num(r.lo)),
                ("hi", Json::Num(r.hi)),
                ("width", Json::Num(r.width)),
                ("gap", Json::opt_num(r.gap)),
                ("ok", Json::Bool(r.ok)),
            ])
        })
        .collect();
    let doc = Json::obj(vec![
        ("command", Json::Str("partition".into())),
        ("f", function_to_json(&f)),
        ("lo", Json::Num(lo)),
        ("hi", Json::Num(hi)),
        ("eps", Json::Num(a.eps)),
        ("piece_count", Json::Int(partition.piece_count() as i64)),
        ("points", Json::num_array(&partition.points)),
        ("kinks", Json::Arr(kinks)),
        ("records", Json::Arr(rec_json)),
        ("verified", Json::Bool(verified)),
    ]);

    let mut csv = CsvTable::new(&["lo", "hi", "width", "gap", "ok"]);
    for r in &records {
        csv.push_row(vec![
            fmt_f64(r.lo),
            fmt_f64(r.hi),
            fmt_f64(r.width),
            r.gap.map(fmt_f64).unwrap_or_else(|| "null".into()),
            r.ok.to_string(),
        ]);
    }
    emit(&a.output, &doc, &csv)?;

    if verified {
        Ok(0)
    } else {
        eprintln!("partition: a piece exceeded its derivative-oscillation budget");
        Ok(3)
    }
}

fn cmd_shift_demo(a: &ShiftDemoArgs) -> Result<i32> {
    let f = ScalarFunction::parse(&a.f)?;
    let mut rng = SplitMix64::stream(a.seed, 0xDE40);
    let (h, _) = random_symmetric_with_spectrum(a.dim, -1.0, 1.0, &mut rng);
    let d = eig_sym(&h)?;
    let x0 = a.x0.unwrap_or(d.eigenvalues()[0]);
    let total = a.m + a.shift_len;
    let residuals = shift_calculus_residuals(&h, a.m, x0, total, a.steps, &f)?;
    let max_residual = residuals.iter().copied().fold(0.0_f64, f64::max);
    let ok = max_residual <= a.tolj;

    let doc = Json::obj(vec![
        ("command", Json::Str("shift-demo".into())),
        ("f", function_to_json(&f)),
        ("dim", Json::Int(a.dim as i64)),
        ("m", Json::Int(a.m as i64)),
        ("x0", Json::Num(x0)),
        ("total", Json::Int(total as i64)),
        ("steps", Json::Int(a.steps as i64)),
        ("seed", json_u64(a.seed)),
        ("spectrum", Json::num_array(d.eigenvalues())),
        ("residuals", Json::num_array(&residuals)),
        ("max_residual", Json::Num(max_residual)),
        ("tolerance", Json::Num(a.tolj)),
        ("within_tolerance", Json::Bool(ok)),
    ]);

    let mut csv = CsvTable::new(&["n", "residual"]);
    for (i, r) in residuals.iter().enumerate() {
        csv.push_row(vec![(i + 1).to_string(), fmt_f64(*r)]);
    }
    emit(&a.output, &doc, &csv)?;

    if ok {
        Ok(0)
    } else {
        eprintln!("shift-demo: calculus identity residual {max_residual} exceeded {}", a.tolj);
        Ok(3)
    }
}

fn cmd_prop38(a: &Prop38Args) -> Result<i32> {
    let f = ScalarFunction::parse(&a.f)?;
    let th = Thresholds::new(a.tolw, a.tols)?;
    let inst = corner_sequence_instance(&f, a.alpha, a.steps, &th)?;

    // Classification examples: a constant family is a multiplier; the
    // truncated-shift lift converges weakly but keeps a moving block, so
    // it is only a quasi-multiplier.
    let ident = ScalarFunction::identity();
    let mut rng = SplitMix64::stream(a.seed, 0x9038);
    let (h, _) = random_symmetric_with_spectrum(6, -1.0, 1.0, &mut rng);
    let constant = interpolation_family(&h, &h, 8, 1.0, 0.5)?;
    let tvs6 = TestVectorSet::default_for(6, a.seed)?;
    let rep_const = convergence_experiment(&constant, &ident, &tvs6, &th, false)?;
    let class_const = multiplier_classify(&rep_const.weak, &rep_const.strong, &th);

    let abs = ScalarFunction::abs();
    let w = find_affine_chord(&abs, -1.0, 1.0, CHORD_GRID, CHORD_TOL)?
        .ok_or(Error::StrictlyConvexOnMesh)?;
    let seed2 = counterexample_2x2(&abs, &w)?;
    let lifted = lifted_counterexample(&seed2, 64, 20)?;
    let tvs64 = TestVectorSet::basis(64, 16)?;
    let rep_lift = convergence_experiment(&lifted, &ident, &tvs64, &th, false)?;
    let class_lift = multiplier_classify(&rep_lift.weak, &rep_lift.strong, &th);

    let corner_weak_max = inst.corner_weak.iter().copied().fold(0.0_f64, f64::max);
    let consistent = (inst.mismatch_norm - 1.0).abs() <= 1e-9
        && inst.chi_class == MultiplierClass::Neither
        && corner_weak_max <= a.tolw
        && inst.h_in_corner
        && class_const == MultiplierClass::Multiplier
        && class_lift == MultiplierClass::QuasiMultiplier;

    let doc = Json::obj(vec![
        ("command", Json::Str("prop38".into())),
        ("f", function_to_json(&f)),
        ("alpha", Json::Num(a.alpha)),
        ("steps", Json::Int(a.steps as i64)),
        (
            "corner",
            Json::obj(vec![
                ("h_term", matrix_to_json(&inst.h_term)),
                ("ambient_target", matrix_to_json(&inst.ambient_target)),
                ("chi_term", matrix_to_json(&inst.chi_term)),
                ("chi_limit", matrix_to_json(&inst.chi_limit)),
                ("mismatch_norm", Json::Num(inst.mismatch_norm)),
                ("h_in_corner", Json::Bool(inst.h_in_corner)),
                ("f_in_corner", Json::Bool(inst.f_in_corner)),
                ("corner_weak", Json::num_array(&inst.corner_weak)),
                ("corner_f_weak", Json::num_array(&inst.corner_f_weak)),
                ("chi_weak", Json::num_array(&inst.chi_weak)),
                ("chi_class", Json::Str(inst.chi_class.label().into())),
            ]),
        ),
        (
            "classification_examples",
            Json::obj(vec![
                ("constant_family", Json::Str(class_const.label().into())),
                ("shift_lift", Json::Str(class_lift.label().into())),
            ]),
        ),
        ("consistent", Json::Bool(consistent)),
    ]);

    let mut csv = CsvTable::new(&["n", "corner_weak", "corner_f_weak", "chi_weak"]);
    for i in 0..inst.corner_weak.len() {
        csv.push_row(vec![
            (i + 1).to_string(),
            fmt_f64(inst.corner_weak[i]),
            fmt_f64(inst.corner_f_weak[i]),
            fmt_f64(inst.chi_weak[i]),
        ]);
    }
    emit(&a.output, &doc, &csv)?;

    if consistent {
        Ok(0)
    } else {
        eprintln!(
            "prop38: expected corner mismatch 1 with class neither plus multiplier/quasi-multiplier examples (got {} / {} / {})",
            inst.chi_class.label(),
            class_const.label(),
            class_lift.label()
        );
        Ok(3)
    }
}
