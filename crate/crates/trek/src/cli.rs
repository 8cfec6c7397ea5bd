//! Command-line drivers for the `trek` binary.
//!
//! Subcommands: `solve-tr`, `solve-reg`, `rank-demo`, `rate`, `bench`.
//! Solver-level failures (iteration bound, factorization trouble) are data:
//! they land in the emitted records with a status flag and the process still
//! exits 0.  Exit code 1 means the invocation was malformed, 2 means a file
//! could not be read, written, or parsed.
//!
//! Given the same inputs and seeds, every command writes byte-identical
//! output (`bench --times`, which records wall-clock seconds, is the one
//! deliberate exception).

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    profile_csv, profile_from_records, records_csv, records_json, run_tr_suite, BenchOptions,
    RunRecord, RunStatus, RECORD_SCHEMA,
};
use crate::manifold::{rank_report, rank_table_csv, SpectrumKind};
use crate::matrix::SymmetricMatrix;
use crate::mm;
use crate::nrek::{nrek_resolve, nrek_solve, RegOptions};
use crate::rates::{rate_csv, RateModel};
use crate::synth::{self, BenchFamily};
use crate::trek::{
    trek_resolve, trek_solve, SubproblemSolution, TrekError, TrekOptions, TrekSession,
};

#[derive(Debug)]
enum CliError {
    /// Malformed invocation: exit 1.
    Usage(String),
    /// File I/O or parse trouble: exit 2.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<mm::MmError> for CliError {
    fn from(e: mm::MmError) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "trek",
    version,
    about = "Trust-region and norm-regularized subproblem solver on extended Krylov subspaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve min ½xᵀAx − bᵀx subject to ‖x‖ ≤ Δ, warm-starting across radii.
    SolveTr(SolveTrArgs),
    /// Solve min ½xᵀAx − bᵀx + (ρ/r)‖x‖ʳ, warm-starting across weights.
    SolveReg(SolveRegArgs),
    /// Singular-value table of the shifted-inverse manifold for the four
    /// model spectra, with ε-ranks and the a-priori bound.
    RankDemo(RankDemoArgs),
    /// Convergence-rate curve E(σ) for an interval spectrum [λ₁, λₙ].
    Rate(RateArgs),
    /// Seeded benchmark suite: subspace solver vs. the Moré–Sorensen
    /// reference across shrinking radii, with a Dolan–Moré profile.
    Bench(BenchArgs),
}

/// Right-hand-side source: `ones`, `file:PATH` (or a bare path), or
/// `random:SEED` for a seeded Gaussian vector.
#[derive(Debug, Clone)]
enum RhsSpec {
    Ones,
    File(PathBuf),
    Random(u64),
}

impl FromStr for RhsSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "ones" {
            return Ok(RhsSpec::Ones);
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(RhsSpec::File(p.into()));
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse::<u64>()
                .map(RhsSpec::Random)
                .map_err(|e| format!("bad rhs seed {seed:?}: {e}"));
        }
        Ok(RhsSpec::File(s.into()))
    }
}

/// Synthetic matrix source: `spd:N:KAPPA`, `indefinite:N:KAPPA`, or
/// `banded:N:BANDWIDTH`, generated from `--seed`.
#[derive(Debug, Clone)]
struct SynthSpec {
    kind: String,
    n: usize,
    param: f64,
}

impl FromStr for SynthSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!(
                "expected kind:n:param (e.g. spd:50:100), got {s:?}"
            ));
        }
        let kind = parts[0].to_ascii_lowercase();
        if !matches!(kind.as_str(), "spd" | "indefinite" | "banded") {
            return Err(format!(
                "unknown synthetic kind {:?} (expected spd, indefinite, or banded)",
                parts[0]
            ));
        }
        let n: usize = parts[1]
            .parse()
            .map_err(|e| format!("bad size {:?}: {e}", parts[1]))?;
        let param: f64 = parts[2]
            .parse()
            .map_err(|e| format!("bad parameter {:?}: {e}", parts[2]))?;
        if n < 2 {
            return Err(format!("synthetic size must be at least 2, got {n}"));
        }
        if kind == "banded" {
            if !(param >= 1.0 && param.fract() == 0.0 && param < n as f64) {
                return Err(format!(
                    "bandwidth must be an integer in [1, n), got {param}"
                ));
            }
        } else if !(param >= 1.0) || !param.is_finite() {
            return Err(format!("condition number must be >= 1, got {param}"));
        }
        Ok(SynthSpec { kind, n, param })
    }
}

impl SynthSpec {
    fn build(&self, seed: u64) -> SymmetricMatrix {
        match self.kind.as_str() {
            "spd" => synth::random_spd(self.n, self.param, seed),
            "indefinite" => synth::random_indefinite(self.n, self.param, seed),
            "banded" => synth::banded_spd(self.n, self.param as usize, seed),
            _ => unreachable!("validated in FromStr"),
        }
    }

    fn name(&self) -> String {
        format!("{}:{}:{}", self.kind, self.n, self.param)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SolveTrArgs {
    /// Matrix Market file for the symmetric matrix A.
    #[arg(long, conflicts_with = "synth")]
    matrix: Option<PathBuf>,
    /// Synthetic matrix instead of a file, e.g. spd:50:100.
    #[arg(long)]
    synth: Option<SynthSpec>,
    /// Right-hand side: ones | file:PATH | random:SEED | PATH.
    #[arg(long, default_value = "ones")]
    rhs: RhsSpec,
    /// Matrix Market file for an elliptical-norm metric S.
    #[arg(long)]
    snorm: Option<PathBuf>,
    /// Trust-region radius; repeat in strictly decreasing order to
    /// warm-start the follow-up solves.
    #[arg(long = "radius", required = true)]
    radius: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Seed for synthetic matrix generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final solution vector here, one value per line.
    #[arg(long)]
    out_x: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args, Debug)]
struct SolveRegArgs {
    #[arg(long, conflicts_with = "synth")]
    matrix: Option<PathBuf>,
    #[arg(long)]
    synth: Option<SynthSpec>,
    #[arg(long, default_value = "ones")]
    rhs: RhsSpec,
    #[arg(long)]
    snorm: Option<PathBuf>,
    /// Penalty weight ρ; may repeat (any order) to re-solve on the same basis.
    #[arg(long = "weight", required = true)]
    weight: Vec<f64>,
    /// Norm power r in (ρ/r)‖x‖ʳ; must be at least 2.
    #[arg(long, default_value_t = 3.0)]
    power: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    out_x: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Debug, Clone)]
enum DistArg {
    All,
    One(SpectrumKind),
}

impl FromStr for DistArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(DistArg::All);
        }
        s.parse::<SpectrumKind>()
            .map(DistArg::One)
            .map_err(|e| e.to_string())
    }
}

#[derive(Args, Debug)]
struct RankDemoArgs {
    /// all | equispaced | clustered_lower | clustered_higher | logarithmic.
    #[arg(long, default_value = "all")]
    dist: DistArg,
    /// Spectrum size; the shift grid gets 10n points.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Relative singular-value cutoff for the ε-rank.
    #[arg(long, default_value_t = 1e-15)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RateArgs {
    /// Smallest eigenvalue of the model spectrum (positive).
    #[arg(long, default_value_t = 5.0)]
    lambda1: f64,
    /// Largest eigenvalue of the model spectrum.
    #[arg(long, default_value_t = 100.0)]
    lambdan: f64,
    /// Grid points per admissible σ segment.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Spd,
    Indefinite,
    Banded,
    Spectra,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Problems per family.
    #[arg(long, default_value_t = 8)]
    count: usize,
    /// Problem dimension.
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Radius sweep, strictly decreasing.
    #[arg(long = "radius", default_values_t = vec![1.0, 0.5])]
    radius: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Record wall-clock seconds (makes output non-reproducible).
    #[arg(long)]
    times: bool,
    /// Write the record table here instead of stdout.
    #[arg(long)]
    out_records: Option<PathBuf>,
    /// Write the profile CSV here instead of stdout.
    #[arg(long)]
    out_profile: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

/// Parses argv and runs one subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Command::SolveTr(a) => solve_tr(&a),
        Command::SolveReg(a) => solve_reg(&a),
        Command::RankDemo(a) => rank_demo(&a),
        Command::Rate(a) => rate(&a),
        Command::Bench(a) => bench(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn write_out(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn emit_records(
    records: &[RunRecord],
    format: OutFormat,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let content = match format {
        OutFormat::Json => records_json(records),
        OutFormat::Csv => records_csv(records),
    };
    write_out(out, &content)
}

fn write_solution(path: &Option<PathBuf>, x: Option<&Vec<f64>>) -> Result<(), CliError> {
    if let (Some(p), Some(x)) = (path, x) {
        mm::write_rhs(p, x)?;
    }
    Ok(())
}

fn load_problem(
    matrix: &Option<PathBuf>,
    synth_spec: &Option<SynthSpec>,
    rhs: &RhsSpec,
    seed: u64,
) -> Result<(String, SymmetricMatrix, Vec<f64>), CliError> {
    let (name, a) = match (matrix, synth_spec) {
        (Some(path), None) => {
            let a = mm::read_matrix(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            (name, a)
        }
        (None, Some(spec)) => (spec.name(), spec.build(seed)),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --matrix and --synth is required".into(),
            ))
        }
    };
    let b = match rhs {
        RhsSpec::Ones => vec![1.0; a.dim()],
        RhsSpec::File(p) => mm::read_rhs(p)?,
        RhsSpec::Random(s) => synth::gaussian_rhs(a.dim(), *s),
    };
    if b.len() != a.dim() {
        return Err(CliError::Io(format!(
            "rhs has {} entries but the matrix is {}x{}",
            b.len(),
            a.dim(),
            a.dim()
        )));
    }
    Ok((name, a, b))
}

fn load_snorm(path: &Option<PathBuf>) -> Result<Option<SymmetricMatrix>, CliError> {
    path.as_ref().map(mm::read_matrix).transpose().map_err(CliError::from)
}

fn check_solver_knobs(tol: f64, max_iter: usize) -> Result<(), CliError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(CliError::Usage(format!(
            "--tol must be positive and finite, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(CliError::Usage("--max-iter must be at least 1".into()));
    }
    Ok(())
}

fn blank_record(name: &str, solver: &str, n: usize) -> RunRecord {
    RunRecord {
        schema: RECORD_SCHEMA,
        problem: name.into(),
        solver: solver.into(),
        n,
        delta: None,
        rho: None,
        power: None,
        objective: None,
        sigma: None,
        k_stop: 0,
        k_extra: 0,
        factorizations: 0,
        wall_s: None,
        cost: 0.0,
        status: RunStatus::Ok,
    }
}

fn fill_success(rec: &mut RunRecord, sol: &SubproblemSolution, sess: &TrekSession) {
    rec.objective = Some(sol.objective);
    rec.sigma = Some(sol.sigma);
    rec.k_stop = sol.k_stop;
    rec.k_extra = sol.k_extra;
    rec.factorizations = sol.factorizations;
    rec.cost = rec.n as f64 / 3.0 * sess.factorization_count() as f64 + sess.solve_count() as f64;
    rec.status = RunStatus::Ok;
}

fn fill_failure(rec: &mut RunRecord, err: &TrekError) {
    match err {
        TrekError::MaxIterReached { best, .. } => {
            rec.objective = Some(best.objective);
            rec.sigma = Some(best.sigma);
            rec.k_stop = best.k_stop;
            rec.k_extra = best.k_extra;
            rec.factorizations = best.factorizations;
            rec.cost =
                rec.n as f64 / 3.0 * best.factorizations as f64 + (3 * best.k_stop + 1) as f64;
            rec.status = RunStatus::MaxIter;
        }
        _ => {
            rec.cost = rec.n as f64 / 3.0;
            rec.status = RunStatus::FactorizationFailure;
        }
    }
}

fn solve_tr(args: &SolveTrArgs) -> Result<(), CliError> {
    check_solver_knobs(args.tol, args.max_iter)?;
    if args.radius.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(CliError::Usage(
            "every --radius must be positive and finite".into(),
        ));
    }
    if args.radius.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Usage(
            "--radius values must be strictly decreasing (warm starts shrink the region)".into(),
        ));
    }
    let (name, a, b) = load_problem(&args.matrix, &args.synth, &args.rhs, args.seed)?;
    let opts = TrekOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        snorm: load_snorm(&args.snorm)?,
        ..TrekOptions::default()
    };

    let mut records = Vec::with_capacity(args.radius.len());
    let mut session: Option<TrekSession> = None;
    let mut last_x: Option<Vec<f64>> = None;
    for &delta in &args.radius {
        let outcome = match session.take() {
            None => trek_solve(&a, &b, delta, &opts),
            Some(mut sess) => trek_resolve(&mut sess, delta).map(|sol| (sol, sess)),
        };
        let mut rec = blank_record(&name, "trek", a.dim());
        rec.delta = Some(delta);
        match outcome {
            Ok((sol, sess)) => {
                fill_success(&mut rec, &sol, &sess);
                last_x = Some(sol.x);
                session = Some(sess);
            }
            Err(err) => fill_failure(&mut rec, &err),
        }
        records.push(rec);
    }

    emit_records(&records, args.format, &args.out)?;
    write_solution(&args.out_x, last_x.as_ref())
}

fn solve_reg(args: &SolveRegArgs) -> Result<(), CliError> {
    check_solver_knobs(args.tol, args.max_iter)?;
    if args.weight.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(CliError::Usage(
            "every --weight must be positive and finite".into(),
        ));
    }
    if !(args.power >= 2.0) || !args.power.is_finite() {
        return Err(CliError::Usage(format!(
            "--power must be at least 2, got {}",
            args.power
        )));
    }
    let (name, a, b) = load_problem(&args.matrix, &args.synth, &args.rhs, args.seed)?;
    let snorm = load_snorm(&args.snorm)?;

    let mut records = Vec::with_capacity(args.weight.len());
    let mut session: Option<TrekSession> = None;
    let mut last_x: Option<Vec<f64>> = None;
    for &rho in &args.weight {
        let outcome = match session.take() {
            None => {
                let mut opts = RegOptions::new(rho, args.power);
                opts.tol = args.tol;
                opts.max_iter = args.max_iter;
                opts.snorm = snorm.clone();
                nrek_solve(&a, &b, &opts)
            }
            Some(mut sess) => nrek_resolve(&mut sess, rho).map(|sol| (sol, sess)),
        };
        let mut rec = blank_record(&name, "nrek", a.dim());
        rec.rho = Some(rho);
        rec.power = Some(args.power);
        match outcome {
            Ok((sol, sess)) => {
                fill_success(&mut rec, &sol, &sess);
                last_x = Some(sol.x);
                session = Some(sess);
            }
            Err(err) => fill_failure(&mut rec, &err),
        }
        records.push(rec);
    }

    emit_records(&records, args.format, &args.out)?;
    write_solution(&args.out_x, last_x.as_ref())
}

fn rank_demo(args: &RankDemoArgs) -> Result<(), CliError> {
    if args.n < 2 {
        return Err(CliError::Usage(format!(
            "--n must be at least 2, got {}",
            args.n
        )));
    }
    if !(args.eps > 0.0 && args.eps < 1.0) {
        return Err(CliError::Usage(format!(
            "--eps must lie in (0, 1), got {}",
            args.eps
        )));
    }
    let kinds: Vec<SpectrumKind> = match args.dist {
        DistArg::All => SpectrumKind::ALL.to_vec(),
        DistArg::One(k) => vec![k],
    };
    let reports = kinds
        .iter()
        .map(|&k| rank_report(k, args.n, args.eps))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    write_out(&args.out, &rank_table_csv(&reports))
}

/// σ grid for the rate curve: both admissible segments around the excluded
/// interval (−λₙ, −λ₁), with the landmark shifts pinned onto the grid.
fn rate_grid(model: &RateModel, points: usize) -> Vec<f64> {
    let (l1, ln) = (model.lambda1, model.lambdan);
    let per = points.max(2);
    let mut grid = Vec::with_capacity(2 * per + 4);
    let linspace = |a: f64, b: f64, out: &mut Vec<f64>| {
        for i in 0..per {
            out.push(a + (b - a) * i as f64 / (per - 1) as f64);
        }
    };
    linspace(-3.0 * ln, -ln, &mut grid);
    linspace(-l1, 3.0 * ln, &mut grid);
    grid.extend([-ln, -l1, 0.0, (l1 * ln).sqrt()]);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

fn rate(args: &RateArgs) -> Result<(), CliError> {
    let model = RateModel::new(args.lambda1, args.lambdan)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = rate_grid(&model, args.points);
    let csv = rate_csv(&model, &grid).map_err(|e| CliError::Usage(e.to_string()))?;
    write_out(&args.out, &csv)
}

fn bench(args: &BenchArgs) -> Result<(), CliError> {
    check_solver_knobs(args.tol, args.max_iter)?;
    if args.n < 2 {
        return Err(CliError::Usage(format!(
            "--n must be at least 2, got {}",
            args.n
        )));
    }
    if args.radius.iter().any(|&d| !(d > 0.0) || !d.is_finite())
        || args.radius.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(CliError::Usage(
            "--radius values must be positive and strictly decreasing".into(),
        ));
    }
    let families: Vec<BenchFamily> = match args.suite {
        SuiteArg::All => BenchFamily::ALL.to_vec(),
        SuiteArg::Spd => vec![BenchFamily::Spd],
        SuiteArg::Indefinite => vec![BenchFamily::Indefinite],
        SuiteArg::Banded => vec![BenchFamily::Banded],
        SuiteArg::Spectra => vec![BenchFamily::Spectra],
    };
    let problems = synth::bench_suite(&families, args.count, args.n, args.seed);
    let opts = BenchOptions {
        radii: args.radius.clone(),
        tol: args.tol,
        max_iter: args.max_iter,
        with_times: args.times,
    };
    let records = run_tr_suite(&problems, &opts);
    emit_records(&records, args.format, &args.out_records)?;
    let profile = profile_from_records(&records);
    write_out(&args.out_profile, &profile_csv(&profile))
}
