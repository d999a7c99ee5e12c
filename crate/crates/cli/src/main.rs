mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::{Failure, RunReport};

#[derive(Parser, Debug)]
#[command(name = "irgakit", version, about = "Inverse RGA, SoS certificate and majorization checks")]
struct Cli {
    /// Print only the JSON report; skip the summary on stderr.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,
    /// Worker threads for parallel trials (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// IRGA of symmetric PD matrices.
    #[command(subcommand)]
    Irga(IrgaCmd),
    /// Entry polynomials and sum-of-squares certificates.
    #[command(subcommand)]
    Sos(SosCmd),
    /// Polynomial text format.
    #[command(subcommand)]
    Poly(PolyCmd),
    /// Majorization, transfers, Birkhoff decomposition and entropy.
    #[command(subcommand)]
    Majorize(MajorizeCmd),
    /// Gauges and matrices P diag(e) P⁻¹.
    #[command(subcommand)]
    Spdd(SpddCmd),
    /// Majorization-guided search over spectra.
    #[command(subcommand)]
    Search(SearchCmd),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    #[default]
    Float,
    Exact,
}

#[derive(Subcommand, Debug)]
enum IrgaCmd {
    /// Compute S = (P∘P⁻¹)⁻¹ and test double stochasticity.
    Check(IrgaCheck),
    /// Look for PD matrices whose IRGA has a negative entry.
    SearchCounterexample(CounterexampleArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct IrgaCheck {
    /// Matrix file.
    pub matrix: String,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 7)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cholesky entries are drawn from [-range, range].
    #[arg(long, default_value_t = 2.0)]
    pub range: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Descent evaluations per trial; 0 samples without refinement.
    #[arg(long, default_value_t = 4000)]
    pub refine_evals: usize,
}

#[derive(Subcommand, Debug)]
enum SosCmd {
    /// Derive the adjugate-entry polynomial symbolically (n ≤ 4).
    Derive(DeriveArgs),
    /// Expand a certificate and compare it with a target polynomial.
    Verify(VerifyArgs),
    /// Compare a polynomial with the exact entry oracle at random points.
    IdentityTest(IdentityArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct DeriveArgs {
    #[arg(long)]
    pub n: usize,
    /// 1-based entry `i,j`.
    #[arg(long, default_value = "1,2")]
    pub entry: String,
    /// Write the polynomial text to this file.
    #[arg(long, value_name = "PATH")]
    pub write: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Certificate file or `builtin:n3` / `builtin:n4`.
    #[arg(long)]
    pub cert: String,
    /// Polynomial file, `builtin:NAME`, or `entry:n,i,j` for a derived entry.
    #[arg(long)]
    pub target: String,
}

#[derive(Args, Debug, Serialize)]
pub struct IdentityArgs {
    /// Polynomial file or `builtin:NAME`.
    #[arg(long)]
    pub poly: String,
    /// Matrix size; implied for builtins.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "1,2")]
    pub entry: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Numerators are drawn from [-range, range].
    #[arg(long, default_value_t = 1000)]
    pub range: i64,
    #[arg(long, default_value_t = 97)]
    pub max_denominator: i64,
}

#[derive(Subcommand, Debug)]
enum PolyCmd {
    /// Parse and print in canonical form.
    Parse(PolyParse),
    /// Evaluate exactly at a point.
    Eval(PolyEval),
}

#[derive(Args, Debug, Serialize)]
pub struct PolyParse {
    /// Polynomial file, `builtin:NAME`, or `-` to read `--expr`.
    pub source: String,
    /// Expression text when the source is `-`.
    #[arg(long)]
    pub expr: Option<String>,
    /// Variable order, e.g. `abc`; default is first appearance.
    #[arg(long)]
    pub vars: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct PolyEval {
    pub source: String,
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long)]
    pub vars: Option<String>,
    /// Assignment such as `a=1/2,b=-3`.
    #[arg(long)]
    pub at: String,
}

#[derive(Subcommand, Debug)]
enum MajorizeCmd {
    /// Does y majorize x?
    Check(MajorizePair),
    /// T-transforms taking y to x.
    Construct(MajorizePair),
    /// Birkhoff decomposition of a doubly stochastic matrix.
    Birkhoff(BirkhoffArgs),
    /// Shannon entropy, optionally checking H(S·v) ≥ H(v).
    Entropy(EntropyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct MajorizePair {
    /// Inline vector such as `3,2,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct BirkhoffArgs {
    pub matrix: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
    /// Doubly stochastic matrix file.
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeModeArg {
    Proven,
    Conjectured,
}

#[derive(Subcommand, Debug)]
enum SpddCmd {
    /// Validate P as a gauge.
    Gauge(GaugeArgs),
    /// Build M = P diag(e) P⁻¹.
    Make(SpddArgs),
    /// Check the diagonal/spectrum mapping and majorization for M.
    Verify(SpddArgs),
    /// Kronecker product of two such matrices.
    Kron(KronArgs),
    /// Block-diagonal gauge from random blocks of size 2 to 4.
    Construct(ConstructArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GaugeArgs {
    pub matrix: String,
    #[arg(long, value_enum, default_value_t = GaugeModeArg::Conjectured)]
    pub gauge_mode: GaugeModeArg,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SpddArgs {
    #[command(flatten)]
    pub gauge: GaugeArgs,
    /// Spectrum e as an inline vector.
    #[arg(long, allow_hyphen_values = true)]
    pub spectrum: String,
}

#[derive(Args, Debug, Serialize)]
pub struct KronArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub ea: String,
    #[arg(long)]
    pub b: String,
    #[arg(long, allow_hyphen_values = true)]
    pub eb: String,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub range: f64,
    /// Optional spectrum to check against the assembled gauge.
    #[arg(long, allow_hyphen_values = true)]
    pub spectrum: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write P in the matrix file format.
    #[arg(long, value_name = "PATH")]
    pub write: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionArg {
    MaxEntropy,
    MinEntropy,
}

#[derive(Subcommand, Debug)]
enum SearchCmd {
    /// Walk spectra under a fixed gauge.
    Run(SearchArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    /// Gauge matrix file.
    pub matrix: String,
    #[arg(long, allow_hyphen_values = true)]
    pub e0: String,
    #[arg(long, default_value = "1")]
    pub delta: String,
    #[arg(long, value_enum, default_value_t = DirectionArg::MaxEntropy)]
    pub direction: DirectionArg,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn dispatch(group: &Group) -> Result<RunReport, Failure> {
    use commands::*;
    match group {
        Group::Irga(IrgaCmd::Check(a)) => irga_check(a),
        Group::Irga(IrgaCmd::SearchCounterexample(a)) => irga_search(a),
        Group::Sos(SosCmd::Derive(a)) => sos_derive(a),
        Group::Sos(SosCmd::Verify(a)) => sos_verify(a),
        Group::Sos(SosCmd::IdentityTest(a)) => sos_identity(a),
        Group::Poly(PolyCmd::Parse(a)) => poly_parse(a),
        Group::Poly(PolyCmd::Eval(a)) => poly_eval(a),
        Group::Majorize(MajorizeCmd::Check(a)) => majorize_check(a),
        Group::Majorize(MajorizeCmd::Construct(a)) => majorize_construct(a),
        Group::Majorize(MajorizeCmd::Birkhoff(a)) => majorize_birkhoff(a),
        Group::Majorize(MajorizeCmd::Entropy(a)) => majorize_entropy(a),
        Group::Spdd(SpddCmd::Gauge(a)) => spdd_gauge(a),
        Group::Spdd(SpddCmd::Make(a)) => spdd_make(a),
        Group::Spdd(SpddCmd::Verify(a)) => spdd_verify(a),
        Group::Spdd(SpddCmd::Kron(a)) => spdd_kron(a),
        Group::Spdd(SpddCmd::Construct(a)) => spdd_construct(a),
        Group::Search(SearchCmd::Run(a)) => search_run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    match dispatch(&cli.group) {
        Ok(mut report) => {
            report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    eprintln!("error: cannot write {path}: {e}");
                    return ExitCode::from(2);
                }
            }
            if !cli.json {
                eprintln!("{}", report.summary);
            }
            ExitCode::from(report.outcome.exit_code())
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
