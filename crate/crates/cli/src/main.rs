mod commands;
mod config;
mod selftest;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

pub const SUBCOMMANDS: [&str; 6] = ["formula", "census", "integral", "simclass", "chars", "euler"];
pub const SCHEMA_VERSION: u32 = repzeta::zeta_core::SCHEMA_VERSION;

#[derive(Parser, Debug)]
#[command(name = "repzeta", version, about = "Representation zeta functions of type A2: formulas, censuses, shadows, Euler products")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Key-value configuration file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every randomized step; module defaults when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV (the default for tabular outputs).
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run the invariant suite of the subcommand's module.
    #[arg(long, global = true)]
    pub selftest: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form local zeta function and its coefficients.
    Formula(FormulaArgs),
    /// Coadjoint orbit census at a finite level.
    Census(CensusArgs),
    /// Truncated p-adic integral with minor families.
    Integral(IntegralArgs),
    /// Similarity classes, shadows, transitions and Clifford assembly for gl3.
    Simclass(SimclassArgs),
    /// Character degrees by Dixon's algorithm.
    Chars(CharsArgs),
    /// Global Euler products and partial-sum asymptotics.
    Euler(EulerArgs),
}

#[derive(Args, Debug)]
pub struct FormulaArgs {
    #[arg(long, default_value = "sl3")]
    pub variant: String,
    #[arg(long)]
    pub m: Option<i64>,
    /// Expand to `t^K`.
    #[arg(long, default_value_t = 10)]
    pub expand: usize,
    /// Residue field size at which coefficients are evaluated.
    #[arg(long, default_value_t = 5)]
    pub q: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Exhaustive,
    Shell,
    Montecarlo,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long, default_value = "sl3")]
    pub kind: String,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub f: u32,
    #[arg(long)]
    pub m: Option<u32>,
    /// Truncation level.
    #[arg(long = "N", alias = "n")]
    pub level: Option<u32>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Compare coefficients stable between levels N and N+1 with the closed form.
    #[arg(long, num_args = 0..=1, default_value = "false", default_missing_value = "true", action = ArgAction::Set)]
    pub verify: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DomainArg {
    Full,
    UnitX,
    PrimitiveY,
}

#[derive(Args, Debug)]
pub struct IntegralArgs {
    #[arg(long, default_value = "sl3")]
    pub kind: String,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long = "N", alias = "n")]
    pub level: Option<u32>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = DomainArg::Full)]
    pub domain: DomainArg,
    /// Cosets `x:y1,...,yd` modulo p, separated by `;` (overrides --domain).
    #[arg(long)]
    pub cosets: Option<String>,
    /// Use `F_j = {1}` instead of minors.
    #[arg(long, num_args = 0..=1, default_value = "false", default_missing_value = "true", action = ArgAction::Set)]
    pub trivial_families: bool,
    /// Largest acceptable width of the value band.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SimMode {
    Classes,
    Shadows,
    Transitions,
    Clifford,
}

#[derive(Args, Debug)]
pub struct SimclassArgs {
    #[arg(long, value_enum)]
    pub mode: SimMode,
    #[arg(long)]
    pub q: Option<u64>,
    /// Level `l` (largest level for shadows).
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Residue field sizes for the transition fit.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u64, 5, 7, 13, 17, 19, 23])]
    pub fit_q: Vec<u64>,
    /// Held-out field sizes for the transition fit.
    #[arg(long, value_delimiter = ',', default_values_t = vec![11u64])]
    pub holdout_q: Vec<u64>,
    /// Source classes sampled per shadow.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Exit 1 when moment identities or holdout predictions fail.
    #[arg(long, num_args = 0..=1, default_value = "false", default_missing_value = "true", action = ArgAction::Set)]
    pub verify: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GroupArg {
    Gl3,
    Sl3,
    Shadows,
}

#[derive(Args, Debug)]
pub struct CharsArgs {
    #[arg(long, value_enum, default_value_t = GroupArg::Gl3)]
    pub group: GroupArg,
    #[arg(long)]
    pub p: Option<u64>,
    /// Census depth used to collect shadows.
    #[arg(long, default_value_t = 3)]
    pub level: u32,
    #[arg(long, default_value_t = repzeta::similarity_shadows::dixon::DEFAULT_ORDER_LIMIT)]
    pub order_limit: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FieldArg {
    Rationals,
    Quadratic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Model,
    ModelSu3,
    Zeta,
    Zeta2,
    Trivial,
}

#[derive(Args, Debug)]
pub struct EulerArgs {
    #[arg(long, value_enum, default_value_t = FieldArg::Rationals)]
    pub field: FieldArg,
    /// Fundamental discriminant of the quadratic field.
    #[arg(long = "D", alias = "d", allow_negative_numbers = true)]
    pub discriminant: Option<i64>,
    /// Excluded primes.
    #[arg(long = "S", alias = "s", value_delimiter = ',')]
    pub excluded: Vec<u64>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Model)]
    pub family: FamilyArg,
    /// Archimedean copies; defaults to the degree of the field.
    #[arg(long)]
    pub copies: Option<u32>,
    #[arg(long = "N", alias = "n", default_value_t = 1_000_000)]
    pub bound: usize,
    /// Points at which partial Dirichlet sums are reported.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub s_eval: Vec<f64>,
    /// Point at which the remainder product is bounded.
    #[arg(long, default_value_t = 0.9)]
    pub remainder_s: f64,
    /// Largest prime in the remainder partial sums.
    #[arg(long, default_value_t = 100_000)]
    pub max_prime: u64,
    /// Write `(n, r_n)` rows here.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(repzeta::Error),
    Io(String),
}

impl From<repzeta::Error> for CliError {
    fn from(e: repzeta::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use repzeta::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Lib(e) => match e {
                E::InvalidParameter(_) | E::Unsupported(_) | E::ReducibleModulus => 2,
                E::Infeasible { .. } | E::GroupTooLarge(_) => 3,
                _ => 1,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let (reason, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Io(m) => ("io", m.clone()),
            CliError::Lib(e) => (e.reason(), e.to_string()),
        };
        json!({"schema_version": SCHEMA_VERSION, "error": reason, "message": message})
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Output of one run: JSON always, CSV when the result is tabular.
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
    /// False when a requested verification failed.
    pub verified: bool,
}

fn render(report: &Report, global: &GlobalOpts) -> CliResult<String> {
    match (&report.csv, global.json) {
        (Some(csv), false) => Ok(csv.clone()),
        (None, false) if global.csv => Err(CliError::Usage("this output has no CSV form; use --json".into())),
        _ => Ok(serde_json::to_string_pretty(&report.json).map_err(|e| CliError::Io(e.to_string()))? + "\n"),
    }
}

fn dispatch(cli: &Cli) -> CliResult<Report> {
    if cli.global.selftest {
        return Ok(selftest::run(&cli.command));
    }
    let g = &cli.global;
    match &cli.command {
        Command::Formula(a) => commands::formula(a),
        Command::Census(a) => commands::census(a, g),
        Command::Integral(a) => commands::integral(a),
        Command::Simclass(a) => commands::simclass(a, g),
        Command::Chars(a) => commands::chars(a, g),
        Command::Euler(a) => commands::euler(a),
    }
}

fn run(cli: &Cli) -> CliResult<Report> {
    match cli.global.threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

/// Exit code with the text destined for stdout and stderr.
pub struct Execution {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

fn failure(err: CliError) -> Execution {
    Execution { code: err.exit_code(), stdout: String::new(), stderr: format!("{}\n", err.to_json()) }
}

pub fn execute(args: Vec<String>) -> Execution {
    let args = match config::expand_args(args) {
        Ok(a) => a,
        Err(e) => return failure(CliError::Usage(e)),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution { code: 2, stdout: String::new(), stderr: text }
            } else {
                Execution { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    let text = match render(&report, &cli.global) {
        Ok(t) => t,
        Err(e) => return failure(e),
    };
    let code = if report.verified { 0 } else { 1 };
    match &cli.global.out {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => Execution { code, stdout: String::new(), stderr: String::new() },
            Err(e) => failure(CliError::Io(format!("{}: {e}", path.display()))),
        },
        None => Execution { code, stdout: text, stderr: String::new() },
    }
}

fn main() -> ExitCode {
    let ex = execute(std::env::args().collect());
    std::io::stdout().write_all(ex.stdout.as_bytes()).ok();
    std::io::stderr().write_all(ex.stderr.as_bytes()).ok();
    ExitCode::from(ex.code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Execution {
        execute(std::iter::once("repzeta").chain(args.iter().copied()).map(String::from).collect())
    }

    #[test]
    fn formula_rows_and_validation() {
        let ex = exec(&["formula", "--variant", "sl3", "--m", "1", "--expand", "10", "--q", "5"]);
        assert_eq!(ex.code, 0);
        assert!(ex.stdout.lines().any(|l| l == "2,2402500"));
        assert_eq!(ex.stdout.lines().count(), 12);
        assert_eq!(exec(&["formula", "--variant", "sl3", "--m", "0"]).code, 2);
        assert_eq!(exec(&["formula", "--variant", "so5", "--m", "1"]).code, 2);
        assert_eq!(exec(&["formula", "--bogus"]).code, 2);
        let err: Value = serde_json::from_str(&exec(&["formula"]).stderr).unwrap();
        assert_eq!(err["error"], "usage");
    }

    #[test]
    fn census_verification_and_refusal() {
        let ex = exec(&["census", "--kind", "sl3", "--p", "5", "--m", "1", "--N", "2", "--strategy", "shell", "--verify"]);
        assert_eq!(ex.code, 0, "{}", ex.stderr);
        let ex = exec(&["census", "--p", "5", "--m", "1", "--N", "4", "--strategy", "exhaustive"]);
        assert_eq!(ex.code, 3);
        let err: Value = serde_json::from_str(&ex.stderr).unwrap();
        assert_eq!(err["error"], "infeasible_size");
        assert_eq!(exec(&["census", "--kind", "gl3", "--p", "5", "--m", "1", "--N", "1", "--verify"]).code, 2);
    }

    #[test]
    fn outputs_are_deterministic_across_thread_counts() {
        let run = |t: &str| exec(&["--threads", t, "simclass", "--mode", "shadows", "--q", "3", "--level", "2", "--json"]);
        let (a, b) = (run("1"), run("3"));
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
        let v: Value = serde_json::from_str(&a.stdout).unwrap();
        assert_eq!(v["count"], 10);
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
    }

    #[test]
    fn euler_summary_fields() {
        let ex = exec(&["euler", "--N", "20000", "--json"]);
        assert_eq!(ex.code, 0, "{}", ex.stderr);
        let v: Value = serde_json::from_str(&ex.stdout).unwrap();
        assert_eq!(v["abscissa"], "1");
        assert_eq!((v["e1"].as_u64(), v["e2"].as_u64()), (Some(1), Some(1)));
        assert!(v["epsilon"].as_f64().unwrap() >= 0.1);
        assert!(v["c_estimate"].is_number());
        assert_eq!(v["model"], true);
        let csv = exec(&["euler", "--family", "zeta2", "--copies", "0", "--N", "1000"]).stdout;
        assert_eq!(csv.lines().next(), Some("N,R_N,R_N/(N log N)"));
        assert!(csv.lines().any(|l| l.starts_with("1000,7069,")));
        assert_eq!(exec(&["euler", "--field", "quadratic", "--D", "7"]).code, 2);
        assert_eq!(exec(&["euler", "--field", "quadratic", "--D", "5", "--family", "zeta"]).code, 2);
    }

    #[test]
    fn csv_only_when_tabular() {
        assert_eq!(exec(&["integral", "--p", "5", "--N", "1", "--csv"]).code, 2);
        let ex = exec(&["integral", "--p", "5", "--N", "1", "--domain", "unit-x"]);
        let v: Value = serde_json::from_str(&ex.stdout).unwrap();
        assert!((v["result"]["value"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn selftests_pass() {
        for sub in ["formula", "integral", "chars", "euler"] {
            let ex = exec(&[sub, "--selftest"]);
            assert_eq!(ex.code, 0, "{sub}: {}", ex.stdout);
        }
    }

    #[test]
    fn config_file_with_override() {
        let path = std::env::temp_dir().join(format!("repzeta-run-{}.cfg", std::process::id()));
        std::fs::write(&path, "subcommand = formula\nvariant = su3\nm = 1\nexpand = 2\n").unwrap();
        let p = path.to_str().unwrap();
        let su3 = exec(&["--config", p]);
        assert_eq!(su3.stdout.lines().last(), Some("2,1627500"));
        let sl3 = exec(&["--config", p, "formula", "--variant", "sl3"]);
        assert_eq!(sl3.stdout.lines().last(), Some("2,2402500"));
        std::fs::write(&path, "m 1\n").unwrap();
        assert_eq!(exec(&["--config", p]).code, 2);
        std::fs::remove_file(&path).ok();
    }
}
