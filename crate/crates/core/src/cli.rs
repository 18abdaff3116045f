//! The `ces-demand` command line.
//!
//! Every subcommand except `ball` writes a JSON [`ResultDocument`] to
//! standard output; `ball` writes CSV. Exit codes: `0` success, `1`
//! invalid input, `2` verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::ball::{self, BallNorm};
use crate::demand::{self, DemandReport};
use crate::error::{Error, Result};
use crate::lr::{Exponent, WeightVector};
use crate::oracle::{self, AgreementReport, InequalitySuiteReport, OracleConfig, OracleReport};
use crate::scenario::{Model, Scenario, ScenarioFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

/// Environment variable capping `verify` parallelism.
pub const THREADS_ENV: &str = "CES_DEMAND_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ces-demand",
    version,
    about = "CES / Armington demand systems from nest-tree scenario files"
)]
struct Cli {
    /// Omit the timestamp so identical inputs give byte-identical output.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Utility U(x) and per-node aggregate quantities.
    Norm(ScenarioArgs),
    /// Unit-utility cost and per-node aggregate prices.
    Price(ScenarioArgs),
    /// Expenditure e(u, p).
    Expenditure(ScenarioArgs),
    /// Hicksian demand at the scenario's utility.
    Hicksian(ScenarioArgs),
    /// Marshallian demand at the scenario's income.
    Marshallian(ScenarioArgs),
    /// Budget shares per node and good.
    Shares(ScenarioArgs),
    /// Konüs price index between two scenarios.
    Index {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Seeded inequality sampling and brute-force agreement.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Random (tree, u, p) instances for the brute-force comparison.
        #[arg(long, default_value_t = 200)]
        agreement_samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        cost_tolerance: f64,
    },
    /// Points on the two-good level set ‖x‖ = 1 as CSV.
    Ball {
        /// A real r, `-inf`, `inf`, or `cd` (Cobb-Douglas; `0` also works).
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        /// Cobb-Douglas weights as `t1,t2`.
        #[arg(long, default_value = "0.5,0.5")]
        theta: String,
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[arg(long)]
    config: PathBuf,
    /// Scenario to run; all scenarios when omitted.
    #[arg(long)]
    scenario: Option<String>,
}

/// Output envelope shared by all JSON subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the input file, or of the oracle configuration for `verify`.
    pub input_digest: String,
    /// Seconds since the Unix epoch; omitted under `--deterministic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub results: Vec<Value>,
}

impl ResultDocument {
    fn new(command: &str, input_digest: String, results: Vec<Value>, deterministic: bool) -> Self {
        let timestamp = (!deterministic).then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        ResultDocument {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input_digest,
            timestamp,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs with explicit output and diagnostic streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn load(path: &Path) -> Result<(Model, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Config(format!("{}: not UTF-8: {e}", path.display())))?;
    let model = ScenarioFile::from_json_str(text)
        .and_then(|f| f.build())
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok((model, digest(&bytes)))
}

fn selected<'a>(model: &'a Model, name: Option<&str>) -> Result<Vec<&'a Scenario>> {
    match name {
        Some(n) => Ok(vec![model.scenario(n)?]),
        None => Ok(model.scenarios.iter().collect()),
    }
}

fn need(value: Option<f64>, scenario: &Scenario, field: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("scenario `{}` has no `{field}`", scenario.name)))
}

fn demand_block(model: &Model, scenario: &Scenario, report: &DemandReport) -> Value {
    json!({
        "scenario": scenario.name,
        "quantities": model.by_good(report.quantities.as_slice()),
        "leaf_budget_shares": model.by_good(&report.leaf_budget_shares),
        "node_budget_shares": report.node_budget_shares,
        "expenditure": report.expenditure,
        "utility": report.utility,
        "price_index_per_node": report.price_index_per_node,
    })
}

fn scenario_command(cmd: &str, args: &ScenarioArgs, deterministic: bool) -> Result<ResultDocument> {
    let (model, input_digest) = load(&args.config)?;
    let tree = &model.tree;
    let mut results = Vec::new();
    for sc in selected(&model, args.scenario.as_deref())? {
        let block = match cmd {
            "norm" => {
                let vals = tree.aggregate_quantity(&model.quantities(sc)?)?;
                json!({"scenario": sc.name, "utility": vals.root, "node_quantities": vals.per_node})
            }
            "price" => {
                let vals = tree.aggregate_price(&model.prices(sc)?)?;
                json!({"scenario": sc.name, "unit_cost": vals.root, "node_prices": vals.per_node})
            }
            "expenditure" => {
                let u = need(sc.utility, sc, "utility")?;
                let e = demand::expenditure(tree, u, &model.prices(sc)?)?;
                json!({"scenario": sc.name, "utility": u, "expenditure": e})
            }
            "hicksian" => {
                let u = need(sc.utility, sc, "utility")?;
                let report = demand::hicksian_demand(tree, u, &model.prices(sc)?)?;
                demand_block(&model, sc, &report)
            }
            "marshallian" => {
                let m = need(sc.income, sc, "income")?;
                let report = demand::marshallian_demand(tree, m, &model.prices(sc)?)?;
                demand_block(&model, sc, &report)
            }
            "shares" => {
                let shares = demand::budget_shares(tree, &model.prices(sc)?)?;
                json!({
                    "scenario": sc.name,
                    "leaf_budget_shares": model.by_good(&shares.leaf),
                    "node_budget_shares": shares.node,
                })
            }
            other => unreachable!("not a scenario command: {other}"),
        };
        results.push(block);
    }
    Ok(ResultDocument::new(
        cmd,
        input_digest,
        results,
        deterministic,
    ))
}

/// Body of a `verify` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub config: OracleConfig,
    pub report: OracleReport,
    pub by_inequality: InequalitySuiteReport,
    pub agreement: AgreementReport,
}

impl VerifyResult {
    pub fn passed(&self) -> bool {
        self.report.n_violations == 0
            && self.agreement.n_undercuts == 0
            && self.agreement.n_mismatches == 0
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Runs the verification suite, honouring the thread cap.
pub fn verify(
    seed: u64,
    samples: usize,
    agreement_samples: usize,
    cost_tolerance: f64,
) -> Result<VerifyResult> {
    let cfg = OracleConfig::default()
        .with_seed(seed)
        .with_samples(samples);
    cfg.validate()?;
    if cost_tolerance.is_nan() || cost_tolerance <= 0.0 {
        return Err(Error::Config(format!(
            "cost tolerance must be > 0, got {cost_tolerance}"
        )));
    }
    let agreement_cfg = agreement_config(seed, agreement_samples);
    let work = || -> Result<VerifyResult> {
        let by_inequality = oracle::sample_inequality_suite(&cfg)?;
        let agreement = oracle::oracle_agreement(&agreement_cfg, cost_tolerance)?;
        Ok(VerifyResult {
            config: cfg.clone(),
            report: by_inequality.combined(),
            by_inequality,
            agreement,
        })
    };
    match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Instances for the brute-force comparison: up to 6 goods, depth up to 3,
/// and `|r| >= 0.05` so unweighted nests keep representable scale factors.
pub fn agreement_config(seed: u64, samples: usize) -> OracleConfig {
    OracleConfig::default()
        .with_seed(seed)
        .with_samples(samples)
        .with_dim_range(1, 6)
        .with_zero_band(0.05)
}

fn parse_ball_norm(r: &str, theta: &str) -> Result<BallNorm> {
    match r.trim() {
        "cd" | "cobb_douglas" | "0" => {
            let parts: Vec<f64> = theta
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("--theta `{theta}`: {e}")))?;
            if parts.len() != 2 {
                return Err(Error::Config(format!(
                    "--theta needs two weights, got `{theta}`"
                )));
            }
            BallNorm::new(Exponent::CobbDouglas, Some(WeightVector::new(parts)?))
        }
        "-inf" => BallNorm::new(Exponent::NegInfinity, None),
        "inf" | "+inf" => BallNorm::new(Exponent::PosInfinity, None),
        other => {
            let r: f64 = other
                .parse()
                .map_err(|e| Error::Config(format!("--r `{other}`: {e}")))?;
            BallNorm::new(Exponent::from_r(r)?, None)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let write = |out: &mut dyn Write, text: &str| {
        out.write_all(text.as_bytes())
            .map_err(|e| Error::Config(format!("writing output: {e}")))
    };
    let det = cli.deterministic;
    let doc = match &cli.command {
        Command::Norm(a) => scenario_command("norm", a, det)?,
        Command::Price(a) => scenario_command("price", a, det)?,
        Command::Expenditure(a) => scenario_command("expenditure", a, det)?,
        Command::Hicksian(a) => scenario_command("hicksian", a, det)?,
        Command::Marshallian(a) => scenario_command("marshallian", a, det)?,
        Command::Shares(a) => scenario_command("shares", a, det)?,
        Command::Index { config, from, to } => {
            let (model, input_digest) = load(config)?;
            let p_old = model.prices(model.scenario(from)?)?;
            let p_new = model.prices(model.scenario(to)?)?;
            let idx = demand::konus_index(&model.tree, &p_new, &p_old)?;
            let block = json!({
                "from": from,
                "to": to,
                "index": idx.index,
                "numerator_cost": idx.numerator_cost,
                "denominator_cost": idx.denominator_cost,
            });
            ResultDocument::new("index", input_digest, vec![block], det)
        }
        Command::Verify {
            seed,
            samples,
            agreement_samples,
            cost_tolerance,
        } => {
            let result = verify(*seed, *samples, *agreement_samples, *cost_tolerance)?;
            let passed = result.passed();
            let cfg_json = serde_json::to_vec(&result.config).expect("config serializes");
            let block = serde_json::to_value(&result).expect("report serializes");
            let doc = ResultDocument::new("verify", digest(&cfg_json), vec![block], det);
            write(out, &doc.to_json())?;
            return Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
        Command::Ball { r, theta, n } => {
            let norm = parse_ball_norm(r, theta)?;
            let points = ball::ball_points(&norm, *n)?;
            write(out, &ball::to_csv(&norm, &points))?;
            return Ok(EXIT_OK);
        }
    };
    write(out, &doc.to_json())?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            std::iter::once("ces-demand").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_one_and_help_exits_zero() {
        assert_eq!(run_capture(&["bogus"]).0, EXIT_INVALID);
        assert_eq!(run_capture(&["expenditure"]).0, EXIT_INVALID);
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("verify"));
    }

    #[test]
    fn missing_file_is_a_validation_error() {
        let (code, _, err) = run_capture(&["price", "--config", "/nonexistent/x.json"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("cannot read"), "{err}");
    }

    #[test]
    fn ball_arguments() {
        let (code, out, _) = run_capture(&["ball", "--r", "-2", "--n", "5"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("x1,x2,r\n"));
        assert_eq!(out.lines().count(), 6);
        let (code, out, _) =
            run_capture(&["ball", "--r", "cd", "--theta", "0.25,0.75", "--n", "3"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.lines().nth(1).unwrap().ends_with(",0"));
        assert_eq!(
            run_capture(&["ball", "--r", "cd", "--theta", "0.2", "--n", "3"]).0,
            EXIT_INVALID
        );
        assert_eq!(
            run_capture(&["ball", "--r", "2", "--n", "1"]).0,
            EXIT_INVALID
        );
        assert_eq!(run_capture(&["ball", "--r", "abc"]).0, EXIT_INVALID);
    }

    #[test]
    fn document_round_trips() {
        let doc = ResultDocument::new(
            "price",
            "ab".into(),
            vec![json!({"x": 0.1 + 0.2, "y": 1.0 / 3.0, "z": 2.0f64.sqrt() * 1e-300})],
            false,
        );
        let text = doc.to_json();
        let back: ResultDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert!(doc.timestamp.is_some());
        let det = ResultDocument::new("price", "ab".into(), vec![], true);
        assert!(!det.to_json().contains("timestamp"));
    }
}
