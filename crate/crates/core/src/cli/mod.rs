//! The `sunkcost` command line: `eval`, `gen`, `verify` and `sweep`.
//!
//! Exit codes: 0 success, 1 input error, 2 resource guard (state cap or
//! enumeration limit), 3 property violation.

pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::agents::{self, Agent, AgentKind, Evaluator, DEFAULT_STATE_CAP, TRACE_CSV_HEADER};
use crate::bounds;
use crate::error::{Error, Result};
use crate::fan;
use crate::format;
use crate::generate;
use crate::graph::{TaskGraph, TieBreak};
use crate::hardness::{self, KnapsackInstance};
use crate::scalar::{self, Scalar};

pub use sweep::{Family, SweepRow, SweepSpec, SWEEP_CSV_HEADER};
pub use verify::{CheckRow, Suite, CHECK_CSV_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_GUARD: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sunkcost", version, about = "Sunk-cost-biased agents on stochastic task graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn rational(s: &str) -> std::result::Result<Scalar, String> {
    scalar::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Evaluate one agent on a graph file.
    Eval {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "optimal")]
        agent: AgentKind,
        #[arg(long, default_value = "0", value_parser = rational)]
        lambda: Scalar,
        #[arg(long, default_value = "continue")]
        tie: TieBreak,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        max_states: usize,
        /// Also print the decision at every reachable state as CSV.
        #[arg(long)]
        trace: bool,
    },
    /// Write an instance: fan, tight-fan, three-node-tight, edge-cost-tight,
    /// knapsack or random.
    Gen {
        family: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = rational)]
        lambda: Option<Scalar>,
        #[arg(long, value_parser = rational)]
        epsilon: Option<Scalar>,
        #[arg(long, value_parser = rational)]
        reward: Option<Scalar>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Knapsack weights, comma separated.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<u64>,
        #[arg(long)]
        capacity: Option<u64>,
        /// Knapsack start cost `C`.
        #[arg(long, value_parser = rational)]
        c: Option<Scalar>,
        /// Knapsack threshold fraction; overrides `--c`.
        #[arg(long, value_parser = rational)]
        alpha: Option<Scalar>,
        /// Graph file; metadata goes to a `.meta.json` file next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite and print one CSV row per check.
    Verify {
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a family over a parameter grid and print CSV.
    Sweep {
        family: Family,
        /// `A..B` (inclusive) or a single value.
        #[arg(long)]
        n: Option<String>,
        /// Comma-separated λ grid.
        #[arg(long)]
        lambda: Option<String>,
        /// Comma-separated ε grid.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match run(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::StateCap { .. } | Error::Guard(_) => EXIT_GUARD,
        Error::NonIntegerCount(_) => EXIT_VIOLATION,
        _ => EXIT_INPUT,
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Eval {
            graph,
            agent,
            lambda,
            tie,
            max_states,
            trace,
        } => cmd_eval(&graph, agent, lambda, tie, max_states, trace, out),
        Command::Gen {
            family,
            n,
            lambda,
            epsilon,
            reward,
            seed,
            weights,
            capacity,
            c,
            alpha,
            out: path,
        } => {
            let params = GenParams {
                n,
                lambda,
                epsilon,
                reward,
                seed,
                weights,
                capacity,
                c,
                alpha,
            };
            cmd_gen(&family, &params, path.as_deref(), out)
        }
        Command::Verify {
            suite,
            seed,
            count,
            out: path,
        } => cmd_verify(suite, seed, count, path.as_deref(), out, err),
        Command::Sweep {
            family,
            n,
            lambda,
            epsilon,
            seed,
            count,
            out: path,
        } => {
            let spec = SweepSpec {
                family,
                n_range: match n {
                    Some(text) => parse_range(&text)?,
                    None => default_range(family),
                },
                lambdas: match lambda {
                    Some(text) => parse_grid(&text)?,
                    None => sweep::default_lambdas(family),
                },
                epsilons: match epsilon {
                    Some(text) => parse_grid(&text)?,
                    None => sweep::default_epsilons(),
                },
                seed,
                count,
            };
            cmd_sweep(&spec, path.as_deref(), out)
        }
    }
}

fn read_graph(path: &Path) -> Result<TaskGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    format::parse_graph(&text)
}

pub fn cmd_eval(
    path: &Path,
    kind: AgentKind,
    lambda: Scalar,
    tie: TieBreak,
    max_states: usize,
    trace: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let graph = read_graph(path)?;
    let agent = Agent::new(kind, lambda, tie)?;
    let mut ev = Evaluator::with_cap(&graph, &agent, max_states)?;
    let result = ev.evaluate()?;
    writeln!(out, "agent: {}", agent.kind)?;
    writeln!(out, "lambda: {}", agent.lambda)?;
    writeln!(out, "tie: {}", agent.tie.as_str())?;
    writeln!(out, "payoff: {}", result.payoff)?;
    writeln!(out, "payoff_decimal: {}", scalar::to_decimal(&result.payoff))?;
    writeln!(out, "reach_probability: {}", result.reach_prob)?;
    writeln!(out, "starts: {}", result.starts)?;
    writeln!(out, "states_visited: {}", result.states_visited)?;
    if trace {
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for d in ev.trace()? {
            writeln!(out, "{}", agents::trace_csv_row(&d))?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Default)]
pub struct GenParams {
    pub n: Option<usize>,
    pub lambda: Option<Scalar>,
    pub epsilon: Option<Scalar>,
    pub reward: Option<Scalar>,
    pub seed: u64,
    pub weights: Vec<u64>,
    pub capacity: Option<u64>,
    pub c: Option<Scalar>,
    pub alpha: Option<Scalar>,
}

fn need<T: Clone>(value: &Option<T>, flag: &str, family: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Param(format!("{family} needs --{flag}")))
}

/// Builds the instance for a `gen` family together with its metadata.
pub fn generate_instance(family: &str, p: &GenParams) -> Result<(TaskGraph, Map<String, Value>)> {
    let mut meta = Map::new();
    meta.insert("family".into(), json!(family));
    let graph = match family {
        "fan" => {
            let mut rng = generate::rng(p.seed);
            let spec = fan::random_fan(&mut rng, p.n.unwrap_or(8));
            meta.insert("seed".into(), json!(p.seed));
            meta.insert("n".into(), json!(spec.n()));
            fan::build_fan(&spec)?
        }
        "tight-fan" => {
            let n = need(&p.n, "n", family)?;
            let (spec, lambda) = fan::build_tight_fan(n)?;
            meta.insert("n".into(), json!(n));
            meta.insert("lambda".into(), json!(lambda.to_string()));
            fan::build_fan(&spec)?
        }
        "three-node-tight" => {
            let lambda = need(&p.lambda, "lambda", family)?;
            let reward = p.reward.clone().unwrap_or_else(scalar::one);
            let precision = bounds::default_precision();
            meta.insert("lambda".into(), json!(lambda.to_string()));
            meta.insert("precision".into(), json!(precision.to_string()));
            bounds::build_three_node_tight(&lambda, &reward, &precision)?
        }
        "edge-cost-tight" => {
            let lambda = need(&p.lambda, "lambda", family)?;
            let eps = need(&p.epsilon, "epsilon", family)?;
            meta.insert("lambda".into(), json!(lambda.to_string()));
            meta.insert("epsilon".into(), json!(eps.to_string()));
            bounds::build_edge_cost_tight(&lambda, &eps)?
        }
        "knapsack" => {
            let inst = if p.weights.is_empty() {
                let mut rng = generate::rng(p.seed);
                meta.insert("seed".into(), json!(p.seed));
                hardness::random_instance(&mut rng, p.n.unwrap_or(6), 50)
            } else {
                KnapsackInstance::new(p.weights.clone(), need(&p.capacity, "capacity", family)?)
            };
            let lambda = p.lambda.clone().unwrap_or_else(|| scalar::ratio(1, 2));
            let gadget = match &p.alpha {
                Some(alpha) => hardness::threshold_gadget(&inst, &lambda, alpha)?,
                None => hardness::build_gadget(&inst, &lambda, &p.c.clone().unwrap_or_else(scalar::zero))?,
            };
            if let Value::Object(fields) = serde_json::to_value(gadget.metadata()).map_err(|e| Error::Parse(e.to_string()))? {
                meta.extend(fields);
            }
            meta.insert("tie".into(), json!(TieBreak::StopOnTie.as_str()));
            gadget.graph
        }
        "random" => {
            let mut rng = generate::rng(p.seed);
            meta.insert("seed".into(), json!(p.seed));
            generate::random_graph(&mut rng, p.n.unwrap_or(10))
        }
        other => {
            return Err(Error::Param(format!(
                "unknown family {other:?} (fan, tight-fan, three-node-tight, edge-cost-tight, knapsack, random)"
            )))
        }
    };
    Ok((graph, meta))
}

/// `dir/name.json` → `dir/name.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

pub fn cmd_gen(family: &str, params: &GenParams, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let (graph, meta) = generate_instance(family, params)?;
    let text = format::serialize_graph(&graph);
    let meta_text = serde_json::to_string_pretty(&Value::Object(meta)).map_err(|e| Error::Parse(e.to_string()))? + "\n";
    match path {
        Some(p) => {
            fs::write(p, text)?;
            fs::write(sidecar_path(p), meta_text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(
    suite: Suite,
    seed: u64,
    count: usize,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let rows = verify::run_suite(suite, seed, count)?;
    let mut csv = String::from(CHECK_CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_string());
        csv.push('\n');
    }
    match path {
        Some(p) => fs::write(p, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    let failures: Vec<&CheckRow> = rows.iter().filter(|r| !r.holds).collect();
    if failures.is_empty() {
        return Ok(EXIT_OK);
    }
    for row in failures {
        writeln!(err, "violated: {row}")?;
        if let Some(g) = &row.counterexample {
            write!(err, "{}", format::serialize_graph(g))?;
        }
    }
    Ok(EXIT_VIOLATION)
}

pub fn cmd_sweep(spec: &SweepSpec, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let rows = sweep::run_sweep(spec)?;
    let mut csv = String::from(SWEEP_CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_string());
        csv.push('\n');
    }
    match path {
        Some(p) => fs::write(p, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

pub fn parse_range(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Param(format!("bad range {text:?}: expected N or A..B"));
    match text.split_once("..") {
        Some((a, b)) => {
            let lo = a.trim().parse().map_err(|_| bad())?;
            let hi = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            Ok((lo, hi))
        }
        None => {
            let n = text.trim().parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

/// Comma-separated rationals; blank entries are skipped, so an empty
/// string gives an empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<Scalar>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar::parse(s).map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

fn default_range(family: Family) -> (usize, usize) {
    match family {
        Family::TightFan => (3, 50),
        Family::RandomGraphs => (3, 10),
        Family::RandomFans => (2, 12),
        Family::KnapsackRandom => (1, 8),
        _ => (3, 3),
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_from(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["sunkcost"];
        full.extend_from_slice(args);
        let code = run_from(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ranges_and_grids() {
        assert_eq!(parse_range("3..50").unwrap(), (3, 50));
        assert_eq!(parse_range("7").unwrap(), (7, 7));
        assert!(parse_range("x").is_err());
        assert_eq!(parse_grid("1/4, 1/2,1").unwrap().len(), 3);
        assert!(parse_grid("").unwrap().is_empty());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("a/b.json")), PathBuf::from("a/b.meta.json"));
    }

    #[test]
    fn unknown_family_is_input_error() {
        let (code, _, err) = run_args(&["gen", "spiral"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("unknown family"));
    }

    #[test]
    fn bad_flag_is_input_error() {
        assert_eq!(run_args(&["eval", "--bogus"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn empty_lambda_grid_is_rejected() {
        let (code, _, err) = run_args(&["sweep", "three-node-tight", "--lambda", ""]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("empty lambda grid"));
    }

    #[test]
    fn tight_fan_metadata() {
        let (_, meta) = generate_instance("tight-fan", &GenParams { n: Some(3), ..GenParams::default() }).unwrap();
        assert_eq!(meta["lambda"], json!("15/16"));
    }
}
