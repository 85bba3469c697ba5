//! Command-line front end.
//!
//! Exit status is 0 on success, 1 when a check fails inside its hypotheses
//! (or a solve does not converge), and 2 on usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{analyze, run_suite, CheckConfig, SuiteKind, SuiteOptions};
use crate::equilibrium::{solve_equilibrium, solve_social_optimum, verify_equilibrium, SolveResult, SolverConfig};
use crate::model::json::{instance_to_json, parse_instance};
use crate::model::{perceived_path_cost, social_cost, true_path_cost, type_aggregate_cost, GameInstance};
use crate::output::round_json;
use crate::scenarios::{
    apply_parking_transform, build_grid_city, fig3, pigou, sweep_uncertainty, GridCitySpec, ParkingSpec,
    ScenarioError, ScenarioInstance,
};
use crate::topology::{classify, TwoTerminalNetwork};

#[derive(Debug, Parser)]
#[command(name = "cautious-routing", version, about = "Routing games with uncertain users")]
pub struct Cli {
    /// Worker threads for suites and sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Relative duality-gap tolerance of the solver.
    #[arg(long, global = true, env = "CAUTIOUS_ROUTING_GAP_TOL")]
    pub gap_tol: Option<f64>,
    /// Relative tolerance of theorem checks.
    #[arg(long, global = true, env = "CAUTIOUS_ROUTING_CHECK_TOL")]
    pub check_tol: Option<f64>,
    #[arg(long, global = true, env = "CAUTIOUS_ROUTING_MAX_ITER")]
    pub max_iter: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the equilibrium.
    Solve(Source),
    /// Solve for the social optimum.
    Optimum(Source),
    /// Classify the network of one user type.
    Classify {
        #[command(flatten)]
        source: Source,
        /// User type whose source and sink are the terminals.
        #[arg(long = "type", default_value_t = 0)]
        ty: usize,
        /// Include the decomposition and witness.
        #[arg(long)]
        detail: bool,
    },
    /// Run a seeded suite, or every applicable check on one instance.
    Verify {
        /// One of thm1, cor1, thm2, prop3, prop4, edge-poa, thm3, thm4,
        /// lemma1, lemma2, lemma3, lemma5.
        suite: Option<String>,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        /// Polynomial degree for prop3 and prop4.
        #[arg(long)]
        degree: Option<u32>,
        #[command(flatten)]
        source: Source,
    },
    /// Sweep the uncertainty factor of a scenario; writes CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1,1.5,2,2.5")]
        grid: Vec<f64>,
    },
    /// Print a named instance as JSON.
    Scenario {
        name: ScenarioName,
        #[command(flatten)]
        params: ScenarioParams,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Pigou,
    Fig3,
    Parking,
    Grid,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Instance JSON file.
    #[arg(long, conflicts_with = "scenario")]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<ScenarioName>,
    #[command(flatten)]
    pub params: ScenarioParams,
}

#[derive(Debug, Args)]
pub struct ScenarioParams {
    /// Mass of uncertain users (pigou: 0.1, fig3: 0.05).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Uncertainty factor (pigou: 3, fig3: 2, parking and grid: 1); also
    /// the common factor of thm1 and prop3 suites (1.5).
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    /// Seed for the grid's parking origins.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parking spec JSON replacing the stylized default (parking) or grid
    /// coefficients (grid).
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Input(String),
    /// Output was produced but a check failed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

impl ScenarioParams {
    fn parking_spec(&self) -> Result<ParkingSpec, CliError> {
        let spec = match &self.spec {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
            None => ParkingSpec::stylized(),
        };
        Ok(spec)
    }

    fn grid_spec(&self) -> Result<GridCitySpec, CliError> {
        let mut spec: GridCitySpec = match &self.spec {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
            None => GridCitySpec::default(),
        };
        spec.seed = self.seed;
        Ok(spec)
    }

    /// Builder taking the uncertainty factor, for solves and sweeps alike.
    fn builder(&self, name: ScenarioName) -> Result<Box<dyn Fn(f64) -> Result<ScenarioInstance<f64>, ScenarioError> + Sync>, CliError> {
        Ok(match name {
            ScenarioName::Pigou => {
                let eps = self.epsilon.unwrap_or(0.1);
                Box::new(move |r| pigou(eps, r))
            }
            ScenarioName::Fig3 => {
                let eps = self.epsilon.unwrap_or(0.05);
                Box::new(move |r| fig3(eps, r))
            }
            ScenarioName::Parking => {
                let spec = self.parking_spec()?;
                Box::new(move |r| apply_parking_transform(&spec.with_r(r)))
            }
            ScenarioName::Grid => {
                let spec = self.grid_spec()?;
                let (rows, cols) = (self.rows, self.cols);
                Box::new(move |r| build_grid_city(rows, cols, &GridCitySpec { r, ..spec.clone() }))
            }
        })
    }

    fn default_r(name: ScenarioName) -> f64 {
        match name {
            ScenarioName::Pigou => 3.0,
            ScenarioName::Fig3 => 2.0,
            ScenarioName::Parking | ScenarioName::Grid => 1.0,
        }
    }

    fn build(&self, name: ScenarioName) -> Result<GameInstance<f64>, CliError> {
        let r = self.r.unwrap_or_else(|| Self::default_r(name));
        Ok(self.builder(name)?(r)?.instance)
    }
}

impl Source {
    fn given(&self) -> bool {
        self.instance.is_some() || self.scenario.is_some()
    }

    fn load(&self) -> Result<GameInstance<f64>, CliError> {
        match (&self.instance, self.scenario) {
            (Some(path), _) => parse_instance(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
            (None, Some(name)) => self.params.build(name),
            (None, None) => Err(CliError::Usage("give --instance FILE or --scenario NAME".into())),
        }
    }
}

impl Cli {
    fn solver(&self) -> SolverConfig {
        let mut config = SolverConfig::default();
        if let Some(t) = self.gap_tol {
            config.potential_gap_tol = t;
        }
        if let Some(n) = self.max_iter {
            config.max_iterations = n;
        }
        config
    }

    fn checks(&self) -> CheckConfig {
        let mut config = CheckConfig::default();
        if let Some(t) = self.gap_tol {
            config.solver.potential_gap_tol = t;
        }
        if let Some(n) = self.max_iter {
            config.solver.max_iterations = n;
        }
        if let Some(t) = self.check_tol {
            config.rel_tol = t;
        }
        config
    }
}

fn flow_json(instance: &GameInstance<f64>, result: &SolveResult<f64>, objective: &str) -> Result<Value, CliError> {
    let flow = &result.flow;
    let edges: Vec<Value> = instance
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            json!({
                "id": edge.id,
                "flow": flow.edge_flow(e),
                "cost": edge.cost.evaluate(flow.edge_flow(e)),
            })
        })
        .collect();
    let mut types = Vec::new();
    for (ty, user) in instance.types().iter().enumerate() {
        let mut paths = Vec::new();
        for (k, path) in instance.catalog(ty).iter().enumerate() {
            let ids: Vec<&str> = path.edges.iter().map(|&e| instance.edge(e).id.as_str()).collect();
            paths.push(json!({
                "edges": ids,
                "flow": flow.path_flow(ty, k),
                "cost": true_path_cost(instance, flow, path),
                "perceived_cost": perceived_path_cost(instance, flow, path, ty).map_err(input)?,
            }));
        }
        types.push(json!({
            "id": user.id,
            "cost": type_aggregate_cost(instance, flow, ty),
            "paths": paths,
        }));
    }
    Ok(json!({
        "converged": result.converged,
        "iterations": result.iterations,
        "duality_gap": result.duality_gap,
        objective: result.potential_value,
        "social_cost": social_cost(instance, flow),
        "edges": edges,
        "types": types,
    }))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn emit_json(out: &Option<PathBuf>, value: Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&round_json(value)).expect("serializable");
    text.push('\n');
    emit(out, &text)
}

/// Runs a parsed command; output goes to `--output` or standard output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        // A pool already installed by an earlier call in this process is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match &cli.command {
        Command::Solve(source) => {
            let instance = source.load()?;
            let result = solve_equilibrium(&instance, &cli.solver()).map_err(input)?;
            let report = verify_equilibrium(&instance, &result.flow, cli.solver().equilibrium_check_tol);
            let mut value = flow_json(&instance, &result, "potential")?;
            value["equilibrium_check"] = json!({
                "passed": report.passed,
                "worst_violation": report.worst_violation,
                "tolerance": report.tolerance,
            });
            emit_json(&cli.output, value)?;
            if !result.converged || !report.passed {
                return Err(CliError::Failed("equilibrium not reached within tolerance".into()));
            }
        }
        Command::Optimum(source) => {
            let instance = source.load()?;
            let result = solve_social_optimum(&instance, &cli.solver()).map_err(input)?;
            emit_json(&cli.output, flow_json(&instance, &result, "objective")?)?;
            if !result.converged {
                return Err(CliError::Failed("optimum not reached within tolerance".into()));
            }
        }
        Command::Classify { source, ty, detail } => {
            let instance = source.load()?;
            if *ty >= instance.types().len() {
                return Err(CliError::Usage(format!("no user type {ty}")));
            }
            let net = TwoTerminalNetwork::from_instance(&instance, *ty).map_err(input)?;
            let report = classify(&net, crate::model::DEFAULT_PATH_CAP).map_err(input)?;
            let value = if *detail {
                serde_json::to_value(&report).expect("serializable")
            } else {
                json!({
                    "sp": report.is_series_parallel,
                    "li": report.is_linearly_independent,
                    "sli": report.is_sli,
                })
            };
            emit_json(&cli.output, value)?;
        }
        Command::Verify {
            suite,
            seeds,
            first_seed,
            degree,
            source,
        } => match suite {
            Some(name) => {
                if source.given() {
                    return Err(CliError::Usage("a suite generates its own instances; drop --instance/--scenario".into()));
                }
                let kind = SuiteKind::parse(name, source.params.r, *degree).ok_or_else(|| {
                    CliError::Usage(format!("unknown suite {name}; expected one of {}", SuiteKind::NAMES.join(", ")))
                })?;
                let options = SuiteOptions {
                    runs: *seeds,
                    first_seed: *first_seed,
                    config: cli.checks(),
                };
                let report = run_suite(kind, &options);
                emit_json(&cli.output, serde_json::to_value(&report).expect("serializable"))?;
                if !report.passed() {
                    return Err(CliError::Failed(format!(
                        "{}: {} in-hypothesis failures, {} errors",
                        kind.name(),
                        report.failures,
                        report.errors.len()
                    )));
                }
            }
            None => {
                let instance = source.load()?;
                let report = analyze(&instance, &cli.checks()).map_err(input)?;
                emit_json(&cli.output, serde_json::to_value(&report).expect("serializable"))?;
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| c.failed_in_hypothesis())
                    .map(|c| c.name.as_str())
                    .collect();
                if !failed.is_empty() {
                    return Err(CliError::Failed(format!("failed: {}", failed.join(", "))));
                }
            }
        },
        Command::Sweep { source, grid } => {
            let name = match (&source.instance, source.scenario) {
                (None, Some(name)) => name,
                _ => return Err(CliError::Usage("sweep needs --scenario NAME".into())),
            };
            let builder = source.params.builder(name)?;
            let result = sweep_uncertainty(builder, grid, &cli.solver())?;
            let mut buf = Vec::new();
            result.write_csv(&mut buf).expect("in-memory write");
            emit(&cli.output, &String::from_utf8(buf).expect("ascii"))?;
            let failed: Vec<String> = result
                .rows
                .iter()
                .filter_map(|row| row.error.as_ref().map(|e| format!("r = {}: {e}", row.r)))
                .collect();
            if !failed.is_empty() {
                return Err(CliError::Failed(failed.join("; ")));
            }
        }
        Command::Scenario { name, params } => {
            let instance = params.build(*name)?;
            emit_json(&cli.output, instance_to_json(&instance))?;
        }
    }
    Ok(())
}

/// Parses `args`, runs, reports errors on standard error and returns the
/// exit status.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
