//! Command orchestration behind the `qmaxcut` binary: runs the pipeline on
//! one instance and writes a TOML report, or writes the bound curves as CSV.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{
    epr_angles, epr_edge_energies, f_beta, qmc_edge_energies_expected, run_epr, run_qmc, CircuitPlan, EnergyReport,
    QmcOptions, BETA_STAR, EPR_AXIS,
};
use crate::graph::{parse_graph, GraphError, WeightedGraph};
use crate::lasserre::{build_sdp, check_monogamy, solve_sdp, LasserreError, SdpSolution};
use crate::oracle::{
    build_hamiltonian, graph_energy, moment_matrix_from_state, monte_carlo_qmc, plan_state, OracleError, MAX_QUBITS,
};
use crate::product::{f_lower_bound, product_energies, BlochAssignment, RoundingError};
use crate::Kind;

pub const SCHEMA_VERSION: u32 = 1;

/// Axis samples per edge for the Monte Carlo check in `oracle-check`.
pub const CHECK_SAMPLES: usize = 4000;

/// Largest instance for which `oracle-check` builds a moment matrix from the
/// exact ground state.
const MOMENT_CHECK_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Qmc,
    Epr,
    Curves,
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Qmc => "qmc",
            Command::Epr => "epr",
            Command::Curves => "curves",
            Command::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    /// Report file, or the directory for `curves`. Reports go to stdout
    /// when absent.
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub oracle: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Qmc,
            input: None,
            output: None,
            seed: 0,
            trials: 64,
            tol: crate::lasserre::DEFAULT_TOL,
            oracle: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Graph { path: String, source: GraphError },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Solver(#[from] LasserreError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Graph { .. } | CliError::Oracle(_) => 2,
            CliError::Solver(_) | CliError::Rounding(_) => 3,
        }
    }
}

pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Serialize)]
struct SdpSection {
    upper_bound: f64,
    dual_bound: f64,
    relative_gap: f64,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct ResultSection {
    branch: &'static str,
    total_energy: f64,
    product_energy: f64,
    ratio: f64,
    meets_guarantee: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_trial_energy: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OracleSection {
    max_eigenvalue: f64,
    simulated_energy: f64,
    simulated_ratio: f64,
}

#[derive(Debug, Serialize)]
struct EdgeRow {
    i: usize,
    j: usize,
    w: f64,
    /// `x_ij` or `y_ij`.
    value: f64,
    theta: f64,
    sign: i8,
    energy: f64,
}

#[derive(Debug, Serialize)]
struct VertexRow {
    bloch: [f64; 3],
    axis: [f64; 3],
}

#[derive(Debug, Serialize)]
struct PipelineReport {
    schema_version: u32,
    command: &'static str,
    n: usize,
    num_edges: usize,
    seed: u64,
    trials: usize,
    tol: f64,
    sdp: SdpSection,
    result: ResultSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleSection>,
    edges: Vec<EdgeRow>,
    vertices: Vec<VertexRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    /// Size of the worst deviation (positive means violated).
    pub magnitude: f64,
    pub detail: String,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    schema_version: u32,
    command: &'static str,
    n: usize,
    num_edges: usize,
    seed: u64,
    tol: f64,
    all_passed: bool,
    checks: Vec<CheckRow>,
}

/// Runs one command. Returns the process exit code: `0`, or `4` when
/// `oracle-check` found a violation.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    if cfg.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(cfg.tol > 0.0 && cfg.tol <= 1e-4) {
        return Err(CliError::Usage(format!("--tol {} outside (0, 1e-4]", cfg.tol)));
    }
    match cfg.command {
        Command::Curves => {
            let dir =
                cfg.output.as_deref().ok_or_else(|| CliError::Usage("curves needs --output <directory>".into()))?;
            write_curves(dir)?;
            Ok(0)
        }
        Command::Qmc | Command::Epr => {
            let g = load_graph(cfg)?;
            let text = pipeline_report(&g, cfg)?;
            emit(cfg, &text)?;
            Ok(0)
        }
        Command::OracleCheck => {
            let g = load_graph(cfg)?;
            let checks = oracle_checks(&g, cfg)?;
            let all_passed = checks.iter().all(|c| c.passed);
            let report = CheckReport {
                schema_version: SCHEMA_VERSION,
                command: cfg.command.name(),
                n: g.n(),
                num_edges: g.num_edges(),
                seed: cfg.seed,
                tol: cfg.tol,
                all_passed,
                checks,
            };
            emit(cfg, &to_toml(&report))?;
            Ok(if all_passed { 0 } else { EXIT_VIOLATION })
        }
    }
}

fn load_graph(cfg: &RunConfig) -> Result<WeightedGraph, CliError> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("{} needs --input <graph file>", cfg.command.name())))?;
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: shown.clone(), source })?;
    let parse = |t: &str| parse_graph(t).and_then(|g| g.normalized());
    parse(&text).map_err(|source| CliError::Graph { path: shown, source })
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("report types serialise to TOML")
}

fn solve(g: &WeightedGraph, kind: Kind, tol: f64) -> Result<SdpSolution, CliError> {
    Ok(solve_sdp(&build_sdp(g, kind)?, tol)?)
}

fn check_oracle_size(g: &WeightedGraph) -> Result<(), CliError> {
    if g.n() > MAX_QUBITS {
        return Err(OracleError::TooLarge(g.n()).into());
    }
    Ok(())
}

fn pipeline_report(g: &WeightedGraph, cfg: &RunConfig) -> Result<String, CliError> {
    let kind = if cfg.command == Command::Qmc { Kind::Qmc } else { Kind::Epr };
    if cfg.oracle {
        check_oracle_size(g)?;
    }
    let s = solve(g, kind, cfg.tol)?;
    let (report, plan) = match kind {
        Kind::Qmc => run_qmc(g, &s, &QmcOptions { seed: cfg.seed, trials: cfg.trials, beta: BETA_STAR })?,
        Kind::Epr => run_epr(g, &s),
    };
    let oracle = if cfg.oracle {
        let h = build_hamiltonian(g, kind)?;
        let max_eigenvalue = crate::oracle::max_eigenvalue(&h)?;
        let simulated_energy = graph_energy(&plan_state(&plan)?, g, kind);
        Some(OracleSection { max_eigenvalue, simulated_energy, simulated_ratio: simulated_energy / max_eigenvalue })
    } else {
        None
    };
    Ok(to_toml(&build_report(g, cfg, &s, &report, &plan, oracle)))
}

fn build_report(
    g: &WeightedGraph,
    cfg: &RunConfig,
    s: &SdpSolution,
    r: &EnergyReport,
    plan: &CircuitPlan,
    oracle: Option<OracleSection>,
) -> PipelineReport {
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| EdgeRow {
            i: e.i,
            j: e.j,
            w: e.w,
            value: s.edge_values[k],
            theta: plan.theta[k],
            sign: plan.sign[k],
            energy: r.per_edge_energy[k],
        })
        .collect();
    let vertices = (0..g.n()).map(|v| VertexRow { bloch: *plan.bloch.get(v), axis: plan.axes[v] }).collect();
    PipelineReport {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.name(),
        n: g.n(),
        num_edges: g.num_edges(),
        seed: cfg.seed,
        trials: cfg.trials,
        tol: cfg.tol,
        sdp: SdpSection {
            upper_bound: s.objective_value,
            dual_bound: s.dual_bound,
            relative_gap: s.solver_gap,
            iterations: s.iterations,
        },
        result: ResultSection {
            branch: r.branch.name(),
            total_energy: r.total_energy,
            product_energy: r.product_energy,
            ratio: r.ratio,
            meets_guarantee: r.meets_guarantee,
            eta: r.eta,
            beta: r.beta_used,
            mean_trial_energy: r.mean_trial_energy,
        },
        oracle,
        edges,
        vertices,
    }
}

fn row(name: &str, passed: bool, magnitude: f64, detail: String) -> CheckRow {
    CheckRow { name: name.to_string(), passed, magnitude, detail }
}

/// The invariant suite of `oracle-check` on one instance.
pub fn oracle_checks(g: &WeightedGraph, cfg: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    check_oracle_size(g)?;
    let mut rows = Vec::new();
    let mut sols = Vec::new();
    for kind in [Kind::Qmc, Kind::Epr] {
        let s = solve(g, kind, cfg.tol)?;
        let h = build_hamiltonian(g, kind)?;
        let (norm, top) = h.top_eigenpair()?;
        let gap = norm - s.objective_value;
        rows.push(row(
            &format!("{kind}_sdp_upper_bound"),
            gap <= 1e-5,
            gap,
            format!("relaxation {:.9}, largest eigenvalue {norm:.9}", s.objective_value),
        ));
        let mono = check_monogamy(&s.edge_values, g, 1e-5);
        rows.push(row(
            &format!("{kind}_monogamy"),
            mono.holds(),
            mono.worst_sum - 1.0,
            format!("worst vertex sum {:.9}, {} violations", mono.worst_sum, mono.violations.len()),
        ));
        if g.n() <= MOMENT_CHECK_MAX_QUBITS {
            let p = build_sdp(g, kind)?;
            let m = moment_matrix_from_state(&top, p.monomials());
            let v = p.classes().max_violation(|r, c| m[(r, c)]);
            rows.push(row(
                &format!("{kind}_ground_state_feasible"),
                v <= 1e-9,
                v,
                "largest constraint residual of the exact top eigenvector".into(),
            ));
        }
        sols.push((kind, s, norm));
    }

    let (_, epr, epr_norm) = &sols[1];
    let theta = epr_angles(&epr.edge_values);
    let plan = CircuitPlan {
        kind: Kind::Epr,
        edges: g.edges().to_vec(),
        bloch: BlochAssignment::all_up(g.n()),
        axes: vec![EPR_AXIS; g.n()],
        theta: theta.clone(),
        sign: vec![1; g.num_edges()],
    };
    let state = plan_state(&plan)?;
    let analytic = epr_edge_energies(g, &theta);
    let worst = g
        .edges()
        .iter()
        .zip(&analytic)
        .map(|(e, a)| (crate::oracle::edge_energy(&state, e.i, e.j, Kind::Epr) - a).abs())
        .fold(0.0, f64::max);
    rows.push(row("epr_closed_form_vs_statevector", worst <= 1e-10, worst, "largest per-edge difference".into()));
    let (epr_report, epr_plan) = run_epr(g, epr);
    let sim = graph_energy(&plan_state(&epr_plan)?, g, Kind::Epr);
    rows.push(row(
        "epr_output_below_norm",
        sim <= epr_norm + 1e-8,
        sim - epr_norm,
        format!("simulated {sim:.9}, reported {:.9}", epr_report.total_energy),
    ));

    let (_, qmc, qmc_norm) = &sols[0];
    let opts = QmcOptions { seed: cfg.seed, trials: cfg.trials, beta: BETA_STAR };
    let (_, qmc_plan) = run_qmc(g, qmc, &opts)?;
    let e = product_energies(&qmc_plan.bloch, g, Kind::Qmc);
    let expected = qmc_edge_energies_expected(g, &qmc_plan.theta, &e);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let mc = monte_carlo_qmc(g, &qmc_plan.bloch, &qmc_plan.theta, CHECK_SAMPLES, &mut rng)?;
    // Excess of |mean - formula| over three standard errors, worst edge.
    let (worst_edge, excess) = expected
        .iter()
        .zip(&mc)
        .map(|(x, (mean, se))| (mean - x).abs() - 3.0 * se)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let (mean, se) = mc[worst_edge];
    let e = g.edges()[worst_edge];
    rows.push(row(
        "qmc_expectation_vs_monte_carlo",
        excess <= 1e-9,
        excess,
        format!(
            "worst edge ({}, {}): formula {:.6}, monte carlo {mean:.6} +- {se:.2e} over {CHECK_SAMPLES} axis samples",
            e.i, e.j, expected[worst_edge]
        ),
    ));
    let sim = graph_energy(&plan_state(&qmc_plan)?, g, Kind::Qmc);
    rows.push(row("qmc_output_below_norm", sim <= qmc_norm + 1e-8, sim - qmc_norm, format!("simulated {sim:.9}")));
    Ok(rows)
}

/// Writes `product.csv`, `epr_ratio.csv` and `qmc.csv` into `dir`.
pub fn write_curves(dir: &Path) -> Result<(), CliError> {
    let io_err = |p: &Path, source: io::Error| CliError::Io { path: p.display().to_string(), source };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let xs: Vec<f64> = (0..=2000).map(|k| -1.0 + k as f64 * 1e-3).collect();
    let etas: Vec<f64> = (0..=1000).map(|k| k as f64 * 1e-3).collect();
    let write = |name: &str, header: [&str; 3], rows: Vec<[f64; 3]>| -> Result<(), CliError> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e.into()))?;
        w.write_record(header).map_err(|e| io_err(&path, e.into()))?;
        for r in rows {
            w.serialize(r).map_err(|e| io_err(&path, e.into()))?;
        }
        w.flush().map_err(|e| io_err(&path, e))
    };
    write(
        "product.csv",
        ["x", "f", "f_over_1px"],
        xs.iter()
            .map(|&x| {
                let f = f_lower_bound(x);
                [x, f, f / (1.0 + x)]
            })
            .collect(),
    )?;
    write(
        "epr_ratio.csv",
        ["eta", "product_ratio", "rotated_ratio"],
        etas.iter().map(|&eta| [eta, 1.0 / (1.0 + eta), (0.5 + eta + 0.5 * eta * eta) / (1.0 + eta)]).collect(),
    )?;
    write(
        "qmc.csv",
        ["x", "F", "F_over_1px"],
        xs.iter()
            .map(|&x| {
                let f = f_beta(BETA_STAR, x);
                [x, f, f / (1.0 + x)]
            })
            .collect(),
    )?;
    Ok(())
}
