//! Command-line front end used by the `logistics` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 numerical non-convergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::demo::demo_document;
use crate::error::Error;
use crate::network::{
    generate_random_document, validate_network, Demand, Network, NetworkDocument, Shape,
};
use crate::oracles::{brute_force_plan, dual_worst_case, mc_feasible_tilt_check, mean_shift_tilt};
use crate::planner::{
    expected_path_cost, plan_entropy, plan_objective, solve_bridge, solve_gibbs, total_variation,
    Plan, DEFAULT_BRIDGE_MAX_ITER, DEFAULT_BRIDGE_TOLERANCE, FEASIBILITY_TOLERANCE,
};
use crate::prior::{build_rb_prior, kl_decomposition, kl_to_prior};
use crate::report::{bench_csv, curve_csv, edge_risk_csv, BenchRow, PlanDocument};
use crate::resilience::{
    edge_occupancy, edge_risk_ranking, resilience_curve, single_edge_curve, variance_mass,
    worst_case_cost, worst_case_means, CostModel, EdgeOccupancy, DEFAULT_THRESHOLD,
};

pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "logistics",
    version,
    about = "Entropy-regularized logistics plans and their KL-robust resilience"
)]
pub struct Cli {
    /// Seed for random instances and Monte Carlo checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Multiply reported costs by 3, i.e. report E[sum_x C_x P_x] instead of the occupancy-weighted cost.
    #[arg(long, global = true)]
    pub total_cost_scale: bool,
    /// Cost level regarded as business-impossible.
    #[arg(long, global = true, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct NetworkSource {
    /// Network document (JSON).
    #[arg(long, required_unless_present = "demo")]
    pub network: Option<PathBuf>,
    /// Use the bundled 3x4x5 demo network.
    #[arg(long, conflicts_with = "network")]
    pub demo: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Gibbs,
    Bridge,
}

impl Solver {
    fn name(self) -> &'static str {
        match self {
            Solver::Gibbs => "gibbs",
            Solver::Bridge => "bridge",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the entropy-regularized plan and write a plan document.
    Plan {
        #[command(flatten)]
        source: NetworkSource,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Solver::Gibbs)]
        solver: Solver,
        #[arg(long, default_value_t = DEFAULT_BRIDGE_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_BRIDGE_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case cost curves eps -> L* for one or more plans.
    Evaluate {
        #[command(flatten)]
        source: NetworkSource,
        /// Plan document(s); repeat for a side-by-side comparison.
        #[arg(long = "plan", required = true)]
        plans: Vec<PathBuf>,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long, default_value = "0:10:0.5")]
        eps_grid: String,
        /// Add one single-edge column per edge (single plan only).
        #[arg(long)]
        edge_columns: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank edges by single-edge worst case, or sweep eps for one edge.
    EdgeRisk {
        #[command(flatten)]
        source: NetworkSource,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 7.0)]
        eps: f64,
        /// Edge `from->to`; switches to an eps sweep for that edge.
        #[arg(long)]
        edge: Option<String>,
        #[arg(long, default_value = "0:10:0.5")]
        eps_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random geometric network document.
    Generate {
        #[arg(long)]
        kf: usize,
        #[arg(long)]
        kw: usize,
        #[arg(long)]
        ks: usize,
        #[arg(long = "box", default_value_t = 10.0)]
        box_size: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the bridge solver on random networks of growing size.
    Bench {
        /// Comma-separated sizes: `k` for k x k x k, or `FxWxS`.
        #[arg(long, default_value = "3,6,9,12,15,18,21,24,27,30")]
        sizes: String,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0.9)]
        alpha: f64,
        #[arg(long = "box", default_value_t = 10.0)]
        box_size: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle cross-checks on one instance.
    Verify {
        #[command(flatten)]
        source: NetworkSource,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        /// Check this plan instead of the Gibbs plan.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        mc_samples: usize,
    },
    /// Solve one plan per alpha and tabulate their resilience curves.
    Sweep {
        #[command(flatten)]
        source: NetworkSource,
        #[arg(long, default_value = "0.3,0.9,7.0")]
        alphas: String,
        #[arg(long, default_value = "0:10:0.1")]
        eps_grid: String,
        #[arg(long, value_enum, default_value_t = Solver::Gibbs)]
        solver: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: &Cli) -> CliResult<i32> {
    let scale = if cli.total_cost_scale { 3.0 } else { 1.0 };
    match &cli.command {
        Command::Plan {
            source,
            alpha,
            solver,
            tol,
            max_iter,
            out,
        } => {
            let (net, demand) = load_network(source)?;
            let (plan, iterations, err) = solve(&net, &demand, *alpha, *solver, *tol, *max_iter)?;
            let doc = PlanDocument::from_plan(&net, &plan, solver.name(), iterations, err);
            let occ = edge_occupancy(&plan, &net.enumerate_paths())?;
            let nominal = worst_case_cost(&CostModel::from_network(&net), 0.0, &occ)?;
            let summary = format!(
                "alpha {alpha}  solver {}  iterations {iterations}  marginal error {err:.3e}\n\
                 entropy {:.6}  objective {:.6}  expected path cost {:.6}  nominal cost {:.6}\n",
                solver.name(),
                plan_entropy(&plan),
                plan_objective(&net, &plan, *alpha),
                expected_path_cost(&net, &plan),
                scale * nominal,
            );
            emit(out.as_deref(), &doc.to_json(), &summary)?;
        }
        Command::Evaluate {
            source,
            plans,
            eps_grid,
            edge_columns,
            out,
        } => {
            let (net, demand) = load_network(source)?;
            let grid = parse_grid(eps_grid)?;
            let cm = CostModel::from_network(&net);
            let idx = net.enumerate_paths();
            let mut columns = Vec::new();
            let mut summary = String::new();
            for (i, path) in plans.iter().enumerate() {
                let plan = load_plan(path, &net, &demand)?;
                let occ = edge_occupancy(&plan, &idx)?;
                let curve = resilience_curve(
                    path.display().to_string(),
                    &cm,
                    &occ,
                    &grid,
                    cli.threshold / scale,
                )?;
                let name = if plans.len() == 1 {
                    "l_star".to_string()
                } else {
                    let mut name = format!("l_star_alpha_{}", plan.alpha());
                    if columns.iter().any(|(n, _): &(String, Vec<f64>)| *n == name) {
                        write!(name, "_{i}").unwrap();
                    }
                    name
                };
                let _ = writeln!(
                    summary,
                    "{} (alpha {}): L*(eps={}) = {:.6}, threshold {} crossed at eps = {}",
                    path.display(),
                    plan.alpha(),
                    grid[0],
                    scale * curve.values[0],
                    cli.threshold,
                    crossing_text(curve.crossing),
                );
                columns.push((name, curve.values.iter().map(|v| scale * v).collect()));
                if *edge_columns && plans.len() == 1 {
                    for k in 0..net.shape().num_edges() {
                        let edge = net.shape().edge(k);
                        let c = single_edge_curve("", &cm, &occ, &edge, &grid, f64::INFINITY)?;
                        columns.push((
                            format!("l_star_edge_{}", net.edge_label(k)),
                            c.values.iter().map(|v| scale * v).collect(),
                        ));
                    }
                }
            }
            emit(out.as_deref(), &curve_csv(&grid, &columns), &summary)?;
        }
        Command::EdgeRisk {
            source,
            plan,
            eps,
            edge,
            eps_grid,
            out,
        } => {
            let (net, demand) = load_network(source)?;
            let plan = load_plan(plan, &net, &demand)?;
            let occ = edge_occupancy(&plan, &net.enumerate_paths())?;
            let cm = CostModel::from_network(&net);
            match edge {
                None => {
                    let ranking = edge_risk_ranking(&cm, *eps, &occ)?;
                    let top = &ranking[0];
                    let summary = format!(
                        "riskiest edge at eps {eps}: {} (phi {:.6}, sigma2 {:.6}, L_e* {:.6})\n",
                        net.edge_label(top.edge_index),
                        top.phi,
                        top.sigma2,
                        scale * top.l_edge_star
                    );
                    emit(
                        out.as_deref(),
                        &edge_risk_csv(&net, &ranking, scale),
                        &summary,
                    )?;
                }
                Some(text) => {
                    let e = net.parse_edge(text)?;
                    let grid = parse_grid(eps_grid)?;
                    let full = resilience_curve("", &cm, &occ, &grid, cli.threshold / scale)?;
                    let single = single_edge_curve(
                        text.clone(),
                        &cm,
                        &occ,
                        &e,
                        &grid,
                        cli.threshold / scale,
                    )?;
                    let k = net.shape().edge_index(&e).expect("parsed edge exists");
                    let columns = vec![
                        (
                            "l_star".to_string(),
                            full.values.iter().map(|v| scale * v).collect(),
                        ),
                        (
                            format!("l_star_edge_{}", net.edge_label(k)),
                            single.values.iter().map(|v| scale * v).collect(),
                        ),
                    ];
                    let summary = format!(
                        "edge {}: phi {:.6}, sigma2 {:.6}; threshold {} crossed at eps = {}\n",
                        net.edge_label(k),
                        occ.phi()[k],
                        cm.variance()[k],
                        cli.threshold,
                        crossing_text(single.crossing)
                    );
                    emit(out.as_deref(), &curve_csv(&grid, &columns), &summary)?;
                }
            }
        }
        Command::Generate {
            kf,
            kw,
            ks,
            box_size,
            out,
        } => {
            let doc = generate_random_document(*kf, *kw, *ks, cli.seed, *box_size)?;
            let mut text = doc.to_json();
            text.push('\n');
            emit(
                out.as_deref(),
                &text,
                &format!("generated {kf}x{kw}x{ks} network, seed {}\n", cli.seed),
            )?;
        }
        Command::Bench {
            sizes,
            reps,
            alpha,
            box_size,
            out,
        } => {
            if *reps == 0 {
                return Err(CliError::input("--reps must be at least 1"));
            }
            let mut rows = Vec::new();
            let mut summary = String::new();
            for shape in parse_sizes(sizes)? {
                let mut times = Vec::with_capacity(*reps);
                for r in 0..*reps {
                    let doc = generate_random_document(
                        shape.factories,
                        shape.warehouses,
                        shape.outlets,
                        cli.seed.wrapping_add(r as u64),
                        *box_size,
                    )?;
                    let (net, demand) = validate_network(&doc)?;
                    let start = Instant::now();
                    solve_bridge(
                        &net,
                        &demand,
                        *alpha,
                        DEFAULT_BRIDGE_TOLERANCE,
                        DEFAULT_BRIDGE_MAX_ITER,
                    )?;
                    times.push(start.elapsed().as_secs_f64());
                }
                let row = mean_std(shape.num_nodes(), &times);
                let _ = writeln!(
                    summary,
                    "|V| = {:>4}: {:.6} s +- {:.6} s",
                    row.nodes, row.mean_seconds, row.std_seconds
                );
                rows.push(row);
            }
            emit(out.as_deref(), &bench_csv(&rows), &summary)?;
        }
        Command::Verify {
            source,
            alpha,
            eps,
            plan,
            mc_samples,
        } => {
            let (net, demand) = load_network(source)?;
            let plan = match plan {
                Some(path) => Some(read_plan_document(path)?.to_plan(&net)?),
                None => None,
            };
            let checks = verify(&net, &demand, *alpha, *eps, plan, *mc_samples, cli.seed)?;
            let mut failed = false;
            for c in &checks {
                let tag = match c.outcome {
                    Outcome::Pass => "PASS",
                    Outcome::Fail => {
                        failed = true;
                        "FAIL"
                    }
                    Outcome::Skipped => "SKIP",
                };
                println!("{tag} {}: {}", c.name, c.detail);
            }
            return Ok(if failed { EXIT_VERIFY_FAILED } else { 0 });
        }
        Command::Sweep {
            source,
            alphas,
            eps_grid,
            solver,
            out,
        } => {
            let (net, demand) = load_network(source)?;
            let grid = parse_grid(eps_grid)?;
            let alphas = parse_list(alphas)?;
            let cm = CostModel::from_network(&net);
            let idx = net.enumerate_paths();
            let mut columns = Vec::new();
            let mut summary = String::new();
            for alpha in alphas {
                let (plan, _, _) = solve(
                    &net,
                    &demand,
                    alpha,
                    *solver,
                    DEFAULT_BRIDGE_TOLERANCE,
                    DEFAULT_BRIDGE_MAX_ITER,
                )?;
                let occ = edge_occupancy(&plan, &idx)?;
                let curve =
                    resilience_curve(format!("{alpha}"), &cm, &occ, &grid, cli.threshold / scale)?;
                let _ = writeln!(
                    summary,
                    "alpha {alpha}: entropy {:.6}, L*(eps={}) = {:.6}, L*(eps={}) = {:.6}, threshold {} crossed at eps = {}",
                    plan_entropy(&plan),
                    grid[0],
                    scale * curve.values[0],
                    grid[grid.len() - 1],
                    scale * curve.values[grid.len() - 1],
                    cli.threshold,
                    crossing_text(curve.crossing),
                );
                columns.push((
                    format!("l_star_alpha_{alpha}"),
                    curve.values.iter().map(|v| scale * v).collect(),
                ));
            }
            emit(out.as_deref(), &curve_csv(&grid, &columns), &summary)?;
        }
    }
    Ok(0)
}

fn crossing_text(crossing: Option<f64>) -> String {
    crossing.map_or_else(|| "none".to_string(), |e| e.to_string())
}

fn solve(
    net: &Network,
    demand: &Demand,
    alpha: f64,
    solver: Solver,
    tol: f64,
    max_iter: usize,
) -> CliResult<(Plan, usize, f64)> {
    Ok(match solver {
        Solver::Gibbs => {
            let plan = solve_gibbs(net, demand, alpha)?;
            let err = plan.marginal_error(demand);
            (plan, 0, err)
        }
        Solver::Bridge => {
            let sol = solve_bridge(net, demand, alpha, tol, max_iter)?;
            (sol.plan, sol.iterations, sol.final_marginal_error)
        }
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn load_network(source: &NetworkSource) -> CliResult<(Network, Demand)> {
    let doc = match &source.network {
        Some(path) => NetworkDocument::from_json(&read_text(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => demo_document(),
    };
    Ok(validate_network(&doc)?)
}

fn read_plan_document(path: &Path) -> CliResult<PlanDocument> {
    PlanDocument::from_json(&read_text(path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_plan(path: &Path, net: &Network, demand: &Demand) -> CliResult<Plan> {
    let plan = read_plan_document(path)?.to_plan(net)?;
    plan.check_feasible(demand, FEASIBILITY_TOLERANCE)?;
    Ok(plan)
}

fn emit(out: Option<&Path>, content: &str, summary: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
            print!("{summary}");
        }
        None => {
            print!("{content}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn parse_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("not a number: `{t}`")))
        })
        .collect()
}

/// `start:stop:step` (inclusive) or an explicit comma-separated list.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let grid = if text.contains(':') {
        let parts = parse_list(&text.replace(':', ","))?;
        let [start, stop, step] = parts[..] else {
            return Err(CliError::input(format!(
                "expected start:stop:step, got `{text}`"
            )));
        };
        if !(step > 0.0) || stop < start {
            return Err(CliError::input(format!("bad grid `{text}`")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| start + k as f64 * step).collect()
    } else {
        parse_list(text)?
    };
    if grid.is_empty() || grid.iter().any(|e| !(*e >= 0.0)) || grid.windows(2).any(|w| w[1] < w[0])
    {
        return Err(CliError::input(format!(
            "epsilon grid must be nonnegative and ascending: `{text}`"
        )));
    }
    Ok(grid)
}

fn parse_sizes(text: &str) -> CliResult<Vec<Shape>> {
    text.split(',')
        .map(|t| {
            let dims: Vec<usize> = t
                .trim()
                .split('x')
                .map(|d| d.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::input(format!("bad size `{t}`")))?;
            let shape = match dims[..] {
                [k] => Shape::new(k, k, k),
                [f, w, s] => Shape::new(f, w, s),
                _ => return Err(CliError::input(format!("bad size `{t}`"))),
            };
            Ok(shape?)
        })
        .collect()
}

fn mean_std(nodes: usize, times: &[f64]) -> BenchRow {
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = if times.len() > 1 {
        times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    BenchRow {
        nodes,
        mean_seconds: mean,
        std_seconds: var.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check {
        name,
        outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        detail,
    }
}

fn occupancy_simplex_error(occ: &EdgeOccupancy) -> f64 {
    let total = (occ.phi().iter().sum::<f64>() - 1.0).abs();
    let layers = occ
        .layer_sums()
        .iter()
        .map(|s| (s - 1.0 / 3.0).abs())
        .fold(0.0, f64::max);
    let above = occ
        .phi()
        .iter()
        .map(|p| (p - 1.0 / 3.0).max(-p).max(0.0))
        .fold(0.0, f64::max);
    total.max(layers).max(above)
}

/// End-to-end oracle checks; `plan` defaults to the Gibbs plan.
pub fn verify(
    net: &Network,
    demand: &Demand,
    alpha: f64,
    eps: f64,
    plan: Option<Plan>,
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<Check>, Error> {
    if eps < 0.0 {
        return Err(Error::NegativeEpsilon(eps));
    }
    let gibbs = solve_gibbs(net, demand, alpha)?;
    let bridge = solve_bridge(
        net,
        demand,
        alpha,
        DEFAULT_BRIDGE_TOLERANCE,
        DEFAULT_BRIDGE_MAX_ITER,
    )?;
    let plan = plan.unwrap_or_else(|| gibbs.clone());
    let mut checks = Vec::new();

    let feasible = plan.check_feasible(demand, FEASIBILITY_TOLERANCE);
    checks.push(check(
        "plan feasibility",
        feasible.is_ok(),
        match &feasible {
            Ok(()) => format!("marginal error {:.3e}", plan.marginal_error(demand)),
            Err(e) => e.to_string(),
        },
    ));

    let tv = total_variation(&gibbs, &bridge.plan);
    checks.push(check(
        "gibbs/bridge equivalence",
        tv <= 1e-8,
        format!(
            "total variation {tv:.3e} after {} bridge iteration(s)",
            bridge.iterations
        ),
    ));

    let occ = edge_occupancy(&plan, &net.enumerate_paths())?;
    let simplex = occupancy_simplex_error(&occ);
    checks.push(check(
        "occupancy simplex",
        simplex <= 1e-10,
        format!("max violation {simplex:.3e}"),
    ));

    let cm = CostModel::from_network(net);
    let closed = worst_case_cost(&cm, eps, &occ)?;
    let mass = variance_mass(&cm, &occ)?;
    if eps > 0.0 {
        let dual = dual_worst_case(&cm, &occ, eps)?;
        let rel = (dual.value - closed).abs() / closed.abs().max(1.0);
        let mut pass = rel <= 1e-6;
        let mut detail = format!(
            "closed form {closed:.10}, dual {:.10}, relative gap {rel:.3e}",
            dual.value
        );
        if mass > 0.0 {
            let tau = (mass / (2.0 * eps)).sqrt();
            let tau_rel = (dual.tau_star - tau).abs() / tau;
            pass &= tau_rel <= 1e-6;
            let _ = write!(detail, ", tau* relative gap {tau_rel:.3e}");
        }
        checks.push(check("dual vs closed form", pass, detail));
    } else {
        let nominal = crate::resilience::nominal_cost(&cm, &occ)?;
        checks.push(check(
            "dual vs closed form",
            closed == nominal,
            format!("eps = 0: closed form {closed:.10} equals nominal {nominal:.10}"),
        ));
    }

    match build_rb_prior(net, alpha) {
        Ok(prior) => {
            let parts = kl_decomposition(net, demand, &plan, &prior);
            let (detail, pass) = match kl_to_prior(net, &plan, &prior) {
                Ok(kl) => {
                    let gap = (kl - parts.total()).abs();
                    (
                        format!(
                            "KL {kl:.10}, decomposition {:.10}, gap {gap:.3e}",
                            parts.total()
                        ),
                        gap <= 1e-8,
                    )
                }
                Err(e) => (e.to_string(), false),
            };
            checks.push(check("kl decomposition", pass, detail));
            let b = prior.weights();
            let walk_total: f64 = {
                let bv = b.mul_vec(&b.mul_vec(&b.mul_vec(prior.v())));
                prior.u().iter().zip(&bv).map(|(a, c)| a * c).sum::<f64>() / prior.lambda().powi(3)
            };
            checks.push(check(
                "walk measure normalization",
                (walk_total - 1.0).abs() <= 1e-8,
                format!("total {walk_total:.12}"),
            ));
        }
        Err(e) => checks.push(check("kl decomposition", false, e.to_string())),
    }

    let mc = mc_feasible_tilt_check(&cm, &occ, eps, mc_samples.max(1), seed)?;
    let mut pass = mc <= closed + 1e-9;
    let mut detail = format!(
        "max of {} sampled tilts {mc:.10} <= L* {closed:.10}",
        mc_samples.max(1)
    );
    if eps > 0.0 && mass > 0.0 {
        let means = worst_case_means(&cm, eps, &occ)?;
        let delta: Vec<f64> = means.iter().zip(cm.mean()).map(|(a, b)| a - b).collect();
        let shift = mean_shift_tilt(&cm, &occ, &delta)?;
        pass &= (shift.value - closed).abs() <= 1e-9 && shift.kl <= eps * (1.0 + 1e-12);
        let _ = write!(
            detail,
            "; worst-case shift attains {:.10} at KL {:.6}",
            shift.value, shift.kl
        );
    }
    checks.push(check("monte carlo dominance", pass, detail));

    let free =
        demand.values().iter().filter(|&&z| z > 0.0).count() * (net.shape().paths_per_outlet() - 1);
    if free <= 2 {
        let brute = brute_force_plan(net, demand, alpha, 1e-3)?;
        let (g, b) = (
            plan_objective(net, &gibbs, alpha),
            plan_objective(net, &brute, alpha),
        );
        checks.push(check(
            "brute-force optimality",
            g <= b + 1e-12,
            format!("gibbs objective {g:.10} <= grid objective {b:.10}"),
        ));
    } else {
        checks.push(Check {
            name: "brute-force optimality",
            outcome: Outcome::Skipped,
            detail: format!("{free} free dimensions"),
        });
    }
    Ok(checks)
}
