//! Command-line surface: node tables, fractional-derivative checks,
//! convergence sweeps, truncation-bound reports and optimal control
//! solves, with CSV (and optional SVG) outputs.
//!
//! Exit codes: 0 success, 1 numerical non-convergence, 2 input error.

mod output;
mod problem;
mod svg;

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fgps::errorbound::{bound_report, BoundConstants, BoundSweep};
use fgps::exprdsl::{self, EvalEnv};
use fgps::fracderiv::{reduced_fd_oracle, FgpsFim, OracleValue};
use fgps::gegenbauer::{GegenbauerIndex, QuadratureRule};
use fgps::nlp::SolveOptions;
use fgps::ocp::{evolve_alpha, solve, OcpProblem, OcpSolution};
use fgps::{FourierGrid, FractionalOrder};
use output::{fmt, out_dir, write_csv};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Input(String),
    /// Numerical non-convergence: exit code 1.
    Numerical(String),
}

impl CliError {
    fn input(msg: impl Display) -> Self {
        Self::Input(msg.to_string())
    }

    fn numerical(msg: impl Display) -> Self {
        Self::Numerical(msg.to_string())
    }

    fn code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Numerical(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Input(m) | Self::Numerical(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "fgps", version, about = "Periodic fractional derivatives and optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOut {
    /// Output directory (falls back to $FGPS_OUT_DIR, then the working
    /// directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Quadrature degree parameter.
    #[arg(long, default_value_t = 1000)]
    ng: usize,
    /// Gegenbauer index.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long)]
    tol_step: Option<f64>,
    #[arg(long)]
    tol_obj: Option<f64>,
    #[arg(long)]
    tol_feas: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    penalty_init: Option<f64>,
    #[arg(long)]
    penalty_growth: Option<f64>,
    #[arg(long)]
    fd_step: Option<f64>,
    /// Seed for the deterministic start perturbation.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread cap for parallel loops.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write a solver trace CSV (outer,inner,J,max_eq_residual,step_norm).
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        let mut o = SolveOptions::default();
        if let Some(v) = self.tol_step {
            o.tol_step = v;
        }
        if let Some(v) = self.tol_obj {
            o.tol_obj = v;
        }
        if let Some(v) = self.tol_feas {
            o.tol_feas = v;
        }
        if let Some(v) = self.max_outer {
            o.max_outer = v;
        }
        if let Some(v) = self.max_inner {
            o.max_inner = v;
        }
        if let Some(v) = self.penalty_init {
            o.penalty_init = v;
        }
        if let Some(v) = self.penalty_growth {
            o.penalty_growth = v;
        }
        if let Some(v) = self.fd_step {
            o.fd_step = v;
        }
        if let Some(v) = self.seed {
            o.seed = v;
        }
        o
    }

    fn rule(&self) -> Result<QuadratureRule, CliError> {
        if let Some(jobs) = self.jobs {
            fgps::limit_threads(jobs);
        }
        let lambda = GegenbauerIndex::new(self.lambda).map_err(CliError::input)?;
        QuadratureRule::new(self.ng, lambda).map_err(CliError::input)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump quadrature nodes, shifted nodes and integration weights.
    Nodes {
        #[arg(long)]
        ng: usize,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Approximate a periodic fractional derivative at the grid nodes
    /// and compare with the quadrature oracle.
    Fracderiv {
        /// Built-in function: sin or cos.
        #[arg(long, default_value = "sin", conflicts_with = "expr")]
        function: String,
        /// Custom expression in t (oracle differentiates it by finite
        /// differences).
        #[arg(long)]
        expr: Option<String>,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        ng: usize,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Memory length L.
        #[arg(long, default_value_t = 30.0)]
        memory: f64,
        /// Period T.
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        period: f64,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Max-error matrix of the derivative approximation over an
    /// (alpha, N) grid.
    Convergence {
        #[arg(long, default_value = "sin")]
        function: String,
        /// Repeatable fractional order.
        #[arg(long = "alpha", required = true)]
        alphas: Vec<f64>,
        /// Grid sizes, comma-separated or start:step:end.
        #[arg(long, value_parser = parse_usize_list)]
        n_list: UsizeList,
        #[arg(long, default_value_t = 1000)]
        ng: usize,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 30.0)]
        memory: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        period: f64,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Truncation-error bound trends over memory length, grid size and
    /// order ceiling.
    Bound {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100)]
        ng: usize,
        #[arg(long, default_value_t = 0.5)]
        zeta: f64,
        /// Swept memory lengths.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 30.0, 90.0])]
        memories: Vec<f64>,
        /// Swept grid sizes.
        #[arg(long, value_parser = parse_usize_list, default_value = "8,16")]
        n_sweep: UsizeList,
        /// Swept order ceilings.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2])]
        m_sweep: Vec<u32>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 30.0)]
        memory: f64,
        #[arg(long, default_value_t = 1.0)]
        d_lambda: f64,
        #[arg(long, default_value_t = 1.0 + 1e-12)]
        b1_lambda: f64,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Solve a problem from the registry or a JSON file.
    Solve {
        /// Registry name or JSON file path.
        #[arg(long)]
        problem: String,
        /// Grid size N (even).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        memory: Option<f64>,
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Solve the same problem along an order sweep, warm-starting each
    /// solve from the previous one.
    SweepAlpha {
        #[arg(long)]
        problem: String,
        /// Grid size N (even).
        #[arg(long)]
        n: usize,
        /// Repeatable fractional order, solved in the given sequence.
        #[arg(long = "alpha", required = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        memory: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Objective values for a list of grid sizes.
    JnTable {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        memory: Option<f64>,
        /// Grid sizes, comma-separated or start:step:end.
        #[arg(long, value_parser = parse_usize_list)]
        n_list: UsizeList,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: CommonOut,
    },
}

/// Comma list (`4,12,40`) or inclusive range (`10:10:100`).
#[derive(Debug, Clone)]
struct UsizeList(Vec<usize>);

fn parse_usize_list(s: &str) -> Result<UsizeList, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err("range syntax is start:step:end".to_string());
        }
        let start: usize = parts[0].parse().map_err(|e| format!("{e}"))?;
        let step: usize = parts[1].parse().map_err(|e| format!("{e}"))?;
        let end: usize = parts[2].parse().map_err(|e| format!("{e}"))?;
        if step == 0 {
            return Err("range step must be positive".to_string());
        }
        let mut v = Vec::new();
        let mut cur = start;
        while cur <= end {
            v.push(cur);
            cur += step;
        }
        if v.is_empty() {
            return Err("range produced no values".to_string());
        }
        Ok(UsizeList(v))
    } else {
        let v: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse()).collect();
        let v = v.map_err(|e| format!("{e}"))?;
        if v.is_empty() {
            return Err("list is empty".to_string());
        }
        Ok(UsizeList(v))
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code());
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Nodes { ng, lambda, out } => cmd_nodes(ng, lambda, &out),
        Command::Fracderiv {
            function,
            expr,
            alpha,
            n,
            ng,
            lambda,
            memory,
            period,
            svg,
            jobs,
            out,
        } => {
            if let Some(jobs) = jobs {
                fgps::limit_threads(jobs);
            }
            cmd_fracderiv(
                &function, expr.as_deref(), alpha, n, ng, lambda, memory, period, svg, &out,
            )
        }
        Command::Convergence {
            function,
            alphas,
            n_list,
            ng,
            lambda,
            memory,
            period,
            jobs,
            out,
        } => {
            if let Some(jobs) = jobs {
                fgps::limit_threads(jobs);
            }
            cmd_convergence(&function, &alphas, &n_list.0, ng, lambda, memory, period, &out)
        }
        Command::Bound {
            lambda,
            ng,
            zeta,
            memories,
            n_sweep,
            m_sweep,
            n,
            memory,
            d_lambda,
            b1_lambda,
            out,
        } => cmd_bound(
            lambda, ng, zeta, &memories, &n_sweep.0, &m_sweep, n, memory, d_lambda, b1_lambda,
            &out,
        ),
        Command::Solve {
            problem,
            n,
            alpha,
            memory,
            svg,
            solver,
            out,
        } => cmd_solve(&problem, n, alpha, memory, svg, &solver, &out),
        Command::SweepAlpha {
            problem,
            n,
            alphas,
            memory,
            solver,
            out,
        } => cmd_sweep_alpha(&problem, n, &alphas, memory, &solver, &out),
        Command::JnTable {
            problem,
            alpha,
            memory,
            n_list,
            solver,
            out,
        } => cmd_jn_table(&problem, alpha, memory, &n_list.0, &solver, &out),
    }
}

fn cmd_nodes(ng: usize, lambda: f64, out: &CommonOut) -> Result<(), CliError> {
    let lambda = GegenbauerIndex::new(lambda).map_err(CliError::input)?;
    let rule = QuadratureRule::new(ng, lambda).map_err(CliError::input)?;
    let rows: Vec<Vec<String>> = (0..rule.len())
        .map(|i| {
            vec![
                i.to_string(),
                fmt(rule.nodes()[i]),
                fmt(rule.shifted_nodes()[i]),
                fmt(rule.weights()[i]),
            ]
        })
        .collect();
    let dir = out_dir(out.out.as_deref()).map_err(CliError::input)?;
    let path = dir.join("nodes.csv");
    write_csv(&path, "index,node,shifted_node,weight", &rows).map_err(CliError::input)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// The target function for derivative commands: samples and the m-th
/// derivative used by the oracle.
struct Target {
    name: String,
    f: Box<dyn Fn(f64) -> f64 + Sync>,
    /// m-th derivative; analytic for the built-ins, high-order central
    /// differences for custom expressions.
    fm: Box<dyn Fn(f64) -> f64 + Sync>,
}

fn make_target(function: &str, expr: Option<&str>, m: u32) -> Result<Target, CliError> {
    if let Some(src) = expr {
        let parsed = exprdsl::parse(src, 0, 0).map_err(CliError::input)?;
        let eval = move |t: f64| -> f64 {
            parsed
                .eval(&EvalEnv {
                    t,
                    states: &[],
                    controls: &[],
                })
                .unwrap_or(f64::NAN)
        };
        let shared = std::sync::Arc::new(eval);
        let f = shared.clone();
        // central-difference m-th derivative with a balanced step
        let h = 1e-10f64.powf(1.0 / (f64::from(m) + 2.0)).max(1e-5);
        let fm = move |t: f64| central_derivative(&*shared, t, m, h);
        Ok(Target {
            name: src.to_string(),
            f: Box::new(move |t| f(t)),
            fm: Box::new(fm),
        })
    } else {
        let shift = f64::from(m) * std::f64::consts::FRAC_PI_2;
        match function {
            "sin" => Ok(Target {
                name: "sin".into(),
                f: Box::new(f64::sin),
                fm: Box::new(move |t| (t + shift).sin()),
            }),
            "cos" => Ok(Target {
                name: "cos".into(),
                f: Box::new(f64::cos),
                fm: Box::new(move |t| (t + shift).cos()),
            }),
            other => Err(CliError::input(format!(
                "unknown function {other:?}; use sin, cos or --expr"
            ))),
        }
    }
}

/// m-th derivative by an iterated symmetric stencil.
fn central_derivative(f: &dyn Fn(f64) -> f64, t: f64, m: u32, h: f64) -> f64 {
    match m {
        1 => (f(t + h) - f(t - h)) / (2.0 * h),
        2 => (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h),
        3 => (f(t + 2.0 * h) - 2.0 * f(t + h) + 2.0 * f(t - h) - f(t - 2.0 * h)) / (2.0 * h * h * h),
        _ => {
            // binomial stencil for higher orders
            let mut acc = 0.0;
            let mut coeff = 1.0;
            for k in 0..=m {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * coeff * f(t + (f64::from(m) / 2.0 - f64::from(k)) * h);
                coeff = coeff * f64::from(m - k) / f64::from(k + 1);
            }
            acc / h.powi(m as i32)
        }
    }
}

struct DerivRun {
    ts: Vec<f64>,
    approx: Vec<f64>,
    oracle: Vec<f64>,
    max_abs_error: f64,
    oracle_ok: bool,
}

fn run_deriv(
    target: &Target,
    alpha: f64,
    n: usize,
    rule: &QuadratureRule,
    memory: f64,
    period: f64,
) -> Result<DerivRun, CliError> {
    let order = FractionalOrder::new(alpha, memory).map_err(CliError::input)?;
    let grid = FourierGrid::new(period, n).map_err(CliError::input)?;
    let fim = FgpsFim::build(&grid, rule, &order).map_err(CliError::numerical)?;
    let samples: Vec<f64> = grid.nodes().iter().map(|&t| (target.f)(t)).collect();
    let approx = fim.apply(&samples).map_err(CliError::input)?;
    let mut oracle = Vec::with_capacity(n);
    let mut oracle_ok = true;
    for &t in grid.nodes() {
        let OracleValue {
            value, converged, ..
        } = reduced_fd_oracle(&target.fm, &order, t, 32);
        oracle_ok &= converged;
        oracle.push(value);
    }
    let max_abs_error = approx
        .iter()
        .zip(&oracle)
        .map(|(a, o)| (a - o).abs())
        .fold(0.0_f64, f64::max);
    Ok(DerivRun {
        ts: grid.nodes().to_vec(),
        approx,
        oracle,
        max_abs_error,
        oracle_ok,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_fracderiv(
    function: &str,
    expr: Option<&str>,
    alpha: f64,
    n: usize,
    ng: usize,
    lambda: f64,
    memory: f64,
    period: f64,
    svg: bool,
    out: &CommonOut,
) -> Result<(), CliError> {
    let order = FractionalOrder::new(alpha, memory).map_err(CliError::input)?;
    let target = make_target(function, expr, order.ceil_m())?;
    let lambda = GegenbauerIndex::new(lambda).map_err(CliError::input)?;
    let rule = QuadratureRule::new(ng, lambda).map_err(CliError::input)?;
    let run = run_deriv(&target, alpha, n, &rule, memory, period)?;

    let mut rows: Vec<Vec<String>> = (0..n)
        .map(|l| {
            vec![
                l.to_string(),
                fmt(run.ts[l]),
                fmt(run.approx[l]),
                fmt(run.oracle[l]),
                fmt((run.approx[l] - run.oracle[l]).abs()),
            ]
        })
        .collect();
    rows.push(vec![
        "max_abs_error".to_string(),
        String::new(),
        String::new(),
        String::new(),
        fmt(run.max_abs_error),
    ]);
    let dir = out_dir(out.out.as_deref()).map_err(CliError::input)?;
    let path = dir.join("fracderiv.csv");
    write_csv(&path, "node_index,t,approx,oracle,abs_error", &rows).map_err(CliError::input)?;
    println!(
        "wrote {} (max_abs_error = {:.3e})",
        path.display(),
        run.max_abs_error
    );

    if svg {
        let series = vec![
            svg::Series {
                label: "approx".into(),
                points: run.ts.iter().copied().zip(run.approx.iter().copied()).collect(),
            },
            svg::Series {
                label: "oracle".into(),
                points: run.ts.iter().copied().zip(run.oracle.iter().copied()).collect(),
            },
        ];
        let title = format!("derivative of {} (order {alpha})", target.name);
        let img = svg::line_plot(&title, "t", &series);
        let svg_path = dir.join("fracderiv.svg");
        std::fs::write(&svg_path, img).map_err(CliError::input)?;
        println!("wrote {}", svg_path.display());
    }
    if !run.oracle_ok {
        return Err(CliError::numerical(
            "oracle quadrature did not converge at every node; see summary row",
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_convergence(
    function: &str,
    alphas: &[f64],
    n_list: &[usize],
    ng: usize,
    lambda: f64,
    memory: f64,
    period: f64,
    out: &CommonOut,
) -> Result<(), CliError> {
    let lambda = GegenbauerIndex::new(lambda).map_err(CliError::input)?;
    let rule = QuadratureRule::new(ng, lambda).map_err(CliError::input)?;
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let order = FractionalOrder::new(alpha, memory).map_err(CliError::input)?;
        let target = make_target(function, None, order.ceil_m())?;
        let mut row = vec![fmt(alpha)];
        for &n in n_list {
            let run = run_deriv(&target, alpha, n, &rule, memory, period)?;
            row.push(fmt(run.max_abs_error));
        }
        rows.push(row);
    }
    let header = std::iter::once("alpha".to_string())
        .chain(n_list.iter().map(|n| format!("n{n}")))
        .collect::<Vec<_>>()
        .join(",");
    let dir = out_dir(out.out.as_deref()).map_err(CliError::input)?;
    let path = dir.join("convergence.csv");
    write_csv(&path, &header, &rows).map_err(CliError::input)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    lambda: f64,
    ng: usize,
    zeta: f64,
    memories: &[f64],
    n_sweep: &[usize],
    m_sweep: &[u32],
    base_n: usize,
    base_memory: f64,
    d_lambda: f64,
    b1_lambda: f64,
    out: &CommonOut,
) -> Result<(), CliError> {
    let sweep = BoundSweep {
        lambda: GegenbauerIndex::new(lambda).map_err(CliError::input)?,
        ng,
        zeta,
        constants: BoundConstants::new(d_lambda, b1_lambda).map_err(CliError::input)?,
        base_n,
        base_memory,
        alpha_offset: 0.5,
    };
    let rows = bound_report(&sweep, memories, n_sweep, m_sweep).map_err(CliError::input)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.param.to_string(), fmt(r.value), fmt(r.bound_log10)])
        .collect();
    let dir = out_dir(out.out.as_deref()).map_err(CliError::input)?;
    let path = dir.join("bound.csv");
    write_csv(&path, "param,value,bound_log10", &csv_rows).map_err(CliError::input)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn solution_rows(sol: &OcpSolution, grid_nodes: &[f64], flag: Option<bool>) -> Vec<Vec<String>> {
    let n = grid_nodes.len();
    let n_x = sol.states.len();
    (0..n)
        .map(|l| {
            let mut row = vec![l.to_string(), fmt(grid_nodes[l])];
            for s in &sol.states {
                row.push(fmt(s[l]));
            }
            for u in &sol.controls {
                row.push(fmt(u[l]));
            }
            let adfe_max = (0..n_x)
                .map(|j| sol.adfe[j * n + l])
                .fold(0.0_f64, f64::max);
            row.push(fmt(adfe_max));
            if let Some(flag) = flag {
                row.push(flag.to_string());
            }
            row
        })
        .collect()
}

fn solution_header(n_x: usize, n_u: usize, flag: bool) -> String {
    let mut cols = vec!["node".to_string(), "t".to_string()];
    cols.extend((1..=n_x).map(|j| format!("y{j}")));
    cols.extend((1..=n_u).map(|j| format!("u{j}")));
    cols.push("adfe_max_at_node".to_string());
    if flag {
        cols.push("converged".to_string());
    }
    cols.join(",")
}

fn write_solution_csv(
    path: &Path,
    sol: &OcpSolution,
    problem: &OcpProblem,
    n: usize,
) -> Result<(), CliError> {
    let grid = FourierGrid::new(problem.period(), n).map_err(CliError::input)?;
    // well-converged solutions keep the stable schema; failures carry an
    // explicit flag column
    let flag = if sol.converged { None } else { Some(false) };
    let rows = solution_rows(sol, grid.nodes(), flag);
    let header = solution_header(sol.states.len(), sol.controls.len(), flag.is_some());
    write_csv(path, &header, &rows).map_err(CliError::input)
}

fn plot_solution(
    dir: &Path,
    stem: &str,
    sol: &OcpSolution,
    problem: &OcpProblem,
    n: usize,
) -> Result<(), CliError> {
    let grid = FourierGrid::new(problem.period(), n).map_err(CliError::input)?;
    let plot_points = 100;
    let ts: Vec<f64> = (0..plot_points)
        .map(|i| problem.period() * i as f64 / plot_points as f64)
        .collect();
    let mut series = Vec::new();
    for (j, s) in sol.states.iter().enumerate() {
        let pts = ts
            .iter()
            .map(|&t| (t, grid.interpolate(s, t).unwrap_or(f64::NAN)))
            .collect();
        series.push(svg::Series {
            label: format!("y{}", j + 1),
            points: pts,
        });
    }
    for (j, u) in sol.controls.iter().enumerate() {
        let pts = ts
            .iter()
            .map(|&t| (t, grid.interpolate(u, t).unwrap_or(f64::NAN)))
            .collect();
        series.push(svg::Series {
            label: format!("u{}", j + 1),
            points: pts,
        });
    }
    let img = svg::line_plot("optimal state and control profiles", "t", &series);
    let path = dir.join(format!("{stem}.svg"));
    std::fs::write(&path, img).map_err(CliError::input)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_trace(path: &Path, sol: &OcpSolution) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = sol
        .trace
        .iter()
        .map(|r| {
            vec![
                r.outer.to_string(),
                r.inner.to_string(),
                fmt(r.objective),
                fmt(r.max_eq_residual),
                fmt(r.step_norm),
            ]
        })
        .collect();
    write_csv(path, "outer,inner,J,max_eq_residual,step_norm", &rows).map_err(CliError::input)
}

fn cmd_solve(
    source: &str,
    n: usize,
    alpha: Option<f64>,
    memory: Option<f64>,
    svg: bool,
    solver: &SolverArgs,
    out: &CommonOut,
) -> Result<(), CliError> {
    let problem = problem::load(source, alpha, memory)?;
    let rule = solver.rule()?;
    let opts = solver.options();
    let sol = solve(&problem, n, &rule, &opts).map_err(CliError::numerical)?;

    let dir = out_dir(out.out.as_deref()).map_err(CliError::input)?;
    let path = dir.join("solution.csv");
    write_solution_csv(&path, &sol, &problem, n)?;
    println!(
        "J_N = {:.6}, max ADFE = {:.3e}, converged = {}, iterations = {}",
        sol.objective_value,
        sol.max_adfe(),
        sol.converged,
        sol.iterations
    );
    println!("wrote {}", path.display());
    if let Some(trace_path) = &solver.trace {
        write_trace(trace_path, &sol)?;
        println!("wrote {}", trace_path.display());
    }
    if svg {
        plot_solution(&dir, "solution", &sol, &problem, n)?;
    }
    if !sol.converged {
        return Err(CliError::numerical("solver did not converge"));
    }
    Ok(())
}

fn cmd_sweep_alpha(
    source: &str,
    n: usize,
    alphas: &[f64],
    memory: Option<f64>,
    solver: &SolverArgs,
    out: &CommonOut,
) -> Result<(), CliError> {
    // validate the whole list before spending any solve time
    for &alpha in alphas {
        FractionalOrder::new(alpha, memory.unwrap_or(30.0)).map_err(CliError::input)?;
    }
    let template = problem::load(source, Some(alphas[0]), memory)?;
    let rule = solver.rule()?;
    let opts = solver.options();
    let mem = template.order().memory();
    let results = evolve_alpha(
        |alpha| {
            FractionalOrder::new(alpha, mem)
                .map(|o| template.with_order(o))
                .map_err(|e| fgps::ocp::OcpError::Arity {
                    which: e.to_string(),
                })
        },
        alphas,
        n,
        &rule,
        &opts,
    );

    let dir = out_dir(out.out.as_deref()).map_err(CliError::input)?;
    let mut index_rows = Vec::new();
    let mut any_failed = false;
    for (alpha, res) in alphas.iter().zip(results) {
        let file = format!("solution_alpha_{alpha}.csv");
        match res {
            Ok(sol) => {
                write_solution_csv(&dir.join(&file), &sol, &template, n)?;
                index_rows.push(vec![
                    fmt(*alpha),
                    file,
                    fmt(sol.objective_value),
                    fmt(sol.max_adfe()),
                    sol.converged.to_string(),
                ]);
                any_failed |= !sol.converged;
            }
            Err(e) => {
                eprintln!("alpha {alpha}: {e}");
                index_rows.push(vec![
                    fmt(*alpha),
                    file,
                    String::new(),
                    String::new(),
                    "false".to_string(),
                ]);
                any_failed = true;
            }
        }
    }
    let index = dir.join("index.csv");
    write_csv(&index, "alpha,file,objective,max_adfe,converged", &index_rows)
        .map_err(CliError::input)?;
    println!("wrote {}", index.display());
    if any_failed {
        return Err(CliError::numerical("at least one sweep solve failed"));
    }
    Ok(())
}

fn cmd_jn_table(
    source: &str,
    alpha: Option<f64>,
    memory: Option<f64>,
    n_list: &[usize],
    solver: &SolverArgs,
    out: &CommonOut,
) -> Result<(), CliError> {
    let problem = problem::load(source, alpha, memory)?;
    let rule = solver.rule()?;
    let opts = solver.options();
    let mut seen = std::collections::BTreeSet::new();
    let mut rows = Vec::new();
    let mut any_failed = false;
    for &n in n_list {
        if !seen.insert(n) {
            continue; // duplicates collapse
        }
        match solve(&problem, n, &rule, &opts) {
            Ok(sol) => {
                if !sol.converged {
                    any_failed = true;
                }
                rows.push(vec![n.to_string(), fmt(sol.objective_value)]);
                println!("N = {n}: J_N = {:.6}", sol.objective_value);
            }
            Err(e) => {
                eprintln!("N = {n}: {e}");
                any_failed = true;
            }
        }
    }
    let dir = out_dir(out.out.as_deref()).map_err(CliError::input)?;
    let path = dir.join("jn.csv");
    write_csv(&path, "N,J_N", &rows).map_err(CliError::input)?;
    println!("wrote {}", path.display());
    if any_failed {
        return Err(CliError::numerical("at least one grid size failed"));
    }
    Ok(())
}
