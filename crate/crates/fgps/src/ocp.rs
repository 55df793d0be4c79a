//! Periodic fractional optimal control problems and their direct
//! transcription.
//!
//! A problem minimizes the mean running cost `(1/T) integral g` over
//! `T`-periodic states and controls subject to fractional dynamics
//! `D^alpha x_j = f_j(x, u, t)`, pointwise path constraints `c <= 0`
//! and box bounds. Transcription samples states and controls on the
//! equispaced grid, replaces the fractional derivative by the
//! pseudospectral matrix, and enforces the dynamics as algebraic
//! defect constraints at every node.

use std::fmt;

use crate::exprdsl::{EvalEnv, EvalError, Expr, ParseError};
use crate::fourier::FourierGrid;
use crate::fracderiv::{FgpsFim, FracDerivError, FractionalOrder};
use crate::gegenbauer::QuadratureRule;
use crate::nlp::{NlpSolution, Program, SolveError, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub enum OcpError {
    /// Lower bound exceeds upper bound at the given variable.
    InvalidBounds { index: usize, lo: f64, hi: f64 },
    /// Expression references variables beyond the declared arities.
    Arity { which: String },
    NoStates,
    Parse { which: String, err: ParseError },
    Grid(crate::fourier::GridError),
    Fim(FracDerivError),
    /// Decision vector length does not match the transcription.
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for OcpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidBounds { index, lo, hi } => {
                write!(f, "bounds [{lo}, {hi}] at variable {index} are inverted")
            }
            Self::Arity { which } => write!(f, "expression {which} exceeds declared arities"),
            Self::NoStates => write!(f, "problem needs at least one state"),
            Self::Parse { which, err } => write!(f, "parsing {which}: {err}"),
            Self::Grid(e) => write!(f, "{e}"),
            Self::Fim(e) => write!(f, "{e}"),
            Self::LengthMismatch { expected, got } => {
                write!(f, "expected decision vector of length {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for OcpError {}

impl From<crate::fourier::GridError> for OcpError {
    fn from(e: crate::fourier::GridError) -> Self {
        Self::Grid(e)
    }
}

impl From<FracDerivError> for OcpError {
    fn from(e: FracDerivError) -> Self {
        Self::Fim(e)
    }
}

/// A continuous periodic fractional optimal control problem.
#[derive(Debug, Clone)]
pub struct OcpProblem {
    period: f64,
    order: FractionalOrder,
    cost: Expr,
    dynamics: Vec<Expr>,
    path: Vec<Expr>,
    state_bounds: Vec<(f64, f64)>,
    control_bounds: Vec<(f64, f64)>,
}

impl OcpProblem {
    pub fn new(
        period: f64,
        order: FractionalOrder,
        cost: Expr,
        dynamics: Vec<Expr>,
        path: Vec<Expr>,
        state_bounds: Vec<(f64, f64)>,
        control_bounds: Vec<(f64, f64)>,
    ) -> Result<Self, OcpError> {
        if dynamics.is_empty() || dynamics.len() != state_bounds.len() {
            return Err(OcpError::NoStates);
        }
        let n_x = dynamics.len();
        let n_u = control_bounds.len();
        for (index, &(lo, hi)) in state_bounds.iter().chain(&control_bounds).enumerate() {
            if !(lo <= hi) {
                return Err(OcpError::InvalidBounds { index, lo, hi });
            }
        }
        let check = |which: &str, e: &Expr| -> Result<(), OcpError> {
            let (s, c) = e.arity();
            if s > n_x || c > n_u {
                Err(OcpError::Arity {
                    which: which.to_string(),
                })
            } else {
                Ok(())
            }
        };
        check("objective", &cost)?;
        for (i, e) in dynamics.iter().enumerate() {
            check(&format!("dynamics[{i}]"), e)?;
        }
        for (i, e) in path.iter().enumerate() {
            check(&format!("path[{i}]"), e)?;
        }
        Ok(Self {
            period,
            order,
            cost,
            dynamics,
            path,
            state_bounds,
            control_bounds,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn order(&self) -> &FractionalOrder {
        &self.order
    }

    pub fn n_states(&self) -> usize {
        self.dynamics.len()
    }

    pub fn n_controls(&self) -> usize {
        self.control_bounds.len()
    }

    pub fn n_path(&self) -> usize {
        self.path.len()
    }

    pub fn cost(&self) -> &Expr {
        &self.cost
    }

    /// Same problem with a different order; used by order sweeps.
    pub fn with_order(&self, order: FractionalOrder) -> Self {
        let mut p = self.clone();
        p.order = order;
        p
    }
}

/// The finite-dimensional image of a problem: decision vector
/// `[x_1 at all nodes, ..., x_nx at all nodes, u_1 ..., u_nu ...]`,
/// dynamics defects at every node, path constraints at every node, and
/// per-variable box bounds.
#[derive(Debug, Clone)]
pub struct TranscribedNlp {
    problem: OcpProblem,
    rule: QuadratureRule,
    grid: FourierGrid,
    fim: FgpsFim,
    bounds: Vec<(f64, f64)>,
}

impl TranscribedNlp {
    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    pub fn problem(&self) -> &OcpProblem {
        &self.problem
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn fim(&self) -> &FgpsFim {
        &self.fim
    }

    /// Flat index of state `j` (or control for `j >= n_x`) at node `l`.
    pub fn var_index(&self, block: usize, l: usize) -> usize {
        block * self.grid.len() + l
    }

    /// Node samples of one state from the decision vector.
    pub fn state_samples<'a>(&self, x: &'a [f64], j: usize) -> &'a [f64] {
        let n = self.grid.len();
        &x[j * n..(j + 1) * n]
    }

    /// Node samples of one control from the decision vector.
    pub fn control_samples<'a>(&self, x: &'a [f64], j: usize) -> &'a [f64] {
        let n = self.grid.len();
        let base = self.problem.n_states() * n;
        &x[base + j * n..base + (j + 1) * n]
    }

    fn check_len(&self, x: &[f64]) -> Result<(), SolveError> {
        if x.len() != self.n_vars() {
            return Err(SolveError::Eval {
                what: format!(
                    "decision vector length {} does not match {}",
                    x.len(),
                    self.n_vars()
                ),
            });
        }
        Ok(())
    }

    /// Decision vector transposed to node-major layout: per node, its
    /// `n_x` states followed by its `n_u` controls. One allocation per
    /// evaluation instead of two per node.
    fn node_major(&self, x: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let n_x = self.problem.n_states();
        let n_u = self.problem.n_controls();
        let width = n_x + n_u;
        let mut out = vec![0.0; n * width];
        for block in 0..width {
            for l in 0..n {
                out[l * width + block] = x[block * n + l];
            }
        }
        out
    }

    fn env_at<'a>(&self, node_major: &'a [f64], l: usize) -> EvalEnv<'a> {
        let n_x = self.problem.n_states();
        let width = n_x + self.problem.n_controls();
        let row = &node_major[l * width..(l + 1) * width];
        EvalEnv {
            t: self.grid.node(l),
            states: &row[..n_x],
            controls: &row[n_x..],
        }
    }
}

impl Program for TranscribedNlp {
    fn n_vars(&self) -> usize {
        self.grid.len() * (self.problem.n_states() + self.problem.n_controls())
    }

    /// Equispaced mean of the running cost: `(1/N) sum_l g(x_l, u_l, t_l)`,
    /// spectrally accurate on the periodic grid.
    fn objective(&self, x: &[f64]) -> Result<f64, SolveError> {
        self.check_len(x)?;
        let n = self.grid.len();
        let by_node = self.node_major(x);
        let mut total = 0.0;
        for l in 0..n {
            let env = self.env_at(&by_node, l);
            total += self.problem.cost.eval(&env).map_err(|e| eval_err("objective", e))?;
        }
        Ok(total / n as f64)
    }

    fn eq_count(&self) -> usize {
        self.grid.len() * self.problem.n_states()
    }

    /// Defect `scale (Q x_j)_l - f_j(x_l, u_l, t_l)` at entry `j N + l`.
    fn eq_residuals(&self, x: &[f64], out: &mut [f64]) -> Result<(), SolveError> {
        self.check_len(x)?;
        let n = self.grid.len();
        let n_x = self.problem.n_states();
        for j in 0..n_x {
            self.fim
                .apply_into(self.state_samples(x, j), &mut out[j * n..(j + 1) * n])
                .map_err(|e| SolveError::Eval { what: e.to_string() })?;
        }
        let by_node = self.node_major(x);
        for l in 0..n {
            let env = self.env_at(&by_node, l);
            for (j, rhs) in self.problem.dynamics.iter().enumerate() {
                out[j * n + l] -= rhs
                    .eval(&env)
                    .map_err(|e| eval_err(&format!("dynamics[{j}]"), e))?;
            }
        }
        Ok(())
    }

    fn ineq_count(&self) -> usize {
        self.grid.len() * self.problem.n_path()
    }

    fn ineq_residuals(&self, x: &[f64], out: &mut [f64]) -> Result<(), SolveError> {
        self.check_len(x)?;
        let n = self.grid.len();
        let by_node = self.node_major(x);
        for l in 0..n {
            let env = self.env_at(&by_node, l);
            for (i, con) in self.problem.path.iter().enumerate() {
                out[i * n + l] = con
                    .eval(&env)
                    .map_err(|e| eval_err(&format!("path[{i}]"), e))?;
            }
        }
        Ok(())
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Defect rows are dominated by the scaled derivative matrix, whose
    /// entries dwarf the O(1) dynamics terms; the solver normalizes the
    /// equality residuals by this magnitude.
    fn residual_scale(&self) -> f64 {
        (self.fim.scale() * self.fim.max_abs_entry()).max(1.0)
    }

    /// Controls occupy the trailing block; the solver's deterministic
    /// restart list negates them.
    fn control_range(&self) -> Option<std::ops::Range<usize>> {
        let n = self.grid.len();
        Some(self.problem.n_states() * n..self.n_vars())
    }
}

fn eval_err(which: &str, e: EvalError) -> SolveError {
    SolveError::Eval {
        what: format!("{which}: {e}"),
    }
}

/// Builds the transcription: one integration matrix, defects per
/// Eq.-of-motion and node, path constraints per node, box bounds per
/// variable.
pub fn transcribe(
    problem: &OcpProblem,
    n: usize,
    rule: &QuadratureRule,
) -> Result<TranscribedNlp, OcpError> {
    let grid = FourierGrid::new(problem.period, n)?;
    let fim = FgpsFim::build(&grid, rule, &problem.order)?;
    let mut bounds = Vec::with_capacity(n * (problem.n_states() + problem.n_controls()));
    for &b in &problem.state_bounds {
        bounds.extend(std::iter::repeat_n(b, n));
    }
    for &b in &problem.control_bounds {
        bounds.extend(std::iter::repeat_n(b, n));
    }
    Ok(TranscribedNlp {
        problem: problem.clone(),
        rule: rule.clone(),
        grid,
        fim,
        bounds,
    })
}

/// Absolute discrete feasibility error: `|defect|` per (state, node),
/// recomputed from a freshly built integration matrix so it cannot
/// inherit solver state.
pub fn adfe(
    problem: &OcpProblem,
    n: usize,
    rule: &QuadratureRule,
    x: &[f64],
) -> Result<Vec<f64>, OcpError> {
    let nlp = transcribe(problem, n, rule)?;
    if x.len() != nlp.n_vars() {
        return Err(OcpError::LengthMismatch {
            expected: nlp.n_vars(),
            got: x.len(),
        });
    }
    let mut out = vec![0.0; nlp.eq_count()];
    nlp.eq_residuals(x, &mut out)
        .map_err(|e| OcpError::Arity {
            which: e.to_string(),
        })?;
    for v in &mut out {
        *v = v.abs();
    }
    Ok(out)
}

/// Solver output mapped back to trajectories.
#[derive(Debug, Clone)]
pub struct OcpSolution {
    /// `n_x` rows of `N` node values.
    pub states: Vec<Vec<f64>>,
    /// `n_u` rows of `N` node values.
    pub controls: Vec<Vec<f64>>,
    pub objective_value: f64,
    /// `|defect|` per (state, node), indexed `j N + l`; recomputed
    /// independently of the solver.
    pub adfe: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Raw decision vector (states then controls).
    pub x: Vec<f64>,
    /// Per-outer-iteration solver trace.
    pub trace: Vec<crate::nlp::TraceRow>,
}

impl OcpSolution {
    pub fn max_adfe(&self) -> f64 {
        self.adfe.iter().fold(0.0_f64, |a, v| a.max(*v))
    }

    pub(crate) fn assemble(
        nlp: &TranscribedNlp,
        raw: NlpSolution,
    ) -> Result<OcpSolution, OcpError> {
        let n = nlp.grid_len();
        let n_x = nlp.problem.n_states();
        let n_u = nlp.problem.n_controls();
        let states = (0..n_x)
            .map(|j| nlp.state_samples(&raw.x, j).to_vec())
            .collect();
        let controls = (0..n_u)
            .map(|j| nlp.control_samples(&raw.x, j).to_vec())
            .collect();
        let adfe = adfe(&nlp.problem, n, &nlp.rule, &raw.x)?;
        Ok(OcpSolution {
            states,
            controls,
            objective_value: raw.objective,
            adfe,
            iterations: raw.iterations,
            converged: raw.converged,
            x: raw.x,
            trace: raw.trace,
        })
    }
}

/// Solves a problem end to end: transcribe, run the solver restarts,
/// map back and attach the independent feasibility check.
pub fn solve(
    problem: &OcpProblem,
    n: usize,
    rule: &QuadratureRule,
    opts: &SolveOptions,
) -> Result<OcpSolution, SolveError> {
    let nlp = transcribe(problem, n, rule).map_err(|e| SolveError::Eval {
        what: e.to_string(),
    })?;
    crate::nlp::solve(&nlp, opts)
}

/// Solves the same problem family along an order sweep, warm-starting
/// each solve from the previous solution; the first uses the options'
/// start. Failures are reported per entry and do not stop the sweep.
pub fn evolve_alpha<F>(
    builder: F,
    alphas: &[f64],
    n: usize,
    rule: &QuadratureRule,
    opts: &SolveOptions,
) -> Vec<Result<OcpSolution, SolveError>>
where
    F: Fn(f64) -> Result<OcpProblem, OcpError>,
{
    let mut results = Vec::with_capacity(alphas.len());
    let mut warm: Option<Vec<f64>> = None;
    for &alpha in alphas {
        let problem = match builder(alpha) {
            Ok(p) => p,
            Err(e) => {
                results.push(Err(SolveError::Eval {
                    what: e.to_string(),
                }));
                continue;
            }
        };
        let mut local = opts.clone();
        if let Some(w) = &warm {
            local.x0 = Some(w.clone());
            // a warm start is already symmetry-broken and box-feasible
            local.restarts = false;
        }
        let res = solve(&problem, n, rule, &local);
        if let Ok(sol) = &res {
            if sol.converged {
                warm = Some(sol.x.clone());
            }
        }
        results.push(res);
    }
    results
}

/// The built-in benchmark: a two-state, one-control proper periodic
/// problem on period pi with `g = u^2 - y1^2`,
/// `f = [y2, -4 y1 - 0.3 y2 + u]`, `|y_i| <= 5`, `|u| <= 1`. The order
/// (and memory length) come from the caller.
pub fn benchmark_problem(order: FractionalOrder) -> OcpProblem {
    let parse = |s: &str| crate::exprdsl::parse(s, 2, 1).expect("benchmark expressions are valid");
    OcpProblem::new(
        std::f64::consts::PI,
        order,
        parse("u1^2 - y1^2"),
        vec![parse("y2"), parse("-4*y1 - 0.3*y2 + u1")],
        vec![],
        vec![(-5.0, 5.0), (-5.0, 5.0)],
        vec![(-1.0, 1.0)],
    )
    .expect("benchmark problem is well-formed")
}

/// Named problems resolvable from the command line.
pub mod registry {
    use super::*;

    pub const NAMES: [&str; 1] = ["gaitsgory-proper-periodic"];

    /// Looks a problem up by name; order and memory are supplied by the
    /// caller.
    pub fn lookup(name: &str, order: FractionalOrder) -> Option<OcpProblem> {
        match name {
            "gaitsgory-proper-periodic" => Some(benchmark_problem(order)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;
    use crate::gegenbauer::GegenbauerIndex;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn rule(ng: usize) -> QuadratureRule {
        QuadratureRule::new(ng, GegenbauerIndex::new(0.0).unwrap()).unwrap()
    }

    fn order(alpha: f64) -> FractionalOrder {
        FractionalOrder::new(alpha, 30.0).unwrap()
    }

    #[test]
    fn benchmark_shape_is_as_declared() {
        let p = benchmark_problem(order(0.99999));
        assert_eq!(p.n_states(), 2);
        assert_eq!(p.n_controls(), 1);
        assert_eq!(p.n_path(), 0);
        assert_eq!(p.period(), std::f64::consts::PI);
        // cost at y1 = 1, u = 1 vanishes
        let env = EvalEnv {
            t: 0.0,
            states: &[1.0, 0.3],
            controls: &[1.0],
        };
        assert_eq!(p.cost().eval(&env).unwrap(), 0.0);
    }

    #[test]
    fn registry_resolves_benchmark() {
        assert!(registry::lookup("gaitsgory-proper-periodic", order(1.5)).is_some());
        assert!(registry::lookup("no-such-problem", order(1.5)).is_none());
    }

    #[test]
    fn transcription_dimensions() {
        let p = benchmark_problem(order(0.99999));
        let nlp = transcribe(&p, 100, &rule(64)).unwrap();
        assert_eq!(nlp.n_vars(), 300);
        assert_eq!(nlp.eq_count(), 200);
        assert_eq!(nlp.ineq_count(), 0);
        assert_eq!(nlp.bounds()[0], (-5.0, 5.0));
        assert_eq!(nlp.bounds()[299], (-1.0, 1.0));
    }

    #[test]
    fn zero_vector_is_a_fixed_point_of_the_benchmark() {
        let p = benchmark_problem(order(1.5));
        let nlp = transcribe(&p, 8, &rule(64)).unwrap();
        let x = vec![0.0; nlp.n_vars()];
        assert_eq!(nlp.objective(&x).unwrap(), 0.0);
        let mut out = vec![1.0; nlp.eq_count()];
        nlp.eq_residuals(&x, &mut out).unwrap();
        for v in out {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn constant_states_leave_only_dynamics_terms() {
        // derivative of constants vanishes, so the defect reduces to
        // [-c2, 4 c1 + 0.3 c2] at every node
        let p = benchmark_problem(order(1.5));
        let n = 8;
        let nlp = transcribe(&p, n, &rule(64)).unwrap();
        let (c1, c2) = (0.7, -1.3);
        let mut x = vec![0.0; nlp.n_vars()];
        x[..n].fill(c1);
        x[n..2 * n].fill(c2);
        let mut out = vec![0.0; nlp.eq_count()];
        nlp.eq_residuals(&x, &mut out).unwrap();
        for l in 0..n {
            assert_abs_diff_eq!(out[l], -c2, epsilon = 1e-9);
            assert_abs_diff_eq!(out[n + l], 4.0 * c1 + 0.3 * c2, epsilon = 1e-9);
        }
    }

    #[test]
    fn residuals_are_affine_in_states() {
        let p = benchmark_problem(order(0.99999));
        let n = 8;
        let nlp = transcribe(&p, n, &rule(64)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let controls: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let make = |states: Vec<f64>| {
            let mut x = states;
            x.extend_from_slice(&controls);
            x
        };
        let s1: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s2: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lam = 0.37;
        let blend: Vec<f64> = s1
            .iter()
            .zip(&s2)
            .map(|(a, b)| lam * a + (1.0 - lam) * b)
            .collect();
        let mut r1 = vec![0.0; nlp.eq_count()];
        let mut r2 = vec![0.0; nlp.eq_count()];
        let mut rb = vec![0.0; nlp.eq_count()];
        nlp.eq_residuals(&make(s1), &mut r1).unwrap();
        nlp.eq_residuals(&make(s2), &mut r2).unwrap();
        nlp.eq_residuals(&make(blend), &mut rb).unwrap();
        let norm = rb.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        for i in 0..rb.len() {
            let affine = lam * r1[i] + (1.0 - lam) * r2[i];
            assert!((rb[i] - affine).abs() <= 1e-12 * norm);
        }
    }

    #[test]
    fn objective_mean_is_exact_on_resolved_trig() {
        // node samples from a trig polynomial of degree < N/2: the
        // equispaced mean equals the DC coefficient exactly
        let g = parse("y1", 1, 0).unwrap();
        let o = order(1.5);
        let p = OcpProblem::new(
            2.0 * std::f64::consts::PI,
            o,
            g,
            vec![parse("y1", 1, 0).unwrap()],
            vec![],
            vec![(-10.0, 10.0)],
            vec![],
        )
        .unwrap();
        let n = 16;
        let nlp = transcribe(&p, n, &rule(32)).unwrap();
        let dc = 0.625;
        let x: Vec<f64> = nlp
            .grid()
            .nodes()
            .iter()
            .map(|&t| dc + 1.5 * (3.0 * t).cos() - 0.25 * (7.0 * t).sin())
            .collect();
        assert_abs_diff_eq!(nlp.objective(&x).unwrap(), dc, epsilon = 1e-12);
    }

    #[test]
    fn residuals_rotate_with_samples() {
        // autonomous dynamics + circulant derivative matrix: shifting
        // every sample by one node shifts the defects by one node
        let p = benchmark_problem(order(1.5));
        let n = 8;
        let nlp = transcribe(&p, n, &rule(64)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(32);
        let x: Vec<f64> = (0..nlp.n_vars()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rotate = |v: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; v.len()];
            for block in 0..3 {
                for l in 0..n {
                    out[block * n + (l + 1) % n] = v[block * n + l];
                }
            }
            out
        };
        let xr = rotate(&x);
        let mut r = vec![0.0; nlp.eq_count()];
        let mut rr = vec![0.0; nlp.eq_count()];
        nlp.eq_residuals(&x, &mut r).unwrap();
        nlp.eq_residuals(&xr, &mut rr).unwrap();
        let norm = r.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        for j in 0..2 {
            for l in 0..n {
                let expect = r[j * n + l];
                let got = rr[j * n + (l + 1) % n];
                assert!((got - expect).abs() <= 1e-12 * norm, "j={j} l={l}");
            }
        }
    }

    #[test]
    fn adfe_matches_internal_residuals_and_rejects_bad_length() {
        let p = benchmark_problem(order(0.99999));
        let n = 8;
        let r = rule(64);
        let nlp = transcribe(&p, n, &r).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let x: Vec<f64> = (0..nlp.n_vars()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut internal = vec![0.0; nlp.eq_count()];
        nlp.eq_residuals(&x, &mut internal).unwrap();
        let external = adfe(&p, n, &r, &x).unwrap();
        for (a, b) in internal.iter().zip(&external) {
            assert!((a.abs() - b).abs() <= 1e-12 * b.max(1.0));
            assert!(*b >= 0.0);
        }
        // a random infeasible vector has strictly positive defects
        assert!(external.iter().all(|v| *v > 0.0));
        // zero vector is feasible
        let zeros = adfe(&p, n, &r, &vec![0.0; nlp.n_vars()]).unwrap();
        assert!(zeros.iter().all(|v| *v == 0.0));
        assert!(matches!(
            adfe(&p, n, &r, &[1.0, 2.0]),
            Err(OcpError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn invalid_bounds_are_rejected() {
        let g = parse("y1", 1, 0).unwrap();
        let f = vec![parse("y1", 1, 0).unwrap()];
        let err = OcpProblem::new(1.0, order(1.5), g, f, vec![], vec![(2.0, -2.0)], vec![]);
        assert!(matches!(err, Err(OcpError::InvalidBounds { .. })));
    }
}
