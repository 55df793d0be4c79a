//! Augmented-Lagrangian solver for the transcribed problems: equality
//! defects and hinge-squared path constraints drive outer multiplier
//! and penalty updates, a limited-memory quasi-Newton descent with box
//! projection handles each inner subproblem, and all gradients come
//! from central finite differences.
//!
//! Every run is deterministic: fixed evaluation order, fixed restart
//! list, seeded start perturbation. Identical inputs give bitwise
//! identical iterates.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ocp::{OcpSolution, TranscribedNlp};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// An objective or residual evaluation failed.
    Eval { what: String },
    /// A finite-difference probe produced a non-finite value.
    NonFinite { coordinate: usize },
    /// Provided start vector has the wrong length.
    BadStart { expected: usize, got: usize },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Eval { what } => write!(f, "evaluation failed: {what}"),
            Self::NonFinite { coordinate } => {
                write!(f, "non-finite probe at coordinate {coordinate}")
            }
            Self::BadStart { expected, got } => {
                write!(f, "start vector has length {got}, expected {expected}")
            }
        }
    }
}

impl std::error::Error for SolveError {}

/// A finite-dimensional program with box bounds, equality residuals
/// (driven to zero) and inequality residuals (driven nonpositive).
pub trait Program: Sync {
    fn n_vars(&self) -> usize;
    fn objective(&self, x: &[f64]) -> Result<f64, SolveError>;
    fn eq_count(&self) -> usize {
        0
    }
    fn eq_residuals(&self, _x: &[f64], _out: &mut [f64]) -> Result<(), SolveError> {
        Ok(())
    }
    fn ineq_count(&self) -> usize {
        0
    }
    fn ineq_residuals(&self, _x: &[f64], _out: &mut [f64]) -> Result<(), SolveError> {
        Ok(())
    }
    fn bounds(&self) -> &[(f64, f64)];
    /// Magnitude by which equality residuals are normalized inside the
    /// augmented Lagrangian; reported feasibility stays unscaled.
    fn residual_scale(&self) -> f64 {
        1.0
    }
    /// Index range of control-like variables, negated by one of the
    /// deterministic restarts.
    fn control_range(&self) -> Option<std::ops::Range<usize>> {
        None
    }
}

/// Options for [`minimize`] and [`solve`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Start vector; all ones when absent.
    pub x0: Option<Vec<f64>>,
    /// Inner stop on the iterate step norm.
    pub tol_step: f64,
    /// Inner stop on the objective change.
    pub tol_obj: f64,
    /// Outer stop on the unscaled feasibility residual.
    pub tol_feas: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    /// Relative central-difference step.
    pub fd_step: f64,
    /// Scale of the deterministic start perturbation. Symmetric
    /// problems have exact stationary rays that first-order methods
    /// cannot leave; seeding every start with a tiny full-spectrum
    /// perturbation makes escape deterministic instead of an accident
    /// of rounding. Zero disables.
    pub perturb: f64,
    pub seed: u64,
    /// Run the deterministic restart list and keep the best result.
    pub restarts: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            x0: None,
            tol_step: 1e-9,
            tol_obj: 1e-9,
            tol_feas: 1e-8,
            max_outer: 50,
            max_inner: 500,
            // residuals are scale-normalized, so the objective must be
            // allowed to dominate the first inner solves; a stiff start
            // drives nonconvex problems straight into the nearest
            // feasible point instead of an optimum
            penalty_init: 1e-2,
            penalty_growth: 10.0,
            fd_step: 1e-6,
            perturb: 1e-6,
            seed: 0xf65,
            restarts: true,
        }
    }
}

const MULTIPLIER_CLIP: f64 = 1e8;
const PENALTY_CAP: f64 = 1e10;
const LBFGS_MEMORY: usize = 10;

/// One outer iteration of the solve, for trace output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub outer: usize,
    /// Inner iterations spent in this outer step.
    pub inner: usize,
    pub objective: f64,
    pub max_eq_residual: f64,
    /// Norm of the last inner step.
    pub step_norm: f64,
}

/// Raw solver output on the decision vector.
#[derive(Debug, Clone)]
pub struct NlpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Total inner iterations.
    pub iterations: usize,
    pub converged: bool,
    pub max_eq_residual: f64,
    pub trace: Vec<TraceRow>,
}

/// Central-difference gradient with per-coordinate step
/// `fd_step * (1 + |x_i|)`. Coordinates are independent, so the loop
/// fans out across threads under the `parallel` feature.
pub fn gradient<F>(f: &F, x: &[f64], fd_step: f64) -> Result<Vec<f64>, SolveError>
where
    F: Fn(&[f64]) -> Result<f64, SolveError> + Sync,
{
    // one scratch vector per worker; coordinate i restores its slot
    let probe = |xp: &mut Vec<f64>, i: usize| -> Result<f64, SolveError> {
        let h = fd_step * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(xp)?;
        xp[i] = x[i] - h;
        let fm = f(xp)?;
        xp[i] = x[i];
        let g = (fp - fm) / (2.0 * h);
        if g.is_finite() {
            Ok(g)
        } else {
            Err(SolveError::NonFinite { coordinate: i })
        }
    };

    #[cfg(feature = "parallel")]
    {
        (0..x.len())
            .into_par_iter()
            .map_init(|| x.to_vec(), probe)
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = x.to_vec();
        (0..x.len()).map(|i| probe(&mut scratch, i)).collect()
    }
}

fn clamp_into(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two-loop recursion for the quasi-Newton direction `-H g`.
fn lbfgs_direction(history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

struct InnerResult {
    value: f64,
    iterations: usize,
    last_step: f64,
}

/// Projected quasi-Newton descent with backtracking line search.
fn inner_minimize<F>(
    phi: &F,
    x: &mut Vec<f64>,
    bounds: &[(f64, f64)],
    opts: &SolveOptions,
) -> Result<InnerResult, SolveError>
where
    F: Fn(&[f64]) -> Result<f64, SolveError> + Sync,
{
    let mut fx = phi(x)?;
    let mut g = gradient(phi, x, opts.fd_step)?;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut last_step = 0.0;
    let mut iterations = 0;

    for _ in 0..opts.max_inner {
        let g_inf = g.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if g_inf <= 1e-14 * (1.0 + fx.abs()) {
            break;
        }
        let mut d = lbfgs_direction(&history, &g);
        let descent = dot(&g, &d);
        let steepest = descent > -1e-14 * norm2(&g) * norm2(&d).max(1e-300);
        if steepest {
            history.clear();
            d = g.iter().map(|v| -v).collect();
        }
        // fresh steepest-descent steps need a sane initial scale
        let mut alpha = if history.is_empty() { 1.0 / g_inf.max(1.0) } else { 1.0 };

        let mut accepted = false;
        let mut trial = x.clone();
        let mut f_trial = fx;
        for _ in 0..60 {
            for ((ti, xi), di) in trial.iter_mut().zip(x.iter()).zip(&d) {
                *ti = xi + alpha * di;
            }
            clamp_into(&mut trial, bounds);
            let step: f64 = trial
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if step == 0.0 {
                break;
            }
            f_trial = phi(&trial)?;
            let slope: f64 = trial
                .iter()
                .zip(x.iter())
                .zip(&g)
                .map(|((t, xi), gi)| gi * (t - xi))
                .sum();
            if f_trial <= fx + 1e-4 * slope || (slope <= 0.0 && f_trial < fx) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }

        iterations += 1;
        let g_new = gradient(phi, &trial, opts.fd_step)?;
        let s: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm2(&s) * norm2(&y) {
            if history.len() == LBFGS_MEMORY {
                history.pop_front();
            }
            history.push_back((s.clone(), y, 1.0 / sy));
        }
        last_step = norm2(&s);
        let dobj = (f_trial - fx).abs();
        *x = trial;
        fx = f_trial;
        g = g_new;
        if last_step < opts.tol_step || dobj < opts.tol_obj {
            break;
        }
    }
    Ok(InnerResult {
        value: fx,
        iterations,
        last_step,
    })
}

struct Residuals {
    eq: Vec<f64>,
    ineq: Vec<f64>,
}

fn residuals(program: &impl Program, x: &[f64]) -> Result<Residuals, SolveError> {
    let mut eq = vec![0.0; program.eq_count()];
    program.eq_residuals(x, &mut eq)?;
    let mut ineq = vec![0.0; program.ineq_count()];
    program.ineq_residuals(x, &mut ineq)?;
    Ok(Residuals { eq, ineq })
}

fn feasibility(r: &Residuals) -> f64 {
    let eq = r.eq.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let ineq = r.ineq.iter().fold(0.0_f64, |a, v| a.max(v.max(0.0)));
    eq.max(ineq)
}

/// One augmented-Lagrangian run from a fixed start.
fn run_single(
    program: &impl Program,
    start: Vec<f64>,
    opts: &SolveOptions,
) -> Result<NlpSolution, SolveError> {
    let scale = program.residual_scale();
    let mut x = start;
    clamp_into(&mut x, program.bounds());
    let mut mu = vec![0.0_f64; program.eq_count()];
    let mut nu = vec![0.0_f64; program.ineq_count()];
    let mut rho = opts.penalty_init;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut best_feas = f64::INFINITY;

    for outer in 0..opts.max_outer {
        let phi = {
            let mu = mu.clone();
            let nu = nu.clone();
            move |x: &[f64]| -> Result<f64, SolveError> {
                let mut val = program.objective(x)?;
                if !mu.is_empty() {
                    let mut h = vec![0.0; mu.len()];
                    program.eq_residuals(x, &mut h)?;
                    for (hk, mk) in h.iter().zip(&mu) {
                        let scaled = hk / scale;
                        val += mk * scaled + 0.5 * rho * scaled * scaled;
                    }
                }
                if !nu.is_empty() {
                    let mut c = vec![0.0; nu.len()];
                    program.ineq_residuals(x, &mut c)?;
                    for (ck, nk) in c.iter().zip(&nu) {
                        let shifted = (nk + rho * ck).max(0.0);
                        val += (shifted * shifted - nk * nk) / (2.0 * rho);
                    }
                }
                if val.is_finite() {
                    Ok(val)
                } else {
                    Err(SolveError::Eval {
                        what: "augmented objective became non-finite".to_string(),
                    })
                }
            }
        };

        let inner = inner_minimize(&phi, &mut x, program.bounds(), opts)?;
        iterations += inner.iterations;
        let r = residuals(program, &x)?;
        let feas = feasibility(&r);
        trace.push(TraceRow {
            outer,
            inner: inner.iterations,
            objective: program.objective(&x)?,
            max_eq_residual: feas,
            step_norm: inner.last_step,
        });
        let _ = inner.value;
        if feas <= opts.tol_feas {
            converged = true;
            break;
        }
        // safeguarded update: reward a 4x feasibility improvement with a
        // multiplier step, otherwise lean on a stiffer penalty
        if feas <= 0.25 * best_feas {
            for (mk, hk) in mu.iter_mut().zip(&r.eq) {
                *mk = (*mk + rho * hk / scale).clamp(-MULTIPLIER_CLIP, MULTIPLIER_CLIP);
            }
            for (nk, ck) in nu.iter_mut().zip(&r.ineq) {
                *nk = (*nk + rho * ck).max(0.0).min(MULTIPLIER_CLIP);
            }
            best_feas = feas;
        } else {
            rho = (rho * opts.penalty_growth).min(PENALTY_CAP);
        }
    }

    let objective = program.objective(&x)?;
    let r = residuals(program, &x)?;
    Ok(NlpSolution {
        x,
        objective,
        iterations,
        converged,
        max_eq_residual: feasibility(&r),
        trace,
    })
}

/// Deterministic restart list: the caller's start (all ones by
/// default), the same with controls negated, and the box midpoint.
fn starts(program: &impl Program, opts: &SolveOptions) -> Result<Vec<Vec<f64>>, SolveError> {
    let n = program.n_vars();
    let base = match &opts.x0 {
        Some(v) => {
            if v.len() != n {
                return Err(SolveError::BadStart {
                    expected: n,
                    got: v.len(),
                });
            }
            v.clone()
        }
        None => vec![1.0; n],
    };
    if !opts.restarts {
        return Ok(vec![base]);
    }
    let mut list = vec![base.clone()];
    if let Some(range) = program.control_range() {
        let mut negated = base.clone();
        for v in &mut negated[range] {
            *v = -*v;
        }
        list.push(negated);
    }
    let midpoint: Vec<f64> = program
        .bounds()
        .iter()
        .map(|&(lo, hi)| {
            let mid = 0.5 * (lo + hi);
            if mid.is_finite() {
                mid
            } else {
                0.0
            }
        })
        .collect();
    list.push(midpoint);
    Ok(list)
}

fn perturb(x: &mut [f64], scale: f64, seed: u64) {
    if scale == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in x.iter_mut() {
        let u: f64 = rng.gen_range(-1.0..1.0);
        *v += scale * (1.0 + v.abs()) * u;
    }
}

/// Minimizes a generic program: augmented-Lagrangian restarts, best
/// result kept (feasible with lowest objective, or closest to feasible
/// when none converges).
pub fn minimize(program: &impl Program, opts: &SolveOptions) -> Result<NlpSolution, SolveError> {
    let mut best: Option<NlpSolution> = None;
    for (k, mut start) in starts(program, opts)?.into_iter().enumerate() {
        perturb(&mut start, opts.perturb, opts.seed.wrapping_add(k as u64));
        clamp_into(&mut start, program.bounds());
        let candidate = run_single(program, start, opts)?;
        let better = match &best {
            None => true,
            Some(b) => match (candidate.converged, b.converged) {
                (true, true) => candidate.objective < b.objective,
                (true, false) => true,
                (false, true) => false,
                (false, false) => candidate.max_eq_residual < b.max_eq_residual,
            },
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Solves a transcribed optimal control problem and maps the result
/// back to trajectories with an independent feasibility recheck.
pub fn solve(nlp: &TranscribedNlp, opts: &SolveOptions) -> Result<OcpSolution, SolveError> {
    let raw = minimize(nlp, opts)?;
    OcpSolution::assemble(nlp, raw).map_err(|e| SolveError::Eval {
        what: e.to_string(),
    })
}
