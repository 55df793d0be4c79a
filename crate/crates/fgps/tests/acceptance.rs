//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test -p fgps --test acceptance -- --nocapture`
//! (the solver-backed criteria take minutes).

use std::sync::OnceLock;
use std::time::Instant;

use fgps::errorbound::{psi, truncation_bound_ln, BoundConstants, BoundSweep, BranchMode};
use fgps::exprdsl::{parse, EvalEnv};
use fgps::fracderiv::{reduced_fd_oracle, FgpsFim};
use fgps::gegenbauer::{gauss_nodes, integration_vector, GegenbauerIndex, QuadratureRule};
use fgps::nlp::{minimize, Program, SolveError, SolveOptions};
use fgps::ocp::{benchmark_problem, solve};
use fgps::{FourierGrid, FractionalOrder};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn reference_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| {
        QuadratureRule::new(1000, GegenbauerIndex::new(0.0).unwrap()).unwrap()
    })
}

/// Stopping setup for the benchmark reproductions: the reference
/// experiment ran its optimizer essentially to stagnation, so the
/// looser reporting defaults are tightened here.
fn benchmark_opts() -> SolveOptions {
    SolveOptions {
        tol_step: 1e-13,
        tol_obj: 1e-13,
        max_inner: 2000,
        ..Default::default()
    }
}

/// Max node error of the matrix route against the panel-doubling
/// oracle for the sine target.
fn sine_error(alpha: f64, n: usize) -> f64 {
    let order = FractionalOrder::new(alpha, 30.0).unwrap();
    let grid = FourierGrid::new(TAU, n).unwrap();
    let fim = FgpsFim::build(&grid, reference_rule(), &order).unwrap();
    let samples: Vec<f64> = grid.nodes().iter().map(|t| t.sin()).collect();
    let approx = fim.apply(&samples).unwrap();
    let shift = f64::from(order.ceil_m()) * std::f64::consts::FRAC_PI_2;
    let fm = move |t: f64| (t + shift).sin();
    grid.nodes()
        .iter()
        .zip(&approx)
        .map(|(&t, &a)| {
            let oracle = reduced_fd_oracle(&fm, &order, t, 32);
            assert!(oracle.converged, "oracle must converge at t={t}");
            (a - oracle.value).abs()
        })
        .fold(0.0_f64, f64::max)
}

const ALPHAS: [f64; 6] = [1.1, 1.3, 1.5, 1.7, 1.9, 1.99];

#[test]
fn criterion_1_derivative_accuracy() {
    let mut worst = 0.0_f64;
    for alpha in ALPHAS {
        let start = Instant::now();
        let err = sine_error(alpha, 100);
        let secs = start.elapsed().as_secs_f64();
        println!("  alpha {alpha}: max error {err:.3e} in {secs:.1} s");
        assert!(
            secs <= 60.0,
            "criterion 1: FAIL - alpha {alpha} exceeded the 60 s budget"
        );
        worst = worst.max(err);
        assert!(
            err <= 1e-8,
            "criterion 1: FAIL - alpha {alpha} error {err:.3e} > 1e-8"
        );
    }
    println!("criterion 1: PASS - sine derivative error at N = 100 <= 1e-8 (worst {worst:.3e})");
}

#[test]
fn criterion_2_convergence_trend() {
    let ns = [4usize, 12, 40, 100];
    let mut all_ok = true;
    for alpha in ALPHAS {
        let errs: Vec<f64> = ns.iter().map(|&n| sine_error(alpha, n)).collect();
        let ok = errs.windows(2).all(|w| w[1] <= w[0]);
        println!(
            "  alpha {alpha}: errors over N {:?} -> {}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            if ok { "non-increasing" } else { "NOT non-increasing" }
        );
        all_ok &= ok;
    }
    if all_ok {
        println!("criterion 2: PASS - error non-increasing across N for every alpha");
    } else {
        println!("criterion 2: FAIL - error is not non-increasing in N");
        println!("  analysis: the sine target is already resolved exactly by the");
        println!("  N = 4 interpolant, so in exact arithmetic the matrix route is");
        println!("  the same quadrature applied to the same integrand at every N;");
        println!("  the only N-dependence left is rounding, which grows with the");
        println!("  summation length. A decreasing trend is unattainable for this");
        println!("  target.");
    }
    assert!(all_ok, "criterion 2 failed; see analysis above");
}

#[test]
fn criterion_3_benchmark_objective() {
    let start = Instant::now();
    let order = FractionalOrder::new(0.99999, 30.0).unwrap();
    let problem = benchmark_problem(order);
    let sol = solve(&problem, 100, reference_rule(), &benchmark_opts()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let j = sol.objective_value;
    let adfe = sol.max_adfe();
    let bang = sol.controls[0].iter().filter(|u| u.abs() >= 0.95).count();
    println!(
        "  J_100 = {j:.6}, max ADFE = {adfe:.3e}, bang nodes = {bang}/100, \
         converged = {}, {secs:.0} s",
        sol.converged
    );
    assert!(sol.converged, "criterion 3: FAIL - solver did not converge");
    assert!(
        (j - (-1.311)).abs() <= 0.05,
        "criterion 3: FAIL - J {j:.6} outside -1.311 +- 0.05"
    );
    assert!(adfe <= 1e-6, "criterion 3: FAIL - max ADFE {adfe:.3e} > 1e-6");
    assert!(
        bang >= 80,
        "criterion 3: FAIL - |u| >= 0.95 at only {bang}% of nodes"
    );
    assert!(secs <= 900.0, "criterion 3: FAIL - exceeded 15 min budget");
    println!("criterion 3: PASS - J within 0.05 of -1.311, ADFE <= 1e-6, bang-bang control");
}

#[test]
fn criterion_4_degenerate_limit() {
    let order = FractionalOrder::new(1.00001, 30.0).unwrap();
    let problem = benchmark_problem(order);
    let sol = solve(&problem, 100, reference_rule(), &benchmark_opts()).unwrap();
    let j = sol.objective_value;
    let sup = sol
        .states
        .iter()
        .chain(sol.controls.iter())
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    println!("  J_100 = {j:.2e}, trajectory sup = {sup:.2e}");
    assert!(sol.converged, "criterion 4: FAIL - solver did not converge");
    assert!(j.abs() <= 1e-3, "criterion 4: FAIL - |J| {j:.2e} > 1e-3");
    assert!(sup <= 1e-2, "criterion 4: FAIL - trajectories {sup:.2e} > 1e-2");
    println!("criterion 4: PASS - degenerate limit collapses to the steady state");
}

#[test]
fn criterion_5_objective_convergence_in_n() {
    let order = FractionalOrder::new(0.99999, 30.0).unwrap();
    let problem = benchmark_problem(order);
    let opts = benchmark_opts();
    let mut js = std::collections::BTreeMap::new();
    for n in (10..=100).step_by(10) {
        let sol = solve(&problem, n, reference_rule(), &opts).unwrap();
        println!("  N = {n}: J_N = {:.6} (converged = {})", sol.objective_value, sol.converged);
        js.insert(n, sol.objective_value);
    }
    let tail = (js[&100] - js[&90]).abs();
    let head = (js[&100] - js[&20]).abs();
    assert!(
        tail < head,
        "criterion 5: FAIL - |J_100 - J_90| = {tail:.2e} not < |J_100 - J_20| = {head:.2e}"
    );
    let last3 = [js[&80], js[&90], js[&100]];
    let spread = last3.iter().cloned().fold(f64::MIN, f64::max)
        - last3.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        spread <= 0.02,
        "criterion 5: FAIL - last three J values spread {spread:.3e} > 0.02"
    );
    println!(
        "criterion 5: PASS - |J_100 - J_90| = {tail:.2e} < |J_100 - J_20| = {head:.2e}, \
         last-three spread {spread:.3e}"
    );
}

#[test]
fn criterion_6a_quadrature_exactness() {
    for (ng, lam) in [(8usize, 0.0), (12, 0.25), (16, 0.5), (20, 1.0)] {
        let lambda = GegenbauerIndex::new(lam).unwrap();
        let nodes = gauss_nodes(ng, lambda).unwrap();
        let weights = integration_vector(&nodes).unwrap();
        for k in 0..=ng {
            let got: f64 = weights
                .iter()
                .zip(&nodes)
                .map(|(w, z)| w * z.powi(k as i32))
                .sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!(
                (got - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                "criterion 6a: FAIL - ng={ng} lambda={lam} k={k}"
            );
        }
    }
    println!("criterion 6a: PASS - weights integrate all monomials up to degree N_G (1e-12)");
}

#[test]
fn criterion_6b_cardinal_identities() {
    let grid = FourierGrid::new(TAU, 16).unwrap();
    for j in 0..16 {
        for k in 0..16 {
            let expect = if j == k { 1.0 } else { 0.0 };
            assert!(
                (grid.cardinal(j, grid.node(k)) - expect).abs() <= 1e-12,
                "criterion 6b: FAIL - cardinality at ({j},{k})"
            );
        }
    }
    for i in 0..100 {
        let t = -3.0 + 0.11 * i as f64;
        let total: f64 = (0..16).map(|j| grid.cardinal(j, t)).sum();
        assert!(
            (total - 1.0).abs() <= 1e-12,
            "criterion 6b: FAIL - partition of unity at t={t}"
        );
    }
    println!("criterion 6b: PASS - Kronecker cardinality and partition of unity (1e-12)");
}

#[test]
fn criterion_6c_circulant_equals_direct() {
    let grid = FourierGrid::new(TAU, 8).unwrap();
    let rule = QuadratureRule::new(64, GegenbauerIndex::new(0.0).unwrap()).unwrap();
    let order = FractionalOrder::new(1.5, 30.0).unwrap();
    let fast = FgpsFim::build(&grid, &rule, &order).unwrap();
    let slow = FgpsFim::build_direct(&grid, &rule, &order);
    let scale = slow.max_abs_entry();
    for l in 0..8 {
        for j in 0..8 {
            assert!(
                (fast.entry(l, j) - slow.entry(l, j)).abs() <= 1e-12 * scale,
                "criterion 6c: FAIL - entry ({l},{j})"
            );
        }
    }
    println!("criterion 6c: PASS - circulant fill equals full direct construction at N = 8");
}

#[test]
fn criterion_6d_row_sums_annihilate_constants() {
    let grid = FourierGrid::new(TAU, 12).unwrap();
    let rule = QuadratureRule::new(64, GegenbauerIndex::new(0.0).unwrap()).unwrap();
    for alpha in [0.5, 1.5, 2.5] {
        let order = FractionalOrder::new(alpha, 30.0).unwrap();
        let fim = FgpsFim::build(&grid, &rule, &order).unwrap();
        let bound = 1e-9 * fim.max_abs_entry();
        for l in 0..12 {
            let s: f64 = (0..12).map(|j| fim.entry(l, j)).sum();
            assert!(
                s.abs() <= bound,
                "criterion 6d: FAIL - row {l} at alpha {alpha} sums to {s:e}"
            );
        }
    }
    println!("criterion 6d: PASS - row sums vanish (constants are annihilated, 1e-9)");
}

#[test]
fn criterion_6e_matrix_matches_oracle_across_ceilings() {
    let grid = FourierGrid::new(TAU, 40).unwrap();
    let rule = QuadratureRule::new(300, GegenbauerIndex::new(0.0).unwrap()).unwrap();
    for alpha in [0.5, 1.5, 2.5] {
        let order = FractionalOrder::new(alpha, 30.0).unwrap();
        let m = order.ceil_m();
        let fim = FgpsFim::build(&grid, &rule, &order).unwrap();
        let samples: Vec<f64> = grid.nodes().iter().map(|t| t.sin()).collect();
        let approx = fim.apply(&samples).unwrap();
        let shift = f64::from(m) * std::f64::consts::FRAC_PI_2;
        let fm = move |t: f64| (t + shift).sin();
        for (l, &t) in grid.nodes().iter().enumerate() {
            let oracle = reduced_fd_oracle(&fm, &order, t, 32);
            assert!(
                (approx[l] - oracle.value).abs() <= 1e-6,
                "criterion 6e: FAIL - alpha {alpha} node {l}"
            );
        }
    }
    println!("criterion 6e: PASS - matrix route matches the oracle for m in {{1,2,3}} (1e-6)");
}

#[test]
fn criterion_6f_kernel_specializes_at_first_ceiling() {
    let grid = FourierGrid::new(TAU, 8).unwrap();
    let alpha = 0.6;
    let order = FractionalOrder::new(alpha, 5.0).unwrap();
    let ng = 4usize;
    for i in 0..10 {
        let y = 0.08 + 0.09 * i as f64;
        let t = 0.3 + 0.55 * i as f64;
        let general = psi(&grid, &order, ng, 2, y, t).unwrap();
        let tau = t - 5.0 * (y.ln() / (1.0 - alpha)).exp();
        let kernel = (5.0 / (alpha - 1.0)) * y.powf(alpha / (1.0 - alpha));
        let direct = kernel.powi(ng as i32 + 1) * grid.cardinal_deriv(2, ng as u32 + 2, tau);
        let tol = 1e-12 * direct.abs().max(1e-300);
        assert!(
            (general - direct).abs() <= tol,
            "criterion 6f: FAIL - y={y} t={t}: {general:e} vs {direct:e}"
        );
    }
    println!("criterion 6f: PASS - error kernel reduces to the single-derivative form at m = 1");
}

#[test]
fn criterion_6g_bound_grows_in_memory_and_grid() {
    let sweep = BoundSweep::standard();
    let order = FractionalOrder::new(0.5, 30.0).unwrap();
    let c = BoundConstants::default();
    let lam = GegenbauerIndex::new(0.0).unwrap();
    let at_memory = |memory: f64| {
        let o = FractionalOrder::new(0.5, memory).unwrap();
        truncation_bound_ln(8, &o, lam, sweep.ng, 0.5, &c, BranchMode::Finite).unwrap()
    };
    assert!(at_memory(10.0) < at_memory(30.0) && at_memory(30.0) < at_memory(90.0));
    let at_n = |n: usize| {
        truncation_bound_ln(n, &order, lam, sweep.ng, 0.5, &c, BranchMode::Finite).unwrap()
    };
    assert!(at_n(8) < at_n(16) && at_n(16) < at_n(32));
    println!("criterion 6g: PASS - truncation bound grows monotonically in L and N");
}

struct Quadratic {
    target: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl Program for Quadratic {
    fn n_vars(&self) -> usize {
        self.target.len()
    }
    fn objective(&self, x: &[f64]) -> Result<f64, SolveError> {
        Ok(x.iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }
}

struct ConstrainedQuadratic {
    bounds: Vec<(f64, f64)>,
}

impl Program for ConstrainedQuadratic {
    fn n_vars(&self) -> usize {
        2
    }
    fn objective(&self, x: &[f64]) -> Result<f64, SolveError> {
        Ok(x[0] * x[0] + x[1] * x[1])
    }
    fn eq_count(&self) -> usize {
        1
    }
    fn eq_residuals(&self, x: &[f64], out: &mut [f64]) -> Result<(), SolveError> {
        out[0] = x[0] + x[1] - 1.0;
        Ok(())
    }
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }
}

#[test]
fn criterion_6h_solver_exactness_on_closed_forms() {
    let p = Quadratic {
        target: vec![1.25, -0.75, 2.0],
        bounds: vec![(-10.0, 10.0); 3],
    };
    let sol = minimize(&p, &SolveOptions::default()).unwrap();
    for (x, t) in sol.x.iter().zip(&p.target) {
        assert!(
            (x - t).abs() <= 1e-6,
            "criterion 6h: FAIL - unconstrained quadratic off by {:e}",
            (x - t).abs()
        );
    }
    let p = ConstrainedQuadratic {
        bounds: vec![(-10.0, 10.0); 2],
    };
    let sol = minimize(&p, &SolveOptions::default()).unwrap();
    assert!(
        (sol.x[0] - 0.5).abs() <= 1e-6 && (sol.x[1] - 0.5).abs() <= 1e-6,
        "criterion 6h: FAIL - equality-constrained quadratic off"
    );
    println!("criterion 6h: PASS - closed-form test problems solved to 1e-6");
}

#[test]
fn criterion_6i_expression_precedence_corpus() {
    let eval = |src: &str| -> f64 {
        parse(src, 0, 0)
            .unwrap()
            .eval(&EvalEnv {
                t: 0.0,
                states: &[],
                controls: &[],
            })
            .unwrap()
    };
    let cases: [(&str, f64); 30] = [
        ("1 + 2 * 3", 7.0),
        ("(1 + 2) * 3", 9.0),
        ("2 * 3 + 1", 7.0),
        ("10 - 4 - 3", 3.0),
        ("10 - (4 - 3)", 9.0),
        ("12 / 2 / 3", 2.0),
        ("12 / (2 / 3)", 18.0),
        ("2 + 12 / 4", 5.0),
        ("-2^2", -4.0),
        ("(-2)^2", 4.0),
        ("2^-2", 0.25),
        ("-2 * 3", -6.0),
        ("- 2 - 3", -5.0),
        ("2 - -3", 5.0),
        ("2^3 * 2", 16.0),
        ("2 * 2^3", 16.0),
        ("2^3^2", 512.0),
        ("2^2^3", 256.0),
        ("4^0.5", 2.0),
        ("abs(-3.5)", 3.5),
        ("sqrt(16)", 4.0),
        ("exp(0)", 1.0),
        ("sin(0)", 0.0),
        ("cos(0)", 1.0),
        ("tanh(0)", 0.0),
        ("1 - 2 + 3", 2.0),
        ("6 / 3 * 2", 4.0),
        ("2 * -3", -6.0),
        ("1 + -2^2", -3.0),
        ("3 * (2 + 1)^2", 27.0),
    ];
    for (src, expect) in cases {
        assert_eq!(eval(src), expect, "criterion 6i: FAIL - {src}");
    }
    println!("criterion 6i: PASS - 30-expression precedence corpus exact");
}

#[test]
fn criterion_7_bound_acceptance_is_property_based() {
    // the bound's constants and mean-value points are existential, so
    // acceptance checks structure: total branch selection, log/direct
    // agreement where the direct product is representable, and the
    // monotone trends (6g)
    let order = FractionalOrder::new(1.5, 30.0).unwrap();
    let c = BoundConstants::default();
    for lam in [-0.49, -0.25, 0.0, 0.5, 2.0] {
        let lambda = GegenbauerIndex::new(lam).unwrap();
        for ng in [1usize, 2, 7, 8, 15] {
            let v =
                truncation_bound_ln(8, &order, lambda, ng, 0.5, &c, BranchMode::Finite).unwrap();
            assert!(v.is_finite(), "criterion 7: FAIL - branch not total");
        }
    }
    let lam = GegenbauerIndex::new(0.0).unwrap();
    for ng in [2usize, 5, 10, 20] {
        let ln_v = truncation_bound_ln(8, &order, lam, ng, 0.6, &c, BranchMode::Finite).unwrap();
        let ng_f = ng as f64;
        let direct = (8.0f64).powf(ng_f + 2.0)
            * (30.0 / 0.5 * 0.6f64.powf(1.0)).powf(ng_f + 1.0)
            * 2.0f64.powf(-2.0 * ng_f - 1.0)
            * ng_f.exp()
            * ng_f.powf(-ng_f - 1.5);
        let rel = (ln_v.exp() - direct).abs() / direct;
        assert!(
            rel <= 1e-10,
            "criterion 7: FAIL - log/direct disagree at ng={ng} (rel {rel:e})"
        );
    }
    println!(
        "criterion 7: PASS - bound acceptance is property-based (totality, log/direct, trends)"
    );
}
