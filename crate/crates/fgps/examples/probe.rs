//! Quick manual probe of the benchmark solve; not part of the test
//! suite. Run with `cargo run --release -p fgps --example probe [alpha] [n]`.

use fgps::gegenbauer::{GegenbauerIndex, QuadratureRule};
use fgps::nlp::SolveOptions;
use fgps::ocp::{benchmark_problem, solve};
use fgps::FractionalOrder;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.99999);
    let n: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(100);
    let ng: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1000);
    let tol_obj: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1e-15);
    let max_inner: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(2000);
    let penalty_init: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(0.01);

    let start = std::time::Instant::now();
    let rule = QuadratureRule::new(ng, GegenbauerIndex::new(0.0).unwrap()).unwrap();
    println!("rule built: {:?}", start.elapsed());

    let order = FractionalOrder::new(alpha, 30.0).unwrap();
    let problem = benchmark_problem(order);
    let opts = SolveOptions {
        tol_step: 1e-15,
        tol_obj,
        max_inner,
        penalty_init,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    let sol = solve(&problem, n, &rule, &opts).unwrap();
    let elapsed = t0.elapsed();
    let bang = sol.controls[0]
        .iter()
        .filter(|u| u.abs() >= 0.95)
        .count() as f64
        / n as f64;
    println!(
        "alpha={alpha} N={n}: J={:.6} adfe={:.2e} converged={} iters={} bang={:.0}% time={:?}",
        sol.objective_value,
        sol.max_adfe(),
        sol.converged,
        sol.iterations,
        100.0 * bang,
        elapsed
    );
    for row in &sol.trace {
        println!(
            "  outer {:2}: inner {:4} J={:+.6} feas={:.3e} step={:.3e}",
            row.outer, row.inner, row.objective, row.max_eq_residual, row.step_norm
        );
    }
}
