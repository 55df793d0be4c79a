//! Fractional derivatives of periodic functions with a sliding memory
//! window, and the pseudospectral quadrature matrix that approximates
//! them at grid nodes.
//!
//! The reduced form with memory length `L` and `m = ceil(alpha)` is
//!
//! ```text
//! D^alpha f(t) = L^(m-alpha) / Gamma(m - alpha + 1)
//!                * integral_0^1 f^(m)(t - L y^(1/(m-alpha))) dy,
//! ```
//!
//! free of the endpoint singularity of the defining integral. Replacing
//! `f` by its Fourier interpolant and the integral by a shifted
//! Gegenbauer-Gauss rule yields one quadrature entry per (node, cardinal)
//! pair; collected into a matrix, node samples map to derivative values
//! by a single scaled matrix-vector product.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fourier::FourierGrid;
use crate::gegenbauer::QuadratureRule;
use crate::numeric::{gamma_pos, ln_gamma_signed};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default seed for the randomized entry verification in
/// [`FgpsFim::build`].
pub const DEFAULT_VERIFY_SEED: u64 = 0x5eed_f65;

#[derive(Debug, Clone, PartialEq)]
pub enum FracDerivError {
    /// Order must be positive and non-integer (the reduced form divides
    /// by `m - alpha`).
    IntegerOrder(f64),
    NonPositiveOrder(f64),
    NonPositiveMemory(f64),
    /// Grunwald-Letnikov window is empty: needs `t > a` and at least
    /// one step.
    EmptyWindow,
    NonPositiveStep(f64),
    /// Sample vector length does not match the matrix dimension.
    LengthMismatch { expected: usize, got: usize },
    /// A directly recomputed entry disagreed with the circulant fill;
    /// the translation assumption is broken.
    VerificationFailed {
        row: usize,
        col: usize,
        direct: f64,
        filled: f64,
    },
}

impl fmt::Display for FracDerivError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IntegerOrder(a) => write!(f, "order {a} must not be an integer"),
            Self::NonPositiveOrder(a) => write!(f, "order {a} must be positive"),
            Self::NonPositiveMemory(l) => write!(f, "memory length {l} must be positive"),
            Self::EmptyWindow => write!(f, "difference window is empty"),
            Self::NonPositiveStep(h) => write!(f, "step {h} must be positive"),
            Self::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} samples, got {got}")
            }
            Self::VerificationFailed {
                row,
                col,
                direct,
                filled,
            } => write!(
                f,
                "entry ({row},{col}) verification failed: direct {direct:e} vs filled {filled:e}"
            ),
        }
    }
}

impl std::error::Error for FracDerivError {}

/// A positive non-integer differentiation order together with its
/// ceiling and the sliding memory length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    alpha: f64,
    m: u32,
    memory: f64,
}

impl FractionalOrder {
    pub fn new(alpha: f64, memory: f64) -> Result<Self, FracDerivError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(FracDerivError::NonPositiveOrder(alpha));
        }
        if alpha == alpha.round() {
            return Err(FracDerivError::IntegerOrder(alpha));
        }
        if !memory.is_finite() || memory <= 0.0 {
            return Err(FracDerivError::NonPositiveMemory(memory));
        }
        Ok(Self {
            alpha,
            m: alpha.ceil() as u32,
            memory,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `m = ceil(alpha)`; always `m - 1 < alpha < m`.
    pub fn ceil_m(&self) -> u32 {
        self.m
    }

    pub fn memory(&self) -> f64 {
        self.memory
    }

    /// `1 / (m - alpha)`, the exponent in the change of variables.
    fn power(&self) -> f64 {
        1.0 / (f64::from(self.m) - self.alpha)
    }

    /// `L^(m-alpha) / Gamma(m - alpha + 1)`.
    pub fn scale(&self) -> f64 {
        let gap = f64::from(self.m) - self.alpha;
        self.memory.powf(gap) / gamma_pos(gap + 1.0)
    }

    /// `y^(1/(m-alpha))` for `y` strictly inside `(0, 1)`.
    fn warp(&self, y: f64) -> f64 {
        debug_assert!(y > 0.0 && y < 1.0);
        (y.ln() * self.power()).exp()
    }
}

/// Signed generalized binomial coefficient `C(alpha, k)` through
/// log-gamma, safe for large `k` where the factorials overflow.
pub fn binomial_signed(alpha: f64, k: u64) -> f64 {
    let num = ln_gamma_signed(alpha + 1.0);
    let d1 = ln_gamma_signed(k as f64 + 1.0);
    let d2 = ln_gamma_signed(alpha - k as f64 + 1.0);
    // a pole in the denominator kills the coefficient
    let ln = num.ln_abs - d1.ln_abs - d2.ln_abs;
    let sign = num.sign * d1.sign * d2.sign;
    sign * ln.exp()
}

/// Finite-step Grunwald-Letnikov derivative
/// `h^-alpha sum_{k=0}^{n} (-1)^k C(alpha, k) f(t - k h)` with
/// `n = floor((t - a) / h)`. The caller drives `h -> 0`.
pub fn gl_derivative(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    a: f64,
    t: f64,
    h: f64,
) -> Result<f64, FracDerivError> {
    if !(h > 0.0) {
        return Err(FracDerivError::NonPositiveStep(h));
    }
    if t <= a {
        return Err(FracDerivError::EmptyWindow);
    }
    let n = ((t - a) / h).floor() as u64;
    if n < 1 {
        return Err(FracDerivError::EmptyWindow);
    }
    let mut sum = 0.0;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial_signed(alpha, k) * f(t - k as f64 * h);
    }
    Ok(h.powf(-alpha) * sum)
}

// 16-point Gauss-Legendre rule on [-1, 1]; reference abscissas/weights,
// kept independent of the Gegenbauer machinery on purpose.
const GL16_X: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.7554044083550030,
    -0.6178762444026438,
    -0.4580167776572274,
    -0.2816035507792589,
    -0.0950125098376374,
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 16] = [
    0.0271524594117541,
    0.0622535239386479,
    0.0951585116824928,
    0.1246289712555339,
    0.1495959888165767,
    0.1691565193950025,
    0.1826034150449236,
    0.1894506104550685,
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// Reduced-form derivative computed with a fixed number of composite
/// 16-point Gauss-Legendre panels on `[0, 1]`. `fm` is the `m`-th
/// derivative of the target function.
pub fn reduced_fd_panels(
    fm: impl Fn(f64) -> f64,
    order: &FractionalOrder,
    t: f64,
    panels: usize,
) -> f64 {
    assert!(panels >= 1);
    let width = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let left = p as f64 * width;
        let mut local = 0.0;
        for (x, w) in GL16_X.iter().zip(GL16_W.iter()) {
            let y = left + (x + 1.0) * 0.5 * width;
            local += w * fm(t - order.memory() * order.warp(y));
        }
        total += local * 0.5 * width;
    }
    order.scale() * total
}

/// Outcome of the panel-doubling oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub converged: bool,
    /// Change between the last two refinement levels.
    pub last_delta: f64,
    /// Panels used for the returned value.
    pub panels: usize,
}

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_PANEL_CAP: usize = 1 << 14;

/// Reference value of the reduced-form derivative: composite quadrature
/// with panel doubling until two successive levels agree to `1e-12`
/// (panel cap `2^14`). Deliberately independent of the pseudospectral
/// path it is used to check.
pub fn reduced_fd_oracle(
    fm: impl Fn(f64) -> f64,
    order: &FractionalOrder,
    t: f64,
    start_panels: usize,
) -> OracleValue {
    let mut panels = start_panels.max(1);
    let mut prev = reduced_fd_panels(&fm, order, t, panels);
    while panels < ORACLE_PANEL_CAP {
        panels *= 2;
        let cur = reduced_fd_panels(&fm, order, t, panels);
        let delta = (cur - prev).abs();
        if delta < ORACLE_TOL {
            return OracleValue {
                value: cur,
                converged: true,
                last_delta: delta,
                panels,
            };
        }
        prev = cur;
    }
    OracleValue {
        value: prev,
        converged: false,
        last_delta: f64::NAN,
        panels,
    }
}

/// One quadrature entry: `(1/2) sum_i P_i F_j^(m)(t_l - L zhat_i^(1/(m-alpha)))`.
pub fn fgpsq_entry(
    grid: &FourierGrid,
    rule: &QuadratureRule,
    order: &FractionalOrder,
    l: usize,
    j: usize,
) -> f64 {
    let t_l = grid.node(l);
    let m = order.ceil_m();
    let mut sum = 0.0;
    for (w, zh) in rule.weights().iter().zip(rule.shifted_nodes()) {
        sum += w * grid.cardinal_deriv(j, m, t_l - order.memory() * order.warp(*zh));
    }
    0.5 * sum
}

/// The pseudospectral integration matrix: `N x N` quadrature entries
/// plus the reduced-form scale factor. Circulant by the translation
/// structure of the cardinal functions.
#[derive(Debug, Clone)]
pub struct FgpsFim {
    grid: FourierGrid,
    order: FractionalOrder,
    /// Row-major `N x N` entries (unscaled).
    entries: Vec<f64>,
    scale: f64,
}

impl FgpsFim {
    /// Builds the matrix from one column of quadratures and the
    /// circulant rotation `entry(l, j) = q[(l - j) mod N]`, then
    /// recomputes five randomly chosen entries directly to guard the
    /// translation assumption (seeded by [`DEFAULT_VERIFY_SEED`]).
    pub fn build(
        grid: &FourierGrid,
        rule: &QuadratureRule,
        order: &FractionalOrder,
    ) -> Result<Self, FracDerivError> {
        Self::build_seeded(grid, rule, order, DEFAULT_VERIFY_SEED)
    }

    /// [`FgpsFim::build`] with an explicit verification seed.
    pub fn build_seeded(
        grid: &FourierGrid,
        rule: &QuadratureRule,
        order: &FractionalOrder,
        seed: u64,
    ) -> Result<Self, FracDerivError> {
        let n = grid.len();
        let column = Self::base_column(grid, rule, order);
        let mut entries = vec![0.0; n * n];
        for l in 0..n {
            for j in 0..n {
                entries[l * n + j] = column[(l + n - j) % n];
            }
        }
        let fim = Self {
            grid: grid.clone(),
            order: *order,
            entries,
            scale: order.scale(),
        };

        // A broken translation assumption shows up as O(1) relative
        // disagreement. The only legitimate difference between the two
        // routes is trig angle reduction at arguments up to
        // omega_{N/2} (L + T), amplified by the k^m mode weights, so
        // the tolerance is that noise level with the 1e-12-relative
        // floor.
        let reference = column.iter().fold(0.0_f64, |a, q| a.max(q.abs())).max(1e-300);
        let m = order.ceil_m();
        let half = n / 2;
        let omega = 2.0 * std::f64::consts::PI / grid.period();
        let phase = omega * half as f64 * (order.memory() + grid.period());
        let deriv_sum = (2.0 / n as f64)
            * omega.powi(m as i32)
            * (1..=half)
                .map(|k| {
                    let w = if k == half { 0.5 } else { 1.0 };
                    w * (k as f64).powi(m as i32)
                })
                .sum::<f64>();
        let weight_l1: f64 = rule.weights().iter().map(|w| w.abs()).sum();
        let noise = f64::EPSILON * phase * deriv_sum * weight_l1;
        let tol = (1e-12 * reference.max(1.0)).max(noise);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let l = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let direct = fgpsq_entry(grid, rule, order, l, j);
            let filled = fim.entry(l, j);
            if (direct - filled).abs() > tol.max(1e-12 * direct.abs()) {
                return Err(FracDerivError::VerificationFailed {
                    row: l,
                    col: j,
                    direct,
                    filled,
                });
            }
        }
        Ok(fim)
    }

    /// Quadratures for column zero; rows are independent, so the loop
    /// fans out across threads when the `parallel` feature is on. The
    /// summation order inside each entry is fixed either way, keeping
    /// results bitwise identical.
    fn base_column(grid: &FourierGrid, rule: &QuadratureRule, order: &FractionalOrder) -> Vec<f64> {
        let n = grid.len();
        let points: Vec<f64> = rule
            .shifted_nodes()
            .iter()
            .map(|zh| order.memory() * order.warp(*zh))
            .collect();
        let m = order.ceil_m();
        let entry_at = |r: usize| -> f64 {
            let t_r = grid.node(r);
            let mut sum = 0.0;
            for (w, p) in rule.weights().iter().zip(&points) {
                sum += w * grid.cardinal_deriv(0, m, t_r - p);
            }
            0.5 * sum
        };

        #[cfg(feature = "parallel")]
        {
            (0..n).into_par_iter().map(entry_at).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(entry_at).collect()
        }
    }

    /// Full `N^2` construction with no circulant shortcut. Quadratic
    /// cost; used by tests and benchmarks as the reference.
    pub fn build_direct(
        grid: &FourierGrid,
        rule: &QuadratureRule,
        order: &FractionalOrder,
    ) -> Self {
        let n = grid.len();
        let points: Vec<f64> = rule
            .shifted_nodes()
            .iter()
            .map(|zh| order.memory() * order.warp(*zh))
            .collect();
        let m = order.ceil_m();
        let fill_row = |l: usize| -> Vec<f64> {
            let t_l = grid.node(l);
            (0..n)
                .map(|j| {
                    let mut sum = 0.0;
                    for (w, p) in rule.weights().iter().zip(&points) {
                        sum += w * grid.cardinal_deriv(j, m, t_l - p);
                    }
                    0.5 * sum
                })
                .collect()
        };

        #[cfg(feature = "parallel")]
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(fill_row).collect();
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Vec<f64>> = (0..n).map(fill_row).collect();

        Self {
            grid: grid.clone(),
            order: *order,
            entries: rows.into_iter().flatten().collect(),
            scale: order.scale(),
        }
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn order(&self) -> &FractionalOrder {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unscaled quadrature entry `(l, j)`.
    pub fn entry(&self, l: usize, j: usize) -> f64 {
        self.entries[l * self.grid.len() + j]
    }

    /// `L^(m-alpha) / Gamma(m - alpha + 1)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |a, e| a.max(e.abs()))
    }

    /// Approximates the fractional derivative at every grid node:
    /// `scale * (entries . samples)`.
    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>, FracDerivError> {
        let mut out = vec![0.0; self.grid.len()];
        self.apply_into(samples, &mut out)?;
        Ok(out)
    }

    /// Allocation-free form of [`FgpsFim::apply`].
    pub fn apply_into(&self, samples: &[f64], out: &mut [f64]) -> Result<(), FracDerivError> {
        let n = self.grid.len();
        if samples.len() != n || out.len() != n {
            return Err(FracDerivError::LengthMismatch {
                expected: n,
                got: samples.len().min(out.len()),
            });
        }
        for l in 0..n {
            let row = &self.entries[l * n..(l + 1) * n];
            let mut acc = 0.0;
            for (e, s) in row.iter().zip(samples) {
                acc += e * s;
            }
            out[l] = self.scale * acc;
        }
        Ok(())
    }
}
