//! Truncation-error diagnostics for the pseudospectral quadrature: the
//! mean-value kernel entering the error form and the closed-form upper
//! bound with its regime branches.
//!
//! The bound's constants are existential (only their positivity and
//! `> 1` are known), so defaults of one are used and the reported
//! values are meaningful up to those constants; what the bound is used
//! for is its parameter dependence. Everything is evaluated as sums of
//! logs with sign tracking.

use std::fmt;

use crate::fourier::FourierGrid;
use crate::fracderiv::FractionalOrder;
use crate::gegenbauer::GegenbauerIndex;
use crate::numeric::{ln_gamma_signed, SignedLn};

#[derive(Debug, Clone, PartialEq)]
pub enum BoundError {
    /// Constants must satisfy `d_lambda > 0`, `b1_lambda > 1`.
    InvalidConstants { d_lambda: f64, b1_lambda: f64 },
    ZetaOutOfRange(f64),
    /// Degree parameter must be positive.
    ZeroDegree,
    /// The asymptotic branch only exists for `-1/2 < lambda < 0`; for
    /// `lambda >= 0` there is nothing to select.
    AsymptoticBranchUnavailable(f64),
    KernelArgumentOutOfRange(f64),
}

impl fmt::Display for BoundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidConstants { d_lambda, b1_lambda } => write!(
                f,
                "constants must satisfy d > 0 and b1 > 1, got d={d_lambda}, b1={b1_lambda}"
            ),
            Self::ZetaOutOfRange(z) => write!(f, "zeta {z} must lie in (0, 1)"),
            Self::ZeroDegree => write!(f, "quadrature degree parameter must be positive"),
            Self::AsymptoticBranchUnavailable(l) => {
                write!(f, "asymptotic branch needs -1/2 < lambda < 0, got {l}")
            }
            Self::KernelArgumentOutOfRange(y) => write!(f, "kernel argument {y} must be in (0, 1)"),
        }
    }
}

impl std::error::Error for BoundError {}

/// The two existential constants of the truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub d_lambda: f64,
    pub b1_lambda: f64,
}

impl BoundConstants {
    pub fn new(d_lambda: f64, b1_lambda: f64) -> Result<Self, BoundError> {
        if d_lambda > 0.0 && b1_lambda > 1.0 {
            Ok(Self { d_lambda, b1_lambda })
        } else {
            Err(BoundError::InvalidConstants { d_lambda, b1_lambda })
        }
    }
}

impl Default for BoundConstants {
    /// Both constants default to one; reported bounds are then "up to
    /// the constants".
    fn default() -> Self {
        Self {
            d_lambda: 1.0,
            b1_lambda: 1.0 + f64::EPSILON,
        }
    }
}

/// Which branch of the bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchMode {
    /// Selected by `(sign of lambda, parity of the degree)`; total over
    /// the admissible parameter range.
    Finite,
    /// The `degree -> infinity` form, only for `-1/2 < lambda < 0`;
    /// must be requested explicitly because it overlaps the finite
    /// branches.
    Asymptotic,
}

/// Mean-value kernel of the quadrature error:
///
/// ```text
/// psi(y; t) = (L/(alpha - m) * y^(-(m-alpha-1)/(m-alpha)))^(ng+1)
///             * F_j^(ng+m+1)(t - L y^(1/(m-alpha)))
/// ```
///
/// returned in signed-log form since both factors overflow rapidly in
/// `ng`.
pub fn psi_ln(
    grid: &FourierGrid,
    order: &FractionalOrder,
    ng: usize,
    j: usize,
    y: f64,
    t: f64,
) -> Result<SignedLn, BoundError> {
    if !(y > 0.0 && y < 1.0) {
        return Err(BoundError::KernelArgumentOutOfRange(y));
    }
    let m = f64::from(order.ceil_m());
    let memory = order.memory();
    let gap = m - order.alpha(); // in (0, 1)
    let y_exp = -(gap - 1.0) / gap; // -(m - alpha - 1)/(m - alpha) >= 0
    let base = SignedLn {
        ln_abs: (memory.ln() - gap.ln()) + y_exp * y.ln(),
        sign: -1.0, // alpha - m < 0
    };
    let deriv_order = ng as u32 + order.ceil_m() + 1;
    let tau = t - memory * (y.ln() / gap).exp();
    let card = grid.cardinal_deriv_ln(j, deriv_order, tau);
    Ok(base.powi(ng as i32 + 1).mul(card))
}

/// Plain-value convenience for [`psi_ln`]; overflows to infinity where
/// the signed-log form is the usable one.
pub fn psi(
    grid: &FourierGrid,
    order: &FractionalOrder,
    ng: usize,
    j: usize,
    y: f64,
    t: f64,
) -> Result<f64, BoundError> {
    Ok(psi_ln(grid, order, ng, j, y, t)?.value())
}

/// Natural log of the truncation-error bound
///
/// ```text
/// D N^(ng+m) (L/(m-alpha) zeta^(-(m-alpha-1)/(m-alpha)))^(ng+1)
///   2^(-2 ng - 1) e^ng ng^(lambda - ng - 3/2) * branch(lambda, ng)
/// ```
///
/// with the branch factor 1 for `lambda >= 0`, gamma-ratio expressions
/// for negative `lambda` by parity of `ng`, and
/// `b1 (ng+1)^(-lambda)` on the asymptotic branch.
pub fn truncation_bound_ln(
    n: usize,
    order: &FractionalOrder,
    lambda: GegenbauerIndex,
    ng: usize,
    zeta: f64,
    constants: &BoundConstants,
    mode: BranchMode,
) -> Result<f64, BoundError> {
    if ng == 0 {
        return Err(BoundError::ZeroDegree);
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(BoundError::ZetaOutOfRange(zeta));
    }
    if constants.d_lambda <= 0.0 || constants.b1_lambda <= 1.0 {
        return Err(BoundError::InvalidConstants {
            d_lambda: constants.d_lambda,
            b1_lambda: constants.b1_lambda,
        });
    }
    let lam = lambda.get();
    let m = f64::from(order.ceil_m());
    let gap = m - order.alpha();
    let ng_f = ng as f64;
    let n_f = n as f64;

    let zeta_exp = -(gap - 1.0) / gap;
    let per_point = order.memory().ln() - gap.ln() + zeta_exp * zeta.ln();

    let branch_ln = match mode {
        BranchMode::Finite => {
            if lam >= 0.0 {
                0.0
            } else if ng % 2 == 1 {
                ln_gamma_signed(ng_f / 2.0 + 1.0).ln_abs + ln_gamma_signed(lam + 0.5).ln_abs
                    - 0.5 * std::f64::consts::PI.ln()
                    - ln_gamma_signed(ng_f / 2.0 + lam + 1.0).ln_abs
            } else {
                std::f64::consts::LN_2
                    + ln_gamma_signed((ng_f + 3.0) / 2.0).ln_abs
                    + ln_gamma_signed(lam + 0.5).ln_abs
                    - 0.5 * std::f64::consts::PI.ln()
                    - 0.5 * ((ng_f + 1.0) * (ng_f + 2.0 * lam + 1.0)).ln()
                    - ln_gamma_signed((ng_f + 1.0) / 2.0 + lam).ln_abs
            }
        }
        BranchMode::Asymptotic => {
            if lam >= 0.0 {
                return Err(BoundError::AsymptoticBranchUnavailable(lam));
            }
            constants.b1_lambda.ln() - lam * (ng_f + 1.0).ln()
        }
    };

    Ok(constants.d_lambda.ln()
        + (ng_f + m) * n_f.ln()
        + (ng_f + 1.0) * per_point
        - (2.0 * ng_f + 1.0) * std::f64::consts::LN_2
        + ng_f
        + (lam - ng_f - 1.5) * ng_f.ln()
        + branch_ln)
}

/// [`truncation_bound_ln`] exponentiated; may overflow for large
/// parameters, where the log form is the one to report.
pub fn truncation_bound(
    n: usize,
    order: &FractionalOrder,
    lambda: GegenbauerIndex,
    ng: usize,
    zeta: f64,
    constants: &BoundConstants,
    mode: BranchMode,
) -> Result<f64, BoundError> {
    truncation_bound_ln(n, order, lambda, ng, zeta, constants, mode).map(f64::exp)
}

/// One row of a bound-trend report.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    /// Which parameter was swept: "L", "N" or "m".
    pub param: &'static str,
    pub value: f64,
    pub bound_log10: f64,
}

/// Fixed parameters for [`bound_report`].
#[derive(Debug, Clone)]
pub struct BoundSweep {
    pub lambda: GegenbauerIndex,
    pub ng: usize,
    pub zeta: f64,
    pub constants: BoundConstants,
    pub base_n: usize,
    pub base_memory: f64,
    /// Each swept ceiling `m` is evaluated at `alpha = m - alpha_offset`.
    pub alpha_offset: f64,
}

impl BoundSweep {
    pub fn standard() -> Self {
        Self {
            lambda: GegenbauerIndex::new(0.0).expect("0 is admissible"),
            ng: 100,
            zeta: 0.5,
            constants: BoundConstants::default(),
            base_n: 8,
            base_memory: 30.0,
            alpha_offset: 0.5,
        }
    }
}

/// Tabulates the bound while sweeping memory length, grid size and the
/// order ceiling one at a time, holding everything else fixed. The
/// bound grows monotonically in each.
pub fn bound_report(
    sweep: &BoundSweep,
    memories: &[f64],
    grid_sizes: &[usize],
    ceilings: &[u32],
) -> Result<Vec<BoundRow>, BoundError> {
    let ln10 = std::f64::consts::LN_10;
    let mut rows = Vec::new();
    let base_alpha = 1.0 - sweep.alpha_offset;
    for &memory in memories {
        let order = FractionalOrder::new(base_alpha, memory)
            .expect("offset in (0,1) gives a valid order");
        let ln = truncation_bound_ln(
            sweep.base_n,
            &order,
            sweep.lambda,
            sweep.ng,
            sweep.zeta,
            &sweep.constants,
            BranchMode::Finite,
        )?;
        rows.push(BoundRow {
            param: "L",
            value: memory,
            bound_log10: ln / ln10,
        });
    }
    let base_order = FractionalOrder::new(base_alpha, sweep.base_memory)
        .expect("offset in (0,1) gives a valid order");
    for &n in grid_sizes {
        let ln = truncation_bound_ln(
            n,
            &base_order,
            sweep.lambda,
            sweep.ng,
            sweep.zeta,
            &sweep.constants,
            BranchMode::Finite,
        )?;
        rows.push(BoundRow {
            param: "N",
            value: n as f64,
            bound_log10: ln / ln10,
        });
    }
    for &m in ceilings {
        let alpha = f64::from(m) - sweep.alpha_offset;
        let order = FractionalOrder::new(alpha, sweep.base_memory)
            .expect("m - offset is positive and non-integer");
        let ln = truncation_bound_ln(
            sweep.base_n,
            &order,
            sweep.lambda,
            sweep.ng,
            sweep.zeta,
            &sweep.constants,
            BranchMode::Finite,
        )?;
        rows.push(BoundRow {
            param: "m",
            value: f64::from(m),
            bound_log10: ln / ln10,
        });
    }
    Ok(rows)
}
