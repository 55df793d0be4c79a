//! Gegenbauer polynomials, Gauss nodes and interpolatory integration
//! weights.
//!
//! Polynomials are normalized so that `C_l(1) = 1` for every admissible
//! index `lambda > -1/2`. Under this normalization the `lambda -> 0`
//! limit reproduces Chebyshev polynomials of the first kind instead of
//! degenerating, and `lambda = 1/2` gives the Legendre polynomials.
//! The three-term recurrence for the normalized family is
//!
//! ```text
//! C_l(x) = [2 x (l + lambda - 1) C_{l-1}(x) - (l - 1) C_{l-2}(x)] / (l + 2 lambda - 1)
//! ```
//!
//! with `C_0 = 1`, `C_1 = x`.

use crate::numeric::ln_gamma_signed;
use std::fmt;

/// Largest degree parameter accepted by [`integration_vector`] and
/// [`QuadratureRule::new`]. Conditioning of the weight solve beyond
/// this size is untested; construction is refused rather than risked.
pub const MAX_RULE_DEGREE: usize = 2048;

/// Gegenbauer index `lambda`, restricted to the admissible range
/// `lambda > -1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerIndex(f64);

impl GegenbauerIndex {
    pub fn new(lambda: f64) -> Result<Self, GegenbauerError> {
        if !lambda.is_finite() || lambda <= -0.5 {
            return Err(GegenbauerError::IndexOutOfRange(lambda));
        }
        Ok(Self(lambda))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GegenbauerError {
    /// `lambda` outside `(-1/2, inf)`.
    IndexOutOfRange(f64),
    /// Evaluation point outside `[-1 - eps, 1 + eps]`.
    OutsideDomain(f64),
    /// Root refinement failed to reach tolerance within the iteration cap.
    RootRefinement { degree: usize, residual: f64 },
    /// Degree parameter beyond [`MAX_RULE_DEGREE`].
    DegreeTooLarge(usize),
    /// Two quadrature nodes closer than `1e-12`; the weight solve would
    /// be ill-conditioned.
    NodesTooClose { gap: f64 },
    /// Nodes outside the open interval `(-1, 1)` or empty input.
    InvalidNodes,
    /// The Chebyshev collocation system could not be solved.
    SingularSystem,
}

impl fmt::Display for GegenbauerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IndexOutOfRange(l) => write!(f, "gegenbauer index {l} not in (-1/2, inf)"),
            Self::OutsideDomain(x) => write!(f, "evaluation point {x} outside [-1, 1]"),
            Self::RootRefinement { degree, residual } => write!(
                f,
                "root refinement for degree {degree} stalled at residual {residual:e}"
            ),
            Self::DegreeTooLarge(n) => {
                write!(f, "degree parameter {n} exceeds cap {MAX_RULE_DEGREE}")
            }
            Self::NodesTooClose { gap } => {
                write!(f, "quadrature nodes nearly coincide (min gap {gap:e})")
            }
            Self::InvalidNodes => write!(f, "nodes must be distinct points inside (-1, 1)"),
            Self::SingularSystem => write!(f, "integration-weight system is singular"),
        }
    }
}

impl std::error::Error for GegenbauerError {}

/// Evaluates the normalized polynomial and its derivative in one pass.
fn eval_with_deriv(l: usize, lambda: f64, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut d0) = (1.0_f64, 0.0_f64);
    let (mut p1, mut d1) = (x, 1.0_f64);
    for k in 2..=l {
        let k_f = k as f64;
        let a = 2.0 * (k_f + lambda - 1.0);
        let b = k_f - 1.0;
        let denom = k_f + 2.0 * lambda - 1.0;
        let p2 = (a * x * p1 - b * p0) / denom;
        let d2 = (a * (p1 + x * d1) - b * d0) / denom;
        p0 = p1;
        d0 = d1;
        p1 = p2;
        d1 = d2;
    }
    (p1, d1)
}

/// Value of the degree-`l` Gegenbauer polynomial with `C_l(1) = 1`.
pub fn gegenbauer_poly(l: usize, lambda: GegenbauerIndex, x: f64) -> Result<f64, GegenbauerError> {
    if x.abs() > 1.0 + 1e-12 {
        return Err(GegenbauerError::OutsideDomain(x));
    }
    Ok(eval_with_deriv(l, lambda.get(), x).0)
}

const ROOT_TOL: f64 = 1e-14;
const ROOT_ITER_CAP: usize = 200;

/// The `n + 1` zeros of the degree-`(n + 1)` Gegenbauer polynomial,
/// strictly increasing and symmetric about the origin.
///
/// Sign changes are bracketed on a grid uniform in `theta = acos(x)`
/// (root spacing is near-uniform there), bisected, then polished with
/// Newton steps. Roots come in `+-` pairs by parity, so only the
/// positive half is located and the rest mirrored; symmetry is exact
/// by construction.
pub fn gauss_nodes(n: usize, lambda: GegenbauerIndex) -> Result<Vec<f64>, GegenbauerError> {
    let degree = n + 1;
    let lam = lambda.get();
    let positive = degree / 2;
    let has_zero = degree % 2 == 1;

    let mut roots = Vec::with_capacity(degree);
    if positive > 0 {
        // theta in (0, pi/2) covers x in (0, 1)
        let samples = 8 * (degree + 2);
        let step = std::f64::consts::FRAC_PI_2 / samples as f64;
        let mut found = Vec::with_capacity(positive);
        let mut prev_x = (step * 1e-3).cos(); // just inside x = 1
        let mut prev_v = eval_with_deriv(degree, lam, prev_x).0;
        for i in 1..=samples {
            let x = (step * i as f64).cos();
            let v = eval_with_deriv(degree, lam, x).0;
            if v == 0.0 {
                found.push(x);
            } else if prev_v * v < 0.0 {
                found.push(refine_root(degree, lam, x, prev_x)?);
            }
            prev_x = x;
            prev_v = v;
            if found.len() == positive {
                break;
            }
        }
        if found.len() != positive {
            return Err(GegenbauerError::RootRefinement {
                degree,
                residual: f64::NAN,
            });
        }
        for &r in found.iter() {
            roots.push(-r);
        }
        if has_zero {
            roots.push(0.0);
        }
        for &r in found.iter().rev() {
            roots.push(r);
        }
    } else {
        roots.push(0.0); // degree 1
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots)
}

/// Bisection to a tight bracket, then safeguarded Newton.
fn refine_root(degree: usize, lam: f64, mut lo: f64, mut hi: f64) -> Result<f64, GegenbauerError> {
    let mut f_lo = eval_with_deriv(degree, lam, lo).0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let f_mid = eval_with_deriv(degree, lam, mid).0;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..ROOT_ITER_CAP {
        let (v, d) = eval_with_deriv(degree, lam, x);
        if d == 0.0 {
            break;
        }
        let step = v / d;
        let next = x - step;
        // fall back to the bracket midpoint if Newton escapes it
        let next = if next <= lo.min(hi) || next >= lo.max(hi) {
            0.5 * (lo + hi)
        } else {
            next
        };
        let done = (next - x).abs() < ROOT_TOL;
        x = next;
        if done {
            return Ok(x);
        }
    }
    let residual = eval_with_deriv(degree, lam, x).0.abs();
    if residual <= 1e-13 {
        Ok(x)
    } else {
        Err(GegenbauerError::RootRefinement { degree, residual })
    }
}

/// Affine image `(z + 1) / 2` of each node, mapping `(-1, 1)` onto `(0, 1)`.
pub fn shift_nodes(nodes: &[f64]) -> Vec<f64> {
    nodes.iter().map(|z| 0.5 * (z + 1.0)).collect()
}

/// Interpolatory integration weights on arbitrary distinct nodes in
/// `(-1, 1)`: `P_i = integral of the i-th Lagrange cardinal polynomial
/// over [-1, 1]`, so `sum P_i q(z_i)` integrates every polynomial `q`
/// of degree `<= n` exactly.
///
/// The weights solve the collocation system `T_k(z_i) P_i = moment_k`
/// in the Chebyshev basis, which stays well-conditioned where a
/// monomial Vandermonde would not.
pub fn integration_vector(nodes: &[f64]) -> Result<Vec<f64>, GegenbauerError> {
    let m = nodes.len();
    if m == 0 || nodes.iter().any(|z| !(-1.0..=1.0).contains(z) || z.abs() >= 1.0) {
        return Err(GegenbauerError::InvalidNodes);
    }
    if m - 1 > MAX_RULE_DEGREE {
        return Err(GegenbauerError::DegreeTooLarge(m - 1));
    }
    let mut min_gap = f64::INFINITY;
    for w in nodes.windows(2) {
        min_gap = min_gap.min((w[1] - w[0]).abs());
    }
    if m > 1 && min_gap < 1e-12 {
        return Err(GegenbauerError::NodesTooClose { gap: min_gap });
    }

    // rows: Chebyshev polynomials T_k at the nodes, built by recurrence
    let mut mat = nalgebra::DMatrix::<f64>::zeros(m, m);
    for (i, &z) in nodes.iter().enumerate() {
        let mut t0 = 1.0;
        let mut t1 = z;
        mat[(0, i)] = t0;
        if m > 1 {
            mat[(1, i)] = t1;
        }
        for k in 2..m {
            let t2 = 2.0 * z * t1 - t0;
            mat[(k, i)] = t2;
            t0 = t1;
            t1 = t2;
        }
    }
    let mut moments = nalgebra::DVector::<f64>::zeros(m);
    for k in (0..m).step_by(2) {
        moments[k] = 2.0 / (1.0 - (k as f64) * (k as f64));
    }
    moments[0] = 2.0;

    mat.lu()
        .solve(&moments)
        .map(|p| p.iter().copied().collect())
        .ok_or(GegenbauerError::SingularSystem)
}

/// A Gegenbauer-Gauss quadrature rule: nodes on `(-1, 1)`, their
/// shifted images on `(0, 1)` and the interpolatory weight vector.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    lambda: GegenbauerIndex,
    ng: usize,
    nodes: Vec<f64>,
    shifted_nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the rule with `ng + 1` points.
    pub fn new(ng: usize, lambda: GegenbauerIndex) -> Result<Self, GegenbauerError> {
        if ng > MAX_RULE_DEGREE {
            return Err(GegenbauerError::DegreeTooLarge(ng));
        }
        let nodes = gauss_nodes(ng, lambda)?;
        let shifted_nodes = shift_nodes(&nodes);
        let weights = integration_vector(&nodes)?;
        Ok(Self {
            lambda,
            ng,
            nodes,
            shifted_nodes,
            weights,
        })
    }

    pub fn lambda(&self) -> GegenbauerIndex {
        self.lambda
    }

    pub fn degree(&self) -> usize {
        self.ng
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn shifted_nodes(&self) -> &[f64] {
        &self.shifted_nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to samples taken at the unshifted nodes.
    pub fn integrate_samples(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.weights.len());
        self.weights
            .iter()
            .zip(samples)
            .map(|(w, s)| w * s)
            .sum()
    }
}

/// Leading coefficient `K_l` of the degree-`l` polynomial:
/// `2^(2l-1) Gamma(2 lambda + 1) Gamma(l + lambda) / (Gamma(lambda + 1) Gamma(l + 2 lambda))`.
pub fn leading_coeff(l: usize, lambda: GegenbauerIndex) -> f64 {
    leading_coeff_ln(l, lambda).value()
}

/// Overflow-safe signed-log form of [`leading_coeff`], for large `l`.
pub fn leading_coeff_ln(l: usize, lambda: GegenbauerIndex) -> crate::numeric::SignedLn {
    let lam = lambda.get();
    let l_f = l as f64;
    let num = ln_gamma_signed(2.0 * lam + 1.0).mul(ln_gamma_signed(l_f + lam));
    let den = ln_gamma_signed(lam + 1.0).mul(ln_gamma_signed(l_f + 2.0 * lam));
    crate::numeric::SignedLn {
        ln_abs: (2.0 * l_f - 1.0) * std::f64::consts::LN_2 + num.ln_abs - den.ln_abs,
        sign: num.sign * den.sign,
    }
}
