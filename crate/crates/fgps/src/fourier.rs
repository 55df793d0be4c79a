//! Periodic trigonometric cardinal functions on equispaced grids, their
//! derivatives of any order, and the matching Fourier interpolant.
//!
//! The cardinal function attached to node `j` is
//!
//! ```text
//! F_j(t) = (1/N) sum'_{|k| <= N/2} cos(w_k (t - t_j)),   w_k = 2 pi k / T,
//! ```
//!
//! where the primed sum gives the `k = +-N/2` terms weight 1/2 each
//! (equivalent, for this even real kernel, to dropping one of the two
//! edge terms). `F_j(t_k) = delta_jk`, the family sums to one
//! everywhere, and every `F_j` is a shift of `F_0`.

use std::fmt;

use crate::numeric::SignedLn;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// Grid size must be even and positive; the mode range `|k| <= N/2`
    /// presumes a symmetric edge.
    OddSize(usize),
    NonPositivePeriod(f64),
    /// Sample vector length does not match the grid.
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OddSize(n) => write!(f, "grid size {n} must be even and positive"),
            Self::NonPositivePeriod(t) => write!(f, "period {t} must be positive"),
            Self::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} samples, got {got}")
            }
        }
    }
}

impl std::error::Error for GridError {}

/// An equispaced periodic grid: `N` nodes `t_j = T j / N` on `[0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierGrid {
    period: f64,
    n: usize,
    nodes: Vec<f64>,
}

impl FourierGrid {
    pub fn new(period: f64, n: usize) -> Result<Self, GridError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(GridError::NonPositivePeriod(period));
        }
        if n == 0 || n % 2 != 0 {
            return Err(GridError::OddSize(n));
        }
        let nodes = (0..n).map(|j| period * j as f64 / n as f64).collect();
        Ok(Self { period, n, nodes })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// Arguments far outside the base period lose accuracy to angle
    /// reduction; fold them back first. Trig sums are globally defined,
    /// so moderate excursions are left untouched.
    fn fold(&self, dt: f64) -> f64 {
        if dt.abs() > 1e6 * self.period {
            dt.rem_euclid(self.period)
        } else {
            dt
        }
    }

    /// Shared translation kernel: `F_0(dt)`.
    fn kernel(&self, dt: f64) -> f64 {
        let dt = self.fold(dt);
        let n = self.n as f64;
        let omega = 2.0 * std::f64::consts::PI / self.period;
        let half = self.n / 2;
        let mut sum = 0.0;
        for k in 1..=half {
            let w = if k == half { 0.5 } else { 1.0 };
            sum += w * (omega * k as f64 * dt).cos();
        }
        (1.0 + 2.0 * sum) / n
    }

    /// `F_j(t)`: one everywhere on node `j`, zero on the others.
    pub fn cardinal(&self, j: usize, t: f64) -> f64 {
        self.kernel(t - self.nodes[j])
    }

    /// `m`-th derivative of `F_j` at `t`:
    ///
    /// ```text
    /// (-1)^floor((m+1)/2) (1/N) (2 pi / T)^m
    ///     sum'_{|k| <= N/2, k != 0} k^m sin(w_k (t - t_j) + [m even] pi/2)
    /// ```
    ///
    /// Use [`FourierGrid::cardinal_deriv_ln`] when `(2 pi / T)^m` or
    /// `k^m` would overflow.
    pub fn cardinal_deriv(&self, j: usize, m: u32, t: f64) -> f64 {
        assert!(m >= 1, "derivative order must be positive");
        let dt = self.fold(t - self.nodes[j]);
        let omega = 2.0 * std::f64::consts::PI / self.period;
        let half = self.n / 2;
        let sign = if ((m + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let even = m % 2 == 0;
        let mut sum = 0.0;
        for k in 1..=half {
            let w = if k == half { 0.5 } else { 1.0 };
            let phase = omega * k as f64 * dt;
            // the +-k pair collapses to 2 k^m cos for even m, 2 k^m sin for odd m
            let tr = if even { phase.cos() } else { phase.sin() };
            sum += w * (k as f64).powi(m as i32) * tr;
        }
        sign * (2.0 / self.n as f64) * omega.powi(m as i32) * sum
    }

    /// Overflow-safe form of [`FourierGrid::cardinal_deriv`] for large
    /// `m`: the dominant `(N/2)^m (2 pi / T)^m` growth is kept in log
    /// space and each mode contributes through `(2k/N)^m <= 1`.
    pub fn cardinal_deriv_ln(&self, j: usize, m: u32, t: f64) -> SignedLn {
        assert!(m >= 1, "derivative order must be positive");
        let dt = self.fold(t - self.nodes[j]);
        let omega = 2.0 * std::f64::consts::PI / self.period;
        let half = self.n / 2;
        let sign = if ((m + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let even = m % 2 == 0;
        let mut sum = 0.0;
        for k in 1..=half {
            let w = if k == half { 0.5 } else { 1.0 };
            let phase = omega * k as f64 * dt;
            let tr = if even { phase.cos() } else { phase.sin() };
            // (k / half)^m, exact 1 at the edge mode
            let damp = ((k as f64 / half as f64).ln() * f64::from(m)).exp();
            sum += w * damp * tr;
        }
        if sum == 0.0 {
            return SignedLn::ZERO;
        }
        let ln_abs = (2.0 / self.n as f64).ln()
            + f64::from(m) * (omega.ln() + (half as f64).ln())
            + sum.abs().ln();
        SignedLn {
            ln_abs,
            sign: sign * sum.signum(),
        }
    }

    /// Fourier interpolant through the samples, evaluated at `t`.
    pub fn interpolate(&self, samples: &[f64], t: f64) -> Result<f64, GridError> {
        if samples.len() != self.n {
            return Err(GridError::LengthMismatch {
                expected: self.n,
                got: samples.len(),
            });
        }
        Ok(samples
            .iter()
            .enumerate()
            .map(|(j, f)| f * self.cardinal(j, t))
            .sum())
    }
}
