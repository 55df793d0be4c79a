//! Small shared numeric helpers: signed log-magnitude values and
//! sign-aware log-gamma.

use statrs::function::gamma::ln_gamma;

/// A real number stored as `sign * exp(ln_abs)`.
///
/// Used where products of many large factors would overflow `f64`
/// (high-order cardinal derivatives, truncation-error kernels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLn {
    /// Natural log of the magnitude; `f64::NEG_INFINITY` encodes zero.
    pub ln_abs: f64,
    /// -1.0, 0.0 or 1.0.
    pub sign: f64,
}

impl SignedLn {
    pub const ZERO: SignedLn = SignedLn {
        ln_abs: f64::NEG_INFINITY,
        sign: 0.0,
    };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self {
                ln_abs: v.abs().ln(),
                sign: v.signum(),
            }
        }
    }

    /// Exponentiates back to a plain value; may overflow to infinity.
    pub fn value(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    pub fn mul(self, other: SignedLn) -> SignedLn {
        if self.sign == 0.0 || other.sign == 0.0 {
            return Self::ZERO;
        }
        SignedLn {
            ln_abs: self.ln_abs + other.ln_abs,
            sign: self.sign * other.sign,
        }
    }

    /// Raises to an integer power.
    pub fn powi(self, k: i32) -> SignedLn {
        if self.sign == 0.0 {
            return if k == 0 {
                SignedLn::from_value(1.0)
            } else {
                Self::ZERO
            };
        }
        SignedLn {
            ln_abs: self.ln_abs * f64::from(k),
            sign: if k % 2 == 0 { 1.0 } else { self.sign },
        }
    }

    pub fn log10_abs(self) -> f64 {
        self.ln_abs / std::f64::consts::LN_10
    }
}

/// `ln |Gamma(x)|` together with `sign(Gamma(x))`.
///
/// For `x` at a pole (non-positive integer) the magnitude is `+inf`
/// with sign 1, so a pole in a denominator collapses the whole
/// expression to zero.
pub fn ln_gamma_signed(x: f64) -> SignedLn {
    if x > 0.0 {
        return SignedLn {
            ln_abs: ln_gamma(x),
            sign: 1.0,
        };
    }
    if x == x.round() {
        return SignedLn {
            ln_abs: f64::INFINITY,
            sign: 1.0,
        };
    }
    // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1 - x)), x < 0
    let s = (std::f64::consts::PI * x).sin();
    SignedLn {
        ln_abs: std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x),
        sign: s.signum(),
    }
}

/// Convenience wrapper: `Gamma(x)` for positive `x` via log-gamma.
pub fn gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma(x).exp()
}
