#![forbid(unsafe_code)]

//! Spectral fractional calculus for periodic functions and a direct
//! transcription route for periodic fractional optimal control.
//!
//! The pipeline: trigonometric cardinal interpolation on an equispaced
//! grid ([`fourier`]), shifted Gegenbauer-Gauss quadrature of the
//! reduced fractional-derivative integral ([`gegenbauer`],
//! [`fracderiv`]), truncation-error diagnostics ([`errorbound`]), and a
//! collocation transcription of periodic optimal control problems
//! ([`ocp`]) solved by an augmented-Lagrangian method ([`nlp`]).
//! Problem data can be declared through a small expression language
//! ([`exprdsl`]).
//!
//! Data-parallel loops (matrix assembly, finite-difference gradients)
//! run on rayon when the default `parallel` feature is enabled and fall
//! back to sequential iteration without it; results are bitwise
//! identical either way.

pub mod errorbound;
pub mod exprdsl;
pub mod fourier;
pub mod fracderiv;
pub mod gegenbauer;
pub mod nlp;
pub mod numeric;
pub mod ocp;

pub use fourier::FourierGrid;
pub use fracderiv::{FgpsFim, FractionalOrder};
pub use gegenbauer::{GegenbauerIndex, QuadratureRule};

/// Caps the number of worker threads used by parallel loops. A no-op
/// without the `parallel` feature or if a pool was already installed.
pub fn limit_threads(jobs: usize) {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
    }
}
