//! Exact representation zeta functions for congruence subgroups of type A2,
//! together with brute-force oracles over finite Lie rings, similarity-class
//! machinery for `gl3` over `Z/p^l`, and global Euler-product analytics.

pub mod error;
pub mod a2_formulas;
pub mod zeta_core;
pub mod finite_lie;
pub mod kirillov_census;
pub mod padic_integral;
pub mod similarity_shadows;
pub mod euler_global;

pub use error::{Error, Result};

use num_rational::BigRational;

/// Zeta rationals with exact arbitrary-precision coefficients.
pub type ZetaQ = zeta_core::ZetaRational<BigRational>;
pub type LaurentQ = zeta_core::LaurentPoly<BigRational>;
pub type QPolyQ = zeta_core::QPoly<BigRational>;
pub type GradedQ = zeta_core::GradedCoefficients<BigRational>;
/// Small exact rationals, enough for the hard-coded formulas.
pub type Zeta64 = zeta_core::ZetaRational<num_rational::Ratio<i64>>;
/// Floating-point coefficients (approximate cancellation).
pub type ZetaF64 = zeta_core::ZetaRational<f64>;
/// Exact integer Dirichlet coefficients.
pub type StreamU64 = euler_global::CoefficientStream<u64>;
/// Real Dirichlet coefficients, for families with rational local terms.
pub type StreamF64 = euler_global::CoefficientStream<f64>;
