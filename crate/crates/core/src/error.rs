use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation hits a pole at s = {s} (factor 1 - q^{a} t^{b})")]
    Pole { s: f64, a: i64, b: i64 },

    #[error("coefficient growth undefined: {0}")]
    UndefinedGrowth(String),

    #[error("not representable as a canonical zeta rational: {0}")]
    NotRepresentable(String),

    #[error("modulus polynomial is reducible modulo p")]
    ReducibleModulus,

    #[error("orbit size exponent {0} is odd")]
    OddOrbitExponent(u64),

    #[error("census normalization is inexact at k = {k}: {detail}")]
    Normalization { k: u64, detail: String },

    #[error("state space of {states:.3e} points exceeds the limit {limit:.3e} for strategy {strategy}")]
    Infeasible {
        states: f64,
        limit: f64,
        strategy: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("Dixon modulus search failed: {0}")]
    DixonModulus(String),

    #[error("group too large for character degree computation: {0}")]
    GroupTooLarge(String),

    #[error("{0}")]
    Inconsistent(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable reason string.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Pole { .. } => "pole",
            Error::UndefinedGrowth(_) => "undefined_growth",
            Error::NotRepresentable(_) => "not_representable",
            Error::ReducibleModulus => "reducible_modulus",
            Error::OddOrbitExponent(_) => "odd_orbit_exponent",
            Error::Normalization { .. } => "normalization_inconsistency",
            Error::Infeasible { .. } => "infeasible_size",
            Error::Unsupported(_) => "unsupported",
            Error::DixonModulus(_) => "dixon_modulus",
            Error::GroupTooLarge(_) => "group_too_large",
            Error::Inconsistent(_) => "inconsistent",
            Error::Json(_) => "json",
        }
    }
}
