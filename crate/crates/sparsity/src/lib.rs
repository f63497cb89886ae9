//! Exact computation, witnessing and cross-checking of graph sparsity
//! parameters: weak colouring numbers, centered colourings, treedepth
//! variants, 2-treedepth and fractional fragility rates.

pub mod cli;
pub mod decomp;
pub mod families;
pub mod graph;
pub mod oracle;
pub mod witness;

pub use graph::{Graph, MinorModel, SubgraphFamily};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("guard exceeded: {what} is {actual}, limit {limit}")]
    Guard {
        what: String,
        limit: usize,
        actual: usize,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("forbidden model found")]
    ModelFound(MinorModel),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Multiplier applied to every default size guard (SPARSITY_GUARD_SCALE).
pub fn guard_scale() -> f64 {
    std::env::var("SPARSITY_GUARD_SCALE")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|x| x.is_finite() && *x > 0.0)
        .unwrap_or(1.0)
}

pub fn scaled(limit: usize) -> usize {
    ((limit as f64) * guard_scale()).floor() as usize
}

pub(crate) fn check_guard(what: &str, limit: usize, actual: usize) -> Result<()> {
    if actual > limit {
        Err(Error::Guard {
            what: what.to_string(),
            limit,
            actual,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
