use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },

    #[error("gradient mode {mode} is not available for this field")]
    ModeUnavailable { mode: &'static str },

    #[error("rank deficiency in {what}: rank {rank}, required {required}")]
    RankDeficient { what: &'static str, rank: usize, required: usize },

    #[error("singular bordered Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("constraint {index} has no velocity dependence (holonomic); index reduction is not supported")]
    HolonomicConstraint { index: usize },

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("system has no linear constraint one-forms")]
    MissingConstraintForms,

    #[error("initial constraint violated: φ = {}", format_values(.residual))]
    InitialConstraintViolated { residual: Vec<f64> },

    #[error("chart violates its constraint (residual {residual:e})")]
    ChartConstraintViolated { residual: f64 },

    #[error("solver failed at t = {time}: {source}")]
    SolverFailure { time: f64, source: Box<Error> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("system definition: {0}")]
    Definition(String),
}

fn format_values(values: &[f64]) -> String {
    match values {
        [single] => format!("{single}"),
        many => format!("[{}]", many.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")),
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_constraint_message() {
        let e = Error::InitialConstraintViolated { residual: vec![-1.0] };
        assert_eq!(e.to_string(), "initial constraint violated: φ = -1");
        let e = Error::InitialConstraintViolated { residual: vec![0.5, 2.0] };
        assert_eq!(e.to_string(), "initial constraint violated: φ = [0.5, 2]");
    }
}
