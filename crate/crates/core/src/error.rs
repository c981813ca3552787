use thiserror::Error;

/// Everything that can go wrong while evaluating theta functions or
/// checking identities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation budget exceeded: {needed} terms needed for |q| = {q_modulus}, budget is {max_terms}")]
    TruncationBudgetExceeded {
        q_modulus: f64,
        max_terms: usize,
        /// Lower bound on the number of terms the target would need; `usize::MAX`
        /// when it cannot be estimated.
        needed: usize,
    },

    #[error("tail bound unavailable: |a|·|q|^n = {0} is not below 1/2")]
    BoundUnavailable(f64),

    #[error("theta_multi needs at least one argument")]
    EmptyArgumentList,

    #[error("degenerate denominator: argument {argument} is within {distance:e} of the theta zero set")]
    DegenerateDenominator { argument: String, distance: f64 },

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),

    #[error("no admissible parameters for `{identity}` after {attempts} attempts (trial {trial_index})")]
    AdmissibilityExhausted {
        identity: String,
        trial_index: u64,
        attempts: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
