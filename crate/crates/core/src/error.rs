//! Error type shared by every module, with the exit-code category used by the CLI.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category; the CLI maps each one to an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Malformed or inconsistent input data.
    InvalidInput,
    /// Input is well formed but a mathematical precondition does not hold.
    Precondition,
    /// An iterative method failed to converge or produced non-finite values.
    Numerical,
}

impl Category {
    /// Process exit code for this category.
    pub fn exit_code(self) -> i32 {
        match self {
            Category::InvalidInput => 2,
            Category::Precondition => 3,
            Category::Numerical => 4,
        }
    }
}

/// All failures raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A permutation row is not a bijection onto the alphabet.
    #[error("permutation rows are not bijections onto the alphabet: {0}")]
    NotBijection(String),
    /// The permutation splits: the first `k` letters of both rows coincide as sets.
    #[error("permutation is reducible: the first {0} letters of both rows form the same set")]
    Reducible(usize),
    /// The kernel of the translation matrix has the wrong parity.
    #[error("kernel dimension parity mismatch: d = {d}, kernel dimension = {kernel}")]
    ParityError { d: usize, kernel: usize },
    /// Lengths supplied to an interval exchange are invalid.
    #[error("invalid lengths: {0}")]
    InvalidLengths(String),
    /// The two competing lengths of a Rauzy step are equal.
    #[error("Rauzy step undefined: competing lengths {0} and {1} are equal")]
    Tie(f64, f64),
    /// Exact rational induction hit coinciding endpoints.
    #[error("exact induction met coinciding endpoints at step {0}")]
    KeaneViolation(usize),
    /// The declared moves do not return to the starting permutation.
    #[error("move sequence does not close up: ends at a different permutation")]
    LoopNotClosed,
    /// The loop string is empty or contains characters other than `t` and `b`.
    #[error("invalid loop string {0:?}: expected a nonempty word over {{t, b}}")]
    InvalidLoop(String),
    /// Some letter never wins along the loop.
    #[error("self-similarity matrix is not primitive")]
    NotPrimitive,
    /// Perron-Frobenius lengths contradict a declared move type.
    #[error("loop is not realizable: step {0} has the opposite type for the Perron-Frobenius lengths")]
    NotRealizable(usize),
    /// A slope vector has a nonzero component along the Perron-Frobenius direction.
    #[error("slope vector is not orthogonal to the length vector: <omega, lambda> = {0:e}")]
    NotOrthogonal(f64),
    /// The self-similarity matrix is not of hyperbolic periodic type.
    #[error("system is not hyperbolic: {0}")]
    NotHyperbolic(String),
    /// The operation is not available for slopes with an expanding component.
    #[error("operation unavailable for unstable slope vectors")]
    UnstableInput,
    /// The operation needs a slope vector fixed by the self-similarity matrix.
    #[error("slope vector is not invariant: |M omega - omega| = {0:e}")]
    NonInvariantOmega(f64),
    /// A graph algorithm received a graph that is not strongly connected.
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    /// Vector or matrix dimensions disagree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// An iterative method did not converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// A computed quantity is not finite.
    #[error("non-finite value in {0}")]
    NonFinite(String),
    /// Invalid user input not covered by a more specific variant.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Broad category of this error.
    pub fn category(&self) -> Category {
        match self {
            Error::NotBijection(_)
            | Error::Reducible(_)
            | Error::InvalidLengths(_)
            | Error::LoopNotClosed
            | Error::InvalidLoop(_)
            | Error::NotPrimitive
            | Error::NotRealizable(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidInput(_) => Category::InvalidInput,
            Error::NotOrthogonal(_)
            | Error::NotHyperbolic(_)
            | Error::UnstableInput
            | Error::NonInvariantOmega(_)
            | Error::NotStronglyConnected
            | Error::Tie(..)
            | Error::KeaneViolation(_) => Category::Precondition,
            Error::ParityError { .. } | Error::NoConvergence(_) | Error::NonFinite(_) => {
                Category::Numerical
            }
        }
    }
}
