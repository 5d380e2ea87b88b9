use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("p ≡ 1 mod 4 required, got p = {0}")]
    WrongResidue(u64),

    #[error("the zero quaternion has no adjoint rotation")]
    ZeroQuaternion,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("word is not reduced: letter {position} cancels its predecessor")]
    NonReducedWord { position: usize },

    #[error("letter {letter} out of range for {generators} generators")]
    LetterOutOfRange { letter: usize, generators: usize },

    #[error("enumeration needs {needed} words but the budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("matrix has determinant {0}, expected ±1")]
    InvalidDeterminant(String),

    #[error("the zero character is not in the mean-zero subspace")]
    ZeroLatticePoint,

    #[error("lattice coordinates overflow 64-bit integers")]
    LatticeOverflow,

    #[error("internal consistency check `{what}` failed: {lhs} vs {rhs}")]
    Inconsistent { what: &'static str, lhs: f64, rhs: f64 },

    #[error("Koopman block of degree {degree} is not self-adjoint for its Gram matrix")]
    NotSelfAdjoint { degree: usize },

    #[error("symmetrized block has asymmetry residual {residual:e}")]
    NumericalAsymmetry { residual: f64 },

    #[error("no convergence after {iterations} iterations (last estimate {last})")]
    NoConvergence { iterations: usize, last: f64 },
}
