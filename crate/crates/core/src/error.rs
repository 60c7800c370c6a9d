use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series diverges: |E| = {modulus} is not < 1")]
    DivergentSeries { modulus: f64 },

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("epsilon must lie in [0, 1), got {0}")]
    EpsilonOutOfRange(f64),

    #[error("chain residue r = {r} must satisfy r < k = {k}")]
    ResidueOutOfRange { r: u32, k: u32 },

    #[error("no closed form for moment power l = {0} (only l = 0, 1, 2)")]
    UnsupportedMomentPower(u32),

    #[error("floating-point overflow at indices ({m}, {n})")]
    Overflow { m: u64, n: u64 },

    #[error("empty index range")]
    EmptyRange,

    #[error("Besov order s = {0} is outside the implemented branch (requires s > -3)")]
    BesovOrderOutOfBranch(f64),

    #[error(
        "epsilon^2 = {eps_sq:.6} is at or beyond the convergence radius {radius:.6} \
         for exponents (k, l) = ({k}, {l})"
    )]
    BeyondConvergenceRadius {
        k: u32,
        l: u32,
        eps_sq: f64,
        radius: f64,
    },

    #[error("index (r = {r}, n = {n}) lies outside the truncation window (n_max = {n_max})")]
    OutsideWindow { r: u32, n: u32, n_max: u32 },

    #[error("series did not reach a certified tail bound within {max_terms} terms")]
    TailNotCertified { max_terms: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
