use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock truncation dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("operator dimensions do not match: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("input must be finite: {0}")]
    NonFiniteInput(&'static str),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("oscillator frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("invalid momentum profile: {0}")]
    InvalidProfile(String),

    #[error("Liouvillian null space is degenerate ({count} null vectors at relative tolerance {tol:.1e})")]
    DegenerateNullSpace { count: usize, tol: f64 },

    #[error("steady-state iteration failed to converge (residual {residual:.3e} after {iterations} iterations)")]
    SteadyStateNotConverged { residual: f64, iterations: usize },

    #[error("time step underflow at t = {t_reached:.6e} (dt = {dt:.3e})")]
    StepSizeUnderflow { t_reached: f64, dt: f64 },

    #[error("degenerate ground state: gap {0:.3e} below tolerance at theta = 0")]
    DegenerateGroundState(f64),

    #[error("phase-space grid does not cover the state: mass outside grid {0:.3e}")]
    GridCoverage(f64),

    #[error("diffusion coefficient is non-positive at p = {0}")]
    NonPositiveDiffusion(f64),

    #[error("rate matching impossible: translation-invariant dissipator has zero energy decay rate")]
    ZeroDecayRate,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear algebra failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
