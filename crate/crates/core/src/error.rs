use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or configuration.
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Reconstructed metric failed the Sylvester test.
    #[error("metric not positive definite at grid index {index} (x = {point:?}), leading minor {minor:e}")]
    NotPositive { index: usize, point: [f64; 3], minor: f64 },
    #[error("solver diverged: contraction ratio {ratio:.3} at iteration {iter}; reduce eps0")]
    Divergence { iter: usize, ratio: f64 },
    #[error("iterate left the ball: norm {norm:e} exceeds radius {radius:e} at iteration {iter}; reduce eps0")]
    BallViolation { iter: usize, norm: f64, radius: f64 },
    #[error("singular kernel argument")]
    Singular,
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
