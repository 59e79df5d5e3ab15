use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integral did not converge within {max_subdivisions} subdivisions (last envelope {envelope:.3e})")]
    NonConvergence { max_subdivisions: usize, envelope: f64 },
    #[error("no root found on [{lo:.3e}, {hi:.3e}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("singular channel: {0}")]
    SingularChannel(String),
    #[error("projected gradient stopped after {iterations} iterations (projected-gradient norm {residual:.3e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<num_complex::Complex64>,
    },
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
