use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("quadrature did not converge (achieved error {achieved:.3e}, target {target:.3e})")]
    Quadrature { achieved: f64, target: f64 },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("missing table entry for word `{0}`")]
    MissingWord(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("candidate not verified: max violation {0:.3e}")]
    Unverified(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
