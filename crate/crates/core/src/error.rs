use thiserror::Error;

use crate::geometry::HPoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("did not converge after {iterations} iterations: {message}")]
    Convergence {
        message: String,
        iterations: usize,
        /// Best iterate seen before giving up, when one exists.
        best: Option<HPoint>,
    },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("no certificate: merit {merit:e} exceeds bound {bound:e}")]
    NoCertificate { merit: f64, bound: f64, best: HPoint },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
