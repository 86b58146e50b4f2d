use thiserror::Error;

/// Errors raised by the geometric routines and the file front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the domain of a geometric primitive.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),

    /// A hyperbolic triangle violating a strict triangle inequality.
    #[error("degenerate triangle{}: {detail}", face.map(|f| format!(" (face {f})")).unwrap_or_default())]
    DegenerateTriangle { face: Option<usize>, detail: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_) | Error::Domain(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
