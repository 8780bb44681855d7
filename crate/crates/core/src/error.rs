use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    /// Two points that must define a direction coincide.
    #[error("degenerate direction: `{0}` coincides with the local minimum")]
    DegenerateDirection(&'static str),

    #[error("detour guidance is not differentiable at {0}")]
    Undifferentiable(&'static str),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("planner `{variant}` requires {missing}")]
    MissingVariantParams {
        variant: &'static str,
        missing: &'static str,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}
