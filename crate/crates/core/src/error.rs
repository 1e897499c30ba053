use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PistonError {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("quadrature did not converge: {message}; refinement trace: {trace:?}")]
    Quadrature { message: String, trace: Vec<String> },

    #[error("root bracketing failed: {message}; scanned grid has {} points starting {:?}", grid.len(), grid.iter().take(8).collect::<Vec<_>>())]
    Bracket { message: String, grid: Vec<(f64, f64)> },

    #[error("rank-deficient Laurent basis; collinear columns: {columns:?}")]
    RankDeficient { columns: Vec<String> },

    #[error("unreliable fit (condition estimate {condition:.3e}): {detail}")]
    UnreliableFit { condition: f64, detail: String },

    #[error("invalid input: {0}")]
    Input(String),
}

impl PistonError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            PistonError::Geometry(_) => "geometry",
            PistonError::InvalidMode(_) => "invalid_mode",
            PistonError::Domain { .. } => "domain",
            PistonError::Profile(_) => "profile",
            PistonError::Resource(_) => "resource",
            PistonError::Quadrature { .. } => "quadrature",
            PistonError::Bracket { .. } => "bracket",
            PistonError::RankDeficient { .. } => "rank_deficient",
            PistonError::UnreliableFit { .. } => "unreliable_fit",
            PistonError::Input(_) => "input",
        }
    }
}

pub type Result<T> = std::result::Result<T, PistonError>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> PistonError {
    PistonError::Domain {
        function,
        detail: detail.into(),
    }
}
