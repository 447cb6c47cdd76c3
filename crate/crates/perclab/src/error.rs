use thiserror::Error;

/// Errors shared by all perclab modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice config: {0}")]
    InvalidConfig(String),

    #[error("p = {p} is not subcritical: requires p < {bound} for d = {d}")]
    Supercritical { p: f64, bound: f64, d: usize },

    #[error("enumeration cap exceeded: region has {edges} edges, cap is {cap}")]
    EnumerationCap { edges: usize, cap: usize },

    #[error("region has {sites} sites, exact evaluation supports at most {cap}")]
    SiteCap { sites: usize, cap: usize },

    #[error("point {0:?} lies outside the configured region after rounding")]
    TargetOutsideBox(Vec<f64>),

    #[error("empty set passed to a metric computation")]
    EmptySet,

    #[error("invalid polygonal set: {0}")]
    InvalidPolygonalSet(String),

    #[error("invalid gauge: {0}")]
    InvalidGauge(String),

    #[error("rate fit failed: {0}")]
    FitFailed(String),

    #[error("steiner solver: {0}")]
    Steiner(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("harness: {0}")]
    Harness(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
