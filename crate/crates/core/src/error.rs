use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated raster: expected {expected} bytes, found {found}")]
    TruncatedRaster { expected: usize, found: usize },
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("image is uniform; no two intensity classes exist")]
    UniformImage,
    #[error("image contains no ink")]
    EmptyImage,
    #[error("not enough envelope points to estimate skew")]
    InsufficientInk,
    #[error("baseline row {baseline} lies outside rows {top}..={bottom}")]
    InvalidBaseline { baseline: usize, top: usize, bottom: usize },
    #[error("region {0:?} is outside the {1}x{2} image")]
    RegionOutOfBounds(crate::raster::Rect, usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("page geometry overflow: {0}")]
    GeometryOverflow(String),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}
