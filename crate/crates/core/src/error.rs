use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vectors are linearly dependent (singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty point set")]
    EmptySet,
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("point {index}: {found} neighbors inside the bandwidth, at least {required} required")]
    InsufficientNeighbors {
        index: usize,
        found: usize,
        required: usize,
    },
    #[error("point {index}: degenerate local covariance spectrum {eigenvalues:?}")]
    DegenerateSpectrum { index: usize, eigenvalues: Vec<f64> },
    #[error("no Voronoi sites given")]
    EmptyInput,
    #[error("cell dimension {0} exceeds the supported maximum of 6")]
    DimensionTooHigh(usize),
    #[error("parameters out of range: {0}")]
    ParamsOutOfRange(String),
    #[error("normal vector has a vanishing tangential component")]
    DegenerateNormal,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("patch complex has no patches")]
    EmptyComplex,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("point lies {distance:.3e} away from the manifold")]
    OutsideDomain { distance: f64 },
    #[error("invalid neighbor count k = {k} for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error("the nearest pair already violates the distortion tolerance")]
    NoAdmissibleScale,
    #[error("at least two radii are required, got {0}")]
    TooFewRadii(usize),
    #[error("at point {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, index: usize) -> Self {
        match self {
            // already carries the index
            e @ (Error::InsufficientNeighbors { .. }
            | Error::DegenerateSpectrum { .. }
            | Error::AtIndex { .. }) => e,
            e => Error::AtIndex {
                index,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, skipping `AtIndex` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIndex { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures caused by numerical degeneracy rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self.root(),
            Error::RankDeficient { .. }
                | Error::InsufficientNeighbors { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::DegenerateNormal
                | Error::NoAdmissibleScale
                | Error::TooFewRadii(_)
                | Error::EmptyComplex
                | Error::OutsideDomain { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self.root(), Error::Io { .. } | Error::Format { .. })
    }
}
