use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh has no vertices or no faces")]
    EmptyMesh,
    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("mesh has zero total surface area")]
    ZeroArea,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("view renders no pixels of the model")]
    EmptyView,
    #[error("polygon {polygon} is visible but has zero surface area")]
    MeasureUndefined { polygon: usize },
    #[error("polygon {polygon} has p(z|v) > 0 but prior p(z) = 0")]
    InconsistentPrior { polygon: usize },
    #[error("label set is empty")]
    EmptyLabelSet,
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
