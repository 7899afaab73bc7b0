use std::path::PathBuf;

/// Errors raised by codebook handling, detection and the simulation harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inconsistent support in layer {layer}: resource {resource} is nonzero in some codewords but outside the layer's {expected}-position support")]
    InconsistentSupport {
        layer: usize,
        resource: usize,
        expected: usize,
    },
    #[error("irregular factor graph: resource degrees {degrees:?} (resources {offending:?} differ from resource 0)")]
    IrregularGraph { degrees: Vec<usize>, offending: Vec<usize> },
    #[error("codebook is not separable: layer {layer} is not a product of real and imaginary parts")]
    NotSeparable { layer: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("transform length {0} is not a power of two >= 2")]
    TransformLength(usize),
    #[error("component {value} lies outside the discretization grid [-{wid}, {wid}]")]
    OutsideGrid { value: f64, wid: f64 },
    #[error("transform length {len} cannot hold a linear convolution of support {support}")]
    PaddingTooShort { len: usize, support: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
