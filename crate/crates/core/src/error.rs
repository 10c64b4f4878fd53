use thiserror::Error;

/// Error taxonomy for the whole pipeline. Every variant carries a
/// human-readable message; the variant decides the category tag that ends up
/// in CLI output and exit diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible matrix/vector/image dimensions.
    #[error("shape error: {0}")]
    Shape(String),
    /// Input violates a mathematical precondition (asymmetry, negative
    /// variance, kind mismatch, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A file exists but its contents are not what the format requires.
    #[error("format error: {0}")]
    Format(String),
    /// The on-disk dataset layout is broken (gaps, missing directories).
    #[error("layout error: {0}")]
    Layout(String),
    /// Two batches that must share origins do not.
    #[error("alignment error: {0}")]
    Alignment(String),
    /// An iterative solver hit its iteration cap before reaching tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),
    /// Training produced a non-finite objective.
    #[error("divergence error: {0}")]
    Divergence(String),
    /// Bad run configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
    pub fn layout(msg: impl Into<String>) -> Self {
        Error::Layout(msg.into())
    }
    pub fn alignment(msg: impl Into<String>) -> Self {
        Error::Alignment(msg.into())
    }
    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }
    pub fn divergence(msg: impl Into<String>) -> Self {
        Error::Divergence(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
