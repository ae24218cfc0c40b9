use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: parse error: {msg}")]
    ObjParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: missing texture coordinate index")]
    MissingTexCoord { path: PathBuf, line: usize },

    #[error("{path}:{line}: uv coordinate ({u}, {v}) outside [0,1]^2")]
    UvOutOfRange {
        path: PathBuf,
        line: usize,
        u: f64,
        v: f64,
    },

    #[error("correspondence schema error: {0}")]
    CorrSchema(String),

    #[error("duplicate target index {0} in correspondence map")]
    DuplicateTarget(u32),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: u32,
        len: usize,
    },

    #[error("degenerate triangle (|area| = {area:e} < 1e-12)")]
    DegenerateTriangle { area: f64 },

    #[error("resolution mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    ResolutionMismatch {
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("image too small for {0}x{0} window")]
    ImageTooSmall(u32),

    #[error("bad cache file {path}: {msg}")]
    CacheFormat { path: PathBuf, msg: String },

    #[error("cache checksum mismatch in {path}")]
    ChecksumMismatch { path: PathBuf },

    #[error("stale cache {path}: fingerprint does not match current inputs")]
    StaleCache { path: PathBuf },

    #[error("png error on {path}: {msg}")]
    Png { path: PathBuf, msg: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
