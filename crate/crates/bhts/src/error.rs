use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("config file line {line}: {msg}")]
    ConfigFile { line: usize, msg: String },

    #[error("wav error in {path}: {msg}")]
    Wav { path: PathBuf, msg: String },

    #[error("signal error: {0}")]
    Signal(String),

    #[error("g2p: no rule matches {grapheme:?} at byte offset {offset}")]
    G2pNoRule { grapheme: String, offset: usize },

    #[error("g2p rule file line {line}: {msg}")]
    G2pRules { line: usize, msg: String },

    #[error("frontend error: {0}")]
    Frontend(String),

    #[error("label parse error at field {index} ({key}): {msg}")]
    LabelParse {
        index: usize,
        key: String,
        msg: String,
    },

    #[error("annotation line {line}: {msg}")]
    Annotation { line: usize, msg: String },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error("training error: {0}")]
    Train(String),

    #[error("synthesis error: {0}")]
    Synth(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data rather than bad invocation.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Config(_))
    }
}
