use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid letter {0:?}: words are over the alphabet abcd")]
    InvalidLetter(char),

    #[error("invalid vertex {0:?}: vertices are strings over 01, '-' for the root")]
    InvalidVertex(String),

    #[error("depth {got} is too small, at least {required} is needed")]
    DepthTooSmall { required: usize, got: usize },

    #[error("level {got} outside the supported range {min}..={max}")]
    LevelOutOfRange { got: usize, min: usize, max: usize },

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("symbol {0:?} is defined more than once")]
    DuplicateSymbol(String),

    #[error("vertex {0} is a prefix of vertex {1}")]
    PrefixConflict(String, String),

    #[error("word {0:?} is not a product of conjugates of abab or baba")]
    NotKShape(String),

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
