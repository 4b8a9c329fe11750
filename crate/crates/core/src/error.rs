use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty knowledge set")]
    EmptyKnowledgeSet,
    #[error("context lies in small dimensions")]
    DegenerateProjection,
    #[error("separating cut search exhausted")]
    CutSearchExhausted,
    #[error("subset enumeration exceeded max_subsets = {0}")]
    SubsetCapExceeded(u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("round {round}: {source}")]
    AtRound { round: usize, source: Box<Error> },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn at_round(self, round: usize) -> Self {
        match self {
            e @ Error::AtRound { .. } => e,
            e => Error::AtRound { round, source: Box::new(e) },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
