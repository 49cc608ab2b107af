use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown generator `{name}` at position {position}")]
    UnknownGenerator { name: String, position: usize },

    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),

    #[error("generator `{name}` has degree {degree}; degrees must be at least 1")]
    InvalidDegree { name: String, degree: i64 },

    #[error("element does not belong to model `{0}`")]
    ModelMismatch(String),

    #[error("differential of `{generator}` must have degree {expected}, found {found}")]
    DegreeMismatch {
        generator: String,
        expected: u32,
        found: String,
    },

    #[error("element is not a cocycle: d(a) = {differential}")]
    NotACocycle { differential: String },

    #[error("element is not homogeneous")]
    NotHomogeneous,

    #[error("unbounded exact-sequence problem: arrow {from} -> {to} joins two unknown slots")]
    Unbounded { from: String, to: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search budget exhausted after {0} candidates")]
    Budget(usize),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Parse(#[from] crate::dsl::ParseError),
}
