use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("quadratic field mismatch: sqrt({left}) vs sqrt({right})")]
    FieldMismatch { left: String, right: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("lattice basis is degenerate: {0}")]
    DegenerateLattice(String),

    #[error("complex structure invalid: {0}")]
    InvalidComplexStructure(String),

    #[error("polynomial is not squarefree in y; reduce it with gcd(G, dG/dy) first")]
    NotSquarefree,

    #[error("relation system is inconsistent for coordinate pair ({0}, {1})")]
    InconsistentRelations(usize, usize),

    #[error("missing relation between coordinates {0} and {1}")]
    MissingRelation(usize, usize),

    #[error("degenerate reparametrization: w1 = 0")]
    DegenerateTranslation,

    #[error("no relation of degree <= {cap} found for coordinates ({i}, {j})")]
    DegreeCapExceeded { cap: usize, i: usize, j: usize },

    #[error("insufficient series terms: {rows} reliable equations for {unknowns} unknowns")]
    InsufficientTerms { rows: usize, unknowns: usize },

    #[error("point lies within the pole-exclusion radius of the lattice")]
    Pole,

    #[error("singular curve: 4a^3 + 27b^2 = 0")]
    SingularCurve,

    #[error("no usable prime: every prime was of bad reduction or divided the order")]
    AllPrimesBad,

    #[error("shard merge failed: {0}")]
    ShardMerge(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// True for errors caused by malformed user input rather than a failing computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse(_) | Error::Validation(_) | Error::FieldMismatch { .. } | Error::DimensionMismatch { .. }
            | Error::SingularCurve => true,
            _ => false,
        }
    }
}
