use thiserror::Error;

/// Location-tagged failure from one of the text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Why a claimed equality simulation was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationFailure {
    #[error("terminal variable {variable} has degree {degree}, above the limit {limit}")]
    TerminalDegree {
        variable: usize,
        degree: usize,
        limit: usize,
    },
    #[error("variable {variable} has degree {degree}, above the bound {limit}")]
    AuxiliaryDegree {
        variable: usize,
        degree: usize,
        limit: usize,
    },
    #[error("a satisfying assignment gives the terminals the mixed pattern {pattern}")]
    MixedPattern { pattern: String },
    #[error("{zeros} solutions with all terminals 0 but {ones} with all terminals 1")]
    Unbalanced { zeros: String, ones: String },
    #[error("no satisfying assignment puts the terminals in agreement")]
    NoSolutions,
    #[error("{0} variables exceed the exhaustive verification limit of 25")]
    TooLarge(usize),
    #[error("terminal list is invalid: {0}")]
    BadTerminals(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity {0} exceeds the cap of {max}", max = crate::relation::MAX_ARITY)]
    ArityTooLarge(usize),
    #[error("tuple of arity {found} given where arity {expected} is required")]
    ArityMismatch { expected: usize, found: usize },
    #[error("column {column} is out of range for arity {arity}")]
    ColumnOutOfRange { column: usize, arity: usize },
    #[error("{0:?} is not a permutation of the columns")]
    NotAPermutation(Vec<usize>),
    #[error("invalid tuple `{0}`: expected a string of 0/1 characters")]
    InvalidTuple(String),
    #[error("operation needs a relation of arity at least 1")]
    NullaryRelation,
    #[error("k = {0} is outside the supported range 2..=16")]
    InvalidK(usize),
    #[error("the empty relation has no affine hull")]
    EmptyRelation,
    #[error("relation name `{0}` is defined twice")]
    DuplicateName(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("constraint on `{name}` has {found} arguments but the relation has arity {expected}")]
    ScopeArity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("variable index {index} is out of range for {count} variables")]
    VariableOutOfRange { index: usize, count: usize },
    #[error("hyperedges must be nonempty")]
    EmptyHyperedge,
    #[error("ppp search needs {free} free columns, above the budget of {budget}")]
    SearchBudget { free: usize, budget: usize },
    #[error("{found} variables exceed the counting budget of {budget}")]
    CountBudget { found: usize, budget: usize },
    #[error("simulation check failed: {0}")]
    Simulation(#[from] SimulationFailure),
    #[error("derivation does not produce a usable target: {0}")]
    UnusableDerivation(String),
    #[error("no equality gadget found: {0}")]
    SynthesisFailed(String),
    #[error("degree bound d = {0} is too small (need d >= 3)")]
    DegreeTooSmall(usize),
    #[error("language mixes OR-conj and NAND-conj relations")]
    MixedFlavors,
    #[error("relation `{0}` is neither OR-conj nor NAND-conj")]
    NoNormalizedFormula(String),
    #[error("hypergraph width {width} exceeds the relation width {limit}")]
    WidthMismatch { width: usize, limit: usize },
    #[error("no count-uniform derivation of NAND_{0} found")]
    NoUniformDerivation(usize),
    #[error("reduction bound violated: {0}")]
    BoundViolated(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
