use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular (|ad - bc| = {det:e})")]
    Singular { det: f64 },

    #[error("map is not loxodromic (trace^2 = {re} + {im}i)")]
    NotLoxodromic { re: f64, im: f64 },

    #[error("cross ratio is degenerate: numerator and denominator both vanish")]
    DegenerateCrossRatio,

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("genus must be at least 1")]
    InvalidGenus,

    #[error("closed disks {first} and {second} intersect (gap {gap:e})")]
    OverlappingCircles { first: usize, second: usize, gap: f64 },

    #[error("pair {0}: source and target circles coincide")]
    DegeneratePair(usize),

    #[error("invalid circle: {0}")]
    InvalidCircle(String),

    #[error("pair {index}: generator does not pair its circles (residual {residual:e})")]
    PairingMismatch { index: usize, residual: f64 },

    #[error("multiplier {index} has modulus {modulus} <= 1")]
    NotLoxodromicMultiplier { index: usize, modulus: f64 },

    #[error("generator {0}: fixed points coincide")]
    CoincidentFixedPoints(usize),

    #[error("group spec carries no circle pairings")]
    MissingPairings,

    #[error("group is not verified classical")]
    NotClassical,

    #[error("word uses letter {letter} but the group has genus {genus}")]
    LetterOutOfRange { letter: usize, genus: usize },

    #[error("cannot parse word {0:?}")]
    WordParse(String),

    #[error("exponent s = {s} does not exceed the truncation exponent {required}")]
    SummabilityMargin { s: f64, required: f64 },

    #[error("convergence gate failed: {0}")]
    ConvergenceGateFailed(String),

    #[error("term for word {word} (entry {row},{col}) has cross ratio on the branch cut")]
    BranchAmbiguity { row: usize, col: usize, word: String },

    #[error("derivative series shows no contraction (ratio {ratio})")]
    NoContraction { ratio: f64 },

    #[error("radii must satisfy 0 < r1 < r2 (got {r1}, {r2})")]
    BadRadii { r1: f64, r2: f64 },

    #[error("hexagon sides out of range (a = {a}, b = {b})")]
    BadSides { a: f64, b: f64 },

    #[error("arccosh argument {0} < 1")]
    DomainError(f64),

    #[error("lengths must be positive (alpha = {alpha}, beta = {beta})")]
    BadLengths { alpha: f64, beta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}
