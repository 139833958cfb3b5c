use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("modulus mismatch: 2^{left} vs 2^{right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("unsupported modulus 2^{0}")]
    UnsupportedModulus(u32),
    #[error("coordinate {index} = {value} is not reduced modulo 2^{modulus_log}")]
    CoordinateOutOfRange { index: usize, value: u64, modulus_log: u32 },
    #[error("cannot halve: coordinate {index} is odd")]
    OddCoordinate { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("system has no free variable; only the zero solution exists")]
    NoFreeVariable,
    #[error("system is not homogeneous")]
    NotHomogeneous,
    #[error("system is inconsistent")]
    Inconsistent,
    #[error("row has {got} columns, expected {expected}")]
    RowLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid instance parameters: {0}")]
    InvalidParameters(String),
    #[error("encoding length {l} cannot be injective on {bits} input bits")]
    EncodingTooShort { l: u32, bits: u32 },
    #[error("token {0} was already consumed")]
    TokenConsumed(u64),
    #[error("token {0} does not belong to this oracle")]
    UnknownToken(u64),
    #[error("token phase moduli differ: 2^{left} vs 2^{right}")]
    PhaseModulusMismatch { left: u32, right: u32 },
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error("empty selection")]
    EmptySelection,
    #[error("expected {expected} labels, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("equations have rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("parity equations are inconsistent")]
    Inconsistent,
    #[error("need at least {needed} equations, got {got}")]
    TooFewEquations { needed: usize, got: usize },
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("all {attempts} attempts failed")]
    AllAttemptsFailed { attempts: u32 },
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

impl From<Gf2Error> for SolveError {
    fn from(e: Gf2Error) -> Self {
        SolveError::Sieve(SieveError::Gf2(e))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidateError {
    #[error("promise violated: {0}")]
    PromiseViolation(String),
    #[error("histogram would need {cells} cells (limit {limit})")]
    TooManyCells { cells: u64, limit: u64 },
    #[error("too few trials: {trials} for {cells} cells")]
    TooFewTrials { trials: u64, cells: u64 },
    #[error("unsupported prime {0}")]
    UnsupportedPrime(u64),
    #[error("trial count must be positive")]
    NoTrials,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

#[derive(Debug, Error)]
pub enum InstanceFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("stored secret does not match the seeded instance")]
    SecretMismatch,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
