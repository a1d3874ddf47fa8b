use thiserror::Error;

/// Errors raised by the bound and enumeration routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown lattice `{0}`")]
    UnknownLattice(String),
    #[error("unknown walk rule `{0}`")]
    UnknownRule(String),
    #[error("rule {rule} is not defined on the {lattice} lattice")]
    RuleNotOnLattice { rule: String, lattice: String },
    #[error("rule {0} is a direct predicate and has no vertex configuration table")]
    NoGeneratorTable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size cap exceeded: {what} = {requested} exceeds the cap {cap}")]
    SizeCap {
        what: String,
        requested: usize,
        cap: usize,
    },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("transfer matrix construction: {0}")]
    Basis(String),
    #[error("degenerate polynomial: {0}")]
    Degenerate(String),
    #[error("root finding did not converge: {0}")]
    RootFinding(String),
    #[error("no inverse root below the previous level bound {prev}")]
    NoRootBelow { prev: f64 },
    #[error("osculating check: {0}")]
    NotIncident(String),
}

pub type Result<T> = std::result::Result<T, Error>;
