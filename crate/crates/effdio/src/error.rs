use thiserror::Error;

/// Errors shared across the crate. Domain violations carry enough context to
/// diagnose which precondition failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("limit must be at least 1")]
    ZeroSieveLimit,
    #[error("sieve limit {limit} exceeds supported maximum {max}")]
    SieveLimitTooLarge { limit: u64, max: u64 },
    #[error("q = {q} exceeds totient table limit {limit}")]
    SieveLimitExceeded { q: u64, limit: u64 },
    #[error("zeta argument s = {s} too close to the pole at 1 (require s > {margin})")]
    ZetaNearPole { s: f64, margin: f64 },
    #[error(
        "zeta tolerance {tol} at s = {s} needs {required} terms (cap {cap}); relax the tolerance"
    )]
    ZetaTolUnreachable {
        s: f64,
        tol: f64,
        required: f64,
        cap: u64,
    },
    #[error("psi spec syntax error at byte {pos}: {msg}")]
    PsiSyntax { pos: usize, msg: String },
    #[error("psi value out of the family's admissible range: {msg}")]
    PsiRange { msg: String },
    #[error("psi table error: {0}")]
    PsiTable(String),
    #[error("psi table covers q <= {limit} but q = {q} was requested")]
    PsiTableExhausted { q: u64, limit: u64 },
    #[error("{theorem} validation failed: {msg}")]
    PsiValidation { theorem: &'static str, msg: String },
    #[error("aggregate {name} does not diverge: {msg}")]
    NonDivergent { name: &'static str, msg: String },
    #[error("sequence exhausted: needed term {needed}, generator stops at {have}")]
    SequenceExhausted { needed: u64, have: u64 },
    #[error("growth condition log q_n > C n^(1/B) fails at n = {n} (q_n = {q})")]
    GrowthViolation { n: u64, q: u64 },
    #[error("lacunarity q_(n+1)/q_n >= K0 fails at n = {n}")]
    LacunarityViolation { n: u64 },
    #[error("sequence is not declared {property}")]
    SequenceMissingDeclaration { property: &'static str },
    #[error("mixed exact-rational and fixed-point operands are not supported")]
    MixedOperands,
    #[error("rational denominator product {den} exceeds 2^63; use smaller denominators")]
    RationalOverflow { den: u128 },
    #[error("invalid rational: {0}")]
    InvalidRational(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("search exceeded its enumeration cap of {cap}: {what}")]
    SearchCapExceeded { what: &'static str, cap: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv parse error on line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
