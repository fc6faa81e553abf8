use thiserror::Error;

use crate::rv::VerificationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // series arithmetic
    #[error("leading term is zero or not determined at the given precision")]
    ZeroOrUncertainLeadingTerm,
    #[error("value is undecidable at the available precision")]
    UndecidableAtPrecision,
    #[error("element is not in the valuation ring")]
    NotInValuationRing,
    #[error("element is not positive")]
    NotPositive,
    #[error("leading coefficient has no rational {0}-th root")]
    NoRationalRoot(u32),
    #[error("requested precision cannot be reached by finitely many terms")]
    UnreachablePrecision,
    #[error("value group ranks differ ({0} vs {1})")]
    RankMismatch(usize, usize),
    #[error("malformed series text: {0}")]
    SeriesSyntax(String),

    // RV_lambda
    #[error("insufficient precision to determine the requested data")]
    InsufficientPrecision,
    #[error("the zero element of RV has no inverse")]
    ZeroInverse,
    #[error("RV elements have different depths")]
    LambdaMismatch,
    #[error("lambda must be non-negative")]
    NegativeLambda,
    #[error("ball is a singleton; nothing to sample")]
    SingletonBall,

    // Weierstrass engine
    #[error("Gauss norm is not one (additive norm {0})")]
    NormNotOne(String),
    #[error("series is not regular in the chosen variable within the degree bound")]
    NotRegular,
    #[error("divisor does not have unit Gauss norm")]
    NonUnitNorm,
    #[error("series is not a unit")]
    NotAUnit,
    #[error("variable index {0} out of range")]
    BadVariable(usize),

    // analytic solvers
    #[error("function name `{0}` is already registered")]
    DuplicateName(String),
    #[error("malformed function rule: {0}")]
    MalformedRule(String),
    #[error("argument is not infinitesimal")]
    NotInfinitesimal,
    #[error("input precision is below the requested target")]
    PrecisionStall,
    #[error("series is not regular of degree one in the solved variable")]
    NotRegularDegreeOne,

    // preparation
    #[error("sign could not be decided within the refinement limit")]
    UndecidedSign,
    #[error("preparation verification keeps failing at maximal depth")]
    DepthExhausted,
    #[error("sampled point left the annulus")]
    DomainViolation,
    #[error("polynomial must have degree at least one")]
    ConstantPolynomial,
    #[error("unsupported input: {0}")]
    Unsupported(String),

    // terms and CLI
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("verification budget exhausted")]
    BudgetExhausted(Box<VerificationReport>),
}
