use std::fmt;

use thiserror::Error;

use crate::calendar::YearMonth;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalendarError {
    #[error("malformed year-month {0:?}, expected YYYY-MM")]
    Malformed(String),
    #[error("month {0} out of range 1-12")]
    InvalidMonth(u32),
    #[error("year {0} out of range")]
    InvalidYear(i32),
    #[error("window start {start} is after end {end}")]
    InvertedWindow { start: YearMonth, end: YearMonth },
    #[error("window must contain at least one month")]
    EmptyWindow,
}

/// What went wrong while parsing pattern text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternErrorKind {
    UnknownMode(String),
    UnknownMonth(String),
    UnknownDay(String),
    Expected(&'static str),
    MissingOperator,
    InvalidNumber(String),
    PermWithDayScope,
    DivisionByZero,
    InvalidDayRange(u32, u32),
    TrailingInput(String),
}

impl fmt::Display for PatternErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternErrorKind::UnknownMode(m) => write!(f, "unknown mode {m:?}"),
            PatternErrorKind::UnknownMonth(m) => write!(f, "unknown month {m:?}"),
            PatternErrorKind::UnknownDay(d) => write!(f, "unknown day {d:?}"),
            PatternErrorKind::Expected(what) => write!(f, "expected {what}"),
            PatternErrorKind::MissingOperator => write!(f, "missing operator (one of + - * / ^)"),
            PatternErrorKind::InvalidNumber(n) => write!(f, "non-numeric value {n:?}"),
            PatternErrorKind::PermWithDayScope => write!(f, "perm cannot carry day scope"),
            PatternErrorKind::DivisionByZero => write!(f, "division by zero"),
            PatternErrorKind::InvalidDayRange(a, b) => write!(f, "invalid day range {a}-{b}"),
            PatternErrorKind::TrailingInput(t) => write!(f, "unexpected {t:?}"),
        }
    }
}

/// A pattern syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct PatternError {
    pub position: usize,
    pub kind: PatternErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("month {month} precedes window start {start}")]
    BeforeWindow { month: YearMonth, start: YearMonth },
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(f64),
    #[error("numeric overflow evaluating usage")]
    Overflow,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema version {0}, expected 1")]
    Schema(u64),
    #[error("unknown node kind {0:?}")]
    UnknownNodeKind(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("pattern error in {element}.{field}: {source}")]
    Pattern {
        element: String,
        field: String,
        #[source]
        source: PatternError,
    },
    #[error("invalid model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<crate::model::Violation>),
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema version {0}, expected 1")]
    Schema(u64),
    #[error("duplicate price entry {0}")]
    Duplicate(String),
    #[error("negative price for {0}")]
    NegativePrice(String),
    #[error("reserved entry {0} missing upfront_fee or term_months")]
    IncompleteReservation(String),
    #[error("scenario multiplier must be positive, got {0}")]
    NonPositiveMultiplier(String),
    #[error("price not found: {0}")]
    PriceNotFound(String),
    #[error("reserved term mismatch for {key}: binding wants {wanted} months, catalog offers {offered}")]
    TermMismatch {
        key: String,
        wanted: u32,
        offered: u32,
    },
    #[error("numeric overflow applying scenario")]
    Overflow,
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Price(#[from] CatalogError),
    #[error("usage evaluation failed for {element}.{field}: {source}")]
    Usage {
        element: String,
        field: String,
        #[source]
        source: EvalError,
    },
    #[error("numeric overflow computing cost of {0}")]
    Overflow(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum FinanceError {
    #[error("window not year-aligned: {0} months")]
    NotYearAligned(u32),
    #[error("report window starts {actual}, expected {expected}")]
    WindowStart {
        expected: YearMonth,
        actual: YearMonth,
    },
    #[error("discount rate must exceed -1, got {0}")]
    InvalidRate(String),
    #[error("need ≥ 2 options, got {0}")]
    TooFewOptions(usize),
    #[error("reference option {0:?} not in list")]
    UnknownReference(String),
    #[error("invalid on-premise plan: {0}")]
    InvalidPlan(String),
    #[error("numeric overflow in discounting")]
    Overflow,
}

#[derive(Debug, Error)]
pub enum AssessmentError {
    #[error("missing answer for question {0:?}")]
    MissingAnswer(String),
    #[error("unknown question id {0:?}")]
    UnknownQuestion(String),
    #[error("rating {value} for {stakeholder} outside -2..=2")]
    RatingOutOfRange { stakeholder: String, value: i8 },
    #[error("at least one stakeholder entry is required")]
    NoStakeholders,
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
}

pub(crate) fn syntax_parts(err: &serde_json::Error) -> (usize, usize, String) {
    (err.line(), err.column(), err.to_string())
}
