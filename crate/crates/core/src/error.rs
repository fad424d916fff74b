use thiserror::Error;

/// Which of the three commuting-square conditions of a 2-morphism failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareCondition {
    /// `f∘p = q` along the top row.
    TopPushforward,
    /// `f′∘p′ = q′` along the bottom row.
    BottomPushforward,
    /// `ν∘f = f′∘μ`.
    Naturality,
}

impl std::fmt::Display for SquareCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SquareCondition::TopPushforward => "f∘p = q",
            SquareCondition::BottomPushforward => "f′∘p′ = q′",
            SquareCondition::Naturality => "ν∘f = f′∘μ",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("finite set must be non-empty")]
    EmptySet,

    #[error("duplicate label `{0}` in finite set")]
    DuplicateLabel(String),

    #[error("invalid label `{label}`: {reason}")]
    InvalidLabel { label: String, reason: &'static str },

    #[error("space mismatch in {context}")]
    SpaceMismatch { context: &'static str },

    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("channel is not pure: row {row} has no entry within tolerance of 1")]
    NotPure { row: String },

    #[error("channel is not a stochastic section (max violation {max_violation:e})")]
    NotASection { max_violation: f64 },

    #[error("function is not surjective: `{element}` has an empty fiber")]
    NotSurjective { element: String },

    #[error("prior mismatch between composed morphisms (max violation {max_violation:e})")]
    PriorMismatch { max_violation: f64 },

    #[error("square does not commute: {condition} violated by {max_violation:e}")]
    SquareDoesNotCommute {
        condition: SquareCondition,
        max_violation: f64,
    },

    #[error("glue mismatch on {what} (max violation {max_violation:e})")]
    GlueMismatch { what: &'static str, max_violation: f64 },

    #[error("convex combination over an empty family")]
    EmptyFamily,

    #[error("size error: {0}")]
    SizeError(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("tolerance must be finite and non-negative, got {0}")]
    InvalidTolerance(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
