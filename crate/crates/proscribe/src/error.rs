//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated an operation's precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The branch-and-bound node budget was exhausted before the search
    /// finished, where an exact answer was required.
    #[error("node budget exhausted after {explored} nodes (budget {budget}); best bound so far {best}")]
    BudgetExceeded {
        explored: u64,
        budget: u64,
        /// Best solution size found before running out of budget.
        best: u64,
    },

    /// The exhaustive oracle was asked to enumerate more vertices than its cap.
    #[error("exhaustive oracle supports at most {cap} vertices, got {vertices}")]
    OracleCapExceeded { vertices: usize, cap: usize },

    /// Parallel list lengths passed to a bound evaluation disagree.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// A bound evaluation needed a table record that is not present.
    #[error("missing table record for {0}")]
    MissingRecord(String),

    /// A freshly computed value disagrees with a stored record. This means a
    /// solver bug or a corrupted table and is always fatal.
    #[error("table conflict for {quantity}: stored {stored}, computed {computed}")]
    RecordConflict {
        quantity: String,
        stored: u64,
        computed: u64,
    },

    /// A table file failed structural validation.
    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// A grading operation's structural precondition failed.
    #[error("grading precondition violated: {0}")]
    GradingPrecondition(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("table parse error: {0}")]
    Json(#[from] serde_json::Error),
}
