use thiserror::Error;

use crate::data::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no visits")]
    NoVisits,

    #[error("mask targets missing cell (visit {visit}, event {event}, feature {feature})")]
    MaskTargetsMissingCell {
        visit: usize,
        event: usize,
        feature: usize,
    },

    #[error("mask cell out of range (visit {visit}, event {event}, feature {feature})")]
    MaskOutOfRange {
        visit: usize,
        event: usize,
        feature: usize,
    },

    #[error("degenerate conditional model for column {column}")]
    DegenerateConditionalModel { column: usize },

    #[error("CTP view degenerate for feature {feature}")]
    CtpViewDegenerate { feature: usize },

    #[error("ill-conditioned correlation (n = {n}, alpha = {alpha:e})")]
    IllConditionedCorrelation { n: usize, alpha: f64 },

    #[error("feature has no observations: {name}")]
    FeatureHasNoObservations { name: String },

    #[error("incomplete imputation: missing value at visit {visit}, event {event}, feature {feature}")]
    IncompleteImputation {
        visit: usize,
        event: usize,
        feature: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid dataset: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("no records")]
    NoRecords,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by how the
    /// library was asked to process it.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Config(_))
    }
}

fn format_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(5).map(|v| v.to_string()).collect();
    let mut out = shown.join("; ");
    if violations.len() > 5 {
        out.push_str(&format!("; ... ({} more)", violations.len() - 5));
    }
    out
}
