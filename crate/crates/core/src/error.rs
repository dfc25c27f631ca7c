use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration:\n{}", format_violations(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{what} = {value} is out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error(
        "FLL band cannot be resolved with fll_window_N = {window}: count_lo = {count_lo} >= count_hi = {count_hi}; \
         the minimum window is fll_window_N = {min_window}"
    )]
    UnresolvableBand {
        window: u32,
        count_lo: i64,
        count_hi: i64,
        min_window: u32,
    },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("numeric failure at cycle {cycle}: {message}")]
    Numeric { cycle: u64, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
