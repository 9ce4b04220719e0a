use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is NaN or infinite.
    NonFinite { field: &'static str },
    /// A parameter violates a domain rule, e.g. `d_bs >= 0`.
    Invalid { field: &'static str, rule: &'static str, value: f64 },
    /// A formula denominator would be zero or negative.
    Degenerate(&'static str),
    /// The optimizer range holds no feasible cluster count.
    EmptyRange { k_min: u32, k_max: u32 },
    UnknownParameter(String),
    UnknownMetric(String),
    UnknownPreset(String),
    EmptyAxis(String),
    GridTooLarge { rows: u128, limit: u64 },
    /// Fewer live nodes than the election needs.
    ElectionFailure { live: usize, needed: usize },
    /// Simulation metrics and analytic config describe different scenarios.
    Mismatch { field: &'static str, simulated: f64, analytic: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { field } => write!(f, "{field}: value must be finite"),
            Error::Invalid { field, rule, value } => {
                write!(f, "{field}: rule `{rule}` violated (got {value})")
            }
            Error::Degenerate(what) => write!(f, "degenerate input: {what}"),
            Error::EmptyRange { k_min, k_max } => {
                write!(f, "no feasible cluster count in [{k_min}, {k_max}]")
            }
            Error::UnknownParameter(p) => write!(f, "unknown parameter `{p}`"),
            Error::UnknownMetric(m) => write!(f, "unknown output metric `{m}`"),
            Error::UnknownPreset(p) => write!(f, "unknown figure preset `{p}`"),
            Error::EmptyAxis(p) => write!(f, "axis `{p}` has no values"),
            Error::GridTooLarge { rows, limit } => {
                write!(f, "sweep grid has {rows} rows, limit is {limit}")
            }
            Error::ElectionFailure { live, needed } => {
                write!(f, "election failed: {live} live nodes, {needed} needed")
            }
            Error::Mismatch { field, simulated, analytic } => {
                write!(f, "{field}: simulation used {simulated}, analytic config has {analytic}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { field })
    }
}

pub(crate) fn ensure(ok: bool, field: &'static str, rule: &'static str, value: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid { field, rule, value })
    }
}
