use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pulse has no samples")]
    EmptyPulse,

    #[error("{what} = {value} is outside the allowed range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("{what} = {value:e} s is not an allowed multiple of the sample period {ts:e} s")]
    GridViolation {
        what: &'static str,
        value: f64,
        ts: f64,
    },

    #[error("correction filter is unstable: {0}")]
    Unstable(String),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dressed levels cannot be matched to bare states (best overlap {overlap:.3})")]
    DegenerateLevels { overlap: f64 },

    #[error("no contour at level {level}")]
    NoContour { level: f64 },

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("fit is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    #[error("noise configuration is missing `{0}`")]
    MissingNoiseField(&'static str),

    #[error("gate is not calibrated: {0}")]
    NotCalibrated(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            what,
            value,
            range: range.into(),
        }
    }

    /// True for failures of a numerical procedure (as opposed to bad input or
    /// configuration). Command-line front ends map these to a distinct exit
    /// status.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::NonUnitary { .. }
                | Error::InvalidChannel(_)
                | Error::DegenerateLevels { .. }
                | Error::NoContour { .. }
                | Error::FitFailed(_)
                | Error::IllConditioned { .. }
                | Error::RootNotBracketed(_)
                | Error::NotCalibrated(_)
                | Error::Unstable(_)
        )
    }
}
