use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{what} at {value} lies outside the grid [{lo}, {hi}]")]
    OutsideGrid {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("quadrature did not converge: estimated error {estimate:.3e} above tolerance {tolerance:.3e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("filter FWHM {fwhm:.4e} rad/s is under-resolved by grid spacing {spacing:.4e} rad/s (need >= 3 samples per FWHM)")]
    UnderResolvedFilter { fwhm: f64, spacing: f64 },

    #[error("channel rates inconsistent with total lifetime: sum of extrinsic rates {channel_rate:.6e} vs total rate {total_rate:.6e}")]
    ChannelRates { channel_rate: f64, total_rate: f64 },

    #[error("lossless precondition violated: 1/tau_tot = {total_rate:.6e} but 2/tau_e = {bus_rate:.6e}")]
    NotLossless { total_rate: f64, bus_rate: f64 },

    #[error("degenerate interferometer schedule: {0}")]
    DegenerateSchedule(String),

    #[error("no resonance found in transfer-function samples (dip depth {depth:.3e})")]
    NoResonance { depth: f64 },

    #[error("transfer scan spans {span_linewidths:.2} linewidths, need at least 3")]
    InsufficientSpan { span_linewidths: f64 },

    #[error("transfer fit did not converge after {iterations} iterations (last residual norm {residual:.3e}, params {params:?})")]
    FitDiverged {
        iterations: usize,
        residual: f64,
        params: Vec<f64>,
    },

    #[error("empty valid mask: {0}")]
    EmptyMask(&'static str),

    #[error("degenerate map: {0}")]
    Degenerate(&'static str),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("format error in {file}: {reason}")]
    Format { file: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures rooted in user input (configuration, files, grids)
    /// rather than in numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Config { .. }
                | Error::Format { .. }
                | Error::Io { .. }
                | Error::GridMismatch(_)
                | Error::OutsideGrid { .. }
        )
    }
}
