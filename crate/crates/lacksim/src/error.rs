use thiserror::Error;

/// Errors produced by model construction, analysis, and the channel pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid distribution or codec parameter at construction.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function of time/probability was called with a negative argument.
    #[error("{name} must be nonnegative, got {value}")]
    NegativeInput { name: &'static str, value: f64 },

    /// The survival probability underflowed; conditional quantities are
    /// unstable past `t_max`.
    #[error("survival probability below {floor:e} at t = {t}; largest valid t is {t_max:.3}")]
    TailUnderflow { t: f64, t_max: f64, floor: f64 },

    /// Moments with zero mean cannot produce a residual duration.
    #[error("mean duration must be positive")]
    ZeroMean,

    /// Least-squares refit could not be solved.
    #[error("approximation fit failed: {0}")]
    FitError(String),

    /// Covert payload does not fit the codec frame.
    #[error("covert payload of {got} bits exceeds packet capacity of {capacity} bits")]
    Framing { capacity: u64, got: u64 },

    /// Packets must be scheduled in generation order.
    #[error("out-of-order packet: t = {t} is before scheduler clock {elapsed}")]
    Sequencing { elapsed: f64, t: f64 },

    /// A packet in the wrong state was handed to embed/extract.
    #[error("{0}")]
    InvalidPacket(String),

    /// Configuration text failed validation; every violation is listed.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
