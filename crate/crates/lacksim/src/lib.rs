//! Simulator for a delay-based VoIP covert channel.
//!
//! Voice calls carry hidden data by intentionally over-delaying selected
//! audio packets: standard receivers discard them as late, a cooperating
//! receiver reads covert bits out of their payloads. How fast data can be
//! inserted without wrecking call quality or standing out statistically
//! depends on the call-duration distribution; this crate models that whole
//! chain:
//!
//! - [`duration_models`]: Weibull / exponential / empirical call-duration
//!   laws with densities, survival functions, moments, and sampling.
//! - [`residual`]: mean residual duration and the conditional expectation
//!   E(D | D > t) that paces insertion, with closed-form bounds and a cheap
//!   refittable linear approximation.
//! - [`scheduler`]: the time-dependent insertion rate
//!   IR*(t) = CF * S_R(t) / E(D | D > t), capped by the codec loss budget
//!   and discretized into per-packet embed decisions.
//! - [`channel`]: packet stream generation, covert embedding, a lossy
//!   jittery network, and both receiver types.
//! - [`simulator`]: reproducible Monte Carlo batches with per-call metrics
//!   and a duration-distribution steganalysis check.
//! - [`config`] / [`report`]: the experiment file format and deterministic
//!   CSV/JSON emission.

// negated comparisons like !(x > 0.0) are used to reject NaN along with the
// out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod duration_models;
pub mod error;
pub mod numerics;
pub mod report;
pub mod residual;
pub mod scheduler;
pub mod simulator;

pub use channel::{AudioPacket, BitStream, JitterBufferConfig, NetworkModel, PacketKind};
pub use config::{parse_config, ExperimentConfig, ModelKind};
pub use duration_models::{DurationModel, ModelMoments, WeibullModel, CALIBRATED_WEIBULLS};
pub use error::{Error, Result};
pub use residual::{
    approx_conditional_mean, conditional_mean, conditional_mean_bounds, mean_residual,
    refit_approximation, ApproxCoefficients,
};
pub use scheduler::{loss_budget_cap, CodecProfile, Decision, SchedulerConfig, SchedulerState};
pub use simulator::{
    duration_distribution_check, run_batch, run_call, BatchSummary, CallMetrics, SimulationConfig,
};
