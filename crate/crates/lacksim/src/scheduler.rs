//! Covert-data insertion pacing.
//!
//! The scheduler owns the remaining covert budget and converts the
//! time-dependent insertion rate IR*(t) = CF * S_R(t) / E(D | D > t), capped
//! by the codec loss budget, into per-packet embed decisions through a
//! deterministic fractional accumulator (error diffusion). A constant-probability
//! mode exists alongside the adaptive one for fixed-rate experiments.

use serde::{Deserialize, Serialize};

use crate::duration_models::DurationModel;
use crate::error::{Error, Result};
use crate::residual::{approx_conditional_mean, conditional_mean, ApproxCoefficients};

/// Voice codec parameters. Frame interval is kept in integer milliseconds so
/// the payload size is exact: payload_bits = bit_rate * frame_interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecProfile {
    pub name: String,
    /// Media bit rate, bits/second.
    pub bit_rate: u64,
    /// Frame (packetization) interval, milliseconds.
    pub frame_ms: u64,
    /// Bits carried per packet; equals bit_rate * frame_ms / 1000 exactly.
    pub payload_bits: u64,
    /// Max tolerable packet-loss fraction without concealment.
    pub loss_tolerance: f64,
    /// Max tolerable loss fraction when packet-loss concealment is on.
    pub loss_tolerance_plc: f64,
}

impl CodecProfile {
    pub fn new(
        name: &str,
        bit_rate: u64,
        frame_ms: u64,
        loss_tolerance: f64,
        loss_tolerance_plc: f64,
    ) -> Result<Self> {
        if bit_rate == 0 || frame_ms == 0 {
            return Err(Error::InvalidParameter(
                "codec bit rate and frame interval must be positive".into(),
            ));
        }
        if !(bit_rate * frame_ms).is_multiple_of(1000) {
            return Err(Error::InvalidParameter(format!(
                "codec {name}: bit_rate * frame interval is not a whole number of bits"
            )));
        }
        if !(loss_tolerance > 0.0
            && loss_tolerance <= loss_tolerance_plc
            && loss_tolerance_plc < 1.0)
        {
            return Err(Error::InvalidParameter(format!(
                "codec {name}: need 0 < loss_tolerance <= loss_tolerance_plc < 1"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            bit_rate,
            frame_ms,
            payload_bits: bit_rate * frame_ms / 1000,
            loss_tolerance,
            loss_tolerance_plc,
        })
    }

    /// 64 kb/s PCM, 20 ms frames; 3% tolerable loss, 5% with concealment.
    pub fn g711() -> Self {
        Self::new("G.711", 64_000, 20, 0.03, 0.05).expect("builtin codec")
    }

    /// 8 kb/s CS-ACELP, 20 ms frames; 2% tolerable loss.
    pub fn g729a() -> Self {
        Self::new("G.729A", 8_000, 20, 0.02, 0.02).expect("builtin codec")
    }

    /// 6.3 kb/s MP-MLQ, 30 ms frames; 1% tolerable loss.
    pub fn g7231() -> Self {
        Self::new("G.723.1", 6_300, 30, 0.01, 0.01).expect("builtin codec")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace(['.', '-'], "").as_str() {
            "g711" => Some(Self::g711()),
            "g729a" | "g729" => Some(Self::g729a()),
            "g7231" => Some(Self::g7231()),
            _ => None,
        }
    }

    /// Frame interval in seconds.
    pub fn frame_interval(&self) -> f64 {
        self.frame_ms as f64 / 1000.0
    }

    /// Packets generated per second.
    pub fn packet_rate(&self) -> f64 {
        1000.0 / self.frame_ms as f64
    }
}

/// Maximum covert-induced loss probability that keeps total loss within the
/// codec tolerance: max(0, tolerance - natural_loss).
pub fn loss_budget_cap(codec: &CodecProfile, natural_loss: f64, plc_enabled: bool) -> f64 {
    let tolerance = if plc_enabled {
        codec.loss_tolerance_plc
    } else {
        codec.loss_tolerance
    };
    (tolerance - natural_loss).max(0.0)
}

/// How the scheduler estimates E(D | D > t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Tail-integral conditional mean (incomplete gamma / quadrature).
    Exact,
    /// Linear approximation with the given coefficients.
    Approx(ApproxCoefficients),
}

/// Rate law driving embed decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMode {
    /// Budget-driven IR*(t) = CF * S_R(t) / E(D | D > t).
    Adaptive(Estimator),
    /// Fixed embed probability per packet.
    ConstantProbability(f64),
}

/// Scheduler configuration for one call.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerConfig {
    /// Total covert budget S, bits.
    pub covert_budget_bits: u64,
    /// Correction factor CF in (0, 1].
    pub cf: f64,
    /// Cap on the per-packet embed probability (the covert loss budget).
    pub p_cap: f64,
    pub mode: RateMode,
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cf > 0.0 && self.cf <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "CF must be in (0, 1], got {}",
                self.cf
            )));
        }
        if !(0.0..=1.0).contains(&self.p_cap) {
            return Err(Error::InvalidParameter(format!(
                "p_cap must be in [0, 1], got {}",
                self.p_cap
            )));
        }
        if let RateMode::ConstantProbability(p) = self.mode {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "constant embed probability must be in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// Embed decision for one voice packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Replace this packet's payload with `chunk_bits` covert bits (padded to
    /// the full payload).
    Embed {
        chunk_bits: u64,
    },
    Pass,
}

/// Per-call scheduler state, mutated once per generated packet in time order.
#[derive(Debug, Clone)]
pub struct SchedulerState {
    s_remaining: u64,
    elapsed: f64,
    accumulator: f64,
    cf: f64,
    p_cap: f64,
    mode: RateMode,
    budget_exhausted_at: Option<f64>,
}

impl SchedulerState {
    pub fn new(config: &SchedulerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            s_remaining: config.covert_budget_bits,
            elapsed: 0.0,
            accumulator: 0.0,
            cf: config.cf,
            p_cap: config.p_cap,
            mode: config.mode,
            budget_exhausted_at: if config.covert_budget_bits == 0 {
                Some(0.0)
            } else {
                None
            },
        })
    }

    /// Remaining covert budget S_R(t), bits.
    pub fn s_remaining(&self) -> u64 {
        self.s_remaining
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// Call time at which the budget hit zero, if it has.
    pub fn budget_exhausted_at(&self) -> Option<f64> {
        self.budget_exhausted_at
    }

    /// Effective insertion rate IR*(t) in bits/second:
    /// min(CF * S_R / E(D|D>t), p_cap * payload / frame). Zero once the
    /// budget is spent.
    pub fn insertion_rate(
        &self,
        model: &DurationModel,
        codec: &CodecProfile,
        t: f64,
    ) -> Result<f64> {
        if self.s_remaining == 0 {
            return Ok(0.0);
        }
        let rate_cap = self.p_cap * codec.payload_bits as f64 / codec.frame_interval();
        let raw = match self.mode {
            RateMode::Adaptive(estimator) => {
                let expected_total = match estimator {
                    Estimator::Exact => conditional_mean(model, t)?,
                    Estimator::Approx(coeffs) => {
                        approx_conditional_mean(&coeffs, model.moments().cv, t)
                    }
                };
                if expected_total <= 0.0 {
                    return Err(Error::FitError(format!(
                        "approximate conditional mean nonpositive at t={t}"
                    )));
                }
                self.cf * self.s_remaining as f64 / expected_total
            }
            RateMode::ConstantProbability(p) => {
                p * codec.payload_bits as f64 / codec.frame_interval()
            }
        };
        Ok(raw.min(rate_cap).max(0.0))
    }

    /// Advance one packet generated at `gen_time` and decide whether it
    /// carries covert bits. Deterministic; calls must arrive in time order.
    pub fn decide_packet(
        &mut self,
        model: &DurationModel,
        codec: &CodecProfile,
        gen_time: f64,
    ) -> Result<Decision> {
        if gen_time < self.elapsed {
            return Err(Error::Sequencing {
                elapsed: self.elapsed,
                t: gen_time,
            });
        }
        self.elapsed = gen_time;
        if self.s_remaining == 0 {
            return Ok(Decision::Pass);
        }
        let rate = self.insertion_rate(model, codec, gen_time)?;
        self.accumulator += rate * codec.frame_interval() / codec.payload_bits as f64;
        if self.accumulator >= 1.0 {
            self.accumulator -= 1.0;
            let chunk = codec.payload_bits.min(self.s_remaining);
            self.s_remaining -= chunk;
            if self.s_remaining == 0 {
                self.budget_exhausted_at = Some(gen_time);
            }
            Ok(Decision::Embed { chunk_bits: chunk })
        } else {
            Ok(Decision::Pass)
        }
    }
}
