//! Monte Carlo batches over the full pipeline: sample a call duration, pace
//! covert insertion packet by packet, push the stream through the network,
//! and observe both receivers. Per-call randomness comes from independent
//! ChaCha streams keyed by (master seed, call index), so batches are
//! reproducible and calls order-independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{
    embed, generate_stream, receive_aware, receive_unaware, BitStream, CovertCursor, CovertSource,
    JitterBufferConfig, NetworkModel,
};
use crate::duration_models::DurationModel;
use crate::error::{Error, Result};
use crate::numerics::stats::{ks_p_value, ks_statistic};
use crate::scheduler::{CodecProfile, Decision, SchedulerConfig, SchedulerState};

/// Network and jitter-buffer parameters for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub network: NetworkModel,
    pub buffer: JitterBufferConfig,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.buffer.validate(self.network.base_delay)
    }
}

/// Everything needed to simulate calls.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub model: DurationModel,
    pub codec: CodecProfile,
    pub scheduler: SchedulerConfig,
    pub channel: ChannelConfig,
    /// Concealment assumed on when judging loss-budget violations.
    pub plc: bool,
    /// Fix the call duration instead of sampling it.
    pub forced_duration: Option<f64>,
    /// Covert content: a byte buffer read as a bitstream, or seeded
    /// pseudorandom bits when absent.
    pub covert_data: Option<std::sync::Arc<Vec<u8>>>,
    /// Keep the embedded/extracted bitstreams on the outcome (single-call
    /// diagnostics; costly for large batches).
    pub record_streams: bool,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.scheduler.validate()?;
        self.channel.validate()
    }

    fn tolerance(&self) -> f64 {
        if self.plc {
            self.codec.loss_tolerance_plc
        } else {
            self.codec.loss_tolerance
        }
    }
}

/// Interval between insertion-rate trajectory samples, seconds of call time.
const TRAJECTORY_SAMPLE_INTERVAL: f64 = 1.0;

/// Per-call outcome counters.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CallMetrics {
    pub call_index: u64,
    pub duration: f64,
    pub packets: u64,
    /// Covert bits placed into transmitted packets.
    pub covert_bits_sent: u64,
    /// True covert bits recovered by the aware receiver.
    pub covert_bits_delivered: u64,
    /// Call time at which the budget hit zero, if it did.
    pub budget_exhausted_at: Option<f64>,
    /// Packets intentionally sacrificed for covert carriage, as a fraction.
    pub induced_loss: f64,
    /// Network-lost fraction.
    pub natural_loss: f64,
    /// Unaware-receiver discard fraction (lost + late).
    pub total_discard: f64,
    /// Late voice packets the aware receiver misread as carriers.
    pub false_covert_reads: u64,
    /// (t, IR*(t)) samples, every second of call time.
    #[serde(skip)]
    pub ir_trajectory: Vec<(f64, f64)>,
}

/// Bitstream ground truth for roundtrip verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallStreams {
    /// Payload bits as embedded, chunk-padded, in seq order.
    pub embedded: BitStream,
    /// Payload bits as extracted by the aware receiver.
    pub extracted: BitStream,
}

#[derive(Debug, Clone)]
pub struct CallOutcome {
    pub metrics: CallMetrics,
    pub streams: Option<CallStreams>,
}

/// RNG for call `index` under `master_seed`. Stream separation keeps calls
/// independent while any call can be reproduced in isolation.
fn call_rng(master_seed: u64, index: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index.wrapping_mul(2).wrapping_add(lane));
    rng
}

/// Simulate one call end to end. Deterministic in (config, master_seed,
/// call_index).
pub fn run_call(
    config: &SimulationConfig,
    master_seed: u64,
    call_index: u64,
) -> Result<CallOutcome> {
    config.validate()?;
    let mut rng = call_rng(master_seed, call_index, 0);

    // duration is drawn first and is independent of everything downstream,
    // so covert scheduling can never distort the duration statistics
    let duration = match config.forced_duration {
        Some(d) => d,
        None => {
            let mut d = config.model.sample(&mut rng);
            let min_d = config.codec.frame_interval();
            if d < min_d {
                d = min_d; // a call shorter than one frame still sends one packet
            }
            d
        }
    };

    let mut packets = generate_stream(&config.codec, duration)?;
    let n_packets = packets.len() as u64;

    let mut scheduler = SchedulerState::new(&config.scheduler)?;
    let mut cursor = CovertCursor::new(match &config.covert_data {
        Some(bytes) => CovertSource::Bytes(bytes.clone()),
        None => CovertSource::Random(Box::new(call_rng(master_seed, call_index, 1))),
    });
    let mut embedded_stream = config.record_streams.then(BitStream::new);
    let mut embeds = 0u64;
    let mut sent_bits = 0u64;
    let mut trajectory = Vec::new();
    let mut next_sample_t = 0.0;

    for packet in packets.iter_mut() {
        let gen_time = packet.gen_time;
        if gen_time >= next_sample_t {
            let ir = scheduler.insertion_rate(&config.model, &config.codec, gen_time)?;
            trajectory.push((gen_time, ir));
            next_sample_t += TRAJECTORY_SAMPLE_INTERVAL;
        }
        match scheduler.decide_packet(&config.model, &config.codec, gen_time)? {
            Decision::Embed { chunk_bits } => {
                let chunk = cursor.take(chunk_bits);
                let covert = embed(
                    packet.clone(),
                    chunk,
                    config.channel.buffer.lack_delay,
                    &config.codec,
                )?;
                if let Some(stream) = embedded_stream.as_mut() {
                    stream.append(&covert.payload_bits(&config.codec));
                }
                *packet = covert;
                embeds += 1;
                sent_bits += chunk_bits;
            }
            Decision::Pass => {}
        }
    }

    config.channel.network.transmit(&mut packets, &mut rng);
    let unaware = receive_unaware(&packets, &config.channel.buffer);
    let aware = receive_aware(&packets, &config.channel.buffer, &config.codec);

    let n = n_packets as f64;
    let metrics = CallMetrics {
        call_index,
        duration,
        packets: n_packets,
        covert_bits_sent: sent_bits,
        covert_bits_delivered: aware.covert_bits_delivered,
        budget_exhausted_at: scheduler.budget_exhausted_at(),
        induced_loss: embeds as f64 / n,
        natural_loss: unaware.lost as f64 / n,
        total_discard: unaware.discarded() as f64 / n,
        false_covert_reads: aware.false_covert_reads,
        ir_trajectory: trajectory,
    };
    let streams = embedded_stream.map(|embedded| CallStreams {
        embedded,
        extracted: aware.extracted,
    });
    Ok(CallOutcome { metrics, streams })
}

/// Batch-level aggregates.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BatchSummary {
    pub calls: u64,
    pub duration_mean: f64,
    pub duration_std: f64,
    /// Theoretical mean of the configured model, for comparison.
    pub model_mean: f64,
    /// Fraction of calls whose full covert budget was sent.
    pub delivery_completion: f64,
    pub completed_calls: u64,
    /// Calls whose unaware-receiver discard fraction exceeded the codec
    /// tolerance.
    pub loss_budget_violations: u64,
    /// Total delivered covert bits over total call time, bits/second.
    pub aggregate_throughput: f64,
    pub covert_bits_sent_total: u64,
    pub covert_bits_delivered_total: u64,
    pub false_covert_reads_total: u64,
}

/// Run `n_calls` independent calls; per-call metrics are returned in call
/// order regardless of any execution interleaving.
pub fn run_batch(
    config: &SimulationConfig,
    n_calls: u64,
    master_seed: u64,
) -> Result<(BatchSummary, Vec<CallMetrics>)> {
    if n_calls == 0 {
        return Err(Error::InvalidParameter(
            "batch needs at least one call".into(),
        ));
    }
    config.validate()?;
    let mut metrics = Vec::with_capacity(n_calls as usize);
    for index in 0..n_calls {
        metrics.push(run_call(config, master_seed, index)?.metrics);
    }
    Ok((summarize(config, &metrics), metrics))
}

fn summarize(config: &SimulationConfig, metrics: &[CallMetrics]) -> BatchSummary {
    let n = metrics.len() as f64;
    let sum: f64 = metrics.iter().map(|m| m.duration).sum();
    let mean = sum / n;
    let var = metrics
        .iter()
        .map(|m| (m.duration - mean).powi(2))
        .sum::<f64>()
        / n;
    let tolerance = config.tolerance();
    let completed = metrics
        .iter()
        .filter(|m| m.budget_exhausted_at.is_some())
        .count() as u64;
    let violations = metrics
        .iter()
        .filter(|m| m.total_discard > tolerance + 1e-12)
        .count() as u64;
    let delivered: u64 = metrics.iter().map(|m| m.covert_bits_delivered).sum();
    let sent: u64 = metrics.iter().map(|m| m.covert_bits_sent).sum();
    BatchSummary {
        calls: metrics.len() as u64,
        duration_mean: mean,
        duration_std: var.sqrt(),
        model_mean: config.model.moments().mean,
        delivery_completion: completed as f64 / n,
        completed_calls: completed,
        loss_budget_violations: violations,
        aggregate_throughput: delivered as f64 / sum,
        covert_bits_sent_total: sent,
        covert_bits_delivered_total: delivered,
        false_covert_reads_total: metrics.iter().map(|m| m.false_covert_reads).sum(),
    }
}

/// Result of the call-duration steganalysis check.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DistributionCheck {
    pub statistic: f64,
    pub p_value: f64,
    /// Not rejected at significance 0.01.
    pub pass: bool,
}

/// Two-sided Kolmogorov-Smirnov test of simulated call durations against the
/// model CDF. Covert scheduling never touches durations, so this passes at
/// the nominal rate whenever the batch really was drawn from `model`.
pub fn duration_distribution_check(
    durations: &[f64],
    model: &DurationModel,
) -> Result<DistributionCheck> {
    if durations.len() < 100 {
        return Err(Error::InvalidParameter(format!(
            "distribution check needs >= 100 calls, got {}",
            durations.len()
        )));
    }
    let statistic = ks_statistic(durations, |x| model.cdf(x).unwrap_or(1.0));
    let p_value = ks_p_value(statistic, durations.len());
    Ok(DistributionCheck {
        statistic,
        p_value,
        pass: p_value >= 0.01,
    })
}
