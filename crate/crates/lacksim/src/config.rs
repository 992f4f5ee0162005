//! Experiment configuration: a small `key = value` text format with
//! whole-file validation (every violation reported, not only the first),
//! plus named presets for the common setups.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::channel::{JitterBufferConfig, NetworkModel};
use crate::duration_models::DurationModel;
use crate::error::{Error, Result};
use crate::residual::{refit_approximation, ApproxCoefficients};
use crate::scheduler::{loss_budget_cap, CodecProfile, Estimator, RateMode, SchedulerConfig};
use crate::simulator::{ChannelConfig, SimulationConfig};

/// Default refit window for the approximate estimator, seconds.
pub const DEFAULT_REFIT_WINDOW: f64 = 300.0;

/// Parsed, validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model_kind: ModelKind,
    pub sim: SimulationConfig,
    pub n_calls: u64,
    pub seed: u64,
    /// Covert input file, if the caller wants file-backed covert data.
    pub covert_file: Option<String>,
    /// Figure-emission grid: [0, t_max] stepped by `grid_step`.
    pub t_max: f64,
    pub grid_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Weibull { k: f64, lambda: f64 },
    Exponential { lambda: f64 },
    Empirical,
}

impl ModelKind {
    pub fn build(&self) -> Result<DurationModel> {
        match *self {
            ModelKind::Weibull { k, lambda } => DurationModel::weibull(k, lambda),
            ModelKind::Exponential { lambda } => DurationModel::exponential(lambda),
            ModelKind::Empirical => Ok(DurationModel::empirical()),
        }
    }
}

/// All configuration keys, their defaults documented in `example_config`.
const KNOWN_KEYS: &[&str] = &[
    "model",
    "k",
    "lambda",
    "codec",
    "covert_bits",
    "cf",
    "plc",
    "estimator",
    "approx_as_printed",
    "rate_mode",
    "constant_p",
    "p_cap",
    "base_delay",
    "jitter",
    "random_loss",
    "playout_deadline",
    "lack_delay",
    "forced_duration",
    "n_calls",
    "seed",
    "covert_file",
    "t_max",
    "grid_step",
];

/// A reference config with every key and its default, suitable as a template.
pub fn example_config() -> &'static str {
    "\
# call duration model: weibull | exponential | empirical
model = weibull
k = 1.0
lambda = 117.31

# voice codec: g711 | g729a | g7231
codec = g711

# covert budget and pacing
covert_bits = 1000
cf = 0.8
plc = false
estimator = exact          # exact | approx
approx_as_printed = false  # approx only: keep the literal printed coefficients
rate_mode = adaptive       # adaptive | constant
# constant_p = 0.005       # constant mode only
# p_cap = 0.03             # override the codec loss-budget cap

# network and receiver
base_delay = 0.05
jitter = 0.0
random_loss = 0.0
playout_deadline = 0.1
# lack_delay = 0.15        # default: playout_deadline - base_delay + 0.1

# batch
n_calls = 100
seed = 0
# forced_duration = 3600   # fix call length instead of sampling
# covert_file = secret.bin # covert bits from a file instead of seeded random

# figure-emission grid
t_max = 300
grid_step = 1
"
}

struct RawConfig {
    entries: BTreeMap<String, String>,
    violations: Vec<String>,
}

impl RawConfig {
    fn parse(text: &str) -> Self {
        let mut entries = BTreeMap::new();
        let mut violations = Vec::new();
        for (line_no, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                violations.push(format!("line {}: expected `key = value`", line_no + 1));
                continue;
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                violations.push(format!("unknown key `{key}`"));
                continue;
            }
            if entries.insert(key.clone(), value).is_some() {
                violations.push(format!("duplicate key `{key}`"));
            }
        }
        Self {
            entries,
            violations,
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse_f64(&mut self, key: &str) -> Option<f64> {
        let value = self.entries.get(key)?;
        match value.parse::<f64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.violations
                    .push(format!("key `{key}`: `{value}` is not a number"));
                None
            }
        }
    }

    fn parse_u64(&mut self, key: &str) -> Option<u64> {
        let value = self.entries.get(key)?;
        match value.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.violations.push(format!(
                    "key `{key}`: `{value}` is not a nonnegative integer"
                ));
                None
            }
        }
    }

    fn parse_bool(&mut self, key: &str) -> Option<bool> {
        let value = self.entries.get(key)?;
        match value.parse::<bool>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.violations
                    .push(format!("key `{key}`: `{value}` is not true/false"));
                None
            }
        }
    }
}

/// Parse and validate a configuration. On failure the error lists every
/// violation found, not just the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut raw = RawConfig::parse(text);

    // model
    let model_name = raw.get("model").unwrap_or("weibull").to_string();
    let k = raw.parse_f64("k");
    let lambda = raw.parse_f64("lambda");
    let model_kind = match model_name.as_str() {
        "weibull" => ModelKind::Weibull {
            k: k.unwrap_or(1.0),
            lambda: lambda.unwrap_or(117.31),
        },
        "exponential" => {
            if let Some(k) = k {
                if k != 1.0 {
                    raw.violations.push(format!(
                        "model `exponential` is weibull with k = 1, got k = {k}"
                    ));
                }
            }
            ModelKind::Exponential {
                lambda: lambda.unwrap_or(117.31),
            }
        }
        "empirical" => {
            if k.is_some() || lambda.is_some() {
                raw.violations
                    .push("model `empirical` takes no k/lambda parameters".to_string());
            }
            ModelKind::Empirical
        }
        other => {
            raw.violations.push(format!(
                "key `model`: `{other}` is not one of weibull | exponential | empirical"
            ));
            ModelKind::Exponential { lambda: 117.31 }
        }
    };

    // codec
    let codec_name = raw.get("codec").unwrap_or("g711").to_string();
    let codec = match CodecProfile::by_name(&codec_name) {
        Some(c) => c,
        None => {
            raw.violations.push(format!(
                "key `codec`: `{codec_name}` is not one of g711 | g729a | g7231"
            ));
            CodecProfile::g711()
        }
    };

    let covert_bits = raw.parse_u64("covert_bits").unwrap_or(1000);
    let cf = raw.parse_f64("cf").unwrap_or(0.8);
    let plc = raw.parse_bool("plc").unwrap_or(false);
    let random_loss = raw.parse_f64("random_loss").unwrap_or(0.0);
    let base_delay = raw.parse_f64("base_delay").unwrap_or(0.05);
    let jitter = raw.parse_f64("jitter").unwrap_or(0.0);
    let playout_deadline = raw.parse_f64("playout_deadline").unwrap_or(0.1);
    let lack_delay = raw
        .parse_f64("lack_delay")
        .unwrap_or_else(|| JitterBufferConfig::default_lack_delay(playout_deadline, base_delay));
    let n_calls = raw.parse_u64("n_calls").unwrap_or(100);
    let seed = raw.parse_u64("seed").unwrap_or(0);
    let forced_duration = raw.parse_f64("forced_duration");
    let covert_file = raw.get("covert_file").map(str::to_string);
    let t_max = raw.parse_f64("t_max").unwrap_or(300.0);
    let grid_step = raw.parse_f64("grid_step").unwrap_or(1.0);
    let approx_as_printed = raw.parse_bool("approx_as_printed").unwrap_or(false);
    let estimator_name = raw.get("estimator").unwrap_or("exact").to_string();
    let rate_mode_name = raw.get("rate_mode").unwrap_or("adaptive").to_string();
    let constant_p = raw.parse_f64("constant_p");
    // budget the loss cap against the configured natural loss unless overridden
    let p_cap = raw
        .parse_f64("p_cap")
        .unwrap_or_else(|| loss_budget_cap(&codec, random_loss, plc));

    let mut violations = std::mem::take(&mut raw.violations);

    if !(cf > 0.0 && cf <= 1.0) {
        violations.push(format!("cf must be in (0, 1], got {cf}"));
    }
    if !(0.0..=1.0).contains(&p_cap) {
        violations.push(format!("p_cap must be in [0, 1], got {p_cap}"));
    }
    if !(0.0..=1.0).contains(&random_loss) {
        violations.push(format!("random_loss must be in [0, 1], got {random_loss}"));
    }
    if grid_step <= 0.0 || t_max <= 0.0 {
        violations.push(format!(
            "grid needs t_max > 0 and grid_step > 0, got {t_max}/{grid_step}"
        ));
    }

    // model construction errors become violations too
    let model = match model_kind.build() {
        Ok(m) => Some(m),
        Err(e) => {
            violations.push(e.to_string());
            None
        }
    };

    let estimator = match estimator_name.as_str() {
        "exact" => {
            if approx_as_printed {
                violations
                    .push("approx_as_printed is only meaningful with estimator = approx".into());
            }
            Some(Estimator::Exact)
        }
        "approx" => {
            if approx_as_printed {
                Some(Estimator::Approx(ApproxCoefficients::as_printed()))
            } else {
                // refit against the exact curve over the default window
                match model
                    .as_ref()
                    .map(|m| refit_approximation(m, DEFAULT_REFIT_WINDOW))
                {
                    Some(Ok(coeffs)) => Some(Estimator::Approx(coeffs)),
                    Some(Err(e)) => {
                        violations.push(format!("estimator refit failed: {e}"));
                        None
                    }
                    None => None,
                }
            }
        }
        other => {
            violations.push(format!("key `estimator`: `{other}` is not exact | approx"));
            None
        }
    };

    let mode = match rate_mode_name.as_str() {
        "adaptive" => {
            if constant_p.is_some() {
                violations.push("constant_p is only meaningful with rate_mode = constant".into());
            }
            estimator.map(RateMode::Adaptive)
        }
        "constant" => match constant_p {
            Some(p) if (0.0..=1.0).contains(&p) => Some(RateMode::ConstantProbability(p)),
            Some(p) => {
                violations.push(format!("constant_p must be in [0, 1], got {p}"));
                None
            }
            None => {
                violations.push("rate_mode = constant requires constant_p".into());
                None
            }
        },
        other => {
            violations.push(format!(
                "key `rate_mode`: `{other}` is not adaptive | constant"
            ));
            None
        }
    };

    let network = NetworkModel {
        base_delay,
        jitter_std: jitter,
        loss_prob: random_loss,
    };
    let buffer = JitterBufferConfig {
        playout_deadline,
        lack_delay,
    };
    if let Err(e) = network.validate() {
        violations.push(e.to_string());
    }
    if let Err(e) = buffer.validate(base_delay) {
        violations.push(e.to_string());
    }
    if let Some(d) = forced_duration {
        if d <= 0.0 {
            violations.push(format!("forced_duration must be positive, got {d}"));
        }
    }
    if n_calls == 0 {
        violations.push("n_calls must be at least 1".into());
    }

    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }

    let sim = SimulationConfig {
        model: model.expect("validated"),
        codec,
        scheduler: SchedulerConfig {
            covert_budget_bits: covert_bits,
            cf,
            p_cap,
            mode: mode.expect("validated"),
        },
        channel: ChannelConfig { network, buffer },
        plc,
        forced_duration,
        covert_data: None,
        record_streams: false,
    };

    Ok(ExperimentConfig {
        model_kind,
        sim,
        n_calls,
        seed,
        covert_file,
        t_max,
        grid_step,
    })
}

/// Attach file-backed covert content.
pub fn with_covert_bytes(config: &mut ExperimentConfig, bytes: Vec<u8>) -> Result<()> {
    let available_bits = bytes.len() as u64 * 8;
    if config.sim.scheduler.covert_budget_bits > available_bits {
        return Err(Error::Config(vec![format!(
            "covert_bits = {} exceeds the {} bits available in the covert file",
            config.sim.scheduler.covert_budget_bits, available_bits
        )]));
    }
    config.sim.covert_data = Some(Arc::new(bytes));
    Ok(())
}

/// Built-in presets, resolvable by name.
pub const PRESETS: &[&str] = &[
    "g711-baseline",
    "g729a-baseline",
    "g7231-baseline",
    "fig4-sweep",
];

pub fn preset(name: &str) -> Option<String> {
    let body = match name {
        "g711-baseline" => "model = exponential\nlambda = 117.31\ncodec = g711\n",
        "g729a-baseline" => "model = exponential\nlambda = 117.31\ncodec = g729a\n",
        "g7231-baseline" => "model = exponential\nlambda = 117.31\ncodec = g7231\n",
        // frozen-budget sweep configuration used for curve emission
        "fig4-sweep" => "model = exponential\nlambda = 117.31\ncodec = g711\ncf = 1.0\np_cap = 1.0\ncovert_bits = 1000\n",
        _ => return None,
    };
    Some(format!("n_calls = 1000\nseed = 42\n{body}"))
}
