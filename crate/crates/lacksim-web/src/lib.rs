//! wasm-bindgen surface for the browser demo. Functions return flat
//! `Float64Array`-compatible buffers or JSON strings; all rendering lives in
//! the static page. Everything also compiles and runs on the host so the
//! bindings are testable without a wasm runtime.

use wasm_bindgen::prelude::*;

use lacksim::channel::{JitterBufferConfig, NetworkModel};
use lacksim::duration_models::{DurationModel, CALIBRATED_WEIBULLS};
use lacksim::residual::{approx_conditional_mean, conditional_mean, refit_approximation};
use lacksim::scheduler::{CodecProfile, Estimator, RateMode, SchedulerConfig, SchedulerState};
use lacksim::simulator::{run_call, ChannelConfig, SimulationConfig};

fn build_model(kind: &str, shape: f64, scale: f64) -> Result<DurationModel, String> {
    let model = match kind {
        "weibull" => DurationModel::weibull(shape, scale),
        "exponential" => DurationModel::exponential(scale),
        "empirical" => Ok(DurationModel::empirical()),
        other => return Err(format!("unknown model kind `{other}`")),
    };
    model.map_err(|e| e.to_string())
}

fn grid(max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
}

/// The calibrated (k, lambda, cv) presets as JSON.
#[wasm_bindgen]
pub fn table1_presets() -> String {
    let rows: Vec<serde_json::Value> = CALIBRATED_WEIBULLS
        .iter()
        .map(|&(k, lam, cv)| serde_json::json!({"k": k, "lambda": lam, "cv": cv}))
        .collect();
    serde_json::Value::Array(rows).to_string()
}

/// Moments of a model as JSON: mean, std_dev, cv, second_moment.
#[wasm_bindgen]
pub fn model_moments(kind: &str, shape: f64, scale: f64) -> Result<String, String> {
    let model = build_model(kind, shape, scale)?;
    let m = model.moments();
    Ok(serde_json::json!({
        "mean": m.mean, "std_dev": m.std_dev, "cv": m.cv, "second_moment": m.second_moment,
    })
    .to_string())
}

/// Density and survival curves: flat triples [x, pdf(x), ccdf(x)] * points.
#[wasm_bindgen]
pub fn density_curves(
    kind: &str,
    shape: f64,
    scale: f64,
    x_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let model = build_model(kind, shape, scale)?;
    let mut out = Vec::with_capacity(3 * points);
    for x in grid(x_max, points) {
        let pdf = model.pdf(x).map_err(|e| e.to_string())?;
        let ccdf = model.ccdf(x).map_err(|e| e.to_string())?;
        // k<1 densities blow up at the origin; clip for plotting
        out.push(x);
        out.push(if pdf.is_finite() { pdf } else { f64::NAN });
        out.push(ccdf);
    }
    Ok(out)
}

/// Conditional-mean curve with its envelope and the refit linear
/// approximation: flat quads [t, E(D|D>t), upper bound, approx] * points.
/// The lower bound is t itself.
#[wasm_bindgen]
pub fn residual_curves(
    kind: &str,
    shape: f64,
    scale: f64,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let model = build_model(kind, shape, scale)?;
    let cv = model.moments().cv;
    let mean = model.moments().mean;
    // sharp light-tailed models run out of usable tail early; keep the demo
    // window inside it
    let t_hi = t_max.min(0.9 * model.max_conditional_t());
    let coeffs = refit_approximation(&model, t_hi).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * points);
    for t in grid(t_hi, points) {
        let exact = conditional_mean(&model, t).map_err(|e| e.to_string())?;
        let upper = mean / model.ccdf(t).map_err(|e| e.to_string())?;
        out.push(t);
        out.push(exact);
        out.push(upper);
        out.push(approx_conditional_mean(&coeffs, cv, t));
    }
    Ok(out)
}

/// Insertion-rate curves for a covert budget: flat triples
/// [t, frozen-budget rate, depleted-budget rate] * points.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn insertion_curves(
    kind: &str,
    shape: f64,
    scale: f64,
    covert_bits: u64,
    cf: f64,
    codec_name: &str,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let model = build_model(kind, shape, scale)?;
    let codec = CodecProfile::by_name(codec_name).ok_or("unknown codec")?;
    let scheduler = SchedulerConfig {
        covert_budget_bits: covert_bits,
        cf,
        p_cap: 1.0,
        mode: RateMode::Adaptive(Estimator::Exact),
    };
    let t_hi = t_max.min(0.9 * model.max_conditional_t());
    let ts = grid(t_hi, points);
    // depleted trajectory: deterministic frame-by-frame scheduler walk
    let mut state = SchedulerState::new(&scheduler).map_err(|e| e.to_string())?;
    let frame = codec.frame_interval();
    let mut depleted = Vec::with_capacity(ts.len());
    let mut next = 0usize;
    let total_frames = (t_hi / frame).ceil() as u64 + 1;
    for i in 0..total_frames {
        let t = i as f64 * frame;
        while next < ts.len() && ts[next] <= t + 1e-9 {
            depleted.push(
                state
                    .insertion_rate(&model, &codec, t)
                    .map_err(|e| e.to_string())?,
            );
            next += 1;
        }
        state
            .decide_packet(&model, &codec, t)
            .map_err(|e| e.to_string())?;
    }
    while depleted.len() < ts.len() {
        depleted.push(0.0);
    }
    let mut out = Vec::with_capacity(3 * ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let frozen =
            cf * covert_bits as f64 / conditional_mean(&model, t).map_err(|e| e.to_string())?;
        out.push(t);
        out.push(frozen);
        out.push(depleted[i]);
    }
    Ok(out)
}

/// Run one end-to-end call and return a JSON report with the insertion-rate
/// trajectory and channel outcome counters.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_call(
    kind: &str,
    shape: f64,
    scale: f64,
    codec_name: &str,
    covert_bits: u64,
    cf: f64,
    random_loss: f64,
    jitter_std: f64,
    seed: u64,
) -> Result<String, String> {
    let model = build_model(kind, shape, scale)?;
    let codec = CodecProfile::by_name(codec_name).ok_or("unknown codec")?;
    let base_delay = 0.05;
    let playout_deadline = 0.1;
    let config = SimulationConfig {
        model,
        codec: codec.clone(),
        scheduler: SchedulerConfig {
            covert_budget_bits: covert_bits,
            cf,
            p_cap: lacksim::scheduler::loss_budget_cap(&codec, random_loss, false),
            mode: RateMode::Adaptive(Estimator::Exact),
        },
        channel: ChannelConfig {
            network: NetworkModel {
                base_delay,
                jitter_std,
                loss_prob: random_loss,
            },
            buffer: JitterBufferConfig {
                playout_deadline,
                lack_delay: JitterBufferConfig::default_lack_delay(playout_deadline, base_delay),
            },
        },
        plc: false,
        forced_duration: None,
        covert_data: None,
        record_streams: false,
    };
    let metrics = run_call(&config, seed, 0)
        .map_err(|e| e.to_string())?
        .metrics;
    let trajectory_t: Vec<f64> = metrics.ir_trajectory.iter().map(|&(t, _)| t).collect();
    let trajectory_ir: Vec<f64> = metrics.ir_trajectory.iter().map(|&(_, ir)| ir).collect();
    Ok(serde_json::json!({
        "duration": metrics.duration,
        "packets": metrics.packets,
        "covert_bits_sent": metrics.covert_bits_sent,
        "covert_bits_delivered": metrics.covert_bits_delivered,
        "budget_exhausted_at": metrics.budget_exhausted_at,
        "induced_loss": metrics.induced_loss,
        "natural_loss": metrics.natural_loss,
        "total_discard": metrics.total_discard,
        "false_covert_reads": metrics.false_covert_reads,
        "trajectory_t": trajectory_t,
        "trajectory_ir": trajectory_ir,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_json_has_eight_rows() {
        let parsed: serde_json::Value = serde_json::from_str(&table1_presets()).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 8);
    }

    #[test]
    fn density_curve_anchors() {
        let data = density_curves("exponential", 1.0, 117.31, 300.0, 61).unwrap();
        assert_eq!(data.len(), 3 * 61);
        assert_eq!(data[0], 0.0);
        assert!((data[1] - 1.0 / 117.31).abs() < 1e-12); // pdf at 0
        assert!((data[2] - 1.0).abs() < 1e-12); // ccdf at 0
    }

    #[test]
    fn residual_curve_is_bounded() {
        let data = residual_curves("weibull", 0.6, 77.97, 300.0, 31).unwrap();
        for chunk in data.chunks(4) {
            let (t, exact, upper) = (chunk[0], chunk[1], chunk[2]);
            assert!(t <= exact && exact <= upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn insertion_curves_start_at_budget_over_mean() {
        let data = insertion_curves("weibull", 0.5, 58.65, 1000, 1.0, "g711", 300.0, 31).unwrap();
        assert!((data[1] - 8.525).abs() < 0.01); // frozen
        assert!((data[2] - 8.525).abs() < 0.01); // depleted, nothing spent yet
    }

    #[test]
    fn simulate_call_reports_json() {
        let json =
            simulate_call("exponential", 1.0, 117.31, "g711", 1000, 0.8, 0.0, 0.0, 7).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["duration"].as_f64().unwrap() > 0.0);
        assert!(!v["trajectory_t"].as_array().unwrap().is_empty());
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(build_model("nope", 1.0, 1.0).is_err());
        assert!(density_curves("weibull", -1.0, 10.0, 100.0, 10).is_err());
        assert!(simulate_call("exponential", 1.0, 117.31, "g9999", 10, 0.5, 0.0, 0.0, 1).is_err());
    }
}
