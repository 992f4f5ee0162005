//! Mean residual duration and conditional expected call duration.
//!
//! The conditional mean E(D | D > t) drives the insertion scheduler. It is
//! computed exactly from the tail integral of the survival function: for
//! Weibull models through the upper-incomplete-gamma identity, for the
//! empirical model through adaptive quadrature. The closed-form bounds
//! t <= E(D|D>t) <= E(D)/ccdf(t) come along for validation, and a cheap
//! linear approximation (with refittable coefficients) is available as a
//! fast path for the scheduler.

use crate::duration_models::{DurationModel, ModelMoments, SURVIVAL_FLOOR};
use crate::error::{Error, Result};
use crate::numerics::quad::{adaptive_simpson, QUAD_TOL};
use crate::numerics::special::{gamma, gamma_q};

/// Mean residual duration E(R) = E(D^2) / 2 E(D), observed at a random
/// instant of an ongoing call. Equivalently ((cv^2 + 1)/2) E(D); the two
/// routes agree to rounding.
pub fn mean_residual(moments: &ModelMoments) -> Result<f64> {
    if !(moments.mean > 0.0) {
        return Err(Error::ZeroMean);
    }
    let via_second_moment = moments.second_moment / (2.0 * moments.mean);
    let via_cv = 0.5 * (moments.cv * moments.cv + 1.0) * moments.mean;
    debug_assert!(
        (via_second_moment - via_cv).abs() <= 1e-12 * via_cv.abs(),
        "moment routes disagree: {via_second_moment} vs {via_cv}"
    );
    Ok(via_second_moment)
}

fn guard_tail(model: &DurationModel, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeInput {
            name: "t",
            value: t,
        });
    }
    let survival = model.ccdf(t)?;
    if survival < SURVIVAL_FLOOR {
        return Err(Error::TailUnderflow {
            t,
            t_max: model.max_conditional_t(),
            floor: SURVIVAL_FLOOR,
        });
    }
    Ok(survival)
}

/// Expected total call duration given the call has already lasted `t`:
/// E(D | D > t) = t + (1 / ccdf(t)) * integral_t^inf ccdf(x) dx.
pub fn conditional_mean(model: &DurationModel, t: f64) -> Result<f64> {
    let survival = guard_tail(model, t)?;
    match model {
        DurationModel::Weibull(w) => {
            // integral_t^inf exp(-(x/lambda)^k) dx = (lambda/k) Gamma(1/k, u)
            // with u = (t/lambda)^k, so the conditional mean is
            // t + exp(u) (lambda/k) Gamma(1/k, u).
            let k = w.shape();
            let lam = w.scale();
            let u = (t / lam).powf(k);
            let upper_gamma = gamma_q(1.0 / k, u) * gamma(1.0 / k);
            Ok(t + u.exp() * (lam / k) * upper_gamma)
        }
        DurationModel::Empirical(e) => {
            // integral_t^xmax (x - t) f(x) dx, split at the branch joints
            let mut edges = vec![t];
            for cut in [27.5, 66.5, e.x_max()] {
                if cut > t {
                    edges.push(cut);
                }
            }
            let tail: f64 = edges
                .windows(2)
                .map(|w| adaptive_simpson(|x| (x - t) * e.pdf(x).unwrap(), w[0], w[1], QUAD_TOL))
                .sum();
            Ok(t + tail / survival)
        }
    }
}

/// The enclosing bounds t <= E(D|D>t) <= E(D)/ccdf(t).
pub fn conditional_mean_bounds(model: &DurationModel, t: f64) -> Result<(f64, f64)> {
    let survival = guard_tail(model, t)?;
    Ok((t, model.moments().mean / survival))
}

/// Closed-form Weibull upper bound exp((t/lambda)^k) * lambda * Gamma(1 + 1/k);
/// identical to E(D)/ccdf(t), kept as an algebraic cross-check.
pub fn weibull_upper_bound_closed_form(shape: f64, scale: f64, t: f64) -> f64 {
    ((t / scale).powf(shape)).exp() * scale * gamma(1.0 + 1.0 / shape)
}

/// Coefficients of the linear conditional-mean approximation
/// a * cv + b * sqrt(cv) * t + c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxCoefficients {
    /// Weight on the coefficient of variation, seconds.
    pub a: f64,
    /// Slope multiplier; the effective slope in t is b * sqrt(cv).
    pub b: f64,
    /// Constant offset, seconds.
    pub c: f64,
    /// Max relative error against the exact curve over the fit window;
    /// `None` for hand-set coefficients.
    pub fit_residual: Option<f64>,
}

impl ApproxCoefficients {
    /// The published coefficients, taken literally: a = 1.32, c = 0.59 with
    /// slope sqrt(cv). Note these do not reproduce the exact curve's scale in
    /// seconds; prefer [`refit_approximation`] for numeric work.
    pub fn as_printed() -> Self {
        Self {
            a: 1.32,
            b: 1.0,
            c: 0.59,
            fit_residual: None,
        }
    }
}

/// Evaluate the approximation: a * cv + b * sqrt(cv) * t + c. Pure arithmetic.
pub fn approx_conditional_mean(coeffs: &ApproxCoefficients, cv: f64, t: f64) -> f64 {
    debug_assert!(cv > 0.0 && t >= 0.0);
    coeffs.a * cv + coeffs.b * cv.sqrt() * t + coeffs.c
}

/// Number of grid points used when refitting the approximation.
pub const REFIT_GRID_POINTS: usize = 64;

/// Least-squares refit of (a, c) against the exact conditional mean over a
/// uniform grid on [0, t_max], with the slope held at sqrt(cv) (b = 1).
///
/// a and c only enter through the combined offset a*cv + c, so the fit is the
/// minimum-norm least-squares solution for that offset. The returned
/// `fit_residual` is the max relative error over the grid.
pub fn refit_approximation(model: &DurationModel, t_max: f64) -> Result<ApproxCoefficients> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::FitError(format!(
            "degenerate fit window [0, {t_max}]"
        )));
    }
    if t_max >= model.max_conditional_t() {
        return Err(Error::FitError(format!(
            "fit window extends past usable tail (t_max {t_max} vs {:.3})",
            model.max_conditional_t()
        )));
    }
    let cv = model.moments().cv;
    let slope = cv.sqrt();
    let n = REFIT_GRID_POINTS;
    let mut ts = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let t = t_max * i as f64 / (n - 1) as f64;
        ts.push(t);
        ys.push(conditional_mean(model, t)?);
    }
    // least squares over the constant offset: beta = mean(y - slope * t)
    let beta = ts
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| y - slope * t)
        .sum::<f64>()
        / n as f64;
    if !beta.is_finite() {
        return Err(Error::FitError("offset did not converge".into()));
    }
    // minimum-norm split of beta across (a, c) in the [cv, 1] direction
    let denom = cv * cv + 1.0;
    let coeffs = ApproxCoefficients {
        a: beta * cv / denom,
        b: 1.0,
        c: beta / denom,
        fit_residual: None,
    };
    let residual = ts
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| (approx_conditional_mean(&coeffs, cv, t) - y).abs() / y)
        .fold(0.0f64, f64::max);
    Ok(ApproxCoefficients {
        fit_residual: Some(residual),
        ..coeffs
    })
}

/// Precomputed (t, E(D|D>t)) curve over a fixed grid; read-only after build.
#[derive(Debug, Clone)]
pub struct ConditionalMeanCurve {
    points: Vec<(f64, f64)>,
}

impl ConditionalMeanCurve {
    /// Evaluate the exact conditional mean over `n` uniform points on
    /// [0, t_max].
    pub fn build(model: &DurationModel, t_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(
                "curve needs at least 2 points".into(),
            ));
        }
        let ts: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
        Self::build_on(model, &ts)
    }

    /// Evaluate the exact conditional mean at the given ascending times.
    pub fn build_on(model: &DurationModel, ts: &[f64]) -> Result<Self> {
        let mut points = Vec::with_capacity(ts.len());
        for &t in ts {
            points.push((t, conditional_mean(model, t)?));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Piecewise-linear evaluation between grid points.
    pub fn eval(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        if t >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let idx = pts.partition_point(|&(x, _)| x <= t) - 1;
        let (t0, y0) = pts[idx];
        let (t1, y1) = pts[idx + 1];
        y0 + (y1 - y0) * (t - t0) / (t1 - t0)
    }
}
