//! Call-duration probability models: the two-parameter Weibull family (with
//! the exponential as the shape-1 special case) and the empirical piecewise
//! density fitted to backbone VoIP traces (lognormal-shaped head and tail
//! around a two-term exponential mixture, truncated at 455 s).

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::quad::{adaptive_simpson, QUAD_TOL};
use crate::numerics::special::{gamma, ln_gamma};

/// Survival probabilities below this floor make conditional quantities
/// numerically meaningless; operations error out instead of dividing by them.
pub const SURVIVAL_FLOOR: f64 = 1e-12;

/// Reference mean call duration of the trace the models are calibrated to.
pub const REFERENCE_MEAN_S: f64 = 117.31;

/// The calibrated (shape k, scale lambda, coefficient of variation as
/// published) triples, every one tuned to a 117.31 s mean.
#[allow(clippy::approx_constant)] // 3.14 is the published cv value
pub const CALIBRATED_WEIBULLS: [(f64, f64, f64); 8] = [
    (3.4, 130.57, 0.32),
    (2.0, 132.37, 0.52),
    (1.2, 124.71, 0.84),
    (1.0, 117.31, 1.0),
    (0.8, 103.54, 1.26),
    (0.6, 77.97, 1.76),
    (0.5, 58.65, 2.23),
    (0.4, 35.3, 3.14),
];

/// First and second moments of a duration model, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelMoments {
    pub mean: f64,
    pub std_dev: f64,
    pub cv: f64,
    pub second_moment: f64,
}

impl ModelMoments {
    /// Build from mean and standard deviation; cv and E(D^2) follow.
    pub fn from_mean_std(mean: f64, std_dev: f64) -> Result<Self> {
        if !(mean > 0.0) || !(std_dev >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "moments need mean > 0 and std_dev >= 0, got mean={mean}, std_dev={std_dev}"
            )));
        }
        Ok(Self {
            mean,
            std_dev,
            cv: std_dev / mean,
            second_moment: std_dev * std_dev + mean * mean,
        })
    }
}

/// Weibull duration law with survival exp(-(x/lambda)^k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullModel {
    shape: f64,
    scale: f64,
}

impl WeibullModel {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Weibull shape must be positive and finite, got {shape}"
            )));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Weibull scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    /// Exponential with the given mean, i.e. shape 1.
    pub fn exponential(mean: f64) -> Result<Self> {
        Self::new(1.0, mean)
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_nonneg("x", x)?;
        let z = x / self.scale;
        Ok(self.shape / self.scale * z.powf(self.shape - 1.0) * (-z.powf(self.shape)).exp())
    }

    pub fn ccdf(&self, x: f64) -> Result<f64> {
        check_nonneg("x", x)?;
        Ok((-(x / self.scale).powf(self.shape)).exp())
    }

    /// Inverse of the survival function: x with ccdf(x) = tail_prob.
    pub fn quantile_from_tail(&self, tail_prob: f64) -> f64 {
        self.scale * (-tail_prob.ln()).powf(1.0 / self.shape)
    }

    pub fn moments(&self) -> ModelMoments {
        let mean = self.scale * gamma(1.0 + 1.0 / self.shape);
        let second = self.scale * self.scale * gamma(1.0 + 2.0 / self.shape);
        let var = (second - mean * mean).max(0.0);
        ModelMoments {
            mean,
            std_dev: var.sqrt(),
            cv: var.sqrt() / mean,
            second_moment: second,
        }
    }
}

/// Branch boundaries and coefficients of the empirical piecewise density.
mod empirical_fit {
    /// Lognormal-form branch: exp(-(ln x - MU)^2 / TWO_SIGMA_SQ) / (SIGMA x sqrt(2 pi)).
    pub const MU: f64 = 3.8;
    pub const SIGMA: f64 = 1.55;
    pub const TWO_SIGMA_SQ: f64 = 4.805;
    /// Two-term exponential mixture on the middle branch.
    pub const MIX: [(f64, f64); 2] = [(0.000_114, 0.001_14), (0.027_252, 0.030_28)];
    pub const BREAK_LO: f64 = 27.5;
    pub const BREAK_HI: f64 = 66.5;
    pub const X_MAX: f64 = 455.0;
}

/// Empirical piecewise duration density, renormalized over [0, 455].
#[derive(Debug, Clone)]
pub struct EmpiricalPiecewiseModel {
    normalizer: f64,
    moments: ModelMoments,
    /// x at tail probability j/KNOTS for j = 0..=KNOTS, linearly interpolated
    /// when sampling.
    inverse_cdf: Vec<f64>,
    /// Largest t with ccdf(t) above the survival floor.
    t_floor: f64,
}

const INVERSE_CDF_KNOTS: usize = 4096;
/// Fine cumulative grid resolution per branch used to build the knot table.
const CDF_GRID_PANELS: usize = 4096;

type BranchFn = fn(f64) -> f64;

impl EmpiricalPiecewiseModel {
    pub fn new() -> Self {
        let z = Self::integrate(|_| 1.0);
        let mean = Self::integrate(|x| x) / z;
        let second = Self::integrate(|x| x * x) / z;
        let var = (second - mean * mean).max(0.0);
        let moments = ModelMoments {
            mean,
            std_dev: var.sqrt(),
            cv: var.sqrt() / mean,
            second_moment: second,
        };

        let inverse_cdf = Self::build_inverse_cdf(z);
        let mut model = Self {
            normalizer: z,
            moments,
            inverse_cdf,
            t_floor: empirical_fit::X_MAX,
        };
        model.t_floor = model.solve_t_floor();
        model
    }

    fn lognormal_form(x: f64) -> f64 {
        use empirical_fit::*;
        if x <= 0.0 {
            return 0.0;
        }
        let d = x.ln() - MU;
        (-d * d / TWO_SIGMA_SQ).exp() / (SIGMA * x * (2.0 * std::f64::consts::PI).sqrt())
    }

    fn exp_mix(x: f64) -> f64 {
        empirical_fit::MIX
            .iter()
            .map(|&(c, r)| c * (-r * x).exp())
            .sum()
    }

    /// Raw (unnormalized) branch value of the fitted density. Branch boundary
    /// points evaluate with the branch on their left; zero beyond 455 s.
    pub fn raw_density(x: f64) -> f64 {
        use empirical_fit::*;
        if x <= 0.0 || x > X_MAX {
            return 0.0;
        }
        if x <= BREAK_LO || x > BREAK_HI {
            Self::lognormal_form(x)
        } else {
            Self::exp_mix(x)
        }
    }

    /// Branches with the formula valid on each segment's interior. The
    /// boundary tie-break is a point value and must not leak into panel-edge
    /// evaluations of fixed-step integrators.
    fn branch_panels() -> [(f64, f64, BranchFn); 3] {
        use empirical_fit::*;
        [
            (0.0, BREAK_LO, Self::lognormal_form as BranchFn),
            (BREAK_LO, BREAK_HI, Self::exp_mix as BranchFn),
            (BREAK_HI, X_MAX, Self::lognormal_form as BranchFn),
        ]
    }

    /// Integrate weight(x) * raw_density(x) over the support, branch by
    /// branch.
    fn integrate<W: Fn(f64) -> f64 + Copy>(weight: W) -> f64 {
        Self::branch_panels()
            .iter()
            .map(|&(a, b, branch)| {
                adaptive_simpson(move |x| weight(x) * branch(x), a, b, QUAD_TOL / 4.0)
            })
            .sum()
    }

    /// Composite-Simpson cumulative over a fine grid, inverted to equiprobable
    /// knots. The head branch is split once more: the density varies on a log
    /// scale near zero and needs the extra resolution there.
    fn build_inverse_cdf(z: f64) -> Vec<f64> {
        use empirical_fit::*;
        let segments: [(f64, f64, BranchFn); 4] = [
            (0.0, 1.0, Self::lognormal_form),
            (1.0, BREAK_LO, Self::lognormal_form),
            (BREAK_LO, BREAK_HI, Self::exp_mix),
            (BREAK_HI, X_MAX, Self::lognormal_form),
        ];
        let mut xs = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for (a, b, branch) in segments {
            let h = (b - a) / CDF_GRID_PANELS as f64;
            for i in 0..CDF_GRID_PANELS {
                let x0 = a + i as f64 * h;
                let x1 = x0 + h;
                if xs.is_empty() {
                    xs.push(x0);
                    cum.push(0.0);
                }
                acc += h / 6.0 * (branch(x0) + 4.0 * branch(0.5 * (x0 + x1)) + branch(x1));
                xs.push(x1);
                cum.push(acc);
            }
        }
        let total = acc;
        debug_assert!((total / z - 1.0).abs() < 1e-6);

        let mut knots = Vec::with_capacity(INVERSE_CDF_KNOTS + 1);
        let mut j = 0usize;
        for i in 0..=INVERSE_CDF_KNOTS {
            let target = total * i as f64 / INVERSE_CDF_KNOTS as f64;
            while j + 1 < cum.len() && cum[j + 1] < target {
                j += 1;
            }
            let (c0, c1) = (cum[j], cum[j + 1]);
            let frac = if c1 > c0 {
                (target - c0) / (c1 - c0)
            } else {
                0.0
            };
            knots.push(xs[j] + frac * (xs[j + 1] - xs[j]));
        }
        knots
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_nonneg("x", x)?;
        Ok(Self::raw_density(x) / self.normalizer)
    }

    /// Survival by numeric tail integration over the remaining branches.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        check_nonneg("x", x)?;
        if x >= empirical_fit::X_MAX {
            return Ok(0.0);
        }
        let mut tail = 0.0;
        for (a, b, branch) in Self::branch_panels() {
            if b <= x {
                continue;
            }
            tail += adaptive_simpson(branch, a.max(x), b, QUAD_TOL / 4.0);
        }
        Ok((tail / self.normalizer).clamp(0.0, 1.0))
    }

    pub fn moments(&self) -> ModelMoments {
        self.moments
    }

    pub fn x_max(&self) -> f64 {
        empirical_fit::X_MAX
    }

    /// Inverse-CDF draw via the precomputed equiprobable knot table.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let pos = p * INVERSE_CDF_KNOTS as f64;
        let idx = (pos as usize).min(INVERSE_CDF_KNOTS - 1);
        let frac = pos - idx as f64;
        self.inverse_cdf[idx] + frac * (self.inverse_cdf[idx + 1] - self.inverse_cdf[idx])
    }

    fn solve_t_floor(&self) -> f64 {
        let (mut lo, mut hi) = (0.0, empirical_fit::X_MAX);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.ccdf(mid).unwrap_or(0.0) > SURVIVAL_FLOOR {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

impl Default for EmpiricalPiecewiseModel {
    fn default() -> Self {
        Self::new()
    }
}

/// A call-duration law: every operation the simulator needs from one.
#[derive(Debug, Clone)]
pub enum DurationModel {
    Weibull(WeibullModel),
    Empirical(EmpiricalPiecewiseModel),
}

impl DurationModel {
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self::Weibull(WeibullModel::new(shape, scale)?))
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        Ok(Self::Weibull(WeibullModel::exponential(mean)?))
    }

    pub fn empirical() -> Self {
        Self::Empirical(EmpiricalPiecewiseModel::new())
    }

    /// Density f_D(x), 1/seconds.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        match self {
            Self::Weibull(w) => w.pdf(x),
            Self::Empirical(e) => e.pdf(x),
        }
    }

    /// Survival P(D > x).
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        match self {
            Self::Weibull(w) => w.ccdf(x),
            Self::Empirical(e) => e.ccdf(x),
        }
    }

    /// CDF P(D <= x).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.ccdf(x)?)
    }

    pub fn moments(&self) -> ModelMoments {
        match self {
            Self::Weibull(w) => w.moments(),
            Self::Empirical(e) => e.moments(),
        }
    }

    /// Draw one duration. Deterministic for a fixed RNG state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            // u in (0, 1]; inverse-survival transform x = lambda (-ln u)^(1/k)
            Self::Weibull(w) => w.quantile_from_tail(1.0 - rng.random::<f64>()),
            Self::Empirical(e) => e.quantile(rng.random::<f64>()),
        }
    }

    /// Largest t at which the survival is still above [`SURVIVAL_FLOOR`].
    pub fn max_conditional_t(&self) -> f64 {
        match self {
            Self::Weibull(w) => w.quantile_from_tail(SURVIVAL_FLOOR),
            Self::Empirical(e) => e.t_floor,
        }
    }

    /// Upper end of the support, if bounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            Self::Weibull(_) => None,
            Self::Empirical(e) => Some(e.x_max()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Weibull(w) if w.shape() == 1.0 => format!("exponential(mean={})", w.scale()),
            Self::Weibull(w) => format!("weibull(k={}, lambda={})", w.shape(), w.scale()),
            Self::Empirical(_) => "empirical".to_string(),
        }
    }
}

fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value < 0.0 || value.is_nan() {
        Err(Error::NegativeInput { name, value })
    } else {
        Ok(())
    }
}

/// Gamma-function route for Weibull raw moments, shared with tests and the
/// calibration checker: E(D^m) = lambda^m Gamma(1 + m/k).
pub fn weibull_raw_moment(shape: f64, scale: f64, order: u32) -> f64 {
    (order as f64 * scale.ln() + ln_gamma(1.0 + order as f64 / shape)).exp()
}
