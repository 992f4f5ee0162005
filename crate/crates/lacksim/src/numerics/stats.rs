//! Statistical tests used by the batch checks: one-sample Kolmogorov-Smirnov
//! against a model CDF, and an exact one-sided two-proportion test.

use crate::numerics::special::ln_gamma;

/// Kolmogorov distribution tail Q(z) = P(sup-statistic * sqrt(n) > z).
///
/// Series form 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 z^2) for large z, with the
/// theta-function form below z = 0.755 where the series converges slowly.
pub fn kolmogorov_tail(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 0.2 {
        return 1.0;
    }
    if z < 0.755 {
        let v = 1.0 / (z * z);
        let w = 2.506_628_274_631_000_7; // sqrt(2 pi)
        let c1 = -std::f64::consts::PI * std::f64::consts::PI / 8.0;
        return 1.0 - w / z * ((c1 * v).exp() + (9.0 * c1 * v).exp() + (25.0 * c1 * v).exp());
    }
    if z > 6.8116 {
        return 0.0;
    }
    let v = z * z;
    let mut sum = 0.0;
    for j in 1..=4 {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (-2.0 * (j * j) as f64 * v).exp();
    }
    2.0 * sum
}

/// One-sample KS statistic D_n = sup |F_n(x) - F(x)| of `samples` against a
/// theoretical CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(
        !samples.is_empty(),
        "KS statistic needs at least one sample"
    );
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN sample"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        let hi = ((i + 1) as f64 / n - c).abs();
        let lo = (c - i as f64 / n).abs();
        d = d.max(hi).max(lo);
    }
    d
}

/// Asymptotic two-sided KS p-value with the Stephens small-sample correction
/// z = D (sqrt(n) + 0.12 + 0.11/sqrt(n)).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_tail(d * (sn + 0.12 + 0.11 / sn))
}

fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Exact one-sided test that group 1 (x1 successes of n1) has a higher success
/// probability than group 2 (x2 of n2). Conditions on the total success count
/// (Fisher): returns P(X >= x1) under the hypergeometric null.
pub fn one_sided_proportion_test(x1: u64, n1: u64, x2: u64, n2: u64) -> f64 {
    let m = x1 + x2;
    let denom = ln_choose(n1 + n2, m);
    let mut p = 0.0;
    let lo = m.saturating_sub(n2);
    for i in x1..=m.min(n1) {
        if i < lo {
            continue;
        }
        p += (ln_choose(n1, i) + ln_choose(n2, m - i) - denom).exp();
    }
    p.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_tail_anchors() {
        // Critical values: Q(1.3581) ~ 0.05, Q(1.6276) ~ 0.01
        assert!((kolmogorov_tail(1.3581) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_tail(1.6276) - 0.01).abs() < 2e-4);
        assert!(kolmogorov_tail(0.1) == 1.0);
        assert!(kolmogorov_tail(7.0) == 0.0);
    }

    #[test]
    fn ks_statistic_exact_small_case() {
        // Single sample at the median of U(0,1): D = 0.5
        let d = ks_statistic(&[0.5], |x| x);
        assert!((d - 0.5).abs() < 1e-12);
        // Perfectly placed quartiles: i/n grid vs identity
        let d = ks_statistic(&[0.125, 0.375, 0.625, 0.875], |x| x);
        assert!((d - 0.125).abs() < 1e-12);
    }

    #[test]
    fn ks_detects_shift() {
        let shifted: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) / 200.0 * 0.5).collect();
        let d = ks_statistic(&shifted, |x| x);
        assert!(ks_p_value(d, 200) < 1e-6);
    }

    #[test]
    fn proportion_test_extreme_split() {
        // 7 of 1000 vs 0 of 1000, all successes on one side: p = C(1000,7)/C(2000,7)
        let p = one_sided_proportion_test(7, 1000, 0, 1000);
        assert!((p - 0.0077).abs() < 3e-4, "got {p}");
        // no successes anywhere: p = 1
        assert!((one_sided_proportion_test(0, 10, 0, 10) - 1.0).abs() < 1e-12);
        // balanced split is not significant
        assert!(one_sided_proportion_test(5, 1000, 5, 1000) > 0.5);
    }
}
