//! Numerical integration: adaptive Simpson for smooth integrands and
//! tanh-sinh (double exponential) for integrands with endpoint singularities,
//! e.g. the Weibull density near zero when the shape is below one.

/// Absolute tolerance used by the model code for density/moment integrals.
pub const QUAD_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 60;

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (ml, fml, left) = simpson(f, a, fa, m, fm);
    let (mr, fmr, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        let half = 0.5 * tol;
        simpson_recurse(f, a, fa, ml, fml, m, fm, left, half, depth + 1)
            + simpson_recurse(f, m, fm, mr, fmr, b, fb, right, half, depth + 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(&f, a, fa, b, fb);
    simpson_recurse(&f, a, fa, m, fm, b, fb, whole, tol, 0)
}

/// Tanh-sinh quadrature over `[a, b]`. Tolerates integrable endpoint
/// singularities; the integrand is never evaluated at the endpoints.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let sign = if b >= a { 1.0 } else { -1.0 };
    let (lo, hi) = (a.min(b), a.max(b));
    let c = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    // x(t) = mid + c*tanh(pi/2 sinh t). Near the endpoints x is formed from
    // the distance to the nearer endpoint, 1 - |tanh u| = 2/(1 + e^(2|u|)),
    // to avoid cancellation when the integrand is singular there.
    let node = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let w = c * std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        let offset = 2.0 * c / (1.0 + (2.0 * u.abs()).exp());
        let x = if t == 0.0 {
            mid
        } else if t < 0.0 {
            lo + offset
        } else {
            hi - offset
        };
        if w.is_finite() && w != 0.0 && x > lo && x < hi {
            let fx = f(x);
            if fx.is_finite() {
                return sign * w * fx;
            }
        }
        0.0
    };
    const T_MAX: f64 = 6.0;
    // level 0: trapezoid at integer nodes, h = 1
    let mut h = 1.0;
    let mut sum = node(0.0);
    let mut t = h;
    while t <= T_MAX {
        sum += node(t) + node(-t);
        t += h;
    }
    let mut estimate = h * sum;
    for level in 0..12 {
        // halve h: add the odd multiples of the new spacing
        let half = 0.5 * h;
        let mut t = half;
        while t <= T_MAX {
            sum += node(t) + node(-t);
            t += h;
        }
        h = half;
        let refined = h * sum;
        let delta = (refined - estimate).abs();
        estimate = refined;
        if level >= 2 && delta <= tol {
            break;
        }
    }
    estimate
}
