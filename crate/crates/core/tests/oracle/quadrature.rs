//! Reference values of `(-Δ)^s (1 - y²)^s_+` computed by direct quadrature of
//! the principal-value integral, with no use of the lattice discretization.

use std::f64::consts::FRAC_PI_2;

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`. Tolerates
/// integrable endpoint singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let node = |t: f64| -> Option<(f64, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let x = u.tanh();
        let w = FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
        (x.abs() < 1.0 && w > 0.0).then_some((mid + half * x, half * w))
    };
    let t_max = 3.2;
    let mut step = 0.5;
    let mut sum = {
        let mut acc = 0.0;
        let n = (t_max / step) as i64;
        for k in -n..=n {
            if let Some((y, w)) = node(k as f64 * step) {
                acc += w * f(y);
            }
        }
        acc
    };
    let mut estimate = sum * step;
    for _ in 0..12 {
        // add the odd nodes of the halved step
        step *= 0.5;
        let n = (t_max / step) as i64;
        let mut acc = 0.0;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        while k <= n {
            if let Some((y, w)) = node(k as f64 * step) {
                acc += w * f(y);
            }
            k += 2;
        }
        sum += acc;
        let next = sum * step;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

fn profile(y: f64, s: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - y * y).powf(s)
    }
}

fn profile_dd(y: f64, s: f64) -> f64 {
    let w = 1.0 - y * y;
    s * (s - 1.0) * w.powf(s - 2.0) * 4.0 * y * y - 2.0 * s * w.powf(s - 1.0)
}

/// `p.v. ∫ (φ(x) - φ(y)) / |x - y|^{1+2s} dy` for `φ(y) = (1 - y²)^s` on
/// `(-1, 1)`, zero outside, at an interior point `x`.
pub fn fractional_laplacian_of_profile(x: f64, s: f64) -> f64 {
    assert!(x.abs() < 1.0);
    let p = 1.0 + 2.0 * s;
    let ux = profile(x, s);
    let near = 1.0 - x.abs();
    let far = 1.0 + x.abs();
    let toward_far = if x > 0.0 { -1.0 } else { 1.0 };

    // exterior of (-1, 1): u(y) = 0
    let exterior = ux * ((1.0 - x).powf(-2.0 * s) + (1.0 + x).powf(-2.0 * s)) / (2.0 * s);

    // symmetric part on (0, near); Taylor expansion on (0, delta)
    let delta = 1e-3 * near;
    let taylor = -profile_dd(x, s) * delta.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let symmetric = tanh_sinh(
        |t| (2.0 * ux - profile(x + t, s) - profile(x - t, s)) / t.powf(p),
        delta,
        near,
        1e-13,
    );

    // one-sided remainder on (near, far)
    let one_sided = if far > near {
        tanh_sinh(
            |t| (ux - profile(x + toward_far * t, s)) / t.powf(p),
            near,
            far,
            1e-13,
        )
    } else {
        0.0
    };

    exterior + taylor + symmetric + one_sided
}
