//! The two special functions the closed forms need: the modified Bessel
//! function `I₀` and the Gauss hypergeometric case `₂F₁(1, b; 1 + b; z)`.

use super::quad::{integrate_finite, QuadratureSpec};

/// Above this argument the asymptotic expansion is used.
const I0_ASYMPTOTIC_FROM: f64 = 30.0;

/// `I₀(z)` for `z ≥ 0`. Overflows to infinity past `z ≈ 713`; use
/// [`bessel_i0_scaled`] inside products with `e^{-c}`.
pub fn bessel_i0(z: f64) -> f64 {
    let z = z.abs();
    if z < I0_ASYMPTOTIC_FROM {
        i0_series(z)
    } else {
        bessel_i0_scaled(z) * z.exp()
    }
}

/// `e^{-z} I₀(z)` for `z ≥ 0`, finite for every finite `z`.
pub fn bessel_i0_scaled(z: f64) -> f64 {
    let z = z.abs();
    if z < I0_ASYMPTOTIC_FROM {
        return i0_series(z) * (-z).exp();
    }
    // e^{-z} I₀(z) ~ (2πz)^{-1/2} Σ_k [(2k-1)!!]² / (k! (8z)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * z);
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

fn i0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// `₂F₁(1, b; 1 + b; z)` for `0 < b < 1`, `z ≤ 0` (also valid for `b ≥ 1`).
///
/// Uses `b ∫₀¹ t^{b-1} / (1 - z t) dt`, rewritten with `t = u^{1/b}` as
/// `∫₀¹ du / (1 - z u^{1/b})`, which has a bounded, smooth integrand. The
/// transition of the integrand sits near `u ≈ |z|^{-b}`, where the range is
/// split so that large `|z|` does not starve the adaptive rule.
pub fn hyp2f1_1b(b: f64, z: f64) -> f64 {
    debug_assert!(b > 0.0 && z <= 0.0, "hyp2f1_1b needs b > 0, z <= 0");
    if z == 0.0 {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let inv_b = 1.0 / b;
    let f = |u: f64| 1.0 / (1.0 - z * u.powf(inv_b));
    let spec = QuadratureSpec::new(1e-12, 1e-300).with_max_subdivisions(10_000);
    let knee = (-z).powf(-b).min(1.0);
    let mut knots = vec![0.0];
    if knee < 1.0 {
        let mut x = knee / 64.0;
        while x < 1.0 {
            knots.push(x);
            x *= 4.0;
        }
    }
    knots.push(1.0);
    knots
        .windows(2)
        .map(|w| integrate_finite(f, w[0], w[1], &spec).expect("bounded smooth integrand"))
        .sum()
}
