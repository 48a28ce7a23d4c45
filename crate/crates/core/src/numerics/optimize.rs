use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(argmin, f(argmin))` with the argmin bracketed to within `tol`.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty search interval [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        // Below ~1e-16 relative width the bracket cannot shrink further.
        if (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let best = [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    Ok(best)
}

/// Checks unimodality of `f` on `[lo, hi]` by sampling `n` equispaced probes
/// and requiring the sequence to fall and then rise (ties tolerated up to
/// `slack`, relative to the sampled range).
pub fn probe_unimodal<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n: usize,
    slack: f64,
) -> bool {
    let vals: Vec<f64> = (0..n)
        .map(|i| f(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = slack * (max - min).max(f64::MIN_POSITIVE);
    let mut rising = false;
    for w in vals.windows(2) {
        if w[1] > w[0] + eps {
            rising = true;
        } else if rising && w[1] < w[0] - eps {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let (x, fx) = minimize_scalar(|x| (x - 2.0).powi(2), 0.0, 5.0, 1e-10).unwrap();
        assert!((x - 2.0).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    #[test]
    fn relay_coefficient_shape_minimizes_at_two_thirds() {
        // (1/ρ²)/(1-ρ): d/dρ ln = -2/ρ + 1/(1-ρ) = 0 ⇒ ρ = 2/3, value 27/4.
        let c = |r: f64| 1.0 / (r * r * (1.0 - r));
        let (x, fx) = minimize_scalar(c, 1e-6, 1.0 - 1e-6, 1e-12).unwrap();
        assert!((x - 2.0 / 3.0).abs() < 1e-7, "{x}");
        assert!((fx - 6.75).abs() < 1e-12);
        // The (1/ρ²)/(1-ρ²) variant is the one minimized at 1/√2.
        let c2 = |r: f64| 1.0 / (r * r * (1.0 - r * r));
        let (x2, fx2) = minimize_scalar(c2, 1e-6, 1.0 - 1e-6, 1e-12).unwrap();
        assert!((x2 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        assert!((fx2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(minimize_scalar(|x| x, 1.0, 1.0, 1e-6).is_err());
        assert!(minimize_scalar(|x| x, 2.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn unimodality_probe() {
        assert!(probe_unimodal(|x| (x - 0.3).powi(2), 0.0, 1.0, 100, 1e-12));
        assert!(!probe_unimodal(|x: f64| (6.0 * x).sin(), 0.0, 2.0, 100, 1e-12));
    }

    #[test]
    fn min_not_above_probe_points() {
        let f = |x: f64| (x - 0.77).abs().sqrt() + 0.1 * x;
        let (_, fmin) = minimize_scalar(f, -1.0, 3.0, 1e-10).unwrap();
        for i in 0..100 {
            let x = -1.0 + 4.0 * (i as f64 + 0.5) / 100.0;
            assert!(fmin <= f(x) + 1e-12);
        }
    }
}
