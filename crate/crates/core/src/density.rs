//! Equivalent interferer densities seen from a receiver, their bounds and
//! small-distance laws, plus the quantities derived from them (average
//! guard-cell area, best relay position, tightest linear ramp).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lens_area, NetworkConfig, Point2, Scenario};
use crate::numerics::{
    bessel_i0_scaled, integrate_piecewise, integrate_with_tail_bound, minimize_scalar,
    probe_unimodal, Pchip, QuadratureSpec,
};

/// Which interferer tier a density or coverage value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Ap,
    Ue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityTag {
    ApExact,
    UeJensen,
    UeBesselBound,
    UeExpBound,
    PiecewiseLinear,
    Constant,
}

impl DensityTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityTag::ApExact => "ap-exact",
            DensityTag::UeJensen => "ue-jensen",
            DensityTag::UeBesselBound => "ue-bessel-bound",
            DensityTag::UeExpBound => "ue-exp-bound",
            DensityTag::PiecewiseLinear => "piecewise-linear",
            DensityTag::Constant => "constant",
        }
    }
}

impl fmt::Display for DensityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Debug, Clone)]
struct Table {
    interp: Pchip,
    /// Beyond this radius the density is taken to be exactly `lambda_max`.
    saturation: f64,
}

/// A circularly symmetric intensity `r ↦ λ(r)` around some center.
///
/// Cloning is cheap; the evaluator and any cached table are shared.
#[derive(Clone)]
pub struct RadialDensity {
    eval: Arc<DensityFn>,
    lambda_max: f64,
    tag: DensityTag,
    breaks: Vec<f64>,
    table: Option<Arc<Table>>,
}

impl fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialDensity")
            .field("tag", &self.tag)
            .field("lambda_max", &self.lambda_max)
            .field("breaks", &self.breaks)
            .field("tabulated", &self.table.is_some())
            .finish()
    }
}

impl RadialDensity {
    /// `breaks` lists radii where the density or its derivative jumps.
    pub fn new<F>(tag: DensityTag, lambda_max: f64, breaks: Vec<f64>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut breaks: Vec<f64> = breaks.into_iter().filter(|b| b.is_finite() && *b > 0.0).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Self {
            eval: Arc::new(eval),
            lambda_max,
            tag,
            breaks,
            table: None,
        }
    }

    pub fn constant(lambda: f64) -> Self {
        Self::new(DensityTag::Constant, lambda, Vec::new(), move |_| lambda)
    }

    /// `λ · min(δ r, 1)`.
    pub fn piecewise_linear(lambda: f64, delta: f64) -> Self {
        Self::new(DensityTag::PiecewiseLinear, lambda, vec![1.0 / delta], move |r| {
            lambda * (delta * r).min(1.0)
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        match &self.table {
            Some(t) if r >= t.interp.x_min() => {
                if r >= t.saturation {
                    self.lambda_max
                } else {
                    t.interp.eval(r)
                }
            }
            _ => (self.eval)(r),
        }
    }

    /// Evaluates the defining expression, bypassing any cached table.
    pub fn value_exact(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn tag(&self) -> DensityTag {
        self.tag
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn is_tabulated(&self) -> bool {
        self.table.is_some()
    }

    /// Caches the density on `points` geometric radii starting at `r_min`,
    /// extending until the deficit `1 - λ(r)/λ_max` drops below `1e-6`.
    /// Past that radius the density is exactly `λ_max`; below `r_min` the
    /// expression is evaluated directly.
    pub fn tabulated(mut self, points: usize, r_min: f64) -> Result<Self> {
        if points < 4 || !(r_min > 0.0) {
            return Err(Error::invalid("tabulation needs >= 4 points and r_min > 0"));
        }
        if self.lambda_max == 0.0 {
            return Ok(self);
        }
        let deficit = |r: f64| 1.0 - (self.eval)(r) / self.lambda_max;
        let mut r_hi = self.breaks.last().copied().unwrap_or(1.0).max(r_min * 16.0);
        let mut steps = 0;
        while deficit(r_hi) >= 1e-6 {
            r_hi *= 1.25;
            steps += 1;
            if steps > 400 {
                return Err(Error::TailNotBounded {
                    cutoff: r_hi,
                    bound: deficit(r_hi),
                    tolerance: 1e-6,
                });
            }
        }
        let ratio = (r_hi / r_min).powf(1.0 / (points - 1) as f64);
        let x: Vec<f64> = (0..points).map(|i| r_min * ratio.powi(i as i32)).collect();
        let y: Vec<f64> = x.iter().map(|&r| (self.eval)(r)).collect();
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("density not finite while tabulating: {bad}")));
        }
        self.table = Some(Arc::new(Table {
            interp: Pchip::new(x, y),
            saturation: r_hi,
        }));
        Ok(self)
    }

    /// Largest radius with a non-trivial deficit, if known.
    pub fn saturation_radius(&self) -> Option<f64> {
        self.table.as_ref().map(|t| t.saturation)
    }

    /// Mean intensity over the annulus `r1 <= r < r2`, i.e. the expected
    /// count there divided by the annulus area.
    pub fn annulus_mean(&self, r1: f64, r2: f64) -> Result<f64> {
        if !(r1 >= 0.0 && r2 > r1) {
            return Err(Error::invalid(format!("bad annulus [{r1}, {r2})")));
        }
        let spec = QuadratureSpec::new(1e-10, 1e-14).with_max_subdivisions(2000);
        let mass = integrate_piecewise(|r| self.value(r) * r, r1, r2, &self.breaks, &spec)?;
        Ok(2.0 * mass / (r2 * r2 - r1 * r1))
    }
}

/// Leading small-`r` behavior `density(r) ≈ coefficient · r^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLaw {
    pub power: u32,
    pub coefficient: f64,
    pub regime: AsymptoticRegime,
}

impl AsymptoticLaw {
    pub fn eval(&self, r: f64) -> f64 {
        self.coefficient * r.powi(self.power as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymptoticRegime {
    /// AP interferers seen from the serving AP, `x* ≠ o`.
    ApAtServingAp,
    /// UE interferers seen from the serving AP (`b = 1` if it sits at `o`).
    UeAtServingAp,
    /// UE interferers seen from the typical node, `x* ≠ o`.
    UeAtTypicalNode,
    /// UE interferers seen from a receiver strictly between `o` and `x*`.
    UeOnSegment,
}

impl AsymptoticRegime {
    pub fn note(self) -> &'static str {
        match self {
            AsymptoticRegime::ApAtServingAp => "AP interferers, receiver at the serving AP (|x*| > 0)",
            AsymptoticRegime::UeAtServingAp => "UE interferers, receiver at the serving AP",
            AsymptoticRegime::UeAtTypicalNode => "UE interferers, receiver at the origin (|x*| > 0)",
            AsymptoticRegime::UeOnSegment => "UE interferers, receiver inside the segment from o to x*",
        }
    }
}

/// Relative tolerance used to decide that two positions coincide.
const SAME_POINT: f64 = 1e-12;

fn same_point(a: Point2, b: Point2, scale: f64) -> bool {
    a.dist(b) <= SAME_POINT * scale.max(1.0)
}

/// Density of the AP interferers around `x_R`: the hole process of
/// intensity `λ_a` outside `B(o, |x*|)`, circularly averaged around the
/// receiver. Exact.
pub fn ap_equivalent_density(scenario: &Scenario, config: &NetworkConfig) -> RadialDensity {
    let lambda = config.lambda_a;
    let hole = scenario.norm_xstar();
    let rx = scenario.norm_xr();
    if rx == 0.0 {
        return RadialDensity::new(DensityTag::ApExact, lambda, vec![hole], move |r| {
            if r >= hole {
                lambda
            } else {
                0.0
            }
        });
    }
    let inner = (hole - rx).abs();
    let outer = hole + rx;
    let diff_sq = hole * hole - rx * rx;
    RadialDensity::new(DensityTag::ApExact, lambda, vec![inner, outer], move |r| {
        if r > outer {
            lambda
        } else if r < inner {
            if hole > rx {
                0.0
            } else {
                lambda
            }
        } else if r == 0.0 {
            // x_R on the hole boundary: half of a vanishing circle is outside.
            0.5 * lambda
        } else {
            // Fraction of the circle of radius r around x_R lying outside the hole.
            let d = ((r * r - diff_sq) / (2.0 * r * rx)).clamp(-1.0, 1.0);
            lambda * (1.0 - d.acos() / PI)
        }
    })
}

fn contour_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-9, 1e-15).with_max_subdivisions(4000)
}

/// `(1/2π) ∮ (1 - p_c)` over the circle of radius `r` around `center`.
fn mean_pca_complement(center: Point2, r: f64, x_star: Point2, lambda_a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if r == 0.0 {
        return Ok(-(-lambda_a * lens_area(center, x_star)).exp_m1());
    }
    let g = |t: f64| {
        let x = center + Point2::polar(r, t);
        -(-lambda_a * lens_area(x, x_star)).exp_m1()
    };
    // The integrand has kinks where the circle meets the axis through o and x*.
    let mut breaks = Vec::with_capacity(4);
    if center.y.abs() <= r {
        let s = (-center.y / r).asin();
        for t in [s, PI - s] {
            breaks.push(t.rem_euclid(2.0 * PI));
        }
    }
    if center.y == 0.0 {
        // Mirror-symmetric about the axis.
        let half = integrate_piecewise(g, 0.0, PI, &breaks, spec)?;
        return Ok(half / PI);
    }
    Ok(integrate_piecewise(g, 0.0, 2.0 * PI, &breaks, spec)? / (2.0 * PI))
}

/// Density of the UE interferers around `x_R` whose circular average over
/// the complement of the guard cell gives a lower bound on the Laplace
/// transform of their interference.
pub fn ue_equivalent_density(scenario: &Scenario, config: &NetworkConfig) -> RadialDensity {
    let lambda_u = config.lambda_u;
    let lambda_a = config.lambda_a;
    let x_r = scenario.x_r();
    let x_star = scenario.x_star();
    let spec = contour_spec();
    let breaks = kink_radii(scenario);
    RadialDensity::new(DensityTag::UeJensen, lambda_u, breaks, move |r| {
        lambda_u
            * mean_pca_complement(x_r, r, x_star, lambda_a, &spec)
                .expect("contour quadrature of a bounded integrand")
    })
}

fn kink_radii(scenario: &Scenario) -> Vec<f64> {
    let rs = scenario.norm_xstar();
    let rx = scenario.norm_xr();
    vec![(rs - rx).abs(), rs + rx, scenario.x_star().dist(scenario.x_r())]
}

/// Receiver-angle average of [`ue_equivalent_density`] for a receiver at
/// distance `norm_xr` from the origin with uniform direction.
pub fn ue_density_angular_average(norm_xr: f64, norm_xstar: f64, config: &NetworkConfig) -> Result<RadialDensity> {
    if !(norm_xr >= 0.0) {
        return Err(Error::invalid(format!("|x_R| must be >= 0, got {norm_xr}")));
    }
    if norm_xr == 0.0 || norm_xstar == 0.0 {
        let sc = Scenario::canonical(norm_xstar, Point2::new(norm_xr, 0.0))?;
        return Ok(ue_equivalent_density(&sc, config));
    }
    let lambda_u = config.lambda_u;
    let lambda_a = config.lambda_a;
    let x_star = Point2::new(norm_xstar, 0.0);
    let inner = contour_spec();
    let outer = QuadratureSpec::new(1e-8, 1e-14).with_max_subdivisions(4000);
    let breaks = vec![(norm_xstar - norm_xr).abs(), norm_xstar + norm_xr];
    Ok(RadialDensity::new(DensityTag::UeJensen, lambda_u, breaks, move |r| {
        let per_angle = |psi: f64| {
            mean_pca_complement(Point2::polar(norm_xr, psi), r, x_star, lambda_a, &inner)
                .expect("contour quadrature of a bounded integrand")
        };
        // Symmetric in the receiver angle; ψ = 0 is the only non-smooth point.
        let half = integrate_piecewise(per_angle, 0.0, PI, &[], &outer)
            .expect("angular quadrature of a bounded integrand");
        lambda_u * half / PI
    }))
}

/// Closed-form density bound built from the Bessel function `I₀`. Exact
/// when `x* = o`.
pub fn ue_density_bessel_bound(scenario: &Scenario, config: &NetworkConfig) -> RadialDensity {
    let lambda_u = config.lambda_u;
    let lam_pi = config.lambda_a * PI;
    let rs = scenario.norm_xstar();
    let rx = scenario.norm_xr();
    let far = rs.max(rx);
    RadialDensity::new(DensityTag::UeBesselBound, lambda_u, Vec::new(), move |r| {
        let z = 2.0 * lam_pi * far * r;
        let log_survive = -lam_pi * (rs * rs + rx * rx + r * r) + z;
        lambda_u * (1.0 - log_survive.exp() * bessel_i0_scaled(z))
    })
}

/// `λ_u (1 - exp(-λ_a π r²))`.
pub fn ue_density_exp_bound(r: f64, config: &NetworkConfig) -> f64 {
    -config.lambda_u * (-config.lambda_a * PI * r * r).exp_m1()
}

pub fn ue_density_exp_bound_curve(config: &NetworkConfig) -> RadialDensity {
    let config = *config;
    RadialDensity::new(DensityTag::UeExpBound, config.lambda_u, Vec::new(), move |r| {
        ue_density_exp_bound(r, &config)
    })
}

/// Leading coefficient of the UE density for a receiver at distance
/// `norm_xr ∈ (0, norm_xstar)` on the segment from `o` to `x*`, per unit
/// `λ_u λ_a`, multiplying `r³`.
pub fn relay_coefficient(norm_xr: f64, norm_xstar: f64) -> f64 {
    let ratio = norm_xstar / norm_xr;
    8.0 / (9.0 * PI) * ratio * ratio / (norm_xstar - norm_xr)
}

pub fn asymptotic_law(scenario: &Scenario, config: &NetworkConfig, tier: Tier) -> Result<AsymptoticLaw> {
    let rs = scenario.norm_xstar();
    let x_r = scenario.x_r();
    let rx = x_r.norm();
    let scale = rs.max(rx);
    let at_ap = same_point(x_r, scenario.x_star(), scale);
    let la = config.lambda_a;
    let lu = config.lambda_u;
    match tier {
        Tier::Ap if at_ap && rs > 0.0 => Ok(AsymptoticLaw {
            power: 0,
            coefficient: la / 2.0,
            regime: AsymptoticRegime::ApAtServingAp,
        }),
        Tier::Ap => Err(Error::NoAsymptotic(format!(
            "AP interferers with |x*| = {rs}, x_R = ({}, {})",
            x_r.x, x_r.y
        ))),
        Tier::Ue if at_ap => {
            let b = if rs == 0.0 { 1.0 } else { 0.5 };
            Ok(AsymptoticLaw {
                power: 2,
                coefficient: lu * la * b * PI,
                regime: AsymptoticRegime::UeAtServingAp,
            })
        }
        Tier::Ue if rx <= SAME_POINT * scale.max(1.0) => Ok(AsymptoticLaw {
            power: 1,
            coefficient: lu * la * 8.0 / PI * rs,
            regime: AsymptoticRegime::UeAtTypicalNode,
        }),
        Tier::Ue if x_r.y.abs() <= SAME_POINT * scale && x_r.x > 0.0 && x_r.x < rs => Ok(AsymptoticLaw {
            power: 3,
            coefficient: lu * la * relay_coefficient(x_r.x, rs),
            regime: AsymptoticRegime::UeOnSegment,
        }),
        Tier::Ue => Err(Error::NoAsymptotic(format!(
            "UE interferers with |x*| = {rs}, x_R = ({}, {})",
            x_r.x, x_r.y
        ))),
    }
}

/// Receiver distance from the origin, on the segment towards `x*`, that
/// minimizes [`relay_coefficient`].
pub fn optimal_relay_radius(norm_xstar: f64) -> Result<f64> {
    if !(norm_xstar > 0.0) {
        return Err(Error::invalid(format!("|x*| must be > 0, got {norm_xstar}")));
    }
    let lo = 1e-6 * norm_xstar;
    let hi = (1.0 - 1e-6) * norm_xstar;
    let c = |t: f64| relay_coefficient(t, norm_xstar);
    if !probe_unimodal(c, lo, hi, 200, 1e-12) {
        return Err(Error::NotUnimodal("relay coefficient".into()));
    }
    let (arg, _) = minimize_scalar(c, lo, hi, 1e-12 * norm_xstar)?;
    Ok(arg)
}

/// Number of serving-AP distances sampled over `[0, 3/(2√λ_a)]` when
/// fitting the linear ramp.
pub const DELTA_FIT_GRID: usize = 13;

/// Smallest `δ` with `λ_u min(δ r, 1) ≥ λ_{x*,u}(r)` for every `r` and every
/// serving-AP distance on the fit grid. The result scales with `√λ_a`.
pub fn fit_tightest_piecewise_delta(config: &NetworkConfig) -> Result<f64> {
    config.validate()?;
    let la = config.lambda_a;
    let unit = NetworkConfig { lambda_u: 1.0, ..*config };
    let r_lo = 1e-3 / la.sqrt();
    let r_hi = 4.0 / la.sqrt();
    let mut best: f64 = 0.0;
    for i in 0..DELTA_FIT_GRID {
        let rs = 1.5 / la.sqrt() * i as f64 / (DELTA_FIT_GRID - 1) as f64;
        let sc = Scenario::canonical(rs, Point2::new(rs, 0.0))?;
        let d = ue_equivalent_density(&sc, &unit);
        let slope = |r: f64| -d.value(r) / r;
        // Coarse scan brackets the peak, golden section refines it.
        let n = 64;
        let grid: Vec<f64> = (0..n)
            .map(|k| r_lo * (r_hi / r_lo).powf(k as f64 / (n - 1) as f64))
            .collect();
        let (k, _) = grid
            .iter()
            .map(|&r| slope(r))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(n - 1)];
        let (_, v) = minimize_scalar(slope, lo, hi, 1e-10 * hi)?;
        best = best.max(-v);
    }
    Ok(best)
}

/// Expected area of the guard cell given the serving AP at distance
/// `norm_xstar`: the integral of the PCA over the plane.
pub fn average_cell_area(norm_xstar: f64, lambda_a: f64) -> Result<f64> {
    if !(norm_xstar >= 0.0) || !(lambda_a > 0.0) {
        return Err(Error::invalid("need |x*| >= 0 and lambda_a > 0"));
    }
    let x_star = Point2::new(norm_xstar, 0.0);
    let spec = QuadratureSpec::new(1e-10, 1e-14).with_max_subdivisions(4000);
    let contour = contour_spec();
    // Polar coordinates around x*: 2π ∫ r · mean_θ p_c(x* + (r, θ)) dr.
    let f = |r: f64| {
        2.0 * PI * r * (1.0 - mean_pca_complement(x_star, r, x_star, lambda_a, &contour).expect("bounded integrand"))
    };
    // |A| ≥ π(r² - |x*|²) around x*, so the tail beyond R is at most
    // exp(-λπ(R² - |x*|²)) / λ.
    let tail = |cut: f64| (-lambda_a * PI * (cut * cut - norm_xstar * norm_xstar)).exp() / lambda_a;
    let scale = 1.0 / lambda_a.sqrt();
    integrate_with_tail_bound(f, 0.0, &[norm_xstar, 2.0 * norm_xstar, scale, 2.0 * scale], tail, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> NetworkConfig {
        NetworkConfig::default()
    }

    fn sc(rs: f64, xr: Point2) -> Scenario {
        Scenario::canonical(rs, xr).unwrap()
    }

    /// Fraction of the circle of radius r around x_R outside B(o, hole),
    /// by direct angle sampling.
    fn ap_fraction_by_sampling(hole: f64, xr: Point2, r: f64, n: usize) -> f64 {
        (0..n)
            .filter(|&k| (xr + Point2::polar(r, 2.0 * PI * (k as f64 + 0.5) / n as f64)).norm() >= hole)
            .count() as f64
            / n as f64
    }

    #[test]
    fn ap_density_cases() {
        let c = cfg();
        let d = ap_equivalent_density(&sc(0.5, Point2::new(0.25, 0.0)), &c);
        assert_eq!(d.value(0.1), 0.0);
        assert_eq!(d.value(0.5 + 0.25 + 1.0), 1.0);
        let o = ap_equivalent_density(&sc(0.5, Point2::ORIGIN), &c);
        assert_eq!(o.value(0.5 - 1e-9), 0.0);
        assert_eq!(o.value(0.5 + 1e-9), 1.0);
        // Receiver outside the hole sees full density nearby.
        let far = ap_equivalent_density(&sc(0.5, Point2::new(1.0, 0.0)), &c);
        assert_eq!(far.value(0.2), 1.0);
    }

    #[test]
    fn ap_density_matches_angle_sampling() {
        let c = cfg();
        for &(rs, xr) in &[(0.5, Point2::new(0.25, 0.0)), (0.5, Point2::polar(0.5, 1.0)), (0.5, Point2::polar(1.0, -2.0))] {
            let d = ap_equivalent_density(&sc(rs, xr), &c);
            for k in 1..60 {
                let r = 0.05 * k as f64;
                let want = ap_fraction_by_sampling(rs, xr, r, 200_000);
                assert!((d.value(r) - want).abs() < 2e-5, "r={r}: {} vs {want}", d.value(r));
            }
        }
    }

    #[test]
    fn ap_density_near_serving_ap_starts_at_half() {
        let d = ap_equivalent_density(&sc(0.5, Point2::new(0.5, 0.0)), &cfg());
        assert_eq!(d.value(0.0), 0.5);
        for &r in &[1e-3, 1e-2] {
            let expect = 0.5 + r / (2.0 * PI * 0.5);
            assert!((d.value(r) - expect).abs() < r * r);
        }
    }

    #[test]
    fn ue_density_zero_on_segment_at_zero_radius() {
        let d = ue_equivalent_density(&sc(0.5, Point2::new(0.2, 0.0)), &cfg());
        assert_eq!(d.value(0.0), 0.0);
    }

    #[test]
    fn ue_density_equals_bessel_form_at_origin_ap() {
        let c = cfg();
        for &xr in &[Point2::ORIGIN, Point2::new(0.5, 0.0), Point2::polar(1.2, 0.7)] {
            let s = sc(0.0, xr);
            let exact = ue_equivalent_density(&s, &c);
            let closed = ue_density_bessel_bound(&s, &c);
            for k in 0..40 {
                let r = 0.075 * k as f64;
                assert!((exact.value(r) - closed.value(r)).abs() < 1e-9, "r={r}");
            }
        }
    }

    #[test]
    fn ue_density_at_serving_ap_matches_monte_carlo() {
        // Oracle: for uniform angles θ and fresh AP realizations, count how
        // often x* + (r, θ) is strictly closer to some other AP than to x*.
        let c = cfg();
        let rs = 0.5;
        let r = 0.3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let window = 6.0;
        let n = 40_000;
        let mut outside = 0usize;
        let poisson = rand_distr::Poisson::new(PI * window * window).unwrap();
        for _ in 0..n {
            let theta = rng.random::<f64>() * 2.0 * PI;
            let x = Point2::new(rs, 0.0) + Point2::polar(r, theta);
            let d_star = x.dist_sq(Point2::new(rs, 0.0));
            let count: f64 = rand_distr::Distribution::sample(&poisson, &mut rng);
            let mut hit = false;
            for _ in 0..count as usize {
                let p = Point2::polar(window * rng.random::<f64>().sqrt(), rng.random::<f64>() * 2.0 * PI);
                if p.norm() >= rs && p.dist_sq(x) < d_star {
                    hit = true;
                }
            }
            outside += hit as usize;
        }
        let p = outside as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let v = ue_equivalent_density(&sc(rs, Point2::new(rs, 0.0)), &c).value(r);
        assert!((v - p).abs() < 3.0 * se, "{v} vs {p} ± {se}");
        assert!(v < 1.0 - (-PI * 0.09f64).exp());
    }

    #[test]
    fn exp_bound_values() {
        let c = cfg();
        assert_eq!(ue_density_exp_bound(0.0, &c), 0.0);
        assert_relative_eq!(ue_density_exp_bound(50.0, &c), 1.0);
        assert_relative_eq!(ue_density_exp_bound(0.5, &c), 1.0 - (-PI / 4.0).exp(), max_relative = 1e-14);
        for &rs in &[0.25, 0.5, 0.75] {
            let d = ue_equivalent_density(&sc(rs, Point2::new(rs, 0.0)), &c);
            assert!(d.value(0.5) <= ue_density_exp_bound(0.5, &c));
        }
    }

    #[test]
    fn bessel_bound_at_zero_radius() {
        let c = cfg();
        let b = ue_density_bessel_bound(&sc(0.5, Point2::polar(0.3, 1.0)), &c);
        assert_relative_eq!(b.value(0.0), 1.0 - (-PI * (0.25 + 0.09f64)).exp(), max_relative = 1e-14);
        let both_at_origin = ue_density_bessel_bound(&sc(0.0, Point2::ORIGIN), &c);
        for &r in &[0.1, 0.7, 2.0] {
            assert_relative_eq!(both_at_origin.value(r), ue_density_exp_bound(r, &c), max_relative = 1e-13);
        }
    }

    #[test]
    fn bessel_bound_holds_with_receiver_at_origin() {
        let c = cfg();
        let s = sc(0.5, Point2::ORIGIN);
        let d = ue_equivalent_density(&s, &c);
        let b = ue_density_bessel_bound(&s, &c);
        for k in 1..50 {
            let r = 0.06 * k as f64;
            assert!(d.value(r) < b.value(r), "r={r}");
        }
    }

    #[test]
    fn bessel_bound_can_fall_below_density_when_receiver_at_ap() {
        // x_R = x*, |x*| = 0.5, r = 1.5: every point of the circle is at
        // least |x| ≥ 1 from o, so |A| ≥ π(r² - |x*|²) = 2π and the mean PCA
        // is at most e^{-2π}. The bound's survival term exceeds that.
        let c = cfg();
        let s = sc(0.5, Point2::new(0.5, 0.0));
        let d = ue_equivalent_density(&s, &c).value(1.5);
        let b = ue_density_bessel_bound(&s, &c).value(1.5);
        assert!(1.0 - d <= (-2.0 * PI).exp());
        assert!(b < d, "bound {b} vs density {d}");
    }

    #[test]
    fn asymptotic_law_cases() {
        let c = cfg();
        let law = asymptotic_law(&sc(0.5, Point2::new(0.5, 0.0)), &c, Tier::Ue).unwrap();
        assert_eq!((law.power, law.coefficient), (2, PI / 2.0));
        let law = asymptotic_law(&sc(0.0, Point2::ORIGIN), &c, Tier::Ue).unwrap();
        assert_eq!((law.power, law.coefficient), (2, PI));
        let law = asymptotic_law(&sc(0.5, Point2::ORIGIN), &c, Tier::Ue).unwrap();
        assert_eq!(law.power, 1);
        assert_relative_eq!(law.coefficient, 4.0 / PI, max_relative = 1e-15);
        let law = asymptotic_law(&sc(0.5, Point2::new(0.5, 0.0)), &c, Tier::Ap).unwrap();
        assert_eq!((law.power, law.coefficient), (0, 0.5));
        let xr = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
        let law = asymptotic_law(&sc(0.5, Point2::new(xr, 0.0)), &c, Tier::Ue).unwrap();
        assert_eq!(law.power, 3);
        assert_relative_eq!(law.coefficient, relay_coefficient(xr, 0.5));
        assert!(matches!(
            asymptotic_law(&sc(0.5, Point2::polar(0.3, 1.0)), &c, Tier::Ue),
            Err(Error::NoAsymptotic(_))
        ));
        assert!(asymptotic_law(&sc(0.5, Point2::ORIGIN), &c, Tier::Ap).is_err());
    }

    #[test]
    fn asymptotic_laws_match_density() {
        let c = cfg();
        let cases = [
            sc(0.5, Point2::new(0.5, 0.0)),
            sc(0.0, Point2::ORIGIN),
            sc(0.5, Point2::ORIGIN),
            sc(0.5, Point2::new(0.3, 0.0)),
        ];
        for s in &cases {
            let law = asymptotic_law(s, &c, Tier::Ue).unwrap();
            let d = ue_equivalent_density(s, &c);
            for &r in &[1e-3, 3e-3, 1e-2] {
                let ratio = d.value(r) / law.eval(r);
                assert!((ratio - 1.0).abs() < 0.1, "{:?} r={r}: ratio {ratio}", law.regime);
            }
        }
    }

    #[test]
    fn relay_optimum_is_two_thirds_of_ap_distance() {
        // d/dt ln[(1/t²)/(1 - t)] = 0 at t = 2/3, coefficient 6/(π|x*|).
        for &rs in &[1.0, 0.5, 2.0] {
            let t = optimal_relay_radius(rs).unwrap();
            assert!((t - 2.0 * rs / 3.0).abs() < 1e-7 * rs);
            assert_relative_eq!(relay_coefficient(t, rs), 6.0 / (PI * rs), max_relative = 1e-10);
        }
        assert!(optimal_relay_radius(0.0).is_err());
    }

    #[test]
    fn tightest_delta_scales_with_root_density() {
        // At x* = o the ratio (1 - e^{-u})/r peaks where e^u = 1 + 2u.
        let mut u: f64 = 1.0;
        for _ in 0..60 {
            u = (1.0 + 2.0 * u).ln();
        }
        let expected = (1.0 - (-u).exp()) / (u / PI).sqrt();
        let d1 = fit_tightest_piecewise_delta(&cfg()).unwrap();
        assert_relative_eq!(d1, expected, max_relative = 1e-7);
        assert!((d1 - 1.13118).abs() < 1e-3);
        assert!(0.82687 < d1);
        let d4 = fit_tightest_piecewise_delta(&NetworkConfig { lambda_a: 4.0, ..cfg() }).unwrap();
        assert_relative_eq!(d4, 2.0 * d1, max_relative = 1e-6);
    }

    #[test]
    fn cell_area_at_origin_is_inverse_density() {
        assert_relative_eq!(average_cell_area(0.0, 1.0).unwrap(), 1.0, max_relative = 1e-8);
        assert_relative_eq!(average_cell_area(0.0, 4.0).unwrap(), 0.25, max_relative = 1e-8);
    }

    #[test]
    fn cell_area_grows_with_ap_distance() {
        let a0 = average_cell_area(0.0, 1.0).unwrap();
        let a1 = average_cell_area(0.5, 1.0).unwrap();
        let a2 = average_cell_area(1.0, 1.0).unwrap();
        assert!(a0 < a1 && a1 < a2, "{a0} {a1} {a2}");
    }

    #[test]
    fn tabulated_density_tracks_direct_evaluation() {
        let c = cfg();
        let d = ue_equivalent_density(&sc(0.5, Point2::new(0.25, 0.0)), &c);
        let t = d.clone().tabulated(512, 1e-4).unwrap();
        assert!(t.is_tabulated());
        for k in 0..200 {
            let r = 1e-4 * 1.06f64.powi(k);
            assert!((t.value(r) - d.value(r)).abs() < 5e-5, "r={r}");
        }
        assert_eq!(t.value(1e3), 1.0);
    }

    #[test]
    fn ue_density_decreases_with_ap_distance() {
        let c = cfg();
        let dists = [0.125, 0.25, 0.375, 0.75];
        let curves: Vec<_> = dists
            .iter()
            .map(|&rs| ue_equivalent_density(&sc(rs, Point2::new(rs, 0.0)), &c))
            .collect();
        for k in 1..=30 {
            let r = 0.1 * k as f64;
            for w in curves.windows(2) {
                assert!(w[1].value(r) <= w[0].value(r) + 1e-12, "r={r}");
            }
        }
    }

    #[test]
    fn angular_average_reduces_at_degenerate_radii() {
        let c = cfg();
        let avg = ue_density_angular_average(0.0, 0.5, &c).unwrap();
        let direct = ue_equivalent_density(&sc(0.5, Point2::ORIGIN), &c);
        assert_eq!(avg.value(0.4), direct.value(0.4));
        let avg = ue_density_angular_average(0.7, 0.0, &c).unwrap();
        let bessel = ue_density_bessel_bound(&sc(0.0, Point2::new(0.7, 0.0)), &c);
        assert!((avg.value(0.4) - bessel.value(0.4)).abs() < 1e-9);
    }

    #[test]
    fn angular_average_matches_mean_of_fixed_angle_densities() {
        let c = cfg();
        let avg = ue_density_angular_average(0.5, 0.5, &c).unwrap().value(0.25);
        // Midpoint rule over the receiver angle.
        let n = 720;
        let mean: f64 = (0..n)
            .map(|k| {
                let psi = -PI + 2.0 * PI * (k as f64 + 0.5) / n as f64;
                ue_equivalent_density(&Scenario::with_receiver_polar(0.5, 0.5, psi).unwrap(), &c).value(0.25)
            })
            .sum::<f64>()
            / n as f64;
        assert!((avg - mean).abs() < 1e-6, "{avg} vs {mean}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn densities_within_ceiling(rs in 0.0f64..1.5, xr in 0.0f64..2.0, ang in -PI..PI, r in 0.0f64..4.0) {
            let c = NetworkConfig { lambda_u: 3.0, ..cfg() };
            let s = Scenario::with_receiver_polar(rs, xr, ang).unwrap();
            let a = ap_equivalent_density(&s, &c).value(r);
            prop_assert!((0.0..=1.0).contains(&a));
            let u = ue_equivalent_density(&s, &c).value(r);
            prop_assert!((-1e-15..=3.0 + 1e-12).contains(&u));
        }

        #[test]
        fn receiver_angle_sign_is_irrelevant(rs in 0.0f64..1.5, xr in 0.0f64..2.0, ang in 0.0..PI, r in 0.0f64..3.0) {
            let c = cfg();
            let up = ue_equivalent_density(&Scenario::with_receiver_polar(rs, xr, ang).unwrap(), &c).value(r);
            let down = ue_equivalent_density(&Scenario::with_receiver_polar(rs, xr, -ang).unwrap(), &c).value(r);
            prop_assert!((up - down).abs() < 1e-9);
        }
    }
}
