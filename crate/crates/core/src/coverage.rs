//! Laplace transforms of interference from radial densities, and coverage
//! probabilities under Rayleigh fading with no noise.
//!
//! With SIR `P g ρ^{-α} / I` and unit-mean exponential `g`, coverage at
//! threshold `θ` is `L_I(θ ρ^α / P)`. Since every interferer also
//! transmits with `P`, the kernel only sees `K = θ ρ^α`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::density::{
    ap_equivalent_density, ue_density_angular_average, ue_density_exp_bound_curve, ue_equivalent_density,
    RadialDensity, Tier,
};
use crate::error::{Error, Result};
use crate::geometry::{NetworkConfig, Point2, Scenario};
use crate::numerics::{
    hyp2f1_1b, integrate_finite, integrate_piecewise, integrate_with_tail_bound, kronrod_nodes, QuadratureSpec,
};

pub const THETA_DB_MIN: f64 = -10.0;
pub const THETA_DB_MAX: f64 = 20.0;
pub const THETA_DB_STEP: f64 = 1.0;

/// Points of the tabulation grid used for UE densities in coverage curves.
pub const DEFAULT_TABLE_POINTS: usize = 512;
pub const DEFAULT_TABLE_R_MIN: f64 = 1e-4;

/// Kronrod panels on `[0, π]` for averages over the receiver direction.
const DIRECTION_PANELS: usize = 4;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Inclusive grid `min, min + step, …, max`.
pub fn theta_db_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::invalid(format!("bad dB grid [{min}, {max}] step {step}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min + step * i as f64).collect())
}

pub fn default_theta_grid() -> Vec<f64> {
    theta_db_grid(THETA_DB_MIN, THETA_DB_MAX, THETA_DB_STEP).expect("static grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageQuery {
    pub rho: f64,
    /// Linear SIR threshold.
    pub theta: f64,
    pub tier: Tier,
}

impl CoverageQuery {
    pub fn new(rho: f64, theta: f64, tier: Tier) -> Result<Self> {
        if !(rho > 0.0) || !(theta > 0.0) {
            return Err(Error::invalid(format!("need rho > 0 and theta > 0, got {rho}, {theta}")));
        }
        Ok(Self { rho, theta, tier })
    }

    pub fn from_db(rho: f64, theta_db: f64, tier: Tier) -> Result<Self> {
        Self::new(rho, db_to_linear(theta_db), tier)
    }

    /// Argument `s` of the Laplace transform.
    pub fn laplace_argument(&self, config: &NetworkConfig) -> f64 {
        let (p, alpha) = tier_params(config, self.tier);
        self.rho.powf(alpha) * self.theta / p
    }
}

pub(crate) fn tier_params(config: &NetworkConfig, tier: Tier) -> (f64, f64) {
    match tier {
        Tier::Ap => (config.p_a, config.alpha_a),
        Tier::Ue => (config.p_u, config.alpha_u),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    AnalyticBound,
    McPpp,
    McVplp,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::AnalyticBound => "analytic-bound",
            Provenance::McPpp => "mc-ppp",
            Provenance::McVplp => "mc-vplp",
        }
    }

    /// Analytic value for an interferer tier: exact for APs, a lower bound
    /// for UEs.
    pub fn analytic_for(tier: Tier) -> Self {
        match tier {
            Tier::Ap => Provenance::Analytic,
            Tier::Ue => Provenance::AnalyticBound,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta_db: f64,
    pub coverage: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub label: String,
    pub provenance: Provenance,
    pub points: Vec<CurvePoint>,
}

impl CoverageCurve {
    pub fn analytic(label: impl Into<String>, provenance: Provenance, thetas_db: &[f64], values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            provenance,
            points: thetas_db
                .iter()
                .zip(values)
                .map(|(&theta_db, coverage)| CurvePoint {
                    theta_db,
                    coverage,
                    stderr: 0.0,
                })
                .collect(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.coverage).collect()
    }
}

// UE densities come out of a contour quadrature good to ~1e-9, so asking
// for more here only burns subdivisions.
fn laplace_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-9, 1e-13).with_max_subdivisions(8000)
}

/// `C = (2π/α) / sin(2π/α)`.
pub fn no_guard_constant(alpha: f64) -> f64 {
    let a = 2.0 * PI / alpha;
    a / a.sin()
}

/// `2π ∫ λ(r) r γ(K r^{-α}) dr` with `γ(t) = t / (1 + t)`.
pub fn laplace_exponent(density: &RadialDensity, kernel_scale: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::invalid(format!("alpha must exceed 2, got {alpha}")));
    }
    if !(kernel_scale >= 0.0) {
        return Err(Error::invalid(format!("Laplace argument must be >= 0, got {kernel_scale}")));
    }
    if kernel_scale == 0.0 || density.lambda_max() == 0.0 {
        return Ok(0.0);
    }
    let k = kernel_scale;
    let lambda_max = density.lambda_max();
    let f = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        2.0 * PI * density.value(r) * r * k / (k + r.powf(alpha))
    };
    // γ(t) ≤ t bounds the tail by 2π λ_max K R^{2-α} / (α - 2).
    let tail = |cut: f64| 2.0 * PI * lambda_max * k * cut.powf(2.0 - alpha) / (alpha - 2.0);
    let knee = k.powf(1.0 / alpha);
    let mut breaks: Vec<f64> = density.breaks().to_vec();
    breaks.extend([knee / 8.0, knee, 8.0 * knee]);
    if let Some(sat) = density.saturation_radius() {
        breaks.push(sat);
    }
    integrate_with_tail_bound(f, 0.0, &breaks, tail, &laplace_spec())
}

/// `exp(-2π ∫ λ(r) r γ(s P r^{-α}) dr)`.
pub fn laplace_radial(density: &RadialDensity, s: f64, power: f64, alpha: f64) -> Result<f64> {
    Ok((-laplace_exponent(density, s * power, alpha)?).exp())
}

/// `exp(-λ π C (s P)^{2/α})`, the transform of an unguarded Poisson field.
pub fn laplace_constant(lambda: f64, s: f64, power: f64, alpha: f64) -> f64 {
    (-lambda * PI * no_guard_constant(alpha) * (s * power).powf(2.0 / alpha)).exp()
}

/// Brute-force planar evaluation of `exp(-∫ λ(x) γ(s P |x - x_R|^{-α}) dx)`
/// in polar coordinates around the origin. `radial_breaks` lists radii (from
/// the origin) where `planar_density` is discontinuous. Test oracle only.
pub fn laplace_2d_oracle<D>(
    planar_density: D,
    lambda_max: f64,
    s: f64,
    power: f64,
    alpha: f64,
    x_r: Point2,
    radial_breaks: &[f64],
) -> Result<f64>
where
    D: Fn(Point2) -> f64,
{
    let k = s * power;
    if k == 0.0 || lambda_max == 0.0 {
        return Ok(1.0);
    }
    let inner = QuadratureSpec::new(1e-12, 1e-15).with_max_subdivisions(8000);
    let outer = QuadratureSpec::new(1e-10, 1e-11).with_max_subdivisions(8000);
    let center = x_r.angle();
    let rx = x_r.norm();
    let ring = |rho: f64| -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let g = |phi: f64| {
            let x = Point2::polar(rho, phi);
            planar_density(x) * k / (k + x.dist(x_r).powf(alpha))
        };
        let v = integrate_piecewise(g, center - PI, center + PI, &[center], &inner).expect("bounded ring integrand");
        rho * v
    };
    // Beyond 2|x_R| every point is at least ρ/2 from x_R.
    let tail = |cut: f64| {
        if cut < 2.0 * rx {
            f64::INFINITY
        } else {
            2.0 * PI * lambda_max * k * 2f64.powf(alpha) * cut.powf(2.0 - alpha) / (alpha - 2.0)
        }
    };
    let knee = k.powf(1.0 / alpha);
    let mut breaks = radial_breaks.to_vec();
    breaks.extend([rx, (rx - knee).max(0.0), rx + knee, 2.0 * rx]);
    let exponent = integrate_with_tail_bound(ring, 0.0, &breaks, tail, &outer)?;
    Ok((-exponent).exp())
}

/// Closed-form transform for the linear-ramp density `λ_u min(δ r, 1)`.
pub fn laplace_piecewise_closed(s: f64, delta: f64, config: &NetworkConfig) -> Result<f64> {
    if !(delta > 0.0) || !(s >= 0.0) {
        return Err(Error::invalid(format!("need delta > 0 and s >= 0, got {delta}, {s}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let alpha = config.alpha_u;
    let sp = s * config.p_u;
    let z = -1.0 / (sp * delta.powf(alpha));
    let f = |x: f64| hyp2f1_1b(x / alpha, z);
    let bracket = no_guard_constant(alpha) * sp.powf(2.0 / alpha) + (2.0 / 3.0 * f(3.0) - f(2.0)) / (delta * delta);
    Ok((-config.lambda_u * PI * bracket).exp())
}

/// Density around the receiver for the requested tier; UE densities are
/// tabulated for repeated Laplace evaluation.
pub fn tier_density(scenario: &Scenario, config: &NetworkConfig, tier: Tier) -> Result<RadialDensity> {
    match tier {
        Tier::Ap => Ok(ap_equivalent_density(scenario, config)),
        Tier::Ue => ue_equivalent_density(scenario, config).tabulated(DEFAULT_TABLE_POINTS, DEFAULT_TABLE_R_MIN),
    }
}

/// Coverage of a link of length `query.rho` ending at `x_R`: exact for AP
/// interferers, a lower bound for UE interferers.
pub fn coverage_probability(scenario: &Scenario, config: &NetworkConfig, query: &CoverageQuery) -> Result<f64> {
    config.validate()?;
    let density = tier_density(scenario, config, query.tier)?;
    let (p, alpha) = tier_params(config, query.tier);
    laplace_radial(&density, query.laplace_argument(config), p, alpha)
}

/// Coverage over a dB grid for a fixed density and link length.
pub fn coverage_curve(
    density: &RadialDensity,
    rho: f64,
    power: f64,
    alpha: f64,
    thetas_db: &[f64],
    provenance: Provenance,
    label: impl Into<String>,
) -> Result<CoverageCurve> {
    let values = thetas_db
        .iter()
        .map(|&db| laplace_radial(density, rho.powf(alpha) * db_to_linear(db) / power, power, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageCurve::analytic(label, provenance, thetas_db, values))
}

/// How the link length follows from the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkDistance {
    Fixed(f64),
    /// Transmitter at `x*`: `ρ = |x* - x_R|`.
    ServingAp,
    /// Transmitter at the origin: `ρ = |x_R|`.
    Origin,
}

impl LinkDistance {
    pub fn length(self, x_star: Point2, x_r: Point2) -> f64 {
        match self {
            LinkDistance::Fixed(rho) => rho,
            LinkDistance::ServingAp => x_star.dist(x_r),
            LinkDistance::Origin => x_r.norm(),
        }
    }
}

/// Route used for UE interferers when the receiver direction is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UeAngleRoute {
    /// One Laplace evaluation with the direction-averaged density (looser).
    AveragedDensity,
    /// Average of the per-direction lower bounds.
    PerAngle,
}

/// A family of links over which coverage is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomLink {
    pub norm_xstar: f64,
    pub norm_xr: f64,
    pub link: LinkDistance,
    /// Receiver direction uniform on `[-π, π)` relative to `x*`.
    pub average_angle: bool,
    /// `|x*|` Rayleigh distributed with mean `1/(2√λ_a)`; `norm_xr` is then
    /// read as a multiple of `|x*|`.
    pub average_xstar: bool,
    pub ue_route: UeAngleRoute,
}

impl RandomLink {
    pub fn fixed(norm_xstar: f64, norm_xr: f64, link: LinkDistance) -> Self {
        Self {
            norm_xstar,
            norm_xr,
            link,
            average_angle: false,
            average_xstar: false,
            ue_route: UeAngleRoute::PerAngle,
        }
    }

    pub fn uniform_angle(norm_xstar: f64, norm_xr: f64, link: LinkDistance) -> Self {
        Self {
            average_angle: true,
            ..Self::fixed(norm_xstar, norm_xr, link)
        }
    }

    pub fn with_route(mut self, route: UeAngleRoute) -> Self {
        self.ue_route = route;
        self
    }

    pub fn with_xstar_average(mut self) -> Self {
        self.average_xstar = true;
        self
    }
}

fn random_link_inner(
    link: &RandomLink,
    norm_xstar: f64,
    norm_xr: f64,
    config: &NetworkConfig,
    tier: Tier,
    theta: f64,
) -> Result<f64> {
    let (p, alpha) = tier_params(config, tier);
    let x_star = Point2::new(norm_xstar, 0.0);
    let s_of = |rho: f64| rho.powf(alpha) * theta / p;
    if !link.average_angle || norm_xr == 0.0 {
        let x_r = Point2::new(norm_xr, 0.0);
        let sc = Scenario::canonical(norm_xstar, x_r)?;
        let density = match tier {
            Tier::Ap => ap_equivalent_density(&sc, config),
            Tier::Ue => ue_equivalent_density(&sc, config),
        };
        return laplace_radial(&density, s_of(link.link.length(x_star, x_r)), p, alpha);
    }
    let spec = QuadratureSpec::new(1e-8, 1e-12).with_max_subdivisions(2000);
    match (tier, link.ue_route) {
        (Tier::Ap, _) => {
            // The AP density depends on |x_R| only.
            let density = ap_equivalent_density(&Scenario::canonical(norm_xstar, Point2::new(norm_xr, 0.0))?, config);
            let g = |psi: f64| {
                let rho = link.link.length(x_star, Point2::polar(norm_xr, psi));
                laplace_radial(&density, s_of(rho), p, alpha).expect("Laplace of a bounded density")
            };
            Ok(integrate_finite(g, 0.0, PI, &spec)? / PI)
        }
        (Tier::Ue, UeAngleRoute::AveragedDensity) => {
            let rho = match link.link {
                LinkDistance::ServingAp => {
                    return Err(Error::invalid(
                        "direction-averaged UE density needs a link length independent of the receiver direction",
                    ))
                }
                other => other.length(x_star, Point2::new(norm_xr, 0.0)),
            };
            let density = ue_density_angular_average(norm_xr, norm_xstar, config)?
                .tabulated(DEFAULT_TABLE_POINTS, DEFAULT_TABLE_R_MIN)?;
            laplace_radial(&density, s_of(rho), p, alpha)
        }
        (Tier::Ue, UeAngleRoute::PerAngle) => {
            let mut acc = 0.0;
            for (psi, w) in kronrod_nodes(0.0, PI, DIRECTION_PANELS) {
                let x_r = Point2::polar(norm_xr, psi);
                let density = tier_density(&Scenario::canonical(norm_xstar, x_r)?, config, Tier::Ue)?;
                acc += w * laplace_radial(&density, s_of(link.link.length(x_star, x_r)), p, alpha)?;
            }
            Ok(acc / PI)
        }
    }
}

/// Coverage averaged over the randomness declared in `link`.
pub fn coverage_avg_random_link(link: &RandomLink, config: &NetworkConfig, tier: Tier, theta: f64) -> Result<f64> {
    config.validate()?;
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("theta must be > 0, got {theta}")));
    }
    if !link.average_xstar {
        return random_link_inner(link, link.norm_xstar, link.norm_xr, config, tier, theta);
    }
    let la = config.lambda_a;
    let spec = QuadratureSpec::new(1e-7, 1e-10).with_max_subdivisions(2000);
    let g = |t: f64| {
        let pdf = 2.0 * PI * la * t * (-la * PI * t * t).exp();
        if pdf == 0.0 {
            return 0.0;
        }
        pdf * random_link_inner(link, t, link.norm_xr * t, config, tier, theta).expect("inner coverage")
    };
    let tail = |cut: f64| (-la * PI * cut * cut).exp();
    integrate_with_tail_bound(g, 0.0, &[0.5 / la.sqrt(), 1.0 / la.sqrt()], tail, &spec)
}

/// Coverage curve for a random link with a fixed `|x*|`. Direction
/// averages use a fixed composite Kronrod rule so that each per-direction
/// density is built once for all thresholds.
pub fn coverage_curve_random_link(
    link: &RandomLink,
    config: &NetworkConfig,
    tier: Tier,
    thetas_db: &[f64],
    label: impl Into<String>,
) -> Result<CoverageCurve> {
    config.validate()?;
    if link.average_xstar {
        let values = thetas_db
            .iter()
            .map(|&db| coverage_avg_random_link(link, config, tier, db_to_linear(db)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(CoverageCurve::analytic(label, Provenance::analytic_for(tier), thetas_db, values));
    }
    let (p, alpha) = tier_params(config, tier);
    let x_star = Point2::new(link.norm_xstar, 0.0);
    let per_density = |density: &RadialDensity, rho: f64| -> Result<Vec<f64>> {
        thetas_db
            .iter()
            .map(|&db| laplace_radial(density, rho.powf(alpha) * db_to_linear(db) / p, p, alpha))
            .collect()
    };
    let angular = link.average_angle && link.norm_xr > 0.0;
    let values = match (tier, angular, link.ue_route) {
        (_, false, _) => {
            let x_r = Point2::new(link.norm_xr, 0.0);
            let sc = Scenario::canonical(link.norm_xstar, x_r)?;
            per_density(&tier_density(&sc, config, tier)?, link.link.length(x_star, x_r))?
        }
        (Tier::Ue, true, UeAngleRoute::AveragedDensity) => {
            let rho = match link.link {
                LinkDistance::ServingAp => {
                    return Err(Error::invalid(
                        "direction-averaged UE density needs a link length independent of the receiver direction",
                    ))
                }
                other => other.length(x_star, Point2::new(link.norm_xr, 0.0)),
            };
            let density = ue_density_angular_average(link.norm_xr, link.norm_xstar, config)?
                .tabulated(DEFAULT_TABLE_POINTS, DEFAULT_TABLE_R_MIN)?;
            per_density(&density, rho)?
        }
        (_, true, _) => {
            let ap_density = ap_equivalent_density(&Scenario::canonical(link.norm_xstar, Point2::new(link.norm_xr, 0.0))?, config);
            let mut acc = vec![0.0; thetas_db.len()];
            for (psi, w) in kronrod_nodes(0.0, PI, DIRECTION_PANELS) {
                let x_r = Point2::polar(link.norm_xr, psi);
                let rho = link.link.length(x_star, x_r);
                let vals = match tier {
                    Tier::Ap => per_density(&ap_density, rho)?,
                    Tier::Ue => per_density(&tier_density(&Scenario::canonical(link.norm_xstar, x_r)?, config, Tier::Ue)?, rho)?,
                };
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += w * v / PI;
                }
            }
            acc
        }
    };
    Ok(CoverageCurve::analytic(label, Provenance::analytic_for(tier), thetas_db, values))
}

/// Where the guard region sits relative to a UE-interfered link of length
/// `ρ` with the transmitter at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardCase {
    /// No guard region: unthinned Poisson interferers.
    None,
    /// The transmitter at `o` is the AP owning the guard cell; receiver at `(ρ, 0)`.
    Transmitter,
    /// The receiver at `o` is the AP owning the guard cell.
    Receiver,
}

impl GuardCase {
    pub const ALL: [GuardCase; 3] = [GuardCase::None, GuardCase::Transmitter, GuardCase::Receiver];

    pub fn as_str(self) -> &'static str {
        match self {
            GuardCase::None => "no-guard",
            GuardCase::Transmitter => "tx-guard",
            GuardCase::Receiver => "rx-guard",
        }
    }

    /// Serving AP and receiver positions used for this case.
    pub fn scenario(self, rho: f64) -> Result<Scenario> {
        match self {
            GuardCase::None | GuardCase::Receiver => Scenario::canonical(0.0, Point2::ORIGIN),
            GuardCase::Transmitter => Scenario::canonical(0.0, Point2::new(rho, 0.0)),
        }
    }

    pub fn density(self, rho: f64, config: &NetworkConfig) -> Result<RadialDensity> {
        match self {
            GuardCase::None => Ok(RadialDensity::constant(config.lambda_u)),
            GuardCase::Transmitter => ue_equivalent_density(&self.scenario(rho)?, config)
                .tabulated(DEFAULT_TABLE_POINTS, DEFAULT_TABLE_R_MIN),
            GuardCase::Receiver => Ok(ue_density_exp_bound_curve(config)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{ue_density_bessel_bound, RadialDensity};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> NetworkConfig {
        NetworkConfig::default()
    }

    #[test]
    fn db_grid() {
        let g = default_theta_grid();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], -10.0);
        assert_eq!(*g.last().unwrap(), 20.0);
        assert!(theta_db_grid(0.0, 1.0, 0.0).is_err());
        assert_relative_eq!(db_to_linear(10.0), 10.0);
    }

    #[test]
    fn zero_argument_gives_one() {
        let d = RadialDensity::constant(3.0);
        assert_eq!(laplace_radial(&d, 0.0, 1.0, 4.0).unwrap(), 1.0);
        assert_eq!(laplace_piecewise_closed(0.0, 1.0, &cfg()).unwrap(), 1.0);
    }

    #[test]
    fn constant_density_matches_closed_form() {
        for &alpha in &[2.5, 3.0, 4.0, 5.5] {
            for &s in &[1e-3, 0.1, 1.0, 30.0] {
                let d = RadialDensity::constant(1.7);
                let v = laplace_radial(&d, s, 2.0, alpha).unwrap();
                assert_relative_eq!(v, laplace_constant(1.7, s, 2.0, alpha), max_relative = 1e-8);
            }
        }
        assert_relative_eq!(no_guard_constant(4.0), PI / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn steep_ramp_approaches_no_guard_limit() {
        let c = cfg();
        for &s in &[0.1, 1.0, 10.0] {
            let v = laplace_piecewise_closed(s, 1e6, &c).unwrap();
            assert_relative_eq!(v, laplace_constant(1.0, s, 1.0, 4.0), max_relative = 1e-6);
        }
    }

    #[test]
    fn ramp_closed_form_matches_quadrature() {
        let c = NetworkConfig { lambda_u: 1.3, ..cfg() };
        for &delta in &[0.5, 1.13118, 3.0] {
            let d = RadialDensity::piecewise_linear(c.lambda_u, delta);
            for k in -2..=2 {
                let s = 10f64.powi(k);
                let closed = laplace_piecewise_closed(s, delta, &c).unwrap();
                let quad = laplace_radial(&d, s, c.p_u, c.alpha_u).unwrap();
                assert_relative_eq!(closed, quad, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn hole_density_matches_planar_oracle() {
        let c = cfg();
        let sc = Scenario::canonical(0.5, Point2::new(0.5, 0.0)).unwrap();
        let d = ap_equivalent_density(&sc, &c);
        let hole = |x: Point2| if x.norm() >= 0.5 { 1.0 } else { 0.0 };
        let radial = laplace_radial(&d, 1.0, 1.0, 4.0).unwrap();
        let planar = laplace_2d_oracle(hole, 1.0, 1.0, 1.0, 4.0, sc.x_r(), &[0.5]).unwrap();
        assert_relative_eq!(radial, planar, max_relative = 1e-8);
    }

    #[test]
    fn symmetric_density_matches_planar_oracle_off_center() {
        let x_r = Point2::polar(0.8, 2.0);
        let d = RadialDensity::piecewise_linear(1.0, 1.5);
        let planar = |x: Point2| (1.5 * x.dist(x_r)).min(1.0);
        for &s in &[0.2, 2.0] {
            let radial = laplace_radial(&d, s, 1.0, 4.0).unwrap();
            let oracle = laplace_2d_oracle(planar, 1.0, s, 1.0, 4.0, x_r, &[]).unwrap();
            assert_relative_eq!(radial, oracle, max_relative = 1e-6);
        }
        assert_eq!(laplace_2d_oracle(|_| 0.0, 0.0, 1.0, 1.0, 4.0, x_r, &[]).unwrap(), 1.0);
    }

    #[test]
    fn low_threshold_gives_full_coverage() {
        let c = cfg();
        let sc = Scenario::canonical(0.5, Point2::ORIGIN).unwrap();
        let q = CoverageQuery::new(0.5, 1e-12, Tier::Ap).unwrap();
        assert!(coverage_probability(&sc, &c, &q).unwrap() > 1.0 - 1e-9);
        assert!(CoverageQuery::new(0.0, 1.0, Tier::Ap).is_err());
    }

    #[test]
    fn ue_coverage_bound_chain_at_serving_ap() {
        // Larger density pointwise gives smaller coverage.
        let c = cfg();
        let sc = Scenario::canonical(0.5, Point2::new(0.5, 0.0)).unwrap();
        let jensen = tier_density(&sc, &c, Tier::Ue).unwrap();
        let exp_bound = ue_density_exp_bound_curve(&c);
        for &db in &[-10.0, 0.0, 10.0, 20.0] {
            let s = 0.5f64.powi(4) * db_to_linear(db);
            let lo = laplace_radial(&exp_bound, s, 1.0, 4.0).unwrap();
            let mid = laplace_radial(&jensen, s, 1.0, 4.0).unwrap();
            assert!(lo <= mid, "{db}: {lo} vs {mid}");
        }
    }

    #[test]
    fn bessel_bound_coverage_below_jensen_with_receiver_at_origin() {
        let c = cfg();
        let sc = Scenario::canonical(0.5, Point2::ORIGIN).unwrap();
        let jensen = tier_density(&sc, &c, Tier::Ue).unwrap();
        let bessel = ue_density_bessel_bound(&sc, &c);
        for &s in &[0.01, 0.1, 1.0] {
            assert!(laplace_radial(&bessel, s, 1.0, 4.0).unwrap() <= laplace_radial(&jensen, s, 1.0, 4.0).unwrap());
        }
    }

    #[test]
    fn moving_receiver_off_origin_crosses_over() {
        let c = cfg();
        let base = RandomLink::uniform_angle(0.5, 0.0, LinkDistance::ServingAp);
        let moved = RandomLink::uniform_angle(0.5, 0.25, LinkDistance::ServingAp);
        let at = |link: &RandomLink, db: f64| coverage_avg_random_link(link, &c, Tier::Ap, db_to_linear(db)).unwrap();
        assert!(at(&moved, -10.0) < at(&base, -10.0));
        assert!(at(&moved, 20.0) > at(&base, 20.0));
    }

    #[test]
    fn degenerate_angle_average_equals_fixed_link() {
        let c = cfg();
        let link = RandomLink::uniform_angle(0.5, 0.0, LinkDistance::ServingAp);
        let sc = Scenario::canonical(0.5, Point2::ORIGIN).unwrap();
        let q = CoverageQuery::new(0.5, 2.0, Tier::Ap).unwrap();
        assert_relative_eq!(
            coverage_avg_random_link(&link, &c, Tier::Ap, 2.0).unwrap(),
            coverage_probability(&sc, &c, &q).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn averaged_density_route_is_below_per_angle_average() {
        // exp is convex, so a single transform with the direction-averaged
        // density cannot exceed the mean of the per-direction transforms.
        let c = cfg();
        let link = RandomLink::uniform_angle(0.5, 0.5, LinkDistance::Origin);
        for &theta in &[0.3, 3.0] {
            let avg = coverage_avg_random_link(&link.with_route(UeAngleRoute::AveragedDensity), &c, Tier::Ue, theta).unwrap();
            let per = coverage_avg_random_link(&link.with_route(UeAngleRoute::PerAngle), &c, Tier::Ue, theta).unwrap();
            assert!(avg <= per + 1e-9, "{avg} vs {per}");
            assert!(per - avg < 0.05);
        }
    }

    #[test]
    fn curve_route_matches_pointwise_route() {
        let c = cfg();
        let link = RandomLink::uniform_angle(0.5, 0.5, LinkDistance::ServingAp);
        let grid = [-5.0, 5.0, 15.0];
        let curve = coverage_curve_random_link(&link, &c, Tier::Ap, &grid, "x").unwrap();
        assert_eq!(curve.provenance, Provenance::Analytic);
        for (p, &db) in curve.points.iter().zip(&grid) {
            let v = coverage_avg_random_link(&link, &c, Tier::Ap, db_to_linear(db)).unwrap();
            assert_relative_eq!(p.coverage, v, max_relative = 1e-7);
        }
    }

    #[test]
    fn guard_cases_order() {
        let c = cfg();
        let rho = 1.0;
        let vals: Vec<f64> = GuardCase::ALL
            .iter()
            .map(|g| laplace_radial(&g.density(rho, &c).unwrap(), rho.powi(4), 1.0, 4.0).unwrap())
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2], "{vals:?}");
    }

    #[test]
    fn scale_invariance() {
        let kappa: f64 = 4.0;
        let c = NetworkConfig { lambda_u: 2.0, ..cfg() };
        let cs = NetworkConfig {
            lambda_a: c.lambda_a * kappa,
            lambda_u: c.lambda_u * kappa,
            ..c
        };
        let shrink = 1.0 / kappa.sqrt();
        for tier in [Tier::Ap, Tier::Ue] {
            let sc = Scenario::canonical(0.5, Point2::polar(0.4, 1.0)).unwrap();
            let scs = Scenario::canonical(0.5 * shrink, Point2::polar(0.4 * shrink, 1.0)).unwrap();
            let q = CoverageQuery::new(0.7, 2.0, tier).unwrap();
            let qs = CoverageQuery::new(0.7 * shrink, 2.0, tier).unwrap();
            let a = coverage_probability(&sc, &c, &q).unwrap();
            let b = coverage_probability(&scs, &cs, &qs).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn ap_coverage_monotone(rs in 0.0f64..1.5, xr in 0.0f64..2.0, ang in -PI..PI, rho in 0.05f64..2.0, db in -10.0f64..20.0) {
            let c = cfg();
            let sc = Scenario::with_receiver_polar(rs, xr, ang).unwrap();
            let at = |rho: f64, db: f64| coverage_probability(&sc, &c, &CoverageQuery::from_db(rho, db, Tier::Ap).unwrap()).unwrap();
            let v = at(rho, db);
            prop_assert!(v > 0.0 && v <= 1.0);
            prop_assert!(at(rho, db + 1.0) <= v + 1e-12);
            prop_assert!(at(rho * 1.1, db) <= v + 1e-12);
        }
    }
}
