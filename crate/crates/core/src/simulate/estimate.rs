use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::engine::{require_trials, run_trials, EstimateWithError, MeanAccumulator, SimWindow, TrialPlan};
use super::pattern::{poisson_count, sample_conditioned_aps, sample_hppp, vplp_ues, GuardCell, PointPattern};
use crate::coverage::{tier_params, CoverageQuery, GuardCase, RandomLink};
use crate::density::Tier;
use crate::error::{Error, Result};
use crate::geometry::{NetworkConfig, Point2, Scenario};

/// Interferer model used by the coverage estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McProcess {
    /// Poisson interferers (UEs thinned by the guard cell).
    Ppp,
    /// One UE per Voronoi cell outside the guard cell.
    Vplp,
}

/// Minimum trial count accepted by the coverage estimators.
pub const MIN_COVERAGE_TRIALS: usize = 100;
pub const MIN_HISTOGRAM_TRIALS: usize = 1000;

#[inline]
fn path_gain(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * alpha)
    }
}

#[inline]
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// `|x*|` drawn from its Rayleigh law, mean `1/(2√λ_a)`.
fn rayleigh_xstar<R: Rng + ?Sized>(lambda_a: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (-u.ln() / (PI * lambda_a)).sqrt()
}

struct TrialLink {
    norm_xstar: f64,
    x_r: Point2,
    rho: f64,
}

fn draw_link<R: Rng + ?Sized>(link: &RandomLink, lambda_a: f64, rng: &mut R) -> TrialLink {
    let (norm_xstar, norm_xr) = if link.average_xstar {
        let t = rayleigh_xstar(lambda_a, rng);
        (t, link.norm_xr * t)
    } else {
        (link.norm_xstar, link.norm_xr)
    };
    let angle = if link.average_angle {
        PI * (2.0 * rng.random::<f64>() - 1.0)
    } else {
        0.0
    };
    let x_r = Point2::polar(norm_xr, angle);
    TrialLink {
        norm_xstar,
        x_r,
        rho: link.link.length(Point2::new(norm_xstar, 0.0), x_r),
    }
}

/// Interference at `x_r` from one trial's interferers, each with its own
/// unit-mean exponential gain.
fn interference<R: Rng + ?Sized>(
    aps: &PointPattern,
    x_r: Point2,
    config: &NetworkConfig,
    tier: Tier,
    process: McProcess,
    window: &SimWindow,
    rng: &mut R,
) -> Result<f64> {
    let (p, alpha) = tier_params(config, tier);
    let mut sum = 0.0;
    match (tier, process) {
        (Tier::Ap, McProcess::Ppp) => {
            for x in &aps.points {
                sum += exp1(rng) * path_gain(x.dist_sq(x_r), alpha);
            }
        }
        (Tier::Ap, McProcess::Vplp) => {
            return Err(Error::invalid("the VPLP model applies to UE interferers only"));
        }
        (Tier::Ue, McProcess::Ppp) => {
            let cell = GuardCell::from_pattern(aps, config.lambda_a)?;
            let n = poisson_count(config.lambda_u * window.area(), rng)?;
            for _ in 0..n {
                let y = window.sample_point(rng);
                let g = exp1(rng);
                if !cell.contains(y) {
                    sum += g * path_gain(y.dist_sq(x_r), alpha);
                }
            }
        }
        (Tier::Ue, McProcess::Vplp) => {
            for y in &vplp_ues(aps, config.lambda_a, rng)?.points {
                sum += exp1(rng) * path_gain(y.dist_sq(x_r), alpha);
            }
        }
    }
    Ok(p * sum)
}

#[allow(clippy::too_many_arguments)]
fn coverage_trial(
    rng: &mut ChaCha8Rng,
    link: &RandomLink,
    config: &NetworkConfig,
    tier: Tier,
    process: McProcess,
    window: &SimWindow,
    thetas: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let l = draw_link(link, config.lambda_a, rng);
    if !(l.rho > 0.0) {
        return Err(Error::invalid("link length must be > 0"));
    }
    let aps = sample_conditioned_aps(l.norm_xstar, config, window, rng)?;
    let (p, alpha) = tier_params(config, tier);
    let signal = p * exp1(rng) * path_gain(l.rho * l.rho, alpha);
    let i = interference(&aps, l.x_r, config, tier, process, window, rng)?;
    for (o, &th) in out.iter_mut().zip(thetas) {
        *o = (signal > th * i) as u8 as f64;
    }
    Ok(())
}

/// Coverage `P(SIR > θ)` for every linear threshold in `thetas`, using the
/// same realizations for all thresholds.
pub fn estimate_coverage_curve(
    link: &RandomLink,
    config: &NetworkConfig,
    tier: Tier,
    process: McProcess,
    thetas: &[f64],
    plan: &TrialPlan,
    window: &SimWindow,
) -> Result<Vec<EstimateWithError>> {
    config.validate()?;
    require_trials(plan, MIN_COVERAGE_TRIALS)?;
    if thetas.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("thresholds must be > 0"));
    }
    run_trials(plan, thetas.len(), |rng, out| {
        coverage_trial(rng, link, config, tier, process, window, thetas, out)
    })
}

/// Coverage for one fixed geometry and threshold in the default window.
pub fn estimate_coverage(
    scenario: &Scenario,
    config: &NetworkConfig,
    query: &CoverageQuery,
    plan: &TrialPlan,
    process: McProcess,
) -> Result<EstimateWithError> {
    config.validate()?;
    require_trials(plan, MIN_COVERAGE_TRIALS)?;
    let window = SimWindow::default_for(config.lambda_a);
    let thetas = [query.theta];
    let (x_r, ns, rho) = (scenario.x_r(), scenario.norm_xstar(), query.rho);
    let est = run_trials(plan, 1, |rng, out| {
        let aps = sample_conditioned_aps(ns, config, &window, rng)?;
        let (p, alpha) = tier_params(config, query.tier);
        let signal = p * exp1(rng) * path_gain(rho * rho, alpha);
        let i = interference(&aps, x_r, config, query.tier, process, &window, rng)?;
        out[0] = (signal > thetas[0] * i) as u8 as f64;
        Ok(())
    })?;
    Ok(est[0])
}

/// Paired estimates for the three guard placements of a UE-interfered link
/// of length `ρ` with the guard AP at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardCaseEstimates {
    /// Indexed like [`GuardCase::ALL`], one entry per threshold.
    pub coverage: [Vec<EstimateWithError>; 3],
    /// Per-realization differences: receiver-guard minus transmitter-guard.
    pub rx_minus_tx: Vec<EstimateWithError>,
    /// Transmitter-guard minus no guard.
    pub tx_minus_none: Vec<EstimateWithError>,
}

/// All three cases see the same APs, UEs, and gains.
pub fn estimate_guard_cases(
    rho: f64,
    config: &NetworkConfig,
    thetas: &[f64],
    plan: &TrialPlan,
    window: &SimWindow,
) -> Result<GuardCaseEstimates> {
    config.validate()?;
    require_trials(plan, MIN_COVERAGE_TRIALS)?;
    if !(rho > 0.0) {
        return Err(Error::invalid("link length must be > 0"));
    }
    let m = thetas.len();
    let (p, alpha) = tier_params(config, Tier::Ue);
    // without a guard the receiver position is immaterial; reuse (ρ, 0)
    let rx = [
        Point2::new(rho, 0.0),
        GuardCase::Transmitter.scenario(rho)?.x_r(),
        GuardCase::Receiver.scenario(rho)?.x_r(),
    ];
    let est = run_trials(plan, 5 * m, |rng, out| {
        let aps = sample_conditioned_aps(0.0, config, window, rng)?;
        let cell = GuardCell::from_pattern(&aps, config.lambda_a)?;
        let signal = p * exp1(rng) * path_gain(rho * rho, alpha);
        let mut i = [0.0f64; 3];
        let n = poisson_count(config.lambda_u * window.area(), rng)?;
        for _ in 0..n {
            let y = window.sample_point(rng);
            let g = exp1(rng);
            i[0] += g * path_gain(y.dist_sq(rx[0]), alpha);
            if !cell.contains(y) {
                i[1] += g * path_gain(y.dist_sq(rx[1]), alpha);
                i[2] += g * path_gain(y.dist_sq(rx[2]), alpha);
            }
        }
        for (k, &th) in thetas.iter().enumerate() {
            let c: [f64; 3] = std::array::from_fn(|j| (signal > th * p * i[j]) as u8 as f64);
            out[k] = c[0];
            out[m + k] = c[1];
            out[2 * m + k] = c[2];
            out[3 * m + k] = c[2] - c[1];
            out[4 * m + k] = c[1] - c[0];
        }
        Ok(())
    })?;
    let part = |j: usize| est[j * m..(j + 1) * m].to_vec();
    Ok(GuardCaseEstimates {
        coverage: [part(0), part(1), part(2)],
        rx_minus_tx: part(3),
        tx_minus_none: part(4),
    })
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("bin edges must be >= 0 and strictly increasing"));
    }
    Ok(())
}

/// Adds per-bin counts divided by annulus area to `out`.
fn bin_points(points: &[Point2], center: Point2, edges: &[f64], out: &mut [f64]) {
    let (lo, hi) = (edges[0], *edges.last().unwrap());
    for q in points {
        let r = q.dist(center);
        if r < lo || r >= hi {
            continue;
        }
        let b = edges.partition_point(|&e| e <= r) - 1;
        out[b] += 1.0;
    }
    for (b, o) in out.iter_mut().enumerate() {
        *o /= PI * (edges[b + 1] * edges[b + 1] - edges[b] * edges[b]);
    }
}

/// Empirical intensity per annulus `[edges[i], edges[i+1])` around `center`.
pub fn estimate_radial_density<I>(patterns: I, center: Point2, edges: &[f64]) -> Result<Vec<EstimateWithError>>
where
    I: IntoIterator<Item = PointPattern>,
{
    check_edges(edges)?;
    let bins = edges.len() - 1;
    let mut acc = vec![MeanAccumulator::default(); bins];
    let mut buf = vec![0.0; bins];
    for p in patterns {
        buf.iter_mut().for_each(|v| *v = 0.0);
        bin_points(&p.points, center, edges, &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            a.push(*v);
        }
    }
    if acc[0].count() < MIN_HISTOGRAM_TRIALS as u64 {
        return Err(Error::invalid(format!("need at least {MIN_HISTOGRAM_TRIALS} patterns")));
    }
    acc.iter().map(MeanAccumulator::estimate).collect()
}

/// Radial profile of the conditioned APs around `x_r`.
pub fn ap_radial_profile(
    scenario: &Scenario,
    config: &NetworkConfig,
    edges: &[f64],
    plan: &TrialPlan,
) -> Result<Vec<EstimateWithError>> {
    config.validate()?;
    check_edges(edges)?;
    require_trials(plan, MIN_HISTOGRAM_TRIALS)?;
    let x_r = scenario.x_r();
    let r_max = *edges.last().unwrap();
    let window = SimWindow::disk(Point2::ORIGIN, (x_r.norm() + r_max).max(scenario.norm_xstar()) * 1.0001)?;
    run_trials(plan, edges.len() - 1, |rng, out| {
        let aps = sample_conditioned_aps(scenario.norm_xstar(), config, &window, rng)?;
        bin_points(&aps.points, x_r, edges, out);
        Ok(())
    })
}

/// Radial profile around `x_r` of Poisson UEs left after guard thinning.
pub fn ue_radial_profile(
    scenario: &Scenario,
    config: &NetworkConfig,
    edges: &[f64],
    plan: &TrialPlan,
) -> Result<Vec<EstimateWithError>> {
    config.validate()?;
    check_edges(edges)?;
    require_trials(plan, MIN_HISTOGRAM_TRIALS)?;
    let x_r = scenario.x_r();
    let r_max = *edges.last().unwrap();
    let ue_window = SimWindow::disk(x_r, r_max)?;
    let ap_window = SimWindow::disk(
        Point2::ORIGIN,
        x_r.norm() + r_max + scenario.norm_xstar() + 6.0 / config.lambda_a.sqrt(),
    )?;
    run_trials(plan, edges.len() - 1, |rng, out| {
        let aps = sample_conditioned_aps(scenario.norm_xstar(), config, &ap_window, rng)?;
        let cell = GuardCell::from_pattern(&aps, config.lambda_a)?;
        let mut ues = sample_hppp(config.lambda_u, &ue_window, rng)?.points;
        ues.retain(|&y| !cell.contains(y));
        bin_points(&ues, x_r, edges, out);
        Ok(())
    })
}

const CELL_AREA_DIRECTIONS: usize = 256;

/// Area of the Voronoi cell of `x*`, as `½∮ρ(u)² du` over the boundary
/// distance `ρ(u)` on a randomly offset uniform direction grid (which
/// keeps the estimate unbiased).
fn cell_area_once<R: Rng + ?Sized>(x_star: Point2, aps: &[Point2], edge: f64, rng: &mut R) -> f64 {
    let mut near: Vec<(f64, Point2)> = aps
        .iter()
        .map(|&x| {
            let v = x - x_star;
            (v.norm(), v)
        })
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0));
    let offset = rng.random::<f64>();
    let step = 2.0 * PI / CELL_AREA_DIRECTIONS as f64;
    let mut sum = 0.0;
    for k in 0..CELL_AREA_DIRECTIONS {
        let t = (k as f64 + offset) * step;
        let u = Point2::new(t.cos(), t.sin());
        let mut best = edge;
        for &(d, v) in &near {
            // the bisector with an AP at distance d is at least d/2 away
            if 0.5 * d >= best {
                break;
            }
            let c = v.dot(u);
            if c > 0.0 {
                best = best.min(0.5 * d * d / c);
            }
        }
        sum += best * best;
    }
    0.5 * sum * step
}

/// Mean area of the guard cell given `|x*|`.
pub fn estimate_cell_area(norm_xstar: f64, config: &NetworkConfig, plan: &TrialPlan) -> Result<EstimateWithError> {
    config.validate()?;
    require_trials(plan, MIN_HISTOGRAM_TRIALS)?;
    let margin = 12.0 / config.lambda_a.sqrt();
    let window = SimWindow::disk(Point2::ORIGIN, norm_xstar + margin)?;
    let x_star = Point2::new(norm_xstar, 0.0);
    let est = run_trials(plan, 1, |rng, out| {
        let aps = sample_conditioned_aps(norm_xstar, config, &window, rng)?;
        out[0] = cell_area_once(x_star, &aps.points, margin, rng);
        Ok(())
    })?;
    Ok(est[0])
}

/// Probability that `x` lies in the guard cell.
pub fn estimate_pca(x: Point2, scenario: &Scenario, lambda_a: f64, plan: &TrialPlan) -> Result<EstimateWithError> {
    require_trials(plan, 2)?;
    let config = NetworkConfig {
        lambda_a,
        ..NetworkConfig::default()
    };
    config.validate()?;
    let x_star = scenario.x_star();
    let d2 = x.dist_sq(x_star);
    let window = SimWindow::disk(Point2::ORIGIN, x.norm() + d2.sqrt() + scenario.norm_xstar() + 1.0)?;
    let est = run_trials(plan, 1, |rng, out| {
        let aps = sample_conditioned_aps(scenario.norm_xstar(), &config, &window, rng)?;
        out[0] = aps.points.iter().all(|y| y.dist_sq(x) >= d2) as u8 as f64;
        Ok(())
    })?;
    Ok(est[0])
}

/// Mean of `|x*|` and the frequency of `|x*| > 3/(2√λ_a)` over
/// unconditioned Poisson APs.
pub fn estimate_nearest_distance(config: &NetworkConfig, plan: &TrialPlan) -> Result<[EstimateWithError; 2]> {
    config.validate()?;
    let reach = 8.0 / config.lambda_a.sqrt();
    let far = 1.5 / config.lambda_a.sqrt();
    let window = SimWindow::disk(Point2::ORIGIN, reach)?;
    let est = run_trials(plan, 2, |rng, out| {
        let aps = sample_hppp(config.lambda_a, &window, rng)?;
        let d = aps.points.iter().map(|p| p.norm()).fold(reach, f64::min);
        out[0] = d;
        out[1] = (d > far) as u8 as f64;
        Ok(())
    })?;
    Ok([est[0], est[1]])
}
