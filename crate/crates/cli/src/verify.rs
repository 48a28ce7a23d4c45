//! Acceptance checks. Every tolerance and trial count is pinned below.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use vguard::coverage::{
    coverage_curve_random_link, db_to_linear, default_theta_grid, laplace_2d_oracle, laplace_piecewise_closed,
    laplace_radial, LinkDistance, RandomLink, UeAngleRoute,
};
use vguard::density::{
    ap_equivalent_density, asymptotic_law, average_cell_area, fit_tightest_piecewise_delta, optimal_relay_radius,
    relay_coefficient, ue_density_bessel_bound, ue_density_exp_bound, ue_equivalent_density, RadialDensity, Tier,
};
use vguard::geometry::{NetworkConfig, Point2, Scenario};
use vguard::simulate::{
    ap_radial_profile, estimate_cell_area, estimate_coverage_curve, estimate_guard_cases, estimate_nearest_distance,
    EstimateWithError, McProcess, SimWindow, TrialPlan,
};

use crate::config::{ExperimentId, ExperimentSpec};
use crate::error::{CliError, CliResult};
use crate::experiment::{run_experiment, series_seed};

/// Standard errors allowed between a Monte Carlo estimate and its reference.
pub const Z_MAX: f64 = 3.0;

pub const C1_TRIALS: usize = 100_000;
pub const C1_BIN_WIDTH_DIV: f64 = 20.0;
pub const C1_BINS: usize = 60;
pub const C1_RUNTIME_S: f64 = 120.0;
/// Required shrinkage of residual/r² from r = 1e-1 down to r = 1e-3.
pub const C2_DECAY: f64 = 0.05;
pub const C3_REL_TOL: f64 = 1e-5;
pub const C3_RUNTIME_S: f64 = 60.0;
pub const C4_TRIALS: usize = 100_000;
pub const C5_TRIALS: usize = 20_000;
pub const C5_TRIALS_DENSE_UES: usize = 3_000;
pub const C5_MAX_GAP: f64 = 0.03;
pub const C6_VPLP_TRIALS: usize = 2_000;
/// Slack on density orderings, relative to `λ_u`, for quadrature round-off.
pub const C7_ORDER_SLACK: f64 = 1e-9;
pub const C7_EQUALITY_TOL: f64 = 1e-8;
pub const C8_BAND: f64 = 0.1;
pub const C8_RUNTIME_S: f64 = 60.0;
/// Target as published, to seven digits, not `FRAC_1_SQRT_2`.
#[allow(clippy::approx_constant)]
pub const C9_RADIUS: f64 = 0.7071068;
pub const C9_TOL: f64 = 1e-6;
pub const C10_DELTA: f64 = 1.13118;
pub const C10_TOL: f64 = 1e-3;
pub const C11_REL_TOL: f64 = 1e-6;
pub const C12_TRIALS: usize = 4_000;
pub const C13_TRIALS: usize = 20_000;
pub const C14_TRIALS: usize = 100_000;
pub const C14_MEAN_REL_TOL: f64 = 0.01;
pub const C14_TAIL: f64 = 8.5e-4;
pub const C15_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Analytic,
    Mc,
    All,
}

impl Suite {
    pub fn criteria(self) -> Vec<u8> {
        const ANALYTIC: [u8; 7] = [2, 3, 7, 8, 9, 10, 11];
        match self {
            Suite::Analytic => ANALYTIC.to_vec(),
            Suite::Mc => (1..=15).filter(|c| !ANALYTIC.contains(c)).collect(),
            Suite::All => (1..=15).collect(),
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "analytic" => Ok(Suite::Analytic),
            "mc" => Ok(Suite::Mc),
            "all" => Ok(Suite::All),
            _ => Err(CliError::usage(format!("unknown suite `{s}` (expected analytic, mc or all)"))),
        }
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "conditioned AP density matches simulation",
        2 => "AP density at the serving AP: residual/r^2 vanishes",
        3 => "radial Laplace transform matches planar oracle",
        4 => "AP coverage: analytic vs simulation, crossover present",
        5 => "UE lower bound under simulation, gap at most 0.03",
        6 => "one-UE-per-cell coverage not above Poisson coverage",
        7 => "UE density below its Bessel and exponential bounds",
        8 => "UE density small-r asymptotics",
        9 => "optimal relay radius and coefficient",
        10 => "tightest linear-ramp slope",
        11 => "linear-ramp Laplace closed form vs quadrature",
        12 => "mean guard-cell area vs simulation, increasing",
        13 => "guard placement ordering C >= B >= A",
        14 => "nearest-AP distance: mean and tail",
        15 => "fig7a reruns are byte-identical",
        _ => "unknown criterion",
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub passed: bool,
    pub measured: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion={:<2} status={} time_s={:.1} title=\"{}\" measured=\"{}\"",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            title(self.id),
            self.measured
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces the named criterion's tolerances with NaN, which fails
    /// every comparison.
    pub inject_fail: Option<u8>,
    /// `vguard` executable for the rerun check; in-process when `None`.
    pub runner: Option<PathBuf>,
    /// Keep only these criteria of the suite; empty keeps all.
    pub only: Vec<u8>,
}

struct Outcome {
    passed: bool,
    measured: String,
}

pub struct Verifier {
    opts: VerifyOptions,
    uplink_ppp: OnceLock<Result<Vec<Vec<EstimateWithError>>, String>>,
}

/// `|x*|` values of the uplink comparison, `c/(2√λ_a)` for `c ∈ {1/2, 1, 2}`.
const UPLINK_XSTAR: [f64; 3] = [0.25, 0.5, 1.0];

/// Standard error of a coverage estimate. If every trial agreed the sample
/// value is 0, so fall back to the binomial one at the reference.
fn effective_stderr(e: &EstimateWithError, reference: f64) -> f64 {
    if e.stderr > 0.0 {
        return e.stderr;
    }
    let p = reference.clamp(0.0, 1.0);
    (p * (1.0 - p) / e.trials as f64).sqrt()
}

/// Signed `(estimate - reference)` in stderr units.
fn signed_z(e: &EstimateWithError, reference: f64) -> f64 {
    let d = e.mean - reference;
    let se = effective_stderr(e, reference);
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

fn max_by<T, F: Fn(&T) -> f64>(xs: &[T], f: F) -> f64 {
    xs.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

impl Verifier {
    pub fn new(opts: VerifyOptions) -> Self {
        Self {
            opts,
            uplink_ppp: OnceLock::new(),
        }
    }

    fn tol(&self, id: u8, v: f64) -> f64 {
        if self.opts.inject_fail == Some(id) {
            f64::NAN
        } else {
            v
        }
    }

    fn plan(&self, id: u8, k: u64, trials: usize) -> TrialPlan {
        TrialPlan::new(series_seed(self.opts.seed, 64 * id as u64 + k), trials)
    }

    pub fn run(&self, id: u8) -> CriterionReport {
        let start = Instant::now();
        let result = match id {
            1 => self.c1(),
            2 => self.c2(),
            3 => self.c3(),
            4 => self.c4(),
            5 => self.c5(),
            6 => self.c6(),
            7 => self.c7(),
            8 => self.c8(),
            9 => self.c9(),
            10 => self.c10(),
            11 => self.c11(),
            12 => self.c12(),
            13 => self.c13(),
            14 => self.c14(),
            15 => self.c15(),
            _ => Err(CliError::usage(format!("no criterion {id}"))),
        };
        let seconds = start.elapsed().as_secs_f64();
        let (passed, measured) = match result {
            Ok(o) => (o.passed, o.measured),
            Err(e) => (false, format!("error: {e}")),
        };
        // runtime limits are part of criteria 1, 3 and 8
        let limit = match id {
            1 => Some(self.tol(1, C1_RUNTIME_S)),
            3 => Some(self.tol(3, C3_RUNTIME_S)),
            8 => Some(self.tol(8, C8_RUNTIME_S)),
            _ => None,
        };
        let in_time = limit.is_none_or(|l| seconds <= l);
        CriterionReport {
            id,
            passed: passed && in_time,
            measured: if in_time {
                measured
            } else {
                format!("{measured}; runtime {seconds:.1}s over limit")
            },
            seconds,
        }
    }

    fn c1(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let z = self.tol(1, Z_MAX);
        let edges: Vec<f64> = (0..=C1_BINS).map(|i| i as f64 / C1_BIN_WIDTH_DIV).collect();
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for (k, xr) in [0.25, 0.5, 1.0].into_iter().enumerate() {
            let sc = Scenario::with_receiver_polar(0.5, xr, 1.0)?;
            let density = ap_equivalent_density(&sc, &cfg);
            let est = ap_radial_profile(&sc, &cfg, &edges, &self.plan(1, k as u64, C1_TRIALS))?;
            let mut m: f64 = 0.0;
            for (b, e) in est.iter().enumerate() {
                m = m.max(e.z_score(density.annulus_mean(edges[b], edges[b + 1])?));
            }
            parts.push(format!("|x_R|={xr}: max z {m:.2}"));
            worst = worst.max(m);
        }
        Ok(Outcome {
            passed: worst <= z,
            measured: parts.join(", "),
        })
    }

    fn c2(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let ns = 0.5;
        let d = ap_equivalent_density(&Scenario::canonical(ns, Point2::new(ns, 0.0))?, &cfg);
        let q: Vec<f64> = (0..=20)
            .map(|i| {
                let r = 1e-3 * 100f64.powf(i as f64 / 20.0);
                (d.value(r) - cfg.lambda_a * (0.5 + r / (2.0 * PI * ns))).abs() / (r * r)
            })
            .collect();
        let monotone = q.windows(2).all(|w| w[0] <= w[1]);
        let ratio = q[0] / q[20];
        Ok(Outcome {
            passed: monotone && ratio <= self.tol(2, C2_DECAY),
            measured: format!(
                "|res|/r^2 = {:.3e} at r=1e-3, {:.3e} at r=1e-1, ratio {ratio:.3e}, monotone {monotone}",
                q[0], q[20]
            ),
        })
    }

    fn c3(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let geometries = [(0.5, 0.25, 0.7), (0.5, 0.5, 0.0), (0.5, 1.0, 2.0), (1.0, 0.3, -1.0), (0.25, 2.0, 3.0)];
        let mut worst: f64 = 0.0;
        for (ns, xr, angle) in geometries {
            let sc = Scenario::with_receiver_polar(ns, xr, angle)?;
            let density = ap_equivalent_density(&sc, &cfg);
            let la = cfg.lambda_a;
            let hole = move |y: Point2| if y.norm() >= ns { la } else { 0.0 };
            for s in [1e-2, 1e-1, 1.0, 1e1, 1e2] {
                let a = laplace_radial(&density, s, cfg.p_a, cfg.alpha_a)?;
                let b = laplace_2d_oracle(hole, la, s, cfg.p_a, cfg.alpha_a, sc.x_r(), &[ns])?;
                worst = worst.max((a - b).abs() / b);
            }
        }
        Ok(Outcome {
            passed: worst <= self.tol(3, C3_REL_TOL),
            measured: format!("max relative difference {worst:.2e} over 25 points"),
        })
    }

    fn c4(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let z = self.tol(4, Z_MAX);
        let db = default_theta_grid();
        let lin: Vec<f64> = db.iter().map(|&d| db_to_linear(d)).collect();
        let window = SimWindow::default_for(cfg.lambda_a);
        let ratios = [0.0, 0.5, 1.0, 2.0];
        let mut analytic = Vec::new();
        let mut worst: f64 = 0.0;
        for (k, ratio) in ratios.into_iter().enumerate() {
            let link = RandomLink::uniform_angle(0.5, 0.5 * ratio, LinkDistance::ServingAp);
            let curve = coverage_curve_random_link(&link, &cfg, Tier::Ap, &db, "c4")?.values();
            let plan = self.plan(4, k as u64, C4_TRIALS);
            let est = estimate_coverage_curve(&link, &cfg, Tier::Ap, McProcess::Ppp, &lin, &plan, &window)?;
            worst = worst.max(est.iter().zip(&curve).map(|(e, &a)| signed_z(e, a).abs()).fold(0.0, f64::max));
            analytic.push(curve);
        }
        // The crossing is checked for |x_R| up to |x*|; at twice |x*| the
        // shortest possible link already matches the |x_R| = 0 one and the
        // curve stays below it on the whole grid (reported, not checked).
        let last = db.len() - 1;
        let crosses = |c: &[f64]| c[0] < analytic[0][0] && c[last] > analytic[0][last];
        let crossover = crosses(&analytic[1]) && crosses(&analytic[2]);
        let ends = ratios
            .iter()
            .zip(&analytic)
            .map(|(r, c)| format!("{r}: {:.3e}/{:.3e}", c[0], c[last]))
            .collect::<Vec<_>>()
            .join(", ");
        Ok(Outcome {
            passed: worst <= z && crossover,
            measured: format!(
                "max z {worst:.2}; crossover for ratios 0.5 and 1: {crossover}; ratio 2 crosses: {}; coverage at -10/20 dB by ratio {ends}",
                crosses(&analytic[3])
            ),
        })
    }

    fn uplink_ppp(&self) -> CliResult<Vec<Vec<EstimateWithError>>> {
        self.uplink_ppp
            .get_or_init(|| {
                let cfg = NetworkConfig::default();
                let lin: Vec<f64> = default_theta_grid().iter().map(|&d| db_to_linear(d)).collect();
                let window = SimWindow::default_for(cfg.lambda_a);
                UPLINK_XSTAR
                    .iter()
                    .enumerate()
                    .map(|(k, &ns)| {
                        let link = RandomLink::fixed(ns, ns, LinkDistance::Origin);
                        let plan = self.plan(5, 16 + k as u64, C5_TRIALS);
                        estimate_coverage_curve(&link, &cfg, Tier::Ue, McProcess::Ppp, &lin, &plan, &window)
                    })
                    .collect::<vguard::Result<Vec<_>>>()
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(|e| CliError::Core(vguard::Error::Config(e)))
    }

    /// `(worst bound excess in stderr units, max gap)` of a bound below an estimate.
    fn bound_gap(bound: &[f64], est: &[EstimateWithError]) -> (f64, f64) {
        let mut excess: f64 = f64::NEG_INFINITY;
        let mut gap: f64 = f64::NEG_INFINITY;
        for (&b, e) in bound.iter().zip(est) {
            excess = excess.max(-signed_z(e, b));
            gap = gap.max(e.mean - b);
        }
        (excess, gap)
    }

    fn c5(&self) -> CliResult<Outcome> {
        let z = self.tol(5, Z_MAX);
        let max_gap = self.tol(5, C5_MAX_GAP);
        let db = default_theta_grid();
        let lin: Vec<f64> = db.iter().map(|&d| db_to_linear(d)).collect();
        let mut passed = true;
        let mut parts = Vec::new();
        for (dense, trials) in [(false, C5_TRIALS), (true, C5_TRIALS_DENSE_UES)] {
            let cfg = NetworkConfig {
                lambda_u: if dense { 10.0 } else { 1.0 },
                ..NetworkConfig::default()
            };
            let window = SimWindow::default_for(cfg.lambda_a);
            for (k, ratio) in [0.5, 1.0, 2.0].into_iter().enumerate() {
                let link = RandomLink::uniform_angle(0.5, 0.5 * ratio, LinkDistance::Origin)
                    .with_route(UeAngleRoute::AveragedDensity);
                let bound = coverage_curve_random_link(&link, &cfg, Tier::Ue, &db, "c5")?.values();
                let plan = self.plan(5, k as u64 + if dense { 8 } else { 0 }, trials);
                let est = estimate_coverage_curve(&link, &cfg, Tier::Ue, McProcess::Ppp, &lin, &plan, &window)?;
                let (excess, gap) = Self::bound_gap(&bound, &est);
                let tag = if dense { "7b" } else { "7a" };
                parts.push(format!("{tag} ratio {ratio}: excess {excess:.2}σ gap {gap:.4}"));
                passed &= excess <= z;
                if !dense {
                    passed &= gap <= max_gap;
                }
            }
        }
        let cfg = NetworkConfig::default();
        for (ns, est) in UPLINK_XSTAR.iter().zip(self.uplink_ppp()?) {
            let link = RandomLink::fixed(*ns, *ns, LinkDistance::Origin);
            let bound = coverage_curve_random_link(&link, &cfg, Tier::Ue, &db, "c5")?.values();
            let (excess, gap) = Self::bound_gap(&bound, &est);
            parts.push(format!("uplink |x*| {ns}: excess {excess:.2}σ gap {gap:.4}"));
            passed &= excess <= z && gap <= max_gap;
        }
        Ok(Outcome {
            passed,
            measured: parts.join("; "),
        })
    }

    fn c6(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let z = self.tol(6, Z_MAX);
        let lin: Vec<f64> = default_theta_grid().iter().map(|&d| db_to_linear(d)).collect();
        let window = SimWindow::default_for(cfg.lambda_a);
        let mut worst: f64 = f64::NEG_INFINITY;
        let mut parts = Vec::new();
        for (k, (ns, ppp)) in UPLINK_XSTAR.iter().zip(self.uplink_ppp()?).enumerate() {
            let link = RandomLink::fixed(*ns, *ns, LinkDistance::Origin);
            let plan = self.plan(6, k as u64, C6_VPLP_TRIALS);
            let vplp = estimate_coverage_curve(&link, &cfg, Tier::Ue, McProcess::Vplp, &lin, &plan, &window)?;
            let m = vplp
                .iter()
                .zip(&ppp)
                .map(|(v, p)| {
                    let se = v.stderr.hypot(p.stderr);
                    let d = v.mean - p.mean;
                    if se > 0.0 {
                        d / se
                    } else if d > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max);
            parts.push(format!("|x*| {ns}: max (vplp - ppp)/se {m:.2}"));
            worst = worst.max(m);
        }
        Ok(Outcome {
            passed: worst <= z,
            measured: parts.join(", "),
        })
    }

    fn c7(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let slack = self.tol(7, C7_ORDER_SLACK) * cfg.lambda_u;
        let eq = self.tol(7, C7_EQUALITY_TOL) * cfg.lambda_u;
        let scenarios = [
            Scenario::canonical(0.0, Point2::ORIGIN)?,
            Scenario::canonical(0.0, Point2::new(0.75, 0.0))?,
            Scenario::canonical(0.5, Point2::new(0.5, 0.0))?,
            Scenario::with_receiver_polar(0.5, 1.0, PI / 2.0)?,
            Scenario::canonical(1.0, Point2::ORIGIN)?,
        ];
        let mut passed = true;
        let mut parts = Vec::new();
        for (k, sc) in scenarios.iter().enumerate() {
            let d = ue_equivalent_density(sc, &cfg);
            let bessel = ue_density_bessel_bound(sc, &cfg);
            let at_ap = sc.x_r() == sc.x_star();
            let centred = sc.norm_xstar() == 0.0;
            let mut over_bessel = 0;
            let mut over_exp = 0;
            let mut worst_excess: f64 = 0.0;
            let mut worst_eq: f64 = 0.0;
            for i in 1..=50 {
                let r = 0.06 * i as f64;
                let (v, b) = (d.value(r), bessel.value(r));
                worst_excess = worst_excess.max(v - b);
                if !(v <= b + slack) {
                    over_bessel += 1;
                }
                if centred {
                    worst_eq = worst_eq.max((v - b).abs());
                }
                if at_ap {
                    let e = ue_density_exp_bound(r, &cfg);
                    if !(v <= e + slack) {
                        over_exp += 1;
                    }
                    if centred {
                        worst_eq = worst_eq.max((v - e).abs());
                    }
                }
            }
            let ok = over_bessel == 0 && over_exp == 0 && (!centred || worst_eq <= eq);
            passed &= ok;
            let mut s = format!(
                "scenario {} (|x*| {}, x_R ({:.3}, {:.3})): {over_bessel}/50 above Bessel bound (max excess {worst_excess:.2e})",
                k + 1,
                sc.norm_xstar(),
                sc.x_r().x,
                sc.x_r().y
            );
            if at_ap {
                s.push_str(&format!(", {over_exp}/50 above exp bound"));
            }
            if centred {
                s.push_str(&format!(", max equality gap {worst_eq:.1e}"));
            }
            parts.push(s);
        }
        Ok(Outcome {
            passed,
            measured: parts.join("; "),
        })
    }

    fn c8(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let band = self.tol(8, C8_BAND);
        let cases = [
            Scenario::canonical(0.5, Point2::new(0.5, 0.0))?,
            Scenario::canonical(0.5, Point2::ORIGIN)?,
            Scenario::canonical(0.5, Point2::new(0.25, 0.0))?,
        ];
        let mut passed = true;
        let mut parts = Vec::new();
        for sc in &cases {
            let law = asymptotic_law(sc, &cfg, Tier::Ue)?;
            let d = ue_equivalent_density(sc, &cfg);
            let ratios: Vec<f64> = (0..=10)
                .map(|i| {
                    let r = 1e-3 * 10f64.powf(i as f64 / 10.0);
                    d.value(r) / law.eval(r)
                })
                .collect();
            let dev = max_by(&ratios, |q| (q - 1.0).abs());
            passed &= dev <= band;
            parts.push(format!(
                "{:?} (p={}): ratio in [{:.4}, {:.4}]",
                law.regime,
                law.power,
                ratios.iter().cloned().fold(f64::INFINITY, f64::min),
                max_by(&ratios, |q| *q)
            ));
        }
        Ok(Outcome {
            passed,
            measured: parts.join("; "),
        })
    }

    fn c9(&self) -> CliResult<Outcome> {
        let tol = self.tol(9, C9_TOL);
        let r = optimal_relay_radius(1.0)?;
        let c = relay_coefficient(r, 1.0);
        let target = 32.0 / (9.0 * PI);
        Ok(Outcome {
            passed: (r - C9_RADIUS).abs() <= tol && (c - target).abs() <= tol,
            measured: format!("radius {r:.7} (target {C9_RADIUS}), coefficient {c:.7} (target {target:.7})"),
        })
    }

    fn c10(&self) -> CliResult<Outcome> {
        let delta = fit_tightest_piecewise_delta(&NetworkConfig::default())?;
        Ok(Outcome {
            passed: (delta - C10_DELTA).abs() <= self.tol(10, C10_TOL),
            measured: format!("delta* = {delta:.6} (target {C10_DELTA})"),
        })
    }

    fn c11(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let ramp = RadialDensity::piecewise_linear(cfg.lambda_u, C10_DELTA);
        let mut worst: f64 = 0.0;
        for s in [1e-2, 1e-1, 1.0, 1e1, 1e2] {
            let closed = laplace_piecewise_closed(s, C10_DELTA, &cfg)?;
            let quad = laplace_radial(&ramp, s, cfg.p_u, cfg.alpha_u)?;
            worst = worst.max((closed - quad).abs() / quad);
        }
        Ok(Outcome {
            passed: worst <= self.tol(11, C11_REL_TOL),
            measured: format!("max relative difference {worst:.2e}"),
        })
    }

    fn c12(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let z = self.tol(12, Z_MAX);
        let mut analytic = Vec::new();
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for (k, c) in [0.0, 0.5, 1.0, 2.0, 3.0].into_iter().enumerate() {
            let ns = c / 2.0;
            let a = average_cell_area(ns, cfg.lambda_a)?;
            let e = estimate_cell_area(ns, &cfg, &self.plan(12, k as u64, C12_TRIALS))?;
            worst = worst.max(e.z_score(a));
            parts.push(format!("{c}: {a:.4} vs {:.4}±{:.4}", e.mean, e.stderr));
            analytic.push(a);
        }
        let increasing = analytic.windows(2).all(|w| w[1] > w[0]);
        Ok(Outcome {
            passed: worst <= z && increasing,
            measured: format!("max z {worst:.2}, increasing {increasing}; {}", parts.join(", ")),
        })
    }

    fn c13(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let z = self.tol(13, Z_MAX);
        let lin: Vec<f64> = default_theta_grid().iter().map(|&d| db_to_linear(d)).collect();
        let window = SimWindow::default_for(cfg.lambda_a);
        let mut worst: f64 = f64::NEG_INFINITY;
        let mut parts = Vec::new();
        for (k, rho) in [0.25, 0.5, 1.0].into_iter().enumerate() {
            let est = estimate_guard_cases(rho, &cfg, &lin, &self.plan(13, k as u64, C13_TRIALS), &window)?;
            // drop of a paired difference below zero, in stderr units
            let deficit = |e: &EstimateWithError| {
                if e.stderr > 0.0 {
                    -e.mean / e.stderr
                } else if e.mean < 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            };
            let m = max_by(&est.rx_minus_tx, deficit).max(max_by(&est.tx_minus_none, deficit));
            parts.push(format!(
                "rho {rho}: worst deficit {m:.2}σ, mean C-B {:.4}, mean B-A {:.4}",
                est.rx_minus_tx.iter().map(|e| e.mean).sum::<f64>() / lin.len() as f64,
                est.tx_minus_none.iter().map(|e| e.mean).sum::<f64>() / lin.len() as f64
            ));
            worst = worst.max(m);
        }
        Ok(Outcome {
            passed: worst <= z,
            measured: parts.join("; "),
        })
    }

    fn c14(&self) -> CliResult<Outcome> {
        let cfg = NetworkConfig::default();
        let [mean, tail] = estimate_nearest_distance(&cfg, &self.plan(14, 0, C14_TRIALS))?;
        let target = cfg.mean_nearest_distance();
        let rel = (mean.mean - target).abs() / target;
        let tz = tail.z_score(C14_TAIL);
        Ok(Outcome {
            passed: rel <= self.tol(14, C14_MEAN_REL_TOL) && tz <= self.tol(14, Z_MAX),
            measured: format!(
                "mean {:.5} (rel. error {rel:.2e}), tail {:.3e}±{:.1e} (z {tz:.2})",
                mean.mean, tail.mean, tail.stderr
            ),
        })
    }

    fn c15(&self) -> CliResult<Outcome> {
        let base = std::env::temp_dir().join(format!("vguard-rerun-{}", std::process::id()));
        let dirs = [base.join("a"), base.join("b")];
        let result = (|| -> CliResult<(Vec<u8>, Vec<u8>)> {
            for d in &dirs {
                self.fig7a_into(d)?;
            }
            Ok((std::fs::read(dirs[0].join("fig7a.csv"))?, std::fs::read(dirs[1].join("fig7a.csv"))?))
        })();
        let _ = std::fs::remove_dir_all(&base);
        let (a, b) = result?;
        let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
        Ok(Outcome {
            passed: !a.is_empty() && differing as f64 <= self.tol(15, 0.0),
            measured: format!("{} and {} bytes, {differing} differing", a.len(), b.len()),
        })
    }

    fn fig7a_into(&self, dir: &Path) -> CliResult<()> {
        match &self.opts.runner {
            Some(exe) => {
                let status = Command::new(exe)
                    .args(["run", "fig7a", "--seed", &C15_SEED.to_string(), "--output"])
                    .arg(dir)
                    .status()?;
                if !status.success() {
                    return Err(CliError::usage(format!("`{} run fig7a` exited with {status}", exe.display())));
                }
            }
            None => {
                let mut spec = ExperimentSpec::defaults(ExperimentId::Fig7a);
                spec.seed = C15_SEED;
                spec.output = dir.to_path_buf();
                run_experiment(&spec)?;
            }
        }
        Ok(())
    }
}

/// Runs the suite, calling `report` as each criterion finishes.
pub fn run_suite(suite: Suite, opts: VerifyOptions, mut report: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let only = opts.only.clone();
    let v = Verifier::new(opts);
    suite
        .criteria()
        .into_iter()
        .filter(|id| only.is_empty() || only.contains(id))
        .map(|id| {
            let r = v.run(id);
            report(&r);
            r
        })
        .collect()
}
