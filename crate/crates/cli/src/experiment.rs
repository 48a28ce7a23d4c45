//! Figure reproductions as CSV series.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rand::RngCore;
use vguard::coverage::{
    coverage_curve, coverage_curve_random_link, db_to_linear, laplace_piecewise_closed, theta_db_grid, GuardCase,
    LinkDistance, Provenance, RandomLink, UeAngleRoute,
};
use vguard::density::{
    ap_equivalent_density, average_cell_area, fit_tightest_piecewise_delta, ue_density_bessel_bound,
    ue_density_exp_bound_curve, ue_equivalent_density, RadialDensity, Tier,
};
use vguard::geometry::{NetworkConfig, Point2, Scenario};
use vguard::simulate::{
    ap_radial_profile, estimate_cell_area, estimate_coverage_curve, estimate_guard_cases, ue_radial_profile,
    EstimateWithError, McProcess, SimWindow, TrialPlan,
};

use crate::config::{AnglePolicy, ExperimentId, ExperimentSpec, LinkKind, ProcessKey};
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 5] = ["series", "theta_db_or_r", "value", "stderr", "params_hash"];

/// Radial grid for density plots: `0, 0.02, …, 3` in configured units.
const R_STEPS: usize = 150;
const R_STEP_DIV: f64 = 50.0;
/// Histogram bins of width 0.05 up to 3, in configured units.
const HIST_BINS: usize = 60;
const HIST_BIN_DIV: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// `provenance:label`.
    pub series: String,
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
    pub wall_time_s: f64,
}

/// Independent master seed for the `k`-th simulated series.
pub fn series_seed(master: u64, k: u64) -> u64 {
    TrialPlan::new(master, 0).rng(u64::MAX - k).next_u64()
}

struct Ctx<'a> {
    spec: &'a ExperimentSpec,
    net: NetworkConfig,
    unit: f64,
    rows: Vec<Row>,
    next_series: u64,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a ExperimentSpec) -> Self {
        Self {
            spec,
            net: spec.network(),
            unit: spec.distance_unit(),
            rows: Vec::new(),
            next_series: 0,
        }
    }

    fn plan(&mut self) -> TrialPlan {
        let seed = series_seed(self.spec.seed, self.next_series);
        self.next_series += 1;
        TrialPlan::new(seed, self.spec.trials)
    }

    fn simulate(&self) -> bool {
        self.spec.trials > 0
    }

    fn push(&mut self, provenance: Provenance, label: &str, x: f64, value: f64, stderr: f64) {
        self.rows.push(Row {
            series: format!("{}:{label}", provenance.as_str()),
            x,
            value,
            stderr,
        });
    }

    fn push_curve(&mut self, provenance: Provenance, label: &str, xs: &[f64], values: &[f64]) {
        for (&x, &v) in xs.iter().zip(values) {
            self.push(provenance, label, x, v, 0.0);
        }
    }

    fn push_estimates(&mut self, provenance: Provenance, label: &str, xs: &[f64], est: &[EstimateWithError], scale: f64) {
        for (&x, e) in xs.iter().zip(est) {
            self.push(provenance, label, x, e.mean * scale, e.stderr * scale);
        }
    }

    /// Density curve over the radial grid, divided by `norm`.
    fn push_density(&mut self, provenance: Provenance, label: &str, density: &RadialDensity, norm: f64) {
        for i in 0..=R_STEPS {
            let r = i as f64 / R_STEP_DIV;
            self.push(provenance, label, r, density.value(r * self.unit) / norm, 0.0);
        }
    }

    fn hist_edges(&self) -> (Vec<f64>, Vec<f64>) {
        let edges = (0..=HIST_BINS).map(|i| i as f64 / HIST_BIN_DIV * self.unit).collect();
        let mids = (0..HIST_BINS).map(|i| (i as f64 + 0.5) / HIST_BIN_DIV).collect();
        (edges, mids)
    }

    fn thetas(&self) -> CliResult<(Vec<f64>, Vec<f64>)> {
        let s = self.spec;
        let db = theta_db_grid(s.theta_db_min, s.theta_db_max, s.theta_db_step)?;
        let lin = db.iter().map(|&d| db_to_linear(d)).collect();
        Ok((db, lin))
    }

    fn window(&self) -> SimWindow {
        SimWindow::default_for(self.net.lambda_a)
    }
}

fn scenario_on_axis(norm_xstar: f64, norm_xr: f64) -> CliResult<Scenario> {
    Ok(Scenario::canonical(norm_xstar, Point2::new(norm_xr, 0.0))?)
}

fn ap_densities(ctx: &mut Ctx, pairs: &[(f64, f64)]) -> CliResult<()> {
    let la = ctx.net.lambda_a;
    for &(ns_out, ratio) in pairs {
        let label = format!("ap-density/xstar={ns_out}/ratio={ratio}");
        let ns = ns_out * ctx.unit;
        let sc = scenario_on_axis(ns, ratio * ns)?;
        ctx.push_density(Provenance::Analytic, &label, &ap_equivalent_density(&sc, &ctx.net), la);
        if ctx.simulate() {
            let (edges, mids) = ctx.hist_edges();
            let plan = ctx.plan();
            let est = ap_radial_profile(&sc, &ctx.net, &edges, &plan)?;
            ctx.push_estimates(Provenance::McPpp, &label, &mids, &est, 1.0 / la);
        }
    }
    Ok(())
}

fn ue_densities_at_ap(ctx: &mut Ctx) -> CliResult<()> {
    let lu = ctx.net.lambda_u;
    for ns_out in ctx.spec.xstar_norm.clone() {
        let label = format!("ue-density/xstar={ns_out}");
        let ns = ns_out * ctx.unit;
        let sc = scenario_on_axis(ns, ns)?;
        ctx.push_density(Provenance::Analytic, &label, &ue_equivalent_density(&sc, &ctx.net), lu);
        if ctx.simulate() {
            let (edges, mids) = ctx.hist_edges();
            let plan = ctx.plan();
            let est = ue_radial_profile(&sc, &ctx.net, &edges, &plan)?;
            ctx.push_estimates(Provenance::McPpp, &label, &mids, &est, 1.0 / lu);
        }
    }
    let delta = fit_tightest_piecewise_delta(&ctx.net)?;
    let ramp = RadialDensity::piecewise_linear(lu, delta);
    ctx.push_density(Provenance::AnalyticBound, "linear-ramp", &ramp, lu);
    let bound = ue_density_exp_bound_curve(&ctx.net);
    ctx.push_density(Provenance::AnalyticBound, "exp-bound", &bound, lu);
    Ok(())
}

fn ue_densities_at_origin(ctx: &mut Ctx) -> CliResult<()> {
    let lu = ctx.net.lambda_u;
    for ns_out in ctx.spec.xstar_norm.clone() {
        let ns = ns_out * ctx.unit;
        let sc = scenario_on_axis(ns, 0.0)?;
        let label = format!("ue-density/xstar={ns_out}");
        ctx.push_density(Provenance::Analytic, &label, &ue_equivalent_density(&sc, &ctx.net), lu);
        let label = format!("bessel-bound/xstar={ns_out}");
        ctx.push_density(Provenance::AnalyticBound, &label, &ue_density_bessel_bound(&sc, &ctx.net), lu);
    }
    Ok(())
}

fn cell_areas(ctx: &mut Ctx) -> CliResult<()> {
    let la = ctx.net.lambda_a;
    for ns_out in ctx.spec.xstar_norm.clone() {
        let ns = ns_out * ctx.unit;
        let area = average_cell_area(ns, la)?;
        ctx.push(Provenance::Analytic, "cell-area", ns_out, area * la, 0.0);
    }
    if ctx.simulate() {
        for ns_out in ctx.spec.xstar_norm.clone() {
            let plan = ctx.plan();
            let e = estimate_cell_area(ns_out * ctx.unit, &ctx.net, &plan)?;
            ctx.push(Provenance::McPpp, "cell-area", ns_out, e.mean * la, e.stderr * la);
        }
    }
    Ok(())
}

fn mc_provenance(p: McProcess) -> Provenance {
    match p {
        McProcess::Ppp => Provenance::McPpp,
        McProcess::Vplp => Provenance::McVplp,
    }
}

/// Analytic curve plus one simulated curve per requested process.
fn coverage_series(
    ctx: &mut Ctx,
    label: &str,
    link: &RandomLink,
    tier: Tier,
    processes: &[ProcessKey],
) -> CliResult<()> {
    let (db, lin) = ctx.thetas()?;
    let curve = coverage_curve_random_link(link, &ctx.net, tier, &db, label)?;
    ctx.push_curve(curve.provenance, label, &db, &curve.values());
    if ctx.simulate() {
        let window = ctx.window();
        for &p in processes {
            let p = McProcess::from(p);
            let plan = ctx.plan();
            let est = estimate_coverage_curve(link, &ctx.net, tier, p, &lin, &plan, &window)?;
            ctx.push_estimates(mc_provenance(p), label, &db, &est, 1.0);
        }
    }
    Ok(())
}

fn isotropic_receiver(ctx: &mut Ctx, tier: Tier, link: LinkDistance, route: UeAngleRoute) -> CliResult<()> {
    for ns_out in ctx.spec.xstar_norm.clone() {
        for ratio in ctx.spec.xr_ratio.clone() {
            let ns = ns_out * ctx.unit;
            let label = format!("coverage/xstar={ns_out}/ratio={ratio}");
            let l = RandomLink::uniform_angle(ns, ratio * ns, link).with_route(route);
            let processes = ctx.spec.process.clone();
            coverage_series(ctx, &label, &l, tier, &processes)?;
        }
    }
    Ok(())
}

fn uplink(ctx: &mut Ctx) -> CliResult<()> {
    let (db, _) = ctx.thetas()?;
    let delta = fit_tightest_piecewise_delta(&ctx.net)?;
    let (pu, alpha) = (ctx.net.p_u, ctx.net.alpha_u);
    for ns_out in ctx.spec.xstar_norm.clone() {
        let ns = ns_out * ctx.unit;
        let label = format!("coverage/xstar={ns_out}");
        let l = RandomLink::fixed(ns, ns, LinkDistance::Origin);
        let processes = ctx.spec.process.clone();
        coverage_series(ctx, &label, &l, Tier::Ue, &processes)?;
        let ramp = db
            .iter()
            .map(|&d| laplace_piecewise_closed(ns.powf(alpha) * db_to_linear(d) / pu, delta, &ctx.net))
            .collect::<vguard::Result<Vec<_>>>()?;
        ctx.push_curve(Provenance::AnalyticBound, &format!("linear-ramp/xstar={ns_out}"), &db, &ramp);
    }
    Ok(())
}

fn guard_cases(ctx: &mut Ctx) -> CliResult<()> {
    let (db, lin) = ctx.thetas()?;
    let (pu, alpha) = (ctx.net.p_u, ctx.net.alpha_u);
    let names = ["case-a", "case-b", "case-c"];
    for rho_out in ctx.spec.rho.clone() {
        let rho = rho_out * ctx.unit;
        for (case, name) in GuardCase::ALL.into_iter().zip(names) {
            let label = format!("{name}/rho={rho_out}");
            let provenance = match case {
                GuardCase::None => Provenance::Analytic,
                _ => Provenance::AnalyticBound,
            };
            let curve = coverage_curve(&case.density(rho, &ctx.net)?, rho, pu, alpha, &db, provenance, label.as_str())?;
            ctx.push_curve(provenance, &label, &db, &curve.values());
        }
        if ctx.simulate() {
            let plan = ctx.plan();
            let window = ctx.window();
            let est = estimate_guard_cases(rho, &ctx.net, &lin, &plan, &window)?;
            for (cov, name) in est.coverage.iter().zip(names) {
                ctx.push_estimates(Provenance::McPpp, &format!("{name}/rho={rho_out}"), &db, cov, 1.0);
            }
        }
    }
    Ok(())
}

fn custom(ctx: &mut Ctx) -> CliResult<()> {
    let spec = ctx.spec;
    let tier = Tier::from(spec.tier);
    let links: Vec<(String, LinkDistance)> = match spec.link {
        LinkKind::Origin => vec![(String::new(), LinkDistance::Origin)],
        LinkKind::ServingAp => vec![(String::new(), LinkDistance::ServingAp)],
        LinkKind::Fixed => spec
            .rho
            .iter()
            .map(|&r| (format!("/rho={r}"), LinkDistance::Fixed(r * ctx.unit)))
            .collect(),
    };
    for ns_out in spec.xstar_norm.clone() {
        for ratio in spec.xr_ratio.clone() {
            for (suffix, link) in &links {
                let ns = ns_out * ctx.unit;
                let label = format!("coverage/xstar={ns_out}/ratio={ratio}{suffix}");
                let l = match spec.angle {
                    AnglePolicy::Fixed => RandomLink::fixed(ns, ratio * ns, *link),
                    AnglePolicy::Uniform => RandomLink::uniform_angle(ns, ratio * ns, *link),
                };
                let processes = spec.process.clone();
                coverage_series(ctx, &label, &l, tier, &processes)?;
            }
        }
    }
    Ok(())
}

/// All rows of an experiment, in output order.
pub fn compute_rows(spec: &ExperimentSpec) -> CliResult<Vec<Row>> {
    spec.validate()?;
    if !(spec.network().lambda_u > 0.0) {
        return Err(CliError::usage("lambda_u must be > 0 for these experiments"));
    }
    let mut ctx = Ctx::new(spec);
    match spec.id {
        ExperimentId::Fig2 => {
            let pairs: Vec<(f64, f64)> = spec
                .xstar_norm
                .iter()
                .flat_map(|&ns| spec.xr_ratio.iter().map(move |&r| (ns, r)))
                .collect();
            ap_densities(&mut ctx, &pairs)?;
        }
        ExperimentId::Fig3 => {
            let pairs: Vec<(f64, f64)> = spec.xstar_norm.iter().map(|&ns| (ns, 1.0)).collect();
            ap_densities(&mut ctx, &pairs)?;
        }
        ExperimentId::Fig4 => ue_densities_at_ap(&mut ctx)?,
        ExperimentId::Fig5 => cell_areas(&mut ctx)?,
        ExperimentId::Fig6 => ue_densities_at_origin(&mut ctx)?,
        ExperimentId::Fig7a | ExperimentId::Fig7b => {
            isotropic_receiver(&mut ctx, Tier::Ue, LinkDistance::Origin, UeAngleRoute::AveragedDensity)?
        }
        ExperimentId::Fig8 => isotropic_receiver(&mut ctx, Tier::Ap, LinkDistance::ServingAp, UeAngleRoute::PerAngle)?,
        ExperimentId::Fig9 => uplink(&mut ctx)?,
        ExperimentId::Fig10 => guard_cases(&mut ctx)?,
        ExperimentId::Custom => custom(&mut ctx)?,
    }
    Ok(ctx.rows)
}

/// Writes rows in the shared CSV schema; floats use shortest round-trip form.
pub fn write_csv(path: &std::path::Path, rows: &[Row], params_hash: &str) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.series.as_str(),
            &r.x.to_string(),
            &r.value.to_string(),
            &r.stderr.to_string(),
            params_hash,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the experiment and writes `<output>/<id>.csv` and `<id>.manifest`.
pub fn run_experiment(spec: &ExperimentSpec) -> CliResult<RunOutput> {
    let start = Instant::now();
    let rows = compute_rows(spec)?;
    fs::create_dir_all(&spec.output)?;
    let csv = spec.output.join(format!("{}.csv", spec.id));
    let manifest = spec.output.join(format!("{}.manifest", spec.id));
    write_csv(&csv, &rows, &spec.params_hash())?;
    let wall_time_s = start.elapsed().as_secs_f64();
    fs::write(&manifest, spec.manifest(wall_time_s))?;
    Ok(RunOutput {
        csv,
        manifest,
        rows: rows.len(),
        wall_time_s,
    })
}
