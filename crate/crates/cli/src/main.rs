use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vguard_cli::config::{ExperimentId, ExperimentSpec};
use vguard_cli::error::{CliError, CliResult};
use vguard_cli::experiment::run_experiment;
#[cfg(test)]
use vguard_cli::experiment::CSV_HEADER;
use vguard_cli::verify::{run_suite, Suite, VerifyOptions};

/// Voronoi guard-region interference: figure reproductions and checks.
#[derive(Parser)]
#[command(name = "vguard", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and write `<output>/<id>.csv` plus a manifest.
    Run(Box<RunArgs>),
    /// Run an acceptance suite: analytic, mc or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Corrupt one criterion's tolerance to check that failures surface.
        #[arg(long, value_name = "CRITERION")]
        inject_fail: Option<u8>,
        /// Restrict the suite to these criteria (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// List experiment ids and the figures they reproduce.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment id; may instead come from the config file.
    experiment: Option<String>,
    /// `key = value` config file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    lambda_a: Option<String>,
    #[arg(long)]
    lambda_u: Option<String>,
    #[arg(long)]
    p_a: Option<String>,
    #[arg(long)]
    p_u: Option<String>,
    #[arg(long)]
    alpha_a: Option<String>,
    #[arg(long)]
    alpha_u: Option<String>,
    /// Comma-separated |x*| values.
    #[arg(long)]
    xstar_norm: Option<String>,
    /// Comma-separated |x_R|/|x*| values.
    #[arg(long)]
    xr_ratio: Option<String>,
    /// Comma-separated link lengths.
    #[arg(long)]
    rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta_db_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta_db_max: Option<String>,
    #[arg(long)]
    theta_db_step: Option<String>,
    /// Monte Carlo trials per series (0 = analytic only).
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// natural (units of 1/√λ_a) or absolute.
    #[arg(long)]
    units: Option<String>,
    /// custom only: ap or ue.
    #[arg(long)]
    tier: Option<String>,
    /// custom only: fixed or uniform receiver direction.
    #[arg(long)]
    angle: Option<String>,
    /// custom only: origin, serving-ap or fixed.
    #[arg(long)]
    link: Option<String>,
    /// Comma-separated simulated processes: ppp, vplp.
    #[arg(long)]
    process: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("output", &self.output),
            ("lambda_a", &self.lambda_a),
            ("lambda_u", &self.lambda_u),
            ("p_a", &self.p_a),
            ("p_u", &self.p_u),
            ("alpha_a", &self.alpha_a),
            ("alpha_u", &self.alpha_u),
            ("xstar_norm", &self.xstar_norm),
            ("xr_ratio", &self.xr_ratio),
            ("rho", &self.rho),
            ("theta_db_min", &self.theta_db_min),
            ("theta_db_max", &self.theta_db_max),
            ("theta_db_step", &self.theta_db_step),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("units", &self.units),
            ("tier", &self.tier),
            ("angle", &self.angle),
            ("link", &self.link),
            ("process", &self.process),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn run(args: RunArgs, out: &mut dyn Write) -> CliResult<()> {
    let id = args.experiment.as_deref().map(str::parse::<ExperimentId>).transpose()?;
    let text = match &args.config {
        Some(p) => Some(
            std::fs::read_to_string(p).map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let spec = ExperimentSpec::from_sources(id, text.as_deref(), &args.overrides())?;
    let res = run_experiment(&spec)?;
    writeln!(
        out,
        "wrote {} ({} rows) and {} in {:.1}s",
        res.csv.display(),
        res.rows,
        res.manifest.display(),
        res.wall_time_s
    )?;
    Ok(())
}

fn verify(suite: &str, opts: VerifyOptions, out: &mut dyn Write) -> CliResult<u8> {
    let suite = suite.parse::<Suite>()?;
    let reports = run_suite(suite, opts, |r| {
        let _ = writeln!(out, "{r}");
    });
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    writeln!(out, "{}/{} criteria passed", reports.len() - failed.len(), reports.len())?;
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed criteria: {}", failed.join(", "));
        Ok(3)
    }
}

/// Runs one parsed command and returns the process exit code.
fn execute(cli: Cli, out: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Cmd::List => ExperimentId::ALL
            .iter()
            .try_for_each(|id| writeln!(out, "{:<7} {}", id.as_str(), id.describe()))
            .map_err(CliError::from),
        Cmd::Run(args) => run(*args, out),
        Cmd::Verify {
            suite,
            seed,
            inject_fail,
            only,
        } => {
            let opts = VerifyOptions {
                seed,
                inject_fail,
                runner: std::env::current_exe().ok(),
                only,
            };
            match verify(&suite, opts, out) {
                Ok(code) => return code,
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(execute(cli, &mut std::io::stdout().lock()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use std::path::Path;

    fn exec(args: &[&str]) -> (u8, String) {
        let cli = Cli::try_parse_from(std::iter::once("vguard").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = execute(cli, &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
        let mut r = csv::Reader::from_path(path).unwrap();
        assert_eq!(r.headers().unwrap(), &csv::StringRecord::from(CSV_HEADER.to_vec()));
        r.records().map(Result::unwrap).collect()
    }

    #[test]
    fn list_names_every_experiment() {
        let (code, out) = exec(&["list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), ExperimentId::ALL.len());
        assert!(out.lines().any(|l| l.starts_with("fig7a") && l.contains("Figure 7")));
    }

    #[test]
    fn bad_arguments_are_usage_errors() {
        assert!(Cli::try_parse_from(["vguard", "frobnicate"]).is_err());
        assert_eq!(exec(&["run", "fig99"]).0, 1);
        assert_eq!(exec(&["run", "fig2", "--trials", "lots"]).0, 1);
        assert_eq!(exec(&["run", "fig2", "--p-a=-1"]).0, 1);
        assert_eq!(exec(&["run"]).0, 1);
        assert_eq!(exec(&["verify", "everything"]).0, 1);
        assert_eq!(exec(&["run", "fig2", "--config", "/nonexistent/vguard.conf"]).0, 1);
    }

    #[test]
    fn analytic_run_writes_schema_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let (code, msg) = exec(&["run", "fig10", "--trials", "0", "--output", out]);
        assert_eq!(code, 0, "{msg}");
        let rows = read_rows(&dir.path().join("fig10.csv"));
        assert!(!rows.is_empty());
        let hash = rows[0][4].to_string();
        assert_eq!(hash.len(), 16);
        for r in &rows {
            let (prov, _) = r[0].split_once(':').unwrap();
            assert!(["analytic", "analytic-bound"].contains(&prov), "{}", &r[0]);
            assert_eq!(r[3].parse::<f64>().unwrap(), 0.0);
            let v: f64 = r[2].parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(r[4], hash);
        }
        let manifest = fs::read_to_string(dir.path().join("fig10.manifest")).unwrap();
        assert!(manifest.contains(&format!("params_hash = {hash}")));
        assert!(manifest.contains("wall_time_s = "));
    }

    #[test]
    fn manifest_reproduces_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("first");
        let (code, _) = exec(&[
            "run",
            "fig2",
            "--trials",
            "1000",
            "--xr-ratio",
            "0,1",
            "--output",
            first.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let rows = read_rows(&first.join("fig2.csv"));
        let mc: Vec<_> = rows.iter().filter(|r| r[0].starts_with("mc-ppp:")).collect();
        assert!(!mc.is_empty());
        assert!(mc.iter().any(|r| r[3].parse::<f64>().unwrap() > 0.0));

        let second = dir.path().join("second");
        let manifest = first.join("fig2.manifest");
        let (code, _) = exec(&[
            "run",
            "--config",
            manifest.to_str().unwrap(),
            "--output",
            second.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert_eq!(fs::read(first.join("fig2.csv")).unwrap(), fs::read(second.join("fig2.csv")).unwrap());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("run.conf");
        fs::write(&conf, "# fig9 sweep\nexperiment = fig9\ntrials = 0\nxstar_norm = 0.5\np_u = 2\n").unwrap();
        let (code, _) = exec(&[
            "run",
            "--config",
            conf.to_str().unwrap(),
            "--p-u",
            "3",
            "--output",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let manifest = fs::read_to_string(dir.path().join("fig9.manifest")).unwrap();
        assert!(manifest.contains("p_u = 3\n"), "{manifest}");
        assert!(manifest.contains("xstar_norm = 0.5\n"), "{manifest}");
    }

    #[test]
    fn analytic_suite_reports_each_criterion() {
        let (code, out) = exec(&["verify", "analytic"]);
        assert_eq!(code, 3);
        let lines: Vec<&str> = out.lines().filter(|l| l.starts_with("criterion=")).collect();
        assert_eq!(lines.len(), 7);
        for l in &lines {
            assert!(l.contains("status=PASS") || l.contains("status=FAIL"), "{l}");
        }
        assert!(out.ends_with("criteria passed\n"));
    }

    #[test]
    fn injected_failure_surfaces() {
        let (code, out) = exec(&["verify", "analytic", "--only", "2"]);
        assert_eq!(code, 0, "{out}");
        let (code, out) = exec(&["verify", "analytic", "--only", "2", "--inject-fail", "2"]);
        assert_eq!(code, 3);
        assert!(out.lines().any(|l| l.starts_with("criterion=2 ") && l.contains("status=FAIL")), "{out}");
    }
}
