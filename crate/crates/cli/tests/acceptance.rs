//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.
//!
//! `VGUARD_ACCEPT_ONLY=4,5` restricts the run to the listed criteria.

use std::io::Write;
use std::process::ExitCode;

use vguard_cli::verify::{run_suite, Suite, VerifyOptions};

fn main() -> ExitCode {
    let only = std::env::var("VGUARD_ACCEPT_ONLY")
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect())
        .unwrap_or_default();
    let opts = VerifyOptions {
        seed: 1,
        inject_fail: None,
        runner: Some(env!("CARGO_BIN_EXE_vguard").into()),
        only,
    };
    let reports = run_suite(Suite::All, opts, |r| {
        println!("{r}");
        let _ = std::io::stdout().flush();
    });
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    println!("acceptance: {}/{} criteria passed", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
