//! Experiment parameters, the `key = value` config grammar, and manifests.
//!
//! Grammar: one `key = value` per line, `#` starts a comment, blank lines
//! are ignored. Lists are comma separated. Distances are in units of
//! `1/√λ_a` unless `units = absolute`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use vguard::density::Tier;
use vguard::geometry::NetworkConfig;
use vguard::simulate::McProcess;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7a,
    Fig7b,
    Fig8,
    Fig9,
    Fig10,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
        ExperimentId::Fig7a,
        ExperimentId::Fig7b,
        ExperimentId::Fig8,
        ExperimentId::Fig9,
        ExperimentId::Fig10,
        ExperimentId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
            ExperimentId::Fig7a => "fig7a",
            ExperimentId::Fig7b => "fig7b",
            ExperimentId::Fig8 => "fig8",
            ExperimentId::Fig9 => "fig9",
            ExperimentId::Fig10 => "fig10",
            ExperimentId::Custom => "custom",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "Figure 2: AP density seen from receivers at several |x_R|, |x*| = 1/(2√λ_a)",
            ExperimentId::Fig3 => "Figure 3: AP density seen from the serving AP for several |x*|",
            ExperimentId::Fig4 => "Figure 4: UE density seen from the serving AP, with the linear ramp and exponential bound",
            ExperimentId::Fig5 => "Figure 5: mean guard-cell area against |x*|",
            ExperimentId::Fig6 => "Figure 6: UE density seen from the typical node, with the Bessel-type bound",
            ExperimentId::Fig7a => "Figure 7a: UE-interfered link to an isotropic receiver, λ_u = λ_a",
            ExperimentId::Fig7b => "Figure 7b: UE-interfered link to an isotropic receiver, λ_u = 10 λ_a",
            ExperimentId::Fig8 => "Figure 8: AP-interfered link from x* to an isotropic receiver",
            ExperimentId::Fig9 => "Figure 9: uplink to the nearest AP, |x*| = c/(2√λ_a)",
            ExperimentId::Fig10 => "Figure 10: guard placement cases A (none), B (transmitter), C (receiver)",
            ExperimentId::Custom => "custom coverage curve from tier/angle/link keys",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| CliError::usage(format!("unknown experiment `{s}` (see `vguard list`)")))
    }
}

/// Generates `as_str`/`FromStr` for the small keyword enums of the grammar.
macro_rules! keyword_enum {
    ($name:ident, $what:literal, { $($var:ident => $s:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name { $($var),+ }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }
        }

        impl FromStr for $name {
            type Err = CliError;

            fn from_str(s: &str) -> CliResult<Self> {
                match s {
                    $($s => Ok($name::$var),)+
                    _ => Err(CliError::usage(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        s,
                        [$($s),+].join(", ")
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Units, "units", { Natural => "natural", Absolute => "absolute" });
keyword_enum!(AnglePolicy, "angle policy", { Fixed => "fixed", Uniform => "uniform" });
keyword_enum!(LinkKind, "link", { Origin => "origin", ServingAp => "serving-ap", Fixed => "fixed" });
keyword_enum!(TierKey, "tier", { Ap => "ap", Ue => "ue" });
keyword_enum!(ProcessKey, "process", { Ppp => "ppp", Vplp => "vplp" });

impl From<TierKey> for Tier {
    fn from(t: TierKey) -> Self {
        match t {
            TierKey::Ap => Tier::Ap,
            TierKey::Ue => Tier::Ue,
        }
    }
}

impl From<ProcessKey> for McProcess {
    fn from(p: ProcessKey) -> Self {
        match p {
            ProcessKey::Ppp => McProcess::Ppp,
            ProcessKey::Vplp => McProcess::Vplp,
        }
    }
}

/// Manifest keys written for information only; ignored when read back.
pub const INFORMATIONAL_KEYS: [&str; 3] = ["code_version", "wall_time_s", "params_hash"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub lambda_a: f64,
    /// `None` picks the experiment default (`λ_a`, or `10 λ_a` for fig7b).
    pub lambda_u: Option<f64>,
    pub p_a: f64,
    pub p_u: f64,
    pub alpha_a: f64,
    pub alpha_u: f64,
    pub xstar_norm: Vec<f64>,
    pub xr_ratio: Vec<f64>,
    pub rho: Vec<f64>,
    pub theta_db_min: f64,
    pub theta_db_max: f64,
    pub theta_db_step: f64,
    /// Monte Carlo trials per series; 0 skips the simulated series.
    pub trials: usize,
    pub seed: u64,
    pub units: Units,
    pub tier: TierKey,
    pub angle: AnglePolicy,
    pub link: LinkKind,
    pub process: Vec<ProcessKey>,
    pub output: PathBuf,
}

impl ExperimentSpec {
    /// Parameters of the published figure.
    pub fn defaults(id: ExperimentId) -> Self {
        use ExperimentId::*;
        let mut s = Self {
            id,
            lambda_a: 1.0,
            lambda_u: None,
            p_a: 1.0,
            p_u: 1.0,
            alpha_a: 4.0,
            alpha_u: 4.0,
            xstar_norm: vec![0.5],
            xr_ratio: vec![1.0],
            rho: vec![],
            theta_db_min: -10.0,
            theta_db_max: 20.0,
            theta_db_step: 1.0,
            trials: 0,
            seed: 1,
            units: Units::Natural,
            tier: TierKey::Ue,
            angle: AnglePolicy::Uniform,
            link: LinkKind::Origin,
            process: vec![ProcessKey::Ppp],
            output: PathBuf::from("out"),
        };
        match id {
            Fig2 => {
                s.xr_ratio = vec![0.0, 0.5, 1.0, 2.0, 4.0];
                s.trials = 2000;
            }
            Fig3 => {
                s.xstar_norm = vec![0.25, 0.5, 1.0, 1.5];
                s.trials = 2000;
            }
            Fig4 | Fig6 => {
                s.xstar_norm = vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
            }
            Fig5 => {
                s.xstar_norm = (0..=12).map(|i| i as f64 / 8.0).collect();
                s.trials = 2000;
            }
            Fig7a => {
                s.xr_ratio = vec![0.5, 1.0, 2.0];
                s.process = vec![ProcessKey::Ppp, ProcessKey::Vplp];
                s.trials = 1000;
            }
            Fig7b => {
                s.xr_ratio = vec![0.5, 1.0, 2.0];
                s.trials = 1000;
            }
            Fig8 => {
                s.tier = TierKey::Ap;
                s.link = LinkKind::ServingAp;
                s.xr_ratio = vec![0.0, 0.5, 1.0, 2.0];
                s.trials = 10_000;
            }
            Fig9 => {
                s.xstar_norm = vec![0.25, 0.5, 1.0];
                s.angle = AnglePolicy::Fixed;
                s.process = vec![ProcessKey::Ppp, ProcessKey::Vplp];
                s.trials = 1000;
            }
            Fig10 => {
                s.rho = vec![0.25, 0.5, 1.0];
                s.trials = 5000;
            }
            Custom => {}
        }
        s
    }

    /// Network parameters with the experiment's `λ_u` default applied.
    pub fn network(&self) -> NetworkConfig {
        let lambda_u = self.lambda_u.unwrap_or(match self.id {
            ExperimentId::Fig7b => 10.0 * self.lambda_a,
            _ => self.lambda_a,
        });
        NetworkConfig {
            lambda_a: self.lambda_a,
            lambda_u,
            p_a: self.p_a,
            p_u: self.p_u,
            alpha_a: self.alpha_a,
            alpha_u: self.alpha_u,
        }
    }

    /// Multiplier taking configured distances to absolute ones.
    pub fn distance_unit(&self) -> f64 {
        match self.units {
            Units::Natural => 1.0 / self.lambda_a.sqrt(),
            Units::Absolute => 1.0,
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let bad = |e: String| CliError::usage(format!("{key}: {e}"));
        match key {
            "experiment" => self.id = value.parse()?,
            "lambda_a" => self.lambda_a = positive(value).map_err(bad)?,
            "lambda_u" => self.lambda_u = Some(non_negative(value).map_err(bad)?),
            "p_a" => self.p_a = positive(value).map_err(bad)?,
            "p_u" => self.p_u = positive(value).map_err(bad)?,
            "alpha_a" => self.alpha_a = above_two(value).map_err(bad)?,
            "alpha_u" => self.alpha_u = above_two(value).map_err(bad)?,
            "xstar_norm" => self.xstar_norm = list(value, non_negative).map_err(bad)?,
            "xr_ratio" => self.xr_ratio = list(value, non_negative).map_err(bad)?,
            "rho" => self.rho = list(value, positive).map_err(bad)?,
            "theta_db_min" => self.theta_db_min = finite(value).map_err(bad)?,
            "theta_db_max" => self.theta_db_max = finite(value).map_err(bad)?,
            "theta_db_step" => self.theta_db_step = positive(value).map_err(bad)?,
            "trials" => self.trials = value.parse().map_err(|e| bad(format!("{e}")))?,
            "seed" => self.seed = value.parse().map_err(|e| bad(format!("{e}")))?,
            "units" => self.units = value.parse()?,
            "tier" => self.tier = value.parse()?,
            "angle" => self.angle = value.parse()?,
            "link" => self.link = value.parse()?,
            "process" => {
                self.process = value
                    .split(',')
                    .map(|v| v.trim().parse())
                    .collect::<CliResult<Vec<ProcessKey>>>()?
            }
            "output" => self.output = PathBuf::from(value),
            _ => return Err(CliError::usage(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Builds a spec from an optional experiment id, config text, and flag
    /// overrides, in increasing precedence.
    pub fn from_sources(id: Option<ExperimentId>, config: Option<&str>, overrides: &[(String, String)]) -> CliResult<Self> {
        let entries = match config {
            Some(text) => parse_config(text)?,
            None => Vec::new(),
        };
        let file_id = entries
            .iter()
            .rev()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.parse::<ExperimentId>())
            .transpose()?;
        let id = id
            .or(file_id)
            .ok_or_else(|| CliError::usage("no experiment given on the command line or in the config"))?;
        let mut spec = Self::defaults(id);
        for (k, v) in entries.iter().chain(overrides) {
            if k == "experiment" || INFORMATIONAL_KEYS.contains(&k.as_str()) {
                continue;
            }
            spec.set(k, v)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.network().validate().map_err(|e| CliError::usage(e.to_string()))?;
        if self.theta_db_max < self.theta_db_min {
            return Err(CliError::usage("theta_db_max must be >= theta_db_min"));
        }
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(CliError::usage(msg)) };
        need(!self.xstar_norm.is_empty(), "xstar_norm must list at least one value")?;
        need(!self.xr_ratio.is_empty(), "xr_ratio must list at least one value")?;
        if self.id == ExperimentId::Fig10 || self.link == LinkKind::Fixed {
            need(!self.rho.is_empty(), "rho must list at least one value")?;
        }
        if self.trials > 0 && self.trials < 2 {
            return Err(CliError::usage("trials must be 0 or at least 2"));
        }
        Ok(())
    }

    /// Canonical `(key, value)` pairs that determine the output.
    pub fn canonical_entries(&self) -> Vec<(&'static str, String)> {
        let net = self.network();
        vec![
            ("experiment", self.id.as_str().to_string()),
            ("units", self.units.as_str().to_string()),
            ("lambda_a", net.lambda_a.to_string()),
            ("lambda_u", net.lambda_u.to_string()),
            ("p_a", net.p_a.to_string()),
            ("p_u", net.p_u.to_string()),
            ("alpha_a", net.alpha_a.to_string()),
            ("alpha_u", net.alpha_u.to_string()),
            ("xstar_norm", join(&self.xstar_norm)),
            ("xr_ratio", join(&self.xr_ratio)),
            ("rho", join(&self.rho)),
            ("theta_db_min", self.theta_db_min.to_string()),
            ("theta_db_max", self.theta_db_max.to_string()),
            ("theta_db_step", self.theta_db_step.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("tier", self.tier.as_str().to_string()),
            ("angle", self.angle.as_str().to_string()),
            ("link", self.link.as_str().to_string()),
            (
                "process",
                self.process.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", "),
            ),
        ]
    }

    /// First 16 hex digits of the SHA-256 of the canonical entries.
    pub fn params_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.canonical_entries() {
            h.update(format!("{k} = {v}\n"));
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Manifest text; it parses back as a config reproducing this spec.
    pub fn manifest(&self, wall_time_s: f64) -> String {
        let mut out = String::from("# vguard run manifest\n");
        for (k, v) in self.canonical_entries() {
            if !v.is_empty() {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out.push_str(&format!("output = {}\n", self.output.display()));
        out.push_str(&format!("code_version = {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("params_hash = {}\n", self.params_hash()));
        out.push_str(&format!("wall_time_s = {wall_time_s:.3}\n"));
        out
    }
}

/// Splits config text into `(key, value)` pairs in file order.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::usage(format!("line {}: empty key or value", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn finite(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn positive(v: &str) -> Result<f64, String> {
    let x = finite(v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be > 0, got {v}"))
    }
}

fn non_negative(v: &str) -> Result<f64, String> {
    let x = finite(v)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("must be >= 0, got {v}"))
    }
}

fn above_two(v: &str) -> Result<f64, String> {
    let x = finite(v)?;
    if x > 2.0 {
        Ok(x)
    } else {
        Err(format!("path-loss exponent must exceed 2, got {v}"))
    }
}

fn list(v: &str, each: fn(&str) -> Result<f64, String>) -> Result<Vec<f64>, String> {
    v.split(',').map(|x| each(x.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_handles_comments_and_blanks() {
        let e = parse_config("# header\n\nlambda_a = 2  # trailing\n xstar_norm=0.5, 1\n").unwrap();
        assert_eq!(e, vec![("lambda_a".into(), "2".into()), ("xstar_norm".into(), "0.5, 1".into())]);
        assert!(parse_config("lambda_a 2\n").is_err());
        assert!(parse_config("lambda_a =\n").is_err());
    }

    #[test]
    fn flags_override_file_and_file_overrides_defaults() {
        let text = "experiment = fig8\ntrials = 500\nseed = 9\n";
        let spec = ExperimentSpec::from_sources(None, Some(text), &[("seed".into(), "3".into())]).unwrap();
        assert_eq!(spec.id, ExperimentId::Fig8);
        assert_eq!(spec.trials, 500);
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.tier, TierKey::Ap);
    }

    #[test]
    fn bad_values_name_the_key() {
        let err = ExperimentSpec::from_sources(Some(ExperimentId::Fig2), Some("lambda_a = -1\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("lambda_a"), "{err}");
        assert_eq!(err.exit_code(), 1);
        let err = ExperimentSpec::from_sources(Some(ExperimentId::Fig2), Some("colour = red\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("colour"));
        assert!(ExperimentSpec::from_sources(None, None, &[]).is_err());
    }

    #[test]
    fn fig7b_defaults_to_ten_times_denser_ues() {
        let mut s = ExperimentSpec::defaults(ExperimentId::Fig7b);
        s.lambda_a = 2.0;
        assert_eq!(s.network().lambda_u, 20.0);
        s.lambda_u = Some(1.0);
        assert_eq!(s.network().lambda_u, 1.0);
        assert_eq!(ExperimentSpec::defaults(ExperimentId::Fig7a).network().lambda_u, 1.0);
    }

    #[test]
    fn manifest_round_trips() {
        for id in ExperimentId::ALL {
            let mut s = ExperimentSpec::defaults(id);
            s.seed = 77;
            s.xstar_norm = vec![0.1 + 0.2, 1.0 / 3.0];
            let text = s.manifest(1.25);
            let back = ExperimentSpec::from_sources(None, Some(&text), &[]).unwrap();
            assert_eq!(back.params_hash(), s.params_hash(), "{id}");
            assert_eq!(back.xstar_norm, s.xstar_norm);
            assert_eq!(back.network(), s.network());
        }
    }

    #[test]
    fn hash_tracks_parameters_only() {
        let a = ExperimentSpec::defaults(ExperimentId::Fig9);
        let mut b = a.clone();
        b.output = PathBuf::from("elsewhere");
        assert_eq!(a.params_hash(), b.params_hash());
        b.seed += 1;
        assert_ne!(a.params_hash(), b.params_hash());
        assert_eq!(a.params_hash().len(), 16);
    }
}
