use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::domain::DEFAULT_ETA;
use crate::scalar::Cx;

use super::CliError;

pub const PRECISION_ENV: &str = "TODA_WHITTAKER_PRECISION";

/// Widest arithmetic available: double-double.
pub const MAX_PRECISION: u32 = 106;

#[derive(Parser, Debug)]
#[command(name = "toda-whittaker", version, about = "Evaluate and verify hyperoctahedral Toda Whittaker functions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct GlobalArgs {
    /// Rank.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Morse coupling, e.g. `0.7` or `0.5-0.1i`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Significand bits: 53 selects f64, 54..=106 double-double.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Truncation level.
    #[arg(long = "M", global = true)]
    pub max_level: Option<u32>,
    /// Check threshold; for `eval`, the largest acceptable tail bound.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Exclusion radius around singular hyperplanes.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file preloading any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Tabular output instead of JSON lines.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one function and print a record.
    Eval(EvalArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalTarget {
    #[value(name = "phi")]
    Phi,
    #[value(name = "Phi")]
    BigPhi,
    #[value(name = "cs-phi")]
    CsPhi,
    #[value(name = "cs-Phi")]
    CsBigPhi,
    #[value(name = "M")]
    M,
    #[value(name = "W")]
    W,
    #[value(name = "K")]
    K,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    pub target: EvalTarget,
    /// Spectral point, comma separated, e.g. `0.1+0.2i,-0.3i`.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// Position, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Confluence parameter for the CS targets.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Pde,
    Dde,
    Univariate,
    Residues,
    Confluence,
    Counts,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Pde => "pde",
            Suite::Dde => "dde",
            Suite::Univariate => "univariate",
            Suite::Residues => "residues",
            Suite::Confluence => "confluence",
            Suite::Counts => "counts",
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Hyperplane orders for `residues`, e.g. `1..3` or `2`.
    #[arg(long)]
    pub m: Option<String>,
}

/// Any flag may appear here; numbers may be given as JSON numbers or strings.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    g: Option<Text>,
    precision: Option<u32>,
    #[serde(rename = "M")]
    max_level: Option<u32>,
    tol: Option<f64>,
    eta: Option<f64>,
    seed: Option<u64>,
    csv: Option<bool>,
    xi: Option<Text>,
    x: Option<Text>,
    c: Option<f64>,
    m: Option<Text>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Text {
    Num(f64),
    Str(String),
}

impl Text {
    fn into_string(self) -> String {
        match self {
            Text::Num(v) => v.to_string(),
            Text::Str(s) => s,
        }
    }
}

/// Resolved settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// `None` lets a suite run its default ranks.
    pub n: Option<usize>,
    /// `None` lets a suite draw or fix its own coupling.
    pub g: Option<Cx<f64>>,
    /// `None` lets each command choose; always within `53..=106` otherwise.
    pub precision: Option<u32>,
    pub max_level: u32,
    pub tol: Option<f64>,
    pub eta: f64,
    pub seed: u64,
    pub csv: bool,
    pub xi: Option<Vec<Cx<f64>>>,
    pub x: Option<Vec<Cx<f64>>>,
    pub c: f64,
    pub m: RangeInclusive<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: None,
            g: None,
            precision: None,
            max_level: 30,
            tol: None,
            eta: DEFAULT_ETA,
            seed: 7,
            csv: false,
            xi: None,
            x: None,
            c: 6.0,
            m: 1..=3,
        }
    }
}

impl RunConfig {
    /// Flag, then environment (precision only), then config file, then default.
    pub fn resolve(
        global: &GlobalArgs,
        eval: Option<&EvalArgs>,
        m_flag: Option<&str>,
        env_precision: Option<&str>,
    ) -> Result<Self, CliError> {
        let file = match &global.config {
            Some(path) => read_config(path)?,
            None => ConfigFile::default(),
        };
        let mut cfg = RunConfig::default();
        let env = env_precision
            .map(|s| {
                s.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("{PRECISION_ENV}={s} is not an integer")))
            })
            .transpose()?;

        cfg.n = global.n.or(file.n);
        cfg.g = match global.g.clone().or(file.g.map(Text::into_string)) {
            Some(s) => Some(parse_complex(&s)?),
            None => None,
        };
        cfg.precision = global.precision.or(env).or(file.precision);
        cfg.max_level = global.max_level.or(file.max_level).unwrap_or(cfg.max_level);
        cfg.tol = global.tol.or(file.tol);
        cfg.eta = global.eta.or(file.eta).unwrap_or(cfg.eta);
        cfg.seed = global.seed.or(file.seed).unwrap_or(cfg.seed);
        cfg.csv = global.csv || file.csv.unwrap_or(false);
        let xi = eval.and_then(|e| e.xi.clone()).or(file.xi.map(Text::into_string));
        cfg.xi = xi.map(|s| parse_vector(&s)).transpose()?;
        let x = eval.and_then(|e| e.x.clone()).or(file.x.map(Text::into_string));
        cfg.x = x.map(|s| parse_vector(&s)).transpose()?;
        cfg.c = eval.and_then(|e| e.c).or(file.c).unwrap_or(cfg.c);
        if let Some(m) = m_flag.map(str::to_owned).or(file.m.map(Text::into_string)) {
            cfg.m = parse_range(&m)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(bits) = self.precision {
            if bits < 53 {
                return Err(CliError::Usage(format!("precision {bits} is below 53 bits")));
            }
            if bits > MAX_PRECISION {
                return Err(CliError::Usage(format!(
                    "precision {bits} exceeds the widest available arithmetic ({MAX_PRECISION} bits)"
                )));
            }
        }
        if self.n == Some(0) {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        if self.max_level == 0 {
            return Err(CliError::Usage("M must be at least 1".into()));
        }
        if !(self.eta > 0.0) {
            return Err(CliError::Usage(format!("eta = {} must be positive", self.eta)));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::Usage(format!("tol = {tol} must be positive")));
            }
            if !(self.eta < tol) {
                return Err(CliError::Usage(format!("eta = {} must be smaller than tol = {tol}", self.eta)));
            }
        }
        if !self.c.is_finite() {
            return Err(CliError::Usage("c must be finite".into()));
        }
        Ok(())
    }

    /// Precision for a command whose default is `default`.
    pub fn bits_or(&self, default: u32) -> u32 {
        self.precision.unwrap_or(default)
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// `a+bi`, `a-bi`, `a`, `bi`, with no spaces.
pub fn parse_complex(s: &str) -> Result<Cx<f64>, CliError> {
    if s.is_empty() || s.contains(char::is_whitespace) {
        return Err(CliError::Usage(format!("'{s}' is not a complex number of the form a+bi")));
    }
    Cx::<f64>::from_str(s).map_err(|_| CliError::Usage(format!("'{s}' is not a complex number of the form a+bi")))
}

pub fn parse_vector(s: &str) -> Result<Vec<Cx<f64>>, CliError> {
    s.split(',').map(parse_complex).collect()
}

/// `a..b` (inclusive) or a single order.
pub fn parse_range(s: &str) -> Result<RangeInclusive<u32>, CliError> {
    let bad = || CliError::Usage(format!("'{s}' is not an order range like 1..3"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.parse::<u32>().map_err(|_| bad())?, b.parse::<u32>().map_err(|_| bad())?),
        None => {
            let m = s.parse::<u32>().map_err(|_| bad())?;
            (m, m)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        assert_eq!(parse_complex("0+0.3i").unwrap(), Cx::new(0.0, 0.3));
        assert_eq!(parse_complex("1.5-2i").unwrap(), Cx::new(1.5, -2.0));
        assert_eq!(parse_complex("-0.25").unwrap(), Cx::new(-0.25, 0.0));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), Cx::new(1e-3, 0.2));
        assert!(parse_complex("1 + 2i").is_err());
        assert!(parse_complex("abc").is_err());
        assert_eq!(parse_vector("0.1,-0.2i").unwrap(), vec![Cx::new(0.1, 0.0), Cx::new(0.0, -0.2)]);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..3").unwrap(), 1..=3);
        assert_eq!(parse_range("2").unwrap(), 2..=2);
        assert!(parse_range("3..1").is_err());
        assert!(parse_range("0..2").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"n": 3, "precision": 80, "M": 12, "g": "0.5-0.1i", "tol": 1e-6}"#).unwrap();
        let mut global = GlobalArgs { config: Some(path), ..Default::default() };
        let cfg = RunConfig::resolve(&global, None, None, None).unwrap();
        assert_eq!((cfg.n, cfg.precision, cfg.max_level), (Some(3), Some(80), 12));
        assert_eq!(cfg.g, Some(Cx::new(0.5, -0.1)));
        let cfg = RunConfig::resolve(&global, None, None, Some("100")).unwrap();
        assert_eq!(cfg.precision, Some(100));
        global.precision = Some(53);
        global.max_level = Some(20);
        let cfg = RunConfig::resolve(&global, None, None, Some("100")).unwrap();
        assert_eq!((cfg.precision, cfg.max_level), (Some(53), 20));
    }

    #[test]
    fn invariants() {
        let bad = |cfg: RunConfig| cfg.validate().is_err();
        assert!(bad(RunConfig { precision: Some(40), ..Default::default() }));
        assert!(bad(RunConfig { precision: Some(200), ..Default::default() }));
        assert!(bad(RunConfig { tol: Some(1e-12), eta: 1e-9, ..Default::default() }));
        assert!(bad(RunConfig { tol: Some(-1.0), ..Default::default() }));
        assert!(!bad(RunConfig { precision: Some(106), tol: Some(1e-8), ..Default::default() }));
    }
}
