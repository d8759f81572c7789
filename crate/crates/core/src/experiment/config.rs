use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// The named experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Shape,
    Direction,
    Udist,
    Clt,
    Fluct,
    Coupling,
    Duality,
    Tasep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Shape,
        ExperimentKind::Direction,
        ExperimentKind::Udist,
        ExperimentKind::Clt,
        ExperimentKind::Fluct,
        ExperimentKind::Coupling,
        ExperimentKind::Duality,
        ExperimentKind::Tasep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Shape => "shape",
            ExperimentKind::Direction => "direction",
            ExperimentKind::Udist => "udist",
            ExperimentKind::Clt => "clt",
            ExperimentKind::Fluct => "fluct",
            ExperimentKind::Coupling => "coupling",
            ExperimentKind::Duality => "duality",
            ExperimentKind::Tasep => "tasep",
        }
    }

    /// Default `(λ, ρ, N, t)`.
    fn defaults(&self) -> (f64, f64, i64, f64) {
        match self {
            ExperimentKind::Shape => (0.5, 0.2, 1500, 0.0),
            ExperimentKind::Direction => (0.3, 0.6, 2000, 0.0),
            ExperimentKind::Udist => (0.8, 0.2, 2000, 0.0),
            ExperimentKind::Clt => (0.2, 0.6, 0, 2000.0),
            ExperimentKind::Fluct => (0.5, 0.5, 4096, 0.0),
            ExperimentKind::Coupling => (0.8, 0.2, 100, 400.0),
            ExperimentKind::Duality => (0.5, 0.5, 200, 0.0),
            ExperimentKind::Tasep => (0.3, 0.6, 0, 1000.0),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("experiment: unknown name `{s}`")))
    }
}

/// Summary file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parameter(format!("format: expected csv or json, got `{s}`"))),
        }
    }
}

/// A fully resolved run description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub lambda: f64,
    pub rho: f64,
    /// Box side.
    pub n: i64,
    /// Time horizon.
    pub t: f64,
    pub replicas: u64,
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
    pub format: Format,
    pub resume: bool,
    /// Also dump the event log of replica 0 (tasep only).
    pub events: bool,
}

/// Partially specified settings, from a file or from flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub experiment: Option<ExperimentKind>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub n: Option<i64>,
    pub t: Option<f64>,
    pub replicas: Option<u64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub resume: Option<bool>,
    pub events: Option<bool>,
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Parse { line, detail: format!("{key}: malformed value `{raw}`") })
}

fn flag(key: &str, raw: &str, line: usize) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse { line, detail: format!("{key}: expected true or false, got `{raw}`") }),
    }
}

impl ConfigOverrides {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut c = ConfigOverrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, val) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, detail: format!("expected `key = value`, got `{body}`") })?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "experiment" => c.experiment = Some(val.parse().map_err(|_| Error::Parse { line, detail: format!("experiment: unknown name `{val}`") })?),
                "lambda" => c.lambda = Some(value(key, val, line)?),
                "rho" => c.rho = Some(value(key, val, line)?),
                "n" => c.n = Some(value(key, val, line)?),
                "t" => c.t = Some(value(key, val, line)?),
                "replicas" => c.replicas = Some(value(key, val, line)?),
                "seed" => c.seed = Some(value(key, val, line)?),
                "threads" => c.threads = Some(value(key, val, line)?),
                "out" => c.out = Some(PathBuf::from(val)),
                "format" => c.format = Some(val.parse().map_err(|_| Error::Parse { line, detail: format!("format: expected csv or json, got `{val}`") })?),
                "resume" => c.resume = Some(flag(key, val, line)?),
                "events" => c.events = Some(flag(key, val, line)?),
                _ => return Err(Error::Parse { line, detail: format!("unknown key `{key}`") }),
            }
        }
        Ok(c)
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overlay(self, flags: ConfigOverrides) -> Self {
        ConfigOverrides {
            experiment: flags.experiment.or(self.experiment),
            lambda: flags.lambda.or(self.lambda),
            rho: flags.rho.or(self.rho),
            n: flags.n.or(self.n),
            t: flags.t.or(self.t),
            replicas: flags.replicas.or(self.replicas),
            seed: flags.seed.or(self.seed),
            threads: flags.threads.or(self.threads),
            out: flags.out.or(self.out),
            format: flags.format.or(self.format),
            resume: flags.resume.or(self.resume),
            events: flags.events.or(self.events),
        }
    }

    /// Fills defaults and validates.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let experiment = self
            .experiment
            .ok_or_else(|| Error::Parameter("experiment: missing required field".into()))?;
        let (l0, r0, n0, t0) = experiment.defaults();
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        let c = ExperimentConfig {
            experiment,
            lambda: self.lambda.unwrap_or(l0),
            rho: self.rho.unwrap_or(r0),
            n: self.n.unwrap_or(n0),
            t: self.t.unwrap_or(t0),
            replicas: self.replicas.unwrap_or(100),
            seed: self.seed.unwrap_or(0),
            threads: self.threads.unwrap_or(cores),
            out: self.out.unwrap_or_else(|| PathBuf::from(format!("out/{experiment}"))),
            format: self.format.unwrap_or(Format::Csv),
            resume: self.resume.unwrap_or(false),
            events: self.events.unwrap_or(false),
        };
        c.validate()?;
        Ok(c)
    }
}

/// Reads an optional config file and lays the flags over it.
pub fn parse_config(flags: ConfigOverrides, file: Option<&str>) -> Result<ExperimentConfig> {
    let base = match file {
        Some(text) => ConfigOverrides::parse_file(text)?,
        None => ConfigOverrides::default(),
    };
    base.overlay(flags).resolve()
}

impl ExperimentConfig {
    /// Probe radii `2^6, 2^7, …` up to `n/2` (from `n/32` when `λ > ρ`).
    pub fn radii(&self) -> Vec<f64> {
        let floor = if self.lambda > self.rho { self.n as f64 / 32.0 } else { 0.0 };
        (6..62)
            .map(|k| 2f64.powi(k))
            .take_while(|&r| r <= self.n as f64 / 2.0)
            .filter(|&r| r >= floor)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad(format!("lambda: {} must lie in (0, 1]", self.lambda));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return bad(format!("rho: {} must lie in [0, 1)", self.rho));
        }
        if self.replicas == 0 {
            return bad("replicas: must be >= 1".into());
        }
        if self.threads == 0 {
            return bad("threads: must be >= 1".into());
        }
        let needs_n = !matches!(self.experiment, ExperimentKind::Clt | ExperimentKind::Tasep);
        if needs_n && self.n < 2 {
            return bad(format!("n: {} must be >= 2", self.n));
        }
        let needs_t = matches!(self.experiment, ExperimentKind::Clt | ExperimentKind::Tasep | ExperimentKind::Coupling);
        if needs_t && !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("t: {} must be positive", self.t));
        }
        match self.experiment {
            ExperimentKind::Clt if self.lambda >= self.rho => bad(format!("clt requires lambda < rho, got {} >= {}", self.lambda, self.rho)),
            ExperimentKind::Udist if self.lambda <= self.rho => bad(format!("udist requires lambda > rho, got {} <= {}", self.lambda, self.rho)),
            ExperimentKind::Duality if self.lambda != self.rho => bad(format!("duality requires lambda = rho, got {} and {}", self.lambda, self.rho)),
            ExperimentKind::Fluct if self.radii().len() < 4 => bad(format!("n: {} leaves fewer than four probe radii", self.n)),
            _ => Ok(()),
        }
    }
}
