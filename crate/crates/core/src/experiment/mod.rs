//! Batch runner: configuration, replica fan-out, aggregation and reports.

mod config;
mod kinds;

pub use config::{parse_config, ConfigOverrides, ExperimentConfig, ExperimentKind, Format};

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::csv_err;
use crate::interface::ExclusionProfile;
use crate::lattice::RngStream;
use crate::stats::{ReplicaResult, StatSummary};
use crate::tasep::{harris_simulate, margin, HarrisSpec};

/// Timing lives here and nowhere else, so every other byte is reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub started_unix: u64,
    pub wall_clock_secs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub summary: StatSummary,
    pub replicas_requested: u64,
    pub replicas_completed: u64,
    pub replicas_resumed: u64,
    /// Replicas that failed even after the retry, with the reason.
    pub failures: Vec<(u64, String)>,
    pub artifacts: Vec<PathBuf>,
    pub metadata: RunMetadata,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.summary.all_pass()
    }
}

/// The part of the config that determines replica results.
#[derive(Serialize, PartialEq)]
struct Fingerprint {
    experiment: ExperimentKind,
    lambda: f64,
    rho: f64,
    n: i64,
    t: f64,
    seed: u64,
}

fn fingerprint(c: &ExperimentConfig) -> String {
    let f = Fingerprint { experiment: c.experiment, lambda: c.lambda, rho: c.rho, n: c.n, t: c.t, seed: c.seed };
    serde_json::to_string(&f).expect("plain fields serialize")
}

/// Writes through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn io_json(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

/// Completed replicas from an earlier run with the same fingerprint.
fn load_manifest(path: &Path, print: &str) -> Result<Vec<ReplicaResult>> {
    let f = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut lines = BufReader::new(f).lines();
    match lines.next().transpose()? {
        Some(head) if head == print => {}
        _ => return Err(Error::Parameter(format!("resume: {} belongs to a different configuration", path.display()))),
    }
    let rest: Vec<String> = lines.collect::<std::io::Result<_>>()?;
    let mut done = Vec::new();
    for (i, line) in rest.iter().enumerate() {
        match serde_json::from_str::<ReplicaResult>(line) {
            Ok(r) => done.push(r),
            // An interrupted run may leave a torn final line.
            Err(_) if i + 1 == rest.len() || line.trim().is_empty() => {}
            Err(e) => return Err(Error::Parse { line: i + 2, detail: format!("manifest: {e}") }),
        }
    }
    Ok(done)
}

fn replica_with_retry(cfg: &ExperimentConfig, i: u64) -> Result<ReplicaResult> {
    match kinds::run_replica(cfg, i, 1) {
        Err(e) if kinds::retryable(&e) => kinds::run_replica(cfg, i, 2),
        other => other,
    }
}

fn replica_csv(cfg: &ExperimentConfig, results: &[ReplicaResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(kinds::csv_header(cfg.experiment)).map_err(csv_err)?;
    for r in results {
        for row in kinds::csv_rows(cfg.experiment, r) {
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn summary_bytes(cfg: &ExperimentConfig, s: &StatSummary) -> Result<Vec<u8>> {
    match cfg.format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(s).map_err(io_json)?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["criterion", "estimate", "target", "tolerance", "pass"]).map_err(csv_err)?;
            for v in &s.verdicts {
                w.write_record([v.criterion.clone(), v.estimate.to_string(), v.target.to_string(), v.tolerance.clone(), v.pass.to_string()])
                    .map_err(csv_err)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// Event log of replica 0, for the `tasep` experiment.
fn event_csv(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let stream = RngStream::new(cfg.seed, 0);
    let m = margin(cfg.t);
    let profile = ExclusionProfile::sample_product(cfg.lambda, cfg.rho, m as usize, m as usize + 1, &stream)?;
    let setup = HarrisSpec { record_events: true, ..HarrisSpec::new(m, cfg.t) };
    let traj = harris_simulate(&profile, &setup, &stream)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "bond", "kind"]).map_err(csv_err)?;
    for e in traj.events() {
        w.write_record([e.time.to_string(), e.bond.to_string(), e.kind.as_str().to_string()]).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Runs every replica, aggregates, and writes `replicas.csv`, the summary and
/// `report.json` under `config.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    fs::create_dir_all(&cfg.out)?;
    let manifest = cfg.out.join("manifest.jsonl");
    let print = fingerprint(cfg);
    let done = if cfg.resume { load_manifest(&manifest, &print)? } else { Vec::new() };
    let resumed = done.len() as u64;
    {
        // Rewrite the manifest with only the intact entries.
        let mut text = print.clone();
        text.push('\n');
        for r in &done {
            text.push_str(&serde_json::to_string(r).map_err(io_json)?);
            text.push('\n');
        }
        write_atomic(&manifest, text.as_bytes())?;
    }
    let have: std::collections::BTreeSet<u64> = done.iter().map(|r| r.replica).collect();
    let pending: Vec<u64> = (0..cfg.replicas).filter(|i| !have.contains(i)).collect();

    let log = Mutex::new(OpenOptions::new().append(true).open(&manifest)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Parameter(format!("threads: {e}")))?;
    let fresh: Vec<(u64, Result<ReplicaResult>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|&i| {
                let r = replica_with_retry(cfg, i);
                if let Ok(res) = &r {
                    let line = serde_json::to_string(res).map_err(io_json).map(|mut s| {
                        s.push('\n');
                        s
                    });
                    if let Ok(line) = line {
                        let mut f = log.lock().expect("manifest lock");
                        let _ = f.write_all(line.as_bytes()).and_then(|_| f.flush());
                    }
                }
                (i, r)
            })
            .collect()
    });

    let mut results = done;
    let mut failures = Vec::new();
    for (i, r) in fresh {
        match r {
            Ok(res) => results.push(res),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    results.sort_by_key(|r| r.replica);
    failures.sort();
    if results.is_empty() {
        return Err(Error::Domain(format!("every replica failed; first: {}", failures.first().map_or("", |f| f.1.as_str()))));
    }

    let summary = kinds::summarize(cfg, &results)?;
    let mut artifacts = Vec::new();
    let csv_path = cfg.out.join("replicas.csv");
    write_atomic(&csv_path, &replica_csv(cfg, &results)?)?;
    artifacts.push(csv_path);
    let summary_path = cfg.out.join(match cfg.format {
        Format::Json => "summary.json",
        Format::Csv => "summary.csv",
    });
    write_atomic(&summary_path, &summary_bytes(cfg, &summary)?)?;
    artifacts.push(summary_path);
    if cfg.events && cfg.experiment == ExperimentKind::Tasep {
        let p = cfg.out.join("events.csv");
        write_atomic(&p, &event_csv(cfg)?)?;
        artifacts.push(p);
    }
    artifacts.push(manifest);
    let report_path = cfg.out.join("report.json");
    artifacts.push(report_path.clone());
    let report = RunReport {
        config: cfg.clone(),
        summary,
        replicas_requested: cfg.replicas,
        replicas_completed: results.len() as u64,
        replicas_resumed: resumed,
        failures,
        artifacts,
        metadata: RunMetadata { started_unix, wall_clock_secs: clock.elapsed().as_secs_f64() },
    };
    let mut bytes = serde_json::to_vec_pretty(&report).map_err(io_json)?;
    bytes.push(b'\n');
    write_atomic(&report_path, &bytes)?;
    Ok(report)
}

/// CSV columns of `replicas.csv` for each experiment.
pub fn csv_schema(kind: ExperimentKind) -> &'static [&'static str] {
    kinds::csv_header(kind)
}
