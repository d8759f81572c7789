use thiserror::Error;

use crate::lattice::Site;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} lies outside the region {region}")]
    OutOfRegion { site: Site, region: String },

    #[error("cannot allocate {sites} sites")]
    Resource { sites: u64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation failed for `{sequence}` at index {index}: {reason}")]
    Validation {
        sequence: &'static str,
        index: usize,
        reason: String,
    },

    #[error("coverage gap: site {site} is not covered ({what})")]
    Coverage { site: Site, what: &'static str },

    #[error("competition interface left the box after {} sites", sites.len())]
    BoxExhausted { sites: Vec<Site> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time {requested} is beyond the reliable horizon {horizon}")]
    Horizon { requested: f64, horizon: f64 },

    #[error("space-time line leaves the window: {0}")]
    Window(String),

    #[error("coupling violated at time {time}: {detail}")]
    Coupling { time: f64, detail: String },

    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
