//! Estimators and hypothesis tests over replica outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::lattice::{Lane, RngStream, Site};
use crate::shape;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    xs.into_iter().for_each(|x| acc.add(x));
    acc.total()
}

pub fn mean(xs: &[f64]) -> f64 {
    sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my))) / (xs.len() as f64 - 1.0)
}

pub fn variance(xs: &[f64]) -> f64 {
    covariance(xs, xs)
}

/// Median of a copy of `xs` (mean of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Kolmogorov distribution tail `P(K > x)`, accurate well below `1e-6`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // P(K <= x) = sqrt(2π)/x Σ exp(-(2k-1)²π²/(8x²))
        let c = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let mut acc = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * c).exp();
            acc += term;
            if term < 1e-17 {
                break;
            }
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * acc).clamp(0.0, 1.0)
    } else {
        let mut acc = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            acc += if k % 2 == 1 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * acc).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value for a KS distance `d` with effective size `n`.
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let s = n.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// Result of a Kolmogorov–Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
    pub n: usize,
    /// Samples outside the support by more than `1e-9`, clamped before testing.
    pub out_of_range: usize,
}

impl KsResult {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// One-sample KS distance against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult { d, p_value: ks_p_value(d, n), n: v.len(), out_of_range: 0 }
}

/// One-sample KS test against `Uniform[a, b]`.
pub fn ks_uniform_test(samples: &[f64], a: f64, b: f64) -> Result<KsResult> {
    if samples.len() < 20 {
        return Err(Error::Parameter(format!("KS needs >= 20 samples, got {}", samples.len())));
    }
    if !(a < b) {
        return Err(Error::Parameter(format!("empty interval [{a}, {b}]")));
    }
    let slack = 1e-9;
    let out_of_range = samples.iter().filter(|&&x| x < a - slack || x > b + slack).count();
    let clamped: Vec<f64> = samples.iter().map(|x| x.clamp(a, b)).collect();
    let mut r = ks_one_sample(&clamped, |x| (x - a) / (b - a));
    r.out_of_range = out_of_range;
    Ok(r)
}

/// Two-sample KS test.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> KsResult {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    KsResult { d, p_value: ks_p_value(d, ne), n: n + m, out_of_range: 0 }
}

/// KS test against a normal law.
pub fn ks_normal(samples: &[f64], mean: f64, sd: f64) -> Result<KsResult> {
    let law = Normal::new(mean, sd).map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(ks_one_sample(samples, |x| law.cdf(x)))
}

/// KS test against the mean-1 exponential law.
pub fn ks_exponential(samples: &[f64]) -> KsResult {
    ks_one_sample(samples, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() })
}

/// Pearson chi-square goodness of fit; returns `(statistic, p-value)`.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(Error::Parameter("chi-square needs >= 2 matching bins".into()));
    }
    let stat = sum(observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e));
    let law = ChiSquared::new((observed.len() - 1) as f64).map_err(|e| Error::Parameter(e.to_string()))?;
    Ok((stat, 1.0 - law.cdf(stat)))
}

/// Terminal direction of an interface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirectionEstimate {
    /// `φ_n(2)/φ_n(1)`; `0` or `∞` when the path ends on an axis.
    pub tan: f64,
    pub degenerate: bool,
}

pub fn estimate_direction(path: &[Site]) -> Result<DirectionEstimate> {
    if path.len() < 3 {
        return Err(Error::Parameter("direction needs a path of length >= 2".into()));
    }
    let z = path[path.len() - 1];
    Ok(match (z.x, z.y) {
        (0, _) => DirectionEstimate { tan: f64::INFINITY, degenerate: true },
        (_, 0) => DirectionEstimate { tan: 0.0, degenerate: true },
        (x, y) => DirectionEstimate { tan: y as f64 / x as f64, degenerate: false },
    })
}

/// `Û` from a direction, with sentinels `+1` (tan = 0) and `-1` (tan = ∞).
pub fn u_from_direction(d: &DirectionEstimate) -> f64 {
    if d.tan <= 0.0 {
        1.0
    } else if d.tan.is_infinite() {
        -1.0
    } else {
        shape::u_from_tan(d.tan).expect("finite positive tangent")
    }
}

/// Empirical rates of `ψ(t)` over replicas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovarianceSummary {
    pub mean_i_rate: f64,
    pub mean_j_rate: f64,
    pub var_i_rate: f64,
    pub var_j_rate: f64,
    pub cov_rate: f64,
    pub replicas: usize,
}

/// Sample means of `(I/t, J/t)` and (co)variances of the `√t`-scaled fluctuations.
pub fn covariance_summary(samples: &[(f64, f64)], t: f64, lambda: f64, rho: f64) -> Result<CovarianceSummary> {
    if samples.len() < 2 {
        return Err(Error::Parameter("covariance needs >= 2 replicas".into()));
    }
    let s = t.sqrt();
    let i: Vec<f64> = samples.iter().map(|p| (p.0 - (1.0 - rho) * (1.0 - lambda) * t) / s).collect();
    let j: Vec<f64> = samples.iter().map(|p| (p.1 - rho * lambda * t) / s).collect();
    Ok(CovarianceSummary {
        mean_i_rate: mean(&samples.iter().map(|p| p.0 / t).collect::<Vec<_>>()),
        mean_j_rate: mean(&samples.iter().map(|p| p.1 / t).collect::<Vec<_>>()),
        var_i_rate: variance(&i),
        var_j_rate: variance(&j),
        cov_rate: covariance(&i, &j),
        replicas: samples.len(),
    })
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy = sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = sum(x.iter().map(|a| (a - mx).powi(2)));
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Distance between the first path vertex whose projection on `dir` reaches `r`
/// and the point `r·dir`. `dir` must be a unit vector.
pub fn deviation_at(path: &[Site], dir: (f64, f64), r: f64) -> Option<f64> {
    path.iter()
        .find(|z| z.x as f64 * dir.0 + z.y as f64 * dir.1 >= r)
        .map(|z| (z.x as f64 - r * dir.0).hypot(z.y as f64 - r * dir.1))
}

/// Unit vector at angle `atan(tan)`.
pub fn unit_direction(tan: f64) -> (f64, f64) {
    let a = tan.atan();
    (a.cos(), a.sin())
}

/// Fitted fluctuation exponent with its bootstrap standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub radii: Vec<f64>,
    pub medians: Vec<f64>,
}

fn log_median_slope(radii: &[f64], rows: &[&Vec<f64>]) -> (f64, Vec<f64>) {
    let medians: Vec<f64> = (0..radii.len())
        .map(|k| median(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect();
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = medians.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    (linear_fit(&lx, &ly).0, medians)
}

/// Slope of log median deviation against log radius; `profiles[i][k]` is
/// replica `i`'s deviation at `radii[k]`. Standard error from `resamples`
/// bootstrap draws of whole replicas.
pub fn fluctuation_exponent(profiles: &[Vec<f64>], radii: &[f64], resamples: usize, stream: &RngStream) -> Result<ExponentFit> {
    if radii.len() < 4 {
        return Err(Error::Parameter(format!("need >= 4 radii, got {}", radii.len())));
    }
    if profiles.is_empty() || profiles.iter().any(|p| p.len() != radii.len()) {
        return Err(Error::Parameter("every profile needs one deviation per radius".into()));
    }
    let rows: Vec<&Vec<f64>> = profiles.iter().collect();
    let (slope, medians) = log_median_slope(radii, &rows);
    let mut rng = stream.lane(Lane::Resample);
    let n = profiles.len();
    let slopes: Vec<f64> = (0..resamples)
        .map(|_| {
            let pick: Vec<&Vec<f64>> = (0..n).map(|_| &profiles[rng.below(n)]).collect();
            log_median_slope(radii, &pick).0
        })
        .collect();
    let stderr = if resamples > 1 { variance(&slopes).sqrt() } else { 0.0 };
    Ok(ExponentFit { slope, stderr, radii: radii.to_vec(), medians })
}

/// One acceptance verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub estimate: f64,
    pub target: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Verdict {
    pub fn new(criterion: impl Into<String>, estimate: f64, target: f64, tolerance: impl Into<String>, pass: bool) -> Self {
        Verdict { criterion: criterion.into(), estimate, target, tolerance: tolerance.into(), pass }
    }

    /// `|estimate - target| <= rel·|target|`.
    pub fn relative(criterion: impl Into<String>, estimate: f64, target: f64, rel: f64) -> Self {
        let pass = (estimate - target).abs() <= rel * target.abs();
        Verdict::new(criterion, estimate, target, format!("±{}%", rel * 100.0), pass)
    }

    /// `|estimate - target| <= abs`.
    pub fn absolute(criterion: impl Into<String>, estimate: f64, target: f64, abs: f64) -> Self {
        let pass = (estimate - target).abs() <= abs;
        Verdict::new(criterion, estimate, target, format!("±{abs}"), pass)
    }

    /// `lo <= estimate <= hi`.
    pub fn within(criterion: impl Into<String>, estimate: f64, target: f64, lo: f64, hi: f64) -> Self {
        let pass = (lo..=hi).contains(&estimate);
        Verdict::new(criterion, estimate, target, format!("[{lo}, {hi}]"), pass)
    }

    /// A KS p-value above `level`.
    pub fn ks(criterion: impl Into<String>, r: &KsResult, level: f64) -> Self {
        Verdict::new(criterion, r.p_value, level, format!("p > {level}"), r.passes(level))
    }
}

/// Everything one replica contributes to a summary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplicaResult {
    pub replica: u64,
    /// Box side actually used, after any retries.
    pub n: i64,
    /// Terminal direction estimate `tan θ̂` and its `Û`.
    pub tan: Option<f64>,
    pub u: Option<f64>,
    /// `(t, I(t), J(t))`.
    pub psi: Vec<(f64, i64, i64)>,
    /// `(t, X(t))`.
    pub x: Vec<(f64, i64)>,
    /// `(r, transverse deviation)`.
    pub deviations: Vec<(f64, f64)>,
    /// Named scalar observables.
    pub values: BTreeMap<String, f64>,
    /// Raw draws pooled across replicas (ratios, reversed weights, …).
    pub samples: Vec<f64>,
}

impl ReplicaResult {
    pub fn new(replica: u64, n: i64) -> Self {
        ReplicaResult { replica, n, ..Default::default() }
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Aggregates over the replica list plus the verdicts they support.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StatSummary {
    pub means: BTreeMap<String, f64>,
    pub covariances: BTreeMap<String, f64>,
    pub ks: BTreeMap<String, KsResult>,
    pub exponent: Option<ExponentFit>,
    pub verdicts: Vec<Verdict>,
}

impl StatSummary {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}
