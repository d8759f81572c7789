//! Initial growth interfaces and their exclusion-process counterparts.
//!
//! An interface is stored through its corner sequences: row `k >= 1` of the
//! initial occupied set ends at column `alpha[k-1]`, column `m >= 1` ends at
//! row `beta[m-1]`. The boundary walk is indexed so that the point with
//! position `s` satisfies `x - y = s`; a hole at position `j` is a unit step
//! east ending at that point and a particle is a unit step south.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lane, RngStream, Site};

/// Corners sampled per arm for a box of side `n`.
pub fn default_truncation(box_side: usize) -> usize {
    4 * box_side.max(1)
}

/// The staircase `γ₀` plus its declared asymptotic densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialInterface {
    alpha: Vec<i64>,
    beta: Vec<i64>,
    lambda: f64,
    rho: f64,
}

fn check_densities(lambda: f64, rho: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Parameter(format!("lambda = {lambda} must lie in (0, 1]")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Parameter(format!("rho = {rho} must lie in [0, 1)")));
    }
    Ok(())
}

fn check_corners(name: &'static str, seq: &[i64]) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::Validation { sequence: name, index: 0, reason: "empty sequence".into() });
    }
    let mut prev = -1;
    for (i, &v) in seq.iter().enumerate() {
        if v > -1 {
            return Err(Error::Validation {
                sequence: name,
                index: i + 1,
                reason: format!("entry {v} is not <= -1"),
            });
        }
        if v > prev {
            return Err(Error::Validation {
                sequence: name,
                index: i + 1,
                reason: format!("entry {v} increases after {prev}"),
            });
        }
        prev = v;
    }
    Ok(())
}

impl InitialInterface {
    /// Validated interface from explicit corner sequences (1-based error indices).
    pub fn build_deterministic(alpha: Vec<i64>, beta: Vec<i64>, lambda: f64, rho: f64) -> Result<Self> {
        check_corners("alpha", &alpha)?;
        check_corners("beta", &beta)?;
        check_densities(lambda, rho)?;
        Ok(InitialInterface { alpha, beta, lambda, rho })
    }

    /// Sample from the random-walk law: from (-1, 0) walk up with probability
    /// `lambda` (else left) until `length` rows are reached; from (0, -1) walk
    /// down with probability `rho` (else right) until `length` columns are reached.
    pub fn sample_random_walk(lambda: f64, rho: f64, length: usize, stream: &RngStream) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::Parameter("lambda = 0: the left walk never rises".into()));
        }
        check_densities(lambda, rho)?;
        if length == 0 {
            return Err(Error::Parameter("interface length must be >= 1".into()));
        }
        let mut up = stream.lane(Lane::LeftWalk);
        let mut alpha = Vec::with_capacity(length);
        let mut x = -1;
        while alpha.len() < length {
            if up.bernoulli(lambda) {
                alpha.push(x);
            } else {
                x -= 1;
            }
        }
        let mut down = stream.lane(Lane::RightWalk);
        let mut beta = Vec::with_capacity(length);
        let mut y = -1;
        while beta.len() < length {
            if down.bernoulli(rho) {
                y -= 1;
            } else {
                beta.push(y);
            }
        }
        Ok(InitialInterface { alpha, beta, lambda, rho })
    }

    /// The flat interface `alpha_k = beta_m = -l` for `length` corners per arm.
    pub fn build_flat(l: i64, length: usize) -> Result<Self> {
        if l <= 0 {
            return Err(Error::Parameter(format!("L = {l} must be >= 1")));
        }
        if length == 0 {
            return Err(Error::Parameter("interface length must be >= 1".into()));
        }
        Ok(InitialInterface { alpha: vec![-l; length], beta: vec![-l; length], lambda: 1.0, rho: 0.0 })
    }

    /// The coordinate axes staircase (step initial condition).
    pub fn axes(length: usize) -> Self {
        Self::build_flat(1, length.max(1)).expect("L = 1 is valid")
    }

    pub fn alpha(&self) -> &[i64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[i64] {
        &self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `alpha_k` for `k >= 1`, if within the truncation.
    pub fn alpha_at(&self, k: i64) -> Option<i64> {
        (k >= 1).then(|| self.alpha.get(k as usize - 1).copied()).flatten()
    }

    pub fn beta_at(&self, m: i64) -> Option<i64> {
        (m >= 1).then(|| self.beta.get(m as usize - 1).copied()).flatten()
    }

    /// `A_k = (alpha_k + 1, k)`.
    pub fn corner_a(&self, k: i64) -> Option<Site> {
        self.alpha_at(k).map(|a| Site::new(a + 1, k))
    }

    /// `B_m = (m, beta_m + 1)`.
    pub fn corner_b(&self, m: i64) -> Option<Site> {
        self.beta_at(m).map(|b| Site::new(m, b + 1))
    }

    /// Membership in the initial occupied set, for sites within the truncation.
    pub fn in_initial_set(&self, z: Site) -> Option<bool> {
        if z.x <= 0 && z.y <= 0 {
            Some(true)
        } else if z.y > 0 {
            if z.x > 0 {
                Some(false)
            } else {
                self.alpha_at(z.y).map(|a| z.x <= a)
            }
        } else {
            self.beta_at(z.x).map(|b| z.y <= b)
        }
    }

    /// Empirical slopes `(-alpha_K / K, -beta_K / K)` at the truncation end.
    pub fn empirical_slopes(&self) -> (f64, f64) {
        let k = self.alpha.len() as f64;
        let m = self.beta.len() as f64;
        (-(*self.alpha.last().unwrap()) as f64 / k, -(*self.beta.last().unwrap()) as f64 / m)
    }

    /// Slopes implied by the declared densities: `(1-λ)/λ` and `ρ/(1-ρ)`.
    pub fn declared_slopes(&self) -> (f64, f64) {
        ((1.0 - self.lambda) / self.lambda, self.rho / (1.0 - self.rho))
    }

    /// Largest absolute gap between empirical and declared slopes.
    pub fn slope_mismatch(&self) -> f64 {
        let (el, er) = self.empirical_slopes();
        let (dl, dr) = self.declared_slopes();
        (el - dl).abs().max((er - dr).abs())
    }

    /// Occupations `η₀` through the boundary-walk bijection.
    pub fn to_exclusion(&self) -> ExclusionProfile {
        let mut left = Vec::new();
        let mut x = -1;
        for &a in &self.alpha {
            left.extend(std::iter::repeat_n(0u8, (x - a) as usize));
            left.push(1);
            x = a;
        }
        let mut right = vec![1u8];
        let mut y = -1;
        for &b in &self.beta {
            right.extend(std::iter::repeat_n(1u8, (y - b) as usize));
            right.push(0);
            y = b;
        }
        ExclusionProfile { left, right }
    }

    /// Parses the `alpha:` / `beta:` / `lambda:` / `rho:` text format.
    pub fn parse_text(text: &str) -> Result<Self> {
        let (mut alpha, mut beta, mut lambda, mut rho) = (None, None, None, None);
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: line_no, detail: format!("expected `key: value`, got `{line}`") })?;
            let bad = |d: String| Error::Parse { line: line_no, detail: d };
            let ints = |v: &str| -> Result<Vec<i64>> {
                v.split_whitespace()
                    .map(|t| t.parse::<i64>().map_err(|_| bad(format!("`{t}` is not an integer"))))
                    .collect()
            };
            let real = |v: &str| -> Result<f64> {
                v.trim().parse::<f64>().map_err(|_| bad(format!("`{}` is not a number", v.trim())))
            };
            let slot_taken = |k: &str| bad(format!("duplicate key `{k}`"));
            match key.trim() {
                "alpha" if alpha.is_none() => alpha = Some(ints(value)?),
                "beta" if beta.is_none() => beta = Some(ints(value)?),
                "lambda" if lambda.is_none() => lambda = Some(real(value)?),
                "rho" if rho.is_none() => rho = Some(real(value)?),
                k @ ("alpha" | "beta" | "lambda" | "rho") => return Err(slot_taken(k)),
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::Parse { line: 0, detail: format!("missing `{k}` line") };
        let alpha = alpha.ok_or_else(|| missing("alpha"))?;
        let beta = beta.ok_or_else(|| missing("beta"))?;
        let lambda = lambda.unwrap_or_else(|| implied_lambda(&alpha));
        let rho = rho.unwrap_or_else(|| implied_rho(&beta));
        Self::build_deterministic(alpha, beta, lambda, rho)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        writeln!(s, "alpha: {}", join(&self.alpha)).unwrap();
        writeln!(s, "beta: {}", join(&self.beta)).unwrap();
        writeln!(s, "lambda: {}", self.lambda).unwrap();
        writeln!(s, "rho: {}", self.rho).unwrap();
        s
    }
}

// Densities read off the truncation end when the text omits them.
fn implied_lambda(alpha: &[i64]) -> f64 {
    match alpha.last() {
        Some(&a) if !alpha.is_empty() => {
            let slope = -(a as f64) / alpha.len() as f64;
            1.0 / (1.0 + slope)
        }
        _ => 1.0,
    }
}

fn implied_rho(beta: &[i64]) -> f64 {
    match beta.last() {
        Some(&b) if !beta.is_empty() => {
            let slope = -(b as f64) / beta.len() as f64;
            (slope / (1.0 + slope)).min(1.0 - 1e-9)
        }
        _ => 0.0,
    }
}

/// Exclusion configuration matching an interface: `left[i]` is `η(-1-i)`,
/// `right[i]` is `η(1+i)`. Site 0 is a hole and site 1 a particle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionProfile {
    left: Vec<u8>,
    right: Vec<u8>,
}

impl ExclusionProfile {
    pub fn new(left: Vec<u8>, right: Vec<u8>) -> Result<Self> {
        if right.first() != Some(&1) {
            return Err(Error::Validation { sequence: "right", index: 1, reason: "site 1 must hold a particle".into() });
        }
        if let Some(i) = left.iter().chain(&right).position(|&v| v > 1) {
            return Err(Error::Validation { sequence: "occupation", index: i + 1, reason: "entries must be 0 or 1".into() });
        }
        Ok(ExclusionProfile { left, right })
    }

    /// Product measure with density `lambda` left of 0 and `rho` right of 1.
    /// Uses the same draws as [`InitialInterface::sample_random_walk`], so the
    /// two constructions agree on their common prefix.
    pub fn sample_product(lambda: f64, rho: f64, left_len: usize, right_len: usize, stream: &RngStream) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) || !(0.0..=1.0).contains(&rho) {
            return Err(Error::Parameter(format!("densities ({lambda}, {rho}) outside [0, 1]")));
        }
        let mut up = stream.lane(Lane::LeftWalk);
        let left = (0..left_len).map(|_| up.bernoulli(lambda) as u8).collect();
        let mut down = stream.lane(Lane::RightWalk);
        let mut right = Vec::with_capacity(right_len.max(1));
        right.push(1);
        right.extend((1..right_len).map(|_| down.bernoulli(rho) as u8));
        Ok(ExclusionProfile { left, right })
    }

    /// `left[i] = η(-1-i)`.
    pub fn left(&self) -> &[u8] {
        &self.left
    }

    /// `right[i] = η(1+i)`.
    pub fn right(&self) -> &[u8] {
        &self.right
    }

    /// Occupation at site `j`, if specified.
    pub fn occupation(&self, j: i64) -> Option<u8> {
        match j {
            0 => Some(0),
            j if j > 0 => self.right.get(j as usize - 1).copied(),
            j => self.left.get((-j) as usize - 1).copied(),
        }
    }

    /// Empirical particle densities on each side (site 1 excluded).
    pub fn densities(&self) -> (f64, f64) {
        let mean = |v: &[u8]| if v.is_empty() { 0.0 } else { v.iter().map(|&b| b as f64).sum::<f64>() / v.len() as f64 };
        (mean(&self.left), mean(&self.right[1..]))
    }

    /// Inverse of [`InitialInterface::to_exclusion`]; trailing entries past the
    /// last complete corner are dropped.
    pub fn to_interface(&self, lambda: f64, rho: f64) -> Result<InitialInterface> {
        let mut alpha = Vec::new();
        let mut x = -1;
        for &e in &self.left {
            if e == 1 {
                alpha.push(x);
            } else {
                x -= 1;
            }
        }
        let mut beta = Vec::new();
        let mut y = -1;
        for &e in &self.right[1..] {
            if e == 1 {
                y -= 1;
            } else {
                beta.push(y);
            }
        }
        InitialInterface::build_deterministic(alpha, beta, lambda, rho)
    }
}
