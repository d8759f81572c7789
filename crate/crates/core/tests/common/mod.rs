//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use corner_growth::interface::InitialInterface;
use corner_growth::lattice::{RngStream, Site, StreamWeights, WeightSource};

/// Best path found by enumeration: weight (summed in path order) and sites.
#[derive(Clone, Debug)]
pub struct Best {
    pub weight: f64,
    pub sites: Vec<Site>,
}

fn dfs(w: &dyn Fn(Site) -> f64, cur: Site, end: Site, sum: f64, stack: &mut Vec<Site>, best: &mut Option<Best>) {
    let sum = sum + w(cur);
    stack.push(cur);
    if cur == end {
        if best.as_ref().is_none_or(|b| sum > b.weight) {
            *best = Some(Best { weight: sum, sites: stack.clone() });
        }
    } else {
        if cur.x < end.x {
            dfs(w, cur.east(), end, sum, stack, best);
        }
        if cur.y < end.y {
            dfs(w, cur.north(), end, sum, stack, best);
        }
    }
    stack.pop();
}

/// Maximal path from `a` to `b` over every up-right path.
pub fn best_path(w: &dyn Fn(Site) -> f64, a: Site, b: Site) -> Option<Best> {
    if !a.le(b) {
        return None;
    }
    let mut best = None;
    dfs(w, a, b, 0.0, &mut Vec::new(), &mut best);
    best
}

/// Which corner a path leaves from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corner {
    A(i64),
    B(i64),
}

/// `G(z)` as the best path from any corner `A_k` (k <= ny) or `B_m` (m <= nx).
pub fn oracle_g(w: &dyn Fn(Site) -> f64, iface: &InitialInterface, nx: i64, ny: i64, z: Site) -> (Best, Corner) {
    let mut out: Option<(Best, Corner)> = None;
    let corners = (1..=ny)
        .map(|k| (iface.corner_a(k).unwrap(), Corner::A(k)))
        .chain((1..=nx).map(|m| (iface.corner_b(m).unwrap(), Corner::B(m))));
    for (c, tag) in corners {
        if let Some(b) = best_path(w, c, z) {
            if out.as_ref().is_none_or(|(o, _)| b.weight > o.weight) {
                out = Some((b, tag));
            }
        }
    }
    out.expect("every domain site is reachable from some corner")
}

/// A small random instance: interface, box side and its weights.
pub struct Instance {
    pub iface: InitialInterface,
    pub n: i64,
    pub weights: StreamWeights<f64>,
}

pub fn small_instance(seed: u64, index: u64) -> Instance {
    let stream = RngStream::new(seed, index);
    let mut aux = stream.clone();
    let lambda = 0.5 + 0.5 * aux.uniform();
    let rho = 0.5 * aux.uniform();
    let n = 1 + (index % 6) as i64;
    let iface = InitialInterface::sample_random_walk(lambda, rho, n as usize, &stream).unwrap();
    Instance { iface, n, weights: StreamWeights::new(&stream) }
}

impl Instance {
    pub fn w(&self) -> impl Fn(Site) -> f64 + '_ {
        move |z| self.weights.weight(z).unwrap()
    }
}
