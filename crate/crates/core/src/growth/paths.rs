use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::table::{Back, GrowthTable};
use crate::lattice::{Site, WeightSource};
use crate::scalar::Scalar;

/// An up-right lattice path with its total weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectedPath<T = f64> {
    sites: Vec<Site>,
    weight: T,
}

fn check_steps(sites: &[Site]) -> Result<()> {
    for w in sites.windows(2) {
        let d = w[1] - w[0];
        if d != Site::EAST && d != Site::NORTH {
            return Err(Error::Domain(format!("{} -> {} is not an up-right step", w[0], w[1])));
        }
    }
    Ok(())
}

impl<T: Scalar> DirectedPath<T> {
    /// Path through `sites`, weighted by `weights`.
    pub fn new<W: WeightSource<T> + ?Sized>(sites: Vec<Site>, weights: &W) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Domain("empty path".into()));
        }
        check_steps(&sites)?;
        let mut weight = T::zero();
        for &z in &sites {
            weight = weight + weights.weight(z).ok_or(Error::Coverage { site: z, what: "weight" })?;
        }
        Ok(DirectedPath { sites, weight })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn weight(&self) -> T {
        self.weight
    }

    pub fn start(&self) -> Site {
        self.sites[0]
    }

    pub fn end(&self) -> Site {
        *self.sites.last().expect("paths are nonempty")
    }
}

/// Last-passage time from `z` to `z2` by dynamic programming over the rectangle.
pub fn passage_time<T: Scalar, W: WeightSource<T> + ?Sized>(weights: &W, z: Site, z2: Site) -> Result<T> {
    if !z.le(z2) {
        return Err(Error::Domain(format!("{z} is not below-left of {z2}")));
    }
    let w = (z2.x - z.x + 1) as usize;
    let mut row = vec![T::neg_infinity(); w];
    for y in z.y..=z2.y {
        let mut left = T::neg_infinity();
        for (i, cell) in row.iter_mut().enumerate() {
            let s = Site::new(z.x + i as i64, y);
            let x = weights.weight(s).ok_or(Error::Coverage { site: s, what: "weight" })?;
            let best = if i == 0 && y == z.y { T::zero() } else { left.max(*cell) };
            *cell = x + best;
            left = *cell;
        }
    }
    Ok(row[w - 1])
}

/// Optimal path into `z`, recovered backwards from the stored passage times.
///
/// Steps west when `g(west) > g(south)` and south otherwise; the first site is
/// the boundary corner the path leaves from.
pub fn geodesic_backtrack<T: Scalar>(table: &GrowthTable<T>, z: Site) -> Result<Vec<Site>> {
    let mut back = table
        .back(z)
        .ok_or_else(|| Error::Domain(format!("{z} is not in the computed domain")))?;
    let mut path = vec![z];
    let mut cur = z;
    while back != Back::Boundary {
        cur = match back {
            Back::Left => cur.west(),
            _ => cur.south(),
        };
        path.push(cur);
        back = table.back(cur).expect("backpointers stay inside the domain");
    }
    if table.g(cur) == Some(T::neg_infinity()) {
        return Err(Error::Domain(format!("{z} is not reachable from the selected sources")));
    }
    path.reverse();
    Ok(path)
}

/// Boundary corner an optimal path leaves from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Contact {
    /// `A_k`, on the upper-left arm.
    A(i64),
    /// `B_m`, on the lower-right arm.
    B(i64),
}

/// The index where the backtracked geodesic into `z` leaves the initial set.
pub fn contact_point<T: Scalar>(table: &GrowthTable<T>, z: Site) -> Result<Contact> {
    let start = geodesic_backtrack(table, z)?[0];
    Ok(if start.x <= 0 { Contact::A(start.y) } else { Contact::B(start.x) })
}

/// The competition interface `φ₀ = (0,0), φ₁, …` with its jump times `g(φₙ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompetitionPath<T = f64> {
    sites: Vec<Site>,
    times: Vec<T>,
}

impl<T: Scalar> CompetitionPath<T> {
    /// Wraps explicit sites and times (both nonempty, same length).
    pub fn from_parts(sites: Vec<Site>, times: Vec<T>) -> Result<Self> {
        if sites.is_empty() || sites.len() != times.len() {
            return Err(Error::Domain("sites and times must be nonempty and of equal length".into()));
        }
        check_steps(&sites)?;
        Ok(CompetitionPath { sites, times })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn last(&self) -> Site {
        *self.sites.last().expect("paths are nonempty")
    }

    /// `ψ(t) = φₙ` for the `n` with `g(φₙ) <= t < g(φₙ₊₁)`.
    pub fn psi_at(&self, t: T) -> Result<Site> {
        let horizon = *self.times.last().expect("paths are nonempty");
        if !(t >= T::zero()) || t >= horizon {
            return Err(Error::Horizon { requested: t.wide(), horizon: horizon.wide() });
        }
        let n = self.times.partition_point(|&s| s <= t);
        Ok(self.sites[n - 1])
    }

    /// Index of `ψ(t)` in the path, under the same contract as [`psi_at`](Self::psi_at).
    pub fn psi_index(&self, t: T) -> Result<usize> {
        self.psi_at(t)?;
        Ok(self.times.partition_point(|&s| s <= t) - 1)
    }
}

/// Follows the competition interface for up to `max_steps` steps.
///
/// Steps east when `g(φ + (1,0)) < g(φ + (0,1))` and north otherwise. Leaving
/// the box first is an error carrying the partial path.
pub fn competition_interface<T: Scalar>(table: &GrowthTable<T>, max_steps: usize) -> Result<CompetitionPath<T>> {
    let mut sites = Vec::with_capacity(max_steps + 1);
    let mut times = Vec::with_capacity(max_steps + 1);
    let mut cur = Site::ORIGIN;
    sites.push(cur);
    times.push(T::zero());
    while sites.len() <= max_steps {
        let (Some(ge), Some(gn)) = (table.g(cur.east()), table.g(cur.north())) else {
            return Err(Error::BoxExhausted { sites });
        };
        let (next, t) = if ge < gn { (cur.east(), ge) } else { (cur.north(), gn) };
        cur = next;
        sites.push(cur);
        times.push(t);
    }
    Ok(CompetitionPath { sites, times })
}
