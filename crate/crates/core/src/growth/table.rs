use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interface::InitialInterface;
use crate::lattice::{LatticeBox, Site, WeightSource};
use crate::scalar::Scalar;

/// Where a site's maximum came from in the recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[repr(u8)]
pub enum Back {
    /// Both predecessors lie in the initial set: the site is some `A_k` or `B_m`.
    Boundary = 0,
    Left = 1,
    Below = 2,
}

/// Which boundary corners are allowed to start paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sources {
    #[default]
    Both,
    /// Only the `A_k` (the upper-left strip): passage times `G¹`.
    LeftOnly,
    /// Only the `B_m` (the lower-right strip): passage times `G²`.
    RightOnly,
}

/// What a lookup of `g` found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell<T> {
    /// In the initial occupied set: `g = 0`.
    Initial,
    /// In the computational domain.
    Domain { g: T, label: u8, back: Back },
    /// Outside the computed box (or outside the interface truncation).
    Outside,
}

/// Passage times over `D = {x <= nx, y <= ny} \ Γ₀`, stored row by row.
///
/// Row `y` covers the columns `lo(y)..=nx`; `lo` is nonincreasing in `y`, so
/// a site's lower neighbour is either stored or lies in the initial set.
#[derive(Clone, Debug)]
pub struct GrowthTable<T = f64> {
    nx: i64,
    ny: i64,
    y_min: i64,
    alpha: Vec<i64>,
    beta: Vec<i64>,
    sources: Sources,
    row_lo: Vec<i64>,
    row_off: Vec<usize>,
    g: Vec<T>,
    label: Vec<u8>,
    back: Vec<Back>,
}

/// `G` on the square box `{z <= (n, n)}`.
pub fn compute_growth<T: Scalar, W: WeightSource<T> + ?Sized>(
    weights: &W,
    interface: &InitialInterface,
    n: i64,
) -> Result<GrowthTable<T>> {
    compute_growth_in(weights, interface, n, n, Sources::Both)
}

/// `G` on `{x <= nx, y <= ny}` with a choice of source corners.
pub fn compute_growth_in<T: Scalar, W: WeightSource<T> + ?Sized>(
    weights: &W,
    interface: &InitialInterface,
    nx: i64,
    ny: i64,
    sources: Sources,
) -> Result<GrowthTable<T>> {
    if nx < 1 || ny < 1 {
        return Err(Error::Parameter(format!("box ({nx}, {ny}) must have both sides >= 1")));
    }
    if (interface.alpha().len() as i64) < ny {
        let k = interface.alpha().len() as i64 + 1;
        return Err(Error::Coverage { site: Site::new(0, k), what: "interface corner alpha" });
    }
    if (interface.beta().len() as i64) < nx {
        let m = interface.beta().len() as i64 + 1;
        return Err(Error::Coverage { site: Site::new(m, 0), what: "interface corner beta" });
    }
    let alpha = interface.alpha()[..ny as usize].to_vec();
    let beta = interface.beta()[..nx as usize].to_vec();
    let y_min = beta[nx as usize - 1] + 1;

    let rows = (ny - y_min + 1) as usize;
    let mut row_lo = Vec::with_capacity(rows);
    let mut row_off = Vec::with_capacity(rows + 1);
    let mut total: u64 = 0;
    let mut m = nx as usize; // first column with beta_m < y, scanning y upward
    for y in y_min..=ny {
        let lo = if y >= 1 {
            alpha[y as usize - 1] + 1
        } else {
            while m > 1 && beta[m - 2] < y {
                m -= 1;
            }
            m as i64
        };
        row_lo.push(lo);
        row_off.push(total as usize);
        total += (nx - lo + 1) as u64;
    }
    row_off.push(total as usize);

    let mut g: Vec<T> = Vec::new();
    let mut label: Vec<u8> = Vec::new();
    let mut back: Vec<Back> = Vec::new();
    let n = total as usize;
    g.try_reserve_exact(n).map_err(|_| Error::Resource { sites: total })?;
    label.try_reserve_exact(n).map_err(|_| Error::Resource { sites: total })?;
    back.try_reserve_exact(n).map_err(|_| Error::Resource { sites: total })?;

    let excluded = |x: i64, y: i64| match sources {
        Sources::Both => false,
        Sources::LeftOnly => y <= 0,
        Sources::RightOnly => x <= 0,
    };
    let zero = T::zero();
    for (r, y) in (y_min..=ny).enumerate() {
        let lo = row_lo[r];
        let below = (r > 0).then(|| (row_lo[r - 1], row_off[r - 1]));
        for x in lo..=nx {
            if excluded(x, y) {
                g.push(T::neg_infinity());
                label.push(0);
                back.push(Back::Boundary);
                continue;
            }
            let z = Site::new(x, y);
            let w = weights
                .weight(z)
                .ok_or(Error::Coverage { site: z, what: "weight" })?;
            let here = g.len();
            let left = (x > lo).then(|| here - 1);
            let down = below.and_then(|(blo, boff)| (x >= blo).then(|| boff + (x - blo) as usize));
            let (value, from, lab) = match (left, down) {
                (None, None) => (zero, Back::Boundary, 0),
                (Some(l), None) => (g[l].max(zero), Back::Left, label[l]),
                (None, Some(d)) => (g[d].max(zero), Back::Below, label[d]),
                (Some(l), Some(d)) => {
                    if g[l] > g[d] {
                        (g[l], Back::Left, label[l])
                    } else {
                        (g[d], Back::Below, label[d])
                    }
                }
            };
            // A predecessor in the initial set contributes 0 and one outside the
            // chosen sources -inf; a zero maximum therefore means a path starts here.
            let (value, from, lab) = if value == T::neg_infinity() {
                (value, Back::Boundary, 0)
            } else if value == zero {
                (zero, Back::Boundary, if x <= 0 { 1 } else { 2 })
            } else {
                (value, from, lab)
            };
            g.push(w + value);
            label.push(lab);
            back.push(from);
        }
    }
    Ok(GrowthTable { nx, ny, y_min, alpha, beta, sources, row_lo, row_off, g, label, back })
}

impl<T: Scalar> GrowthTable<T> {
    pub fn nx(&self) -> i64 {
        self.nx
    }

    pub fn ny(&self) -> i64 {
        self.ny
    }

    /// Lowest stored row.
    pub fn y_min(&self) -> i64 {
        self.y_min
    }

    /// Corner sequence `α_1..α_ny` the table was built from.
    pub fn alpha(&self) -> &[i64] {
        &self.alpha
    }

    /// Corner sequence `β_1..β_nx`.
    pub fn beta(&self) -> &[i64] {
        &self.beta
    }

    pub fn sources(&self) -> Sources {
        self.sources
    }

    /// Number of stored sites.
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// First stored column of row `y`.
    pub fn row_lo(&self, y: i64) -> Option<i64> {
        (self.y_min..=self.ny).contains(&y).then(|| self.row_lo[(y - self.y_min) as usize])
    }

    /// Passage times of row `y`, starting at column `row_lo(y)`.
    pub fn row(&self, y: i64) -> Option<&[T]> {
        (self.y_min..=self.ny).contains(&y).then(|| {
            let r = (y - self.y_min) as usize;
            &self.g[self.row_off[r]..self.row_off[r + 1]]
        })
    }

    /// Whether `z` lies in the truncated initial set.
    pub fn is_initial(&self, z: Site) -> bool {
        if z.x <= 0 && z.y <= 0 {
            true
        } else if z.y > 0 {
            z.x <= 0 && z.y <= self.ny && z.x <= self.alpha[z.y as usize - 1]
        } else {
            z.x <= self.nx && z.y <= self.beta[z.x as usize - 1]
        }
    }

    fn index(&self, z: Site) -> Option<usize> {
        if z.x > self.nx || z.y > self.ny || z.y < self.y_min {
            return None;
        }
        let r = (z.y - self.y_min) as usize;
        let lo = self.row_lo[r];
        (z.x >= lo).then(|| self.row_off[r] + (z.x - lo) as usize)
    }

    pub fn cell(&self, z: Site) -> Cell<T> {
        match self.index(z) {
            Some(i) => Cell::Domain { g: self.g[i], label: self.label[i], back: self.back[i] },
            None if z.x <= self.nx && z.y <= self.ny && self.is_initial(z) => Cell::Initial,
            None => Cell::Outside,
        }
    }

    /// `G(z)`: zero on the initial set, `None` outside the box.
    pub fn g(&self, z: Site) -> Option<T> {
        match self.index(z) {
            Some(i) => Some(self.g[i]),
            None => (z.x <= self.nx && z.y <= self.ny && self.is_initial(z)).then(T::zero),
        }
    }

    /// Cluster label (1 or 2) of a domain site.
    pub fn label(&self, z: Site) -> Option<u8> {
        self.index(z).map(|i| self.label[i])
    }

    pub fn back(&self, z: Site) -> Option<Back> {
        self.index(z).map(|i| self.back[i])
    }

    /// Whether `z` is a stored domain site.
    pub fn in_domain(&self, z: Site) -> bool {
        self.index(z).is_some()
    }

    /// All domain sites with their passage times, row by row.
    pub fn sites(&self) -> impl Iterator<Item = (Site, T)> + '_ {
        (self.y_min..=self.ny).flat_map(move |y| {
            let r = (y - self.y_min) as usize;
            let lo = self.row_lo[r];
            self.g[self.row_off[r]..self.row_off[r + 1]]
                .iter()
                .enumerate()
                .map(move |(i, &g)| (Site::new(lo + i as i64, y), g))
        })
    }

    /// First domain site where `g` differs bit-wise from `X + max(preds)`.
    pub fn recurrence_violation<W: WeightSource<T> + ?Sized>(&self, weights: &W) -> Option<Site> {
        self.sites().find_map(|(z, g)| {
            if g == T::neg_infinity() {
                return None;
            }
            let pred = |p: Site| match self.g(p) {
                Some(v) if v != T::neg_infinity() => v,
                _ => T::zero(),
            };
            let expect = weights.weight(z)? + pred(z.west()).max(pred(z.south()));
            (expect != g).then_some(z)
        })
    }

    /// Writes `x,y,g,label` for the domain sites inside `window`.
    pub fn write_csv(&self, window: LatticeBox, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "g", "label"]).map_err(csv_err)?;
        for z in window.sites() {
            if let Some(i) = self.index(z) {
                if self.g[i] == T::neg_infinity() {
                    continue;
                }
                w.write_record([
                    z.x.to_string(),
                    z.y.to_string(),
                    format!("{}", self.g[i].wide()),
                    self.label[i].to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
