use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };
    pub const EAST: Site = Site { x: 1, y: 0 };
    pub const NORTH: Site = Site { x: 0, y: 1 };

    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    /// The l1 norm `|x| + |y|`.
    pub fn norm1(self) -> i64 {
        self.x.abs() + self.y.abs()
    }

    /// Componentwise partial order.
    pub fn le(self, other: Site) -> bool {
        self.x <= other.x && self.y <= other.y
    }

    pub fn east(self) -> Site {
        self + Site::EAST
    }

    pub fn north(self) -> Site {
        self + Site::NORTH
    }

    pub fn west(self) -> Site {
        self - Site::EAST
    }

    pub fn south(self) -> Site {
        self - Site::NORTH
    }
}

impl Add for Site {
    type Output = Site;
    fn add(self, o: Site) -> Site {
        Site::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Site {
    type Output = Site;
    fn sub(self, o: Site) -> Site {
        Site::new(self.x - o.x, self.y - o.y)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Closed rectangle `[min, max]` of lattice sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    min: Site,
    max: Site,
}

impl LatticeBox {
    pub fn new(min: Site, max: Site) -> Result<Self> {
        if !min.le(max) {
            return Err(Error::Domain(format!("box corners {min} and {max} are not ordered")));
        }
        let b = LatticeBox { min, max };
        if usize::try_from(b.site_count_u64()).is_err() {
            return Err(Error::Resource { sites: b.site_count_u64() });
        }
        Ok(b)
    }

    pub fn min(&self) -> Site {
        self.min
    }

    pub fn max(&self) -> Site {
        self.max
    }

    pub fn width(&self) -> usize {
        (self.max.x - self.min.x + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.max.y - self.min.y + 1) as usize
    }

    fn site_count_u64(&self) -> u64 {
        (self.max.x - self.min.x + 1) as u64 * (self.max.y - self.min.y + 1) as u64
    }

    pub fn site_count(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, z: Site) -> bool {
        self.min.le(z) && z.le(self.max)
    }

    /// Row-major index relative to the min corner.
    pub fn index_of(&self, z: Site) -> Option<usize> {
        self.contains(z).then(|| {
            (z.y - self.min.y) as usize * self.width() + (z.x - self.min.x) as usize
        })
    }

    /// Sites in row-major order (x fastest).
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.min.y..=self.max.y)
            .flat_map(move |y| (self.min.x..=self.max.x).map(move |x| Site::new(x, y)))
    }
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}
