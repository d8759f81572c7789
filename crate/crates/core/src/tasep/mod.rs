//! Exclusion processes: Harris simulation with a second-class particle, the
//! process reconstructed from a growth table, and flux counters.

mod coupling;
mod harris;

pub use coupling::{check_coupling, compress, coupled_second_class, exclusion_from_growth, pair_trajectory};
pub use harris::{discrepancy_simulate, harris_simulate, margin, simulate_window, HarrisSpec};

use serde::Serialize;

use crate::error::{Error, Result};

pub const HOLE: u8 = 0;
pub const PARTICLE: u8 = 1;
pub const SECOND: u8 = 2;

/// What moved across a bond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    /// Particle jumps onto the empty site to its right.
    FirstClass,
    /// Second-class particle steps onto the empty site to its right.
    SecondRight,
    /// A particle overtakes the second-class particle, which steps left.
    SecondLeft,
}

impl MoveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::FirstClass => "first-class",
            MoveKind::SecondRight => "second-right",
            MoveKind::SecondLeft => "second-left",
        }
    }
}

/// A move across the bond `(bond, bond + 1)` at `time`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub bond: i64,
    pub kind: MoveKind,
}

/// Occupations of the sites `lo, lo + 1, …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Configuration {
    lo: i64,
    sites: Vec<u8>,
}

/// The pair of states a move needs before and leaves after.
fn move_states(kind: MoveKind) -> ([u8; 2], [u8; 2]) {
    match kind {
        MoveKind::FirstClass => ([PARTICLE, HOLE], [HOLE, PARTICLE]),
        MoveKind::SecondRight => ([SECOND, HOLE], [HOLE, SECOND]),
        MoveKind::SecondLeft => ([PARTICLE, SECOND], [SECOND, PARTICLE]),
    }
}

/// The move a bond with these occupants can make, if any.
pub fn active_move(left: u8, right: u8) -> Option<MoveKind> {
    match (left, right) {
        (PARTICLE, HOLE) => Some(MoveKind::FirstClass),
        (SECOND, HOLE) => Some(MoveKind::SecondRight),
        (PARTICLE, SECOND) => Some(MoveKind::SecondLeft),
        _ => None,
    }
}

impl Configuration {
    pub fn new(lo: i64, sites: Vec<u8>) -> Result<Self> {
        if sites.iter().any(|&s| s > SECOND) {
            return Err(Error::Domain("occupations must be 0, 1 or 2".into()));
        }
        if sites.iter().filter(|&&s| s == SECOND).count() > 1 {
            return Err(Error::Domain("at most one second-class particle".into()));
        }
        Ok(Configuration { lo, sites })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last site.
    pub fn hi(&self) -> i64 {
        self.lo + self.sites.len() as i64 - 1
    }

    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn get(&self, p: i64) -> Option<u8> {
        (p >= self.lo).then(|| self.sites.get((p - self.lo) as usize).copied()).flatten()
    }

    pub fn second_class(&self) -> Option<i64> {
        self.sites.iter().position(|&s| s == SECOND).map(|i| self.lo + i as i64)
    }

    /// `N_{r,r'}`: first-class particles in `[r, r']`, negated for `r' < r`.
    pub fn count_particles(&self, r: i64, r2: i64) -> Result<i64> {
        let (a, b, sign) = if r2 >= r { (r, r2, 1) } else { (r2, r, -1) };
        if a < self.lo || b > self.hi() {
            return Err(Error::Window(format!("[{a}, {b}] is not inside [{}, {}]", self.lo, self.hi())));
        }
        let n = (a..=b).filter(|&p| self.get(p) == Some(PARTICLE)).count() as i64;
        Ok(sign * n)
    }

    /// Applies `e`, failing if the bond does not hold the states the move needs.
    pub fn apply(&mut self, e: &Event) -> Result<()> {
        let (before, after) = move_states(e.kind);
        let i = e.bond - self.lo;
        if i < 0 || i + 1 >= self.sites.len() as i64 {
            return Err(Error::Window(format!("bond {} outside [{}, {}]", e.bond, self.lo, self.hi())));
        }
        let i = i as usize;
        if self.sites[i..i + 2] != before {
            return Err(Error::Coupling {
                time: e.time,
                detail: format!("{:?} at bond {} found {:?}", e.kind, e.bond, &self.sites[i..i + 2]),
            });
        }
        self.sites[i..i + 2].copy_from_slice(&after);
        Ok(())
    }
}

/// Which occupants a flux counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    Particles,
    Holes,
}

impl Species {
    fn code(self) -> u8 {
        match self {
            Species::Particles => PARTICLE,
            Species::Holes => HOLE,
        }
    }
}

/// A simulated or reconstructed exclusion trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct TasepTrajectory {
    pub(crate) initial: Configuration,
    pub(crate) events: Vec<Event>,
    pub(crate) t_max: f64,
    pub(crate) samples: Vec<(f64, i64)>,
    /// Per-bond reliable horizon, indexed from `initial.lo()`; `None` when the
    /// whole window is exact up to `t_max`.
    pub(crate) horizons: Option<Vec<f64>>,
    pub(crate) right_jumps: u64,
    pub(crate) left_jumps: u64,
    pub(crate) event_count: u64,
}

impl TasepTrajectory {
    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    /// Recorded events in time order (empty unless recording was requested).
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Second-class positions `(t, X(t))` at the requested times.
    pub fn samples(&self) -> &[(f64, i64)] {
        &self.samples
    }

    /// Rightward and leftward jumps of the second-class particle by `t_max`.
    pub fn jumps(&self) -> (u64, u64) {
        (self.right_jumps, self.left_jumps)
    }

    /// Number of moves executed up to `t_max`.
    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    /// Reliable horizon of the bond `(b, b + 1)`.
    pub fn bond_horizon(&self, b: i64) -> f64 {
        match &self.horizons {
            None => {
                if b >= self.initial.lo && b < self.initial.hi() {
                    self.t_max
                } else {
                    0.0
                }
            }
            Some(h) => {
                let i = b - self.initial.lo;
                if i < 0 {
                    0.0
                } else {
                    h.get(i as usize).copied().unwrap_or(0.0)
                }
            }
        }
    }

    /// Whether the occupation of site `p` at time `t` is exact.
    pub fn valid_at(&self, p: i64, t: f64) -> bool {
        let inner = |b: i64| b < self.initial.lo || b >= self.initial.hi() || t <= self.bond_horizon(b);
        p >= self.initial.lo && p <= self.initial.hi() && inner(p - 1) && inner(p)
    }

    /// Earliest bond horizon: the whole window is exact up to this time.
    pub fn horizon(&self) -> f64 {
        match &self.horizons {
            None => self.t_max,
            Some(h) => h.iter().copied().fold(self.t_max, f64::min),
        }
    }

    /// Configuration after every event with time `<= t`.
    pub fn config_at(&self, t: f64) -> Result<Configuration> {
        if t > self.horizon() {
            return Err(Error::Horizon { requested: t, horizon: self.horizon() });
        }
        self.replay_to(t)
    }

    /// Like [`config_at`](Self::config_at) past the horizon; only sites passing
    /// [`valid_at`](Self::valid_at) are then exact.
    pub fn replay_to(&self, t: f64) -> Result<Configuration> {
        if self.events.is_empty() && self.event_count > 0 {
            return Err(Error::Domain("events were not recorded".into()));
        }
        let mut c = self.initial.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            c.apply(e)?;
        }
        Ok(c)
    }

    /// `N_{r,r'}` at time `t`.
    pub fn count_particles(&self, t: f64, r: i64, r2: i64) -> Result<i64> {
        self.config_at(t)?.count_particles(r, r2)
    }
}

/// Signed count of `species` crossing the space-time segment from `(0, x0)` to
/// `(t, x1)`: left-to-right crossings minus right-to-left ones. A site on the
/// segment counts as being to its left.
pub fn flux_between(traj: &TasepTrajectory, species: Species, x0: f64, x1: f64, t: f64) -> Result<i64> {
    let c0 = &traj.initial;
    let (lo, hi) = (c0.lo as f64, c0.hi() as f64);
    if x0.min(x1) < lo || x0.max(x1) > hi {
        return Err(Error::Window(format!("segment {x0} -> {x1} leaves [{lo}, {hi}]")));
    }
    if t > traj.t_max {
        return Err(Error::Horizon { requested: t, horizon: traj.t_max });
    }
    let (a, b) = (x0.min(x1).floor() as i64 - 1, x0.max(x1).ceil() as i64 + 1);
    for bond in a.max(c0.lo)..b.min(c0.hi()) {
        let h = traj.bond_horizon(bond);
        if t > h {
            return Err(Error::Horizon { requested: t, horizon: h });
        }
    }
    if traj.events.is_empty() && traj.event_count > 0 {
        return Err(Error::Domain("events were not recorded".into()));
    }
    let line = |s: f64| if t > 0.0 { x0 + (x1 - x0) * s / t } else { x0 };
    // Times at which the segment passes over each lattice site.
    let mut sweeps: Vec<(f64, i64, i64)> = Vec::new();
    if x1 > x0 {
        for p in (x0.floor() as i64 + 1)..=(x1.floor() as i64) {
            sweeps.push(((p as f64 - x0) / (x1 - x0) * t, p, -1));
        }
    } else if x1 < x0 {
        for p in (x1.floor() as i64 + 1)..=(x0.floor() as i64) {
            sweeps.push(((x0 - p as f64) / (x0 - x1) * t, p, 1));
        }
        sweeps.reverse();
    }
    let code = species.code();
    let mut c = c0.clone();
    let mut flux = 0i64;
    let mut sw = sweeps.iter().peekable();
    for e in traj.events.iter().take_while(|e| e.time <= t) {
        while let Some(&&(s, p, sign)) = sw.peek() {
            if s > e.time {
                break;
            }
            if c.get(p) == Some(code) {
                flux += sign;
            }
            sw.next();
        }
        let x = line(e.time);
        let across = (e.bond as f64) <= x && x < (e.bond + 1) as f64;
        if across {
            let (before, _) = move_states(e.kind);
            // The left occupant moves right, the right occupant moves left.
            if before[0] == code {
                flux += 1;
            }
            if before[1] == code {
                flux -= 1;
            }
        }
        c.apply(e)?;
    }
    for &(_, p, sign) in sw {
        if c.get(p) == Some(code) {
            flux += sign;
        }
    }
    Ok(flux)
}

/// Flux through the segment `(0, 0)–(t, r·t)`.
pub fn flux(traj: &TasepTrajectory, species: Species, r: f64, t: f64) -> Result<i64> {
    flux_between(traj, species, 0.0, r * t, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_the_reversal_convention() {
        let c = Configuration::new(-2, vec![1, 0, 1, 1, 0]).unwrap();
        assert_eq!(c.count_particles(0, 0).unwrap(), 1);
        assert_eq!(c.count_particles(-2, 2).unwrap(), 3);
        assert_eq!(c.count_particles(2, -2).unwrap(), -3);
        assert!(c.count_particles(-3, 0).is_err());
    }

    #[test]
    fn apply_enforces_exclusion() {
        let mut c = Configuration::new(0, vec![1, 1, 0]).unwrap();
        let e = Event { time: 1.0, bond: 0, kind: MoveKind::FirstClass };
        assert!(matches!(c.apply(&e), Err(Error::Coupling { .. })));
        c.apply(&Event { bond: 1, ..e }).unwrap();
        assert_eq!(c.sites(), &[1, 0, 1]);
        assert!(Configuration::new(0, vec![2, 2]).is_err());
    }
}
