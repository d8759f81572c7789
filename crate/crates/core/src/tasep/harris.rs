use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{active_move, Configuration, Event, MoveKind, TasepTrajectory, HOLE, PARTICLE, SECOND};
use crate::error::{Error, Result};
use crate::interface::ExclusionProfile;
use crate::lattice::{Lane, RngStream};

/// Options for [`harris_simulate`].
#[derive(Clone, Debug, PartialEq)]
pub struct HarrisSpec {
    /// The window is `[-half_width, half_width]` with closed ends.
    pub half_width: i64,
    pub t_max: f64,
    /// Replace the hole-particle pair at `{0, 1}` by a second-class particle at 0.
    pub second_class: bool,
    pub record_events: bool,
    /// Times at which to record the second-class position.
    pub sample_times: Vec<f64>,
}

impl HarrisSpec {
    pub fn new(half_width: i64, t_max: f64) -> Self {
        HarrisSpec { half_width, t_max, second_class: true, record_events: false, sample_times: vec![t_max] }
    }
}

/// Smallest half-width that keeps the closed ends out of reach of the
/// second-class particle by time `t` except with negligible probability.
pub fn margin(t: f64) -> i64 {
    (2.0 * t).ceil() as i64 + (10.0 * t.sqrt()).ceil() as i64 + 100
}

/// Runs the exclusion process started from `profile` on `[-M, M]`.
///
/// With `second_class` set the pair at `{0, 1}` is merged into a single
/// second-class particle at 0 and everything to its right shifts one site left.
/// Clocks are keyed per bond, so a run on a wider window reproduces the same
/// motion near the origin.
pub fn harris_simulate(profile: &ExclusionProfile, setup: &HarrisSpec, stream: &RngStream) -> Result<TasepTrajectory> {
    let m = setup.half_width;
    if !(setup.t_max >= 0.0 && setup.t_max.is_finite()) {
        return Err(Error::Parameter(format!("t_max = {} must be finite and >= 0", setup.t_max)));
    }
    if m < margin(setup.t_max) {
        return Err(Error::Parameter(format!(
            "half-width {m} is below the margin {} for t = {}",
            margin(setup.t_max),
            setup.t_max
        )));
    }
    let need_right = if setup.second_class { m + 1 } else { m };
    if (profile.left().len() as i64) < m || (profile.right().len() as i64) < need_right {
        return Err(Error::Parameter(format!(
            "profile covers {} sites left and {} right, window needs {m} and {need_right}",
            profile.left().len(),
            profile.right().len()
        )));
    }
    let mut sites = Vec::with_capacity(2 * m as usize + 1);
    sites.extend((0..m as usize).rev().map(|i| profile.left()[i]));
    if setup.second_class {
        sites.push(SECOND);
        sites.extend_from_slice(&profile.right()[1..=m as usize]);
    } else {
        sites.push(HOLE);
        sites.extend_from_slice(&profile.right()[..m as usize]);
    }
    let initial = Configuration::new(-m, sites)?;
    simulate_window(initial, setup.t_max, setup.record_events, &setup.sample_times, stream)
}

#[derive(Clone, Copy, PartialEq)]
struct Ring {
    time: f64,
    bond: usize,
    gen: u32,
}

impl Eq for Ring {}

impl Ord for Ring {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.bond.cmp(&self.bond))
    }
}

impl PartialOrd for Ring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const BOND_OFFSET: i64 = 1 << 27;

fn clock_counter(bond: i64, count: u32) -> u64 {
    debug_assert!((-BOND_OFFSET..BOND_OFFSET).contains(&bond));
    (((bond + BOND_OFFSET) as u64) << 28) | count as u64
}

/// Event-driven run of a fixed window with closed ends. Only bonds that can
/// move hold a clock; a clock survives while its bond stays movable.
pub fn simulate_window(
    initial: Configuration,
    t_max: f64,
    record_events: bool,
    sample_times: &[f64],
    stream: &RngStream,
) -> Result<TasepTrajectory> {
    let key = stream.lane(Lane::Clocks).key();
    let lo = initial.lo();
    let mut c = initial.sites().to_vec();
    let bonds = c.len().saturating_sub(1);
    let mut gen = vec![0u32; bonds];
    let mut live = vec![false; bonds];
    let mut count = vec![0u32; bonds];
    let mut heap = BinaryHeap::new();
    let mut schedule = |b: usize, now: f64, gen: &mut [u32], live: &mut [bool], heap: &mut BinaryHeap<Ring>| {
        let bond = lo + b as i64;
        let wait = key.exponential_at(clock_counter(bond, count[b]));
        count[b] += 1;
        gen[b] = gen[b].wrapping_add(1);
        live[b] = true;
        heap.push(Ring { time: now + wait, bond: b, gen: gen[b] });
    };
    for b in 0..bonds {
        if active_move(c[b], c[b + 1]).is_some() {
            schedule(b, 0.0, &mut gen, &mut live, &mut heap);
        }
    }
    let mut times: Vec<f64> = sample_times.to_vec();
    times.sort_by(f64::total_cmp);
    let mut pending = times.iter().peekable();
    let mut samples = Vec::with_capacity(times.len());
    let mut x = c.iter().position(|&s| s == SECOND).map(|i| lo + i as i64);
    let mut events = Vec::new();
    let (mut right_jumps, mut left_jumps, mut event_count) = (0u64, 0u64, 0u64);

    while let Some(r) = heap.pop() {
        if r.gen != gen[r.bond] || !live[r.bond] {
            continue;
        }
        if r.time > t_max {
            break;
        }
        while let Some(&&s) = pending.peek() {
            if s >= r.time {
                break;
            }
            if let Some(x) = x {
                samples.push((s, x));
            }
            pending.next();
        }
        let b = r.bond;
        let kind = active_move(c[b], c[b + 1]).expect("live clocks sit on movable bonds");
        c.swap(b, b + 1);
        event_count += 1;
        match kind {
            MoveKind::SecondRight => {
                right_jumps += 1;
                x = x.map(|x| x + 1);
            }
            MoveKind::SecondLeft => {
                left_jumps += 1;
                x = x.map(|x| x - 1);
            }
            MoveKind::FirstClass => {}
        }
        if record_events {
            events.push(Event { time: r.time, bond: lo + b as i64, kind });
        }
        // Every move leaves its own bond stuck.
        live[b] = false;
        gen[b] = gen[b].wrapping_add(1);
        for nb in [b.wrapping_sub(1), b + 1] {
            if nb >= bonds {
                continue;
            }
            let movable = active_move(c[nb], c[nb + 1]).is_some();
            if movable && !live[nb] {
                schedule(nb, r.time, &mut gen, &mut live, &mut heap);
            } else if !movable && live[nb] {
                live[nb] = false;
                gen[nb] = gen[nb].wrapping_add(1);
            }
        }
    }
    for &s in pending.filter(|&&s| s <= t_max) {
        if let Some(x) = x {
            samples.push((s, x));
        }
    }
    Ok(TasepTrajectory {
        initial,
        events,
        t_max,
        samples,
        horizons: None,
        right_jumps,
        left_jumps,
        event_count,
    })
}

/// Second-class position at `t_max` as the discrepancy of two exclusion
/// processes under the basic coupling: the second-class site is a particle in
/// one copy and a hole in the other. Every bond rings at rate 1 whether or not
/// it can move. Slow; meant for cross-checking [`simulate_window`].
pub fn discrepancy_simulate(initial: &Configuration, t_max: f64, stream: &RngStream) -> Result<i64> {
    let x0 = initial
        .second_class()
        .ok_or_else(|| Error::Domain("no second-class particle to follow".into()))?;
    let mut a: Vec<u8> = initial.sites().iter().map(|&s| (s == SECOND) as u8 | (s == PARTICLE) as u8).collect();
    let mut b: Vec<u8> = initial.sites().iter().map(|&s| (s == PARTICLE) as u8).collect();
    let bonds = a.len() - 1;
    let mut rng = stream.lane(Lane::Aux);
    let mut t = 0.0;
    loop {
        t += rng.exponential() / bonds as f64;
        if t > t_max {
            break;
        }
        let i = rng.below(bonds);
        for c in [&mut a, &mut b] {
            if c[i] == PARTICLE && c[i + 1] == HOLE {
                c.swap(i, i + 1);
            }
        }
    }
    let diff: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
    match diff[..] {
        [i] if a[i] == PARTICLE => Ok(initial.lo() + i as i64),
        _ => Err(Error::Coupling { time: t_max, detail: format!("copies differ at {diff:?}, started at {x0}") }),
    }
}
