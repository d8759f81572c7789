use super::{Configuration, Event, MoveKind, TasepTrajectory, HOLE, PARTICLE, SECOND};
use crate::error::{Error, Result};
use crate::growth::{CompetitionPath, GrowthTable, Sources};
use crate::lattice::Site;
use crate::scalar::Scalar;

/// The exclusion process encoded by a growth table: site `(i, j)` growing at
/// time `g(i, j)` swaps particle `j` at `i - j` with hole `i` at `i - j + 1`.
///
/// The window is exactly the span of the box's boundary walk. Each bond keeps
/// the time of the last in-box site on its diagonal as its horizon.
pub fn exclusion_from_growth<T: Scalar>(table: &GrowthTable<T>) -> Result<TasepTrajectory> {
    if table.sources() != Sources::Both {
        return Err(Error::Parameter("the exclusion coupling needs both source arms".into()));
    }
    let mut left = Vec::new();
    let mut x = -1;
    for &a in table.alpha() {
        left.extend(std::iter::repeat_n(HOLE, (x - a) as usize));
        left.push(PARTICLE);
        x = a;
    }
    let mut sites: Vec<u8> = left.iter().rev().copied().collect();
    let lo = -(left.len() as i64);
    sites.push(HOLE);
    sites.push(PARTICLE);
    let mut y = -1;
    for &b in table.beta() {
        sites.extend(std::iter::repeat_n(PARTICLE, (y - b) as usize));
        sites.push(HOLE);
        y = b;
    }
    let initial = Configuration::new(lo, sites)?;

    let mut keyed: Vec<(f64, i64, Event)> = table
        .sites()
        .map(|(z, g)| (g.wide(), z.x + z.y, Event { time: g.wide(), bond: z.x - z.y, kind: MoveKind::FirstClass }))
        .filter(|(t, _, _)| t.is_finite())
        .collect();
    // Equal times are only possible in low precision; growth order breaks them.
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let events: Vec<Event> = keyed.into_iter().map(|k| k.2).collect();

    let (nx, ny) = (table.nx(), table.ny());
    let horizons: Vec<f64> = (lo..initial.hi())
        .map(|s| {
            let a = nx.min(ny + s);
            table.g(Site::new(a, a - s)).map_or(0.0, |g| g.wide())
        })
        .collect();
    let t_max = events.last().map_or(0.0, |e| e.time);
    let event_count = events.len() as u64;
    Ok(TasepTrajectory {
        initial,
        events,
        t_max,
        samples: Vec::new(),
        horizons: Some(horizons),
        right_jumps: 0,
        left_jumps: 0,
        event_count,
    })
}

/// Path of the hole-particle pair that starts at `{0, 1}`: `(time, X)` at the
/// start and after every move, with the hole at `X` and the particle at `X + 1`.
/// Also returns the time up to which the path is exact.
///
/// The pair steps right when its particle jumps and left when a particle
/// jumps into its hole; each event is checked against the replayed state.
pub fn pair_trajectory(traj: &TasepTrajectory) -> Result<(Vec<(f64, i64)>, f64)> {
    let mut c = traj.initial.clone();
    if c.get(0) != Some(HOLE) || c.get(1) != Some(PARTICLE) {
        return Err(Error::Domain("the pair needs a hole at 0 and a particle at 1".into()));
    }
    if traj.events.is_empty() && traj.event_count > 0 {
        return Err(Error::Domain("events were not recorded".into()));
    }
    let reach = |x: i64| traj.bond_horizon(x - 1).min(traj.bond_horizon(x + 1)).min(traj.t_max);
    let mut x = 0i64;
    let mut path = vec![(0.0, 0)];
    let mut until = reach(0);
    for e in &traj.events {
        if e.time > until {
            break;
        }
        let step = if e.bond == x - 1 {
            -1
        } else if e.bond == x + 1 {
            1
        } else if e.bond == x {
            return Err(Error::Coupling { time: e.time, detail: format!("move out of the pair's hole at {x}") });
        } else {
            0
        };
        // Just before a pair move the site it steps onto holds a hole on the
        // right (X + 2) or a particle on the left (X - 1).
        let (p, want) = if step > 0 { (x + 2, HOLE) } else { (x - 1, PARTICLE) };
        if step != 0 && c.get(p) != Some(want) {
            return Err(Error::Coupling { time: e.time, detail: format!("site {p} holds {:?} before the pair moves", c.get(p)) });
        }
        c.apply(e)?;
        if step == 0 {
            continue;
        }
        x += step;
        if c.get(x) != Some(HOLE) || c.get(x + 1) != Some(PARTICLE) {
            return Err(Error::Coupling { time: e.time, detail: format!("pair broken at {x}") });
        }
        path.push((e.time, x));
        let next = reach(x);
        if next < e.time {
            until = e.time;
            break;
        }
        until = next;
    }
    Ok((path, until))
}

/// `X(t) = I(t) - J(t)` for the growth-derived process, after checking that
/// the pair moves exactly when and where the competition interface steps.
pub fn coupled_second_class<T: Scalar>(table: &GrowthTable<T>, path: &CompetitionPath<T>, t: f64) -> Result<i64> {
    let traj = exclusion_from_growth(table)?;
    let (pair, until) = pair_trajectory(&traj)?;
    check_coupling(&pair, until, path, t)
}

/// The checks of [`coupled_second_class`] on a precomputed pair path.
pub fn check_coupling<T: Scalar>(
    pair: &[(f64, i64)],
    until: f64,
    path: &CompetitionPath<T>,
    t: f64,
) -> Result<i64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("t = {t} is negative")));
    }
    if t > until {
        return Err(Error::Horizon { requested: t, horizon: until });
    }
    let n = path.psi_index(T::of(t))?;
    let sites = path.sites();
    let times = path.times();
    let moves = pair.iter().take_while(|p| p.0 <= t).count() - 1;
    if moves != n {
        return Err(Error::Coupling { time: t, detail: format!("pair moved {moves} times, interface {n}") });
    }
    for k in 1..=n {
        let (s, x) = pair[k];
        let d = sites[k] - sites[k - 1];
        let before = sites[k - 1].x - sites[k - 1].y;
        let expect = if d == Site::EAST { before + 1 } else { before - 1 };
        if s != times[k].wide() || x != expect || pair[k - 1].1 != before {
            return Err(Error::Coupling {
                time: s,
                detail: format!("pair step to {x} at {s}, interface step {d} at {}", times[k]),
            });
        }
    }
    let z = sites[n];
    Ok(z.x - z.y)
}

/// The same trajectory with the pair merged into a second-class particle:
/// sites right of the pair shift one place left. Events past the pair's
/// horizon are dropped.
pub fn compress(traj: &TasepTrajectory) -> Result<TasepTrajectory> {
    let (pair, until) = pair_trajectory(traj)?;
    let c0 = &traj.initial;
    let lo = c0.lo();
    let mut sites: Vec<u8> = c0.sites().to_vec();
    let i0 = (0 - lo) as usize;
    sites[i0] = SECOND;
    sites.remove(i0 + 1);
    let initial = Configuration::new(lo, sites)?;
    let mut x = 0i64;
    let mut events = Vec::new();
    let (mut right_jumps, mut left_jumps) = (0u64, 0u64);
    for e in traj.events.iter().take_while(|e| e.time <= until) {
        let ev = if e.bond == x + 1 {
            right_jumps += 1;
            x += 1;
            Event { bond: x - 1, kind: MoveKind::SecondRight, ..*e }
        } else if e.bond == x - 1 {
            left_jumps += 1;
            x -= 1;
            Event { bond: x, kind: MoveKind::SecondLeft, ..*e }
        } else if e.bond < x - 1 {
            *e
        } else {
            Event { bond: e.bond - 1, ..*e }
        };
        events.push(ev);
    }
    debug_assert_eq!(x, pair.last().map_or(0, |p| p.1));
    let horizons = (lo..initial.hi())
        .map(|s| traj.bond_horizon(s).min(traj.bond_horizon(s + 1)).min(until))
        .collect();
    let samples = pair.iter().map(|&(s, x)| (s, x)).collect();
    let event_count = events.len() as u64;
    Ok(TasepTrajectory {
        initial,
        events,
        t_max: until,
        samples,
        horizons: Some(horizons),
        right_jumps,
        left_jumps,
        event_count,
    })
}
