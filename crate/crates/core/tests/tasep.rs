use corner_growth::growth::{competition_interface, compute_growth, GrowthTable};
use corner_growth::interface::{ExclusionProfile, InitialInterface};
use corner_growth::lattice::{RngStream, Site, StreamWeights};
use corner_growth::stats::{ks_two_sample, ks_uniform_test, mean, variance};
use corner_growth::tasep::{
    check_coupling, compress, discrepancy_simulate, exclusion_from_growth, flux, flux_between, harris_simulate, margin,
    pair_trajectory, simulate_window, Configuration, HarrisSpec, Species, TasepTrajectory, HOLE, PARTICLE, SECOND,
};
use proptest::prelude::*;
use rayon::prelude::*;

fn growth_instance(seed: u64, index: u64, lambda: f64, rho: f64, n: i64) -> GrowthTable {
    let stream = RngStream::new(seed, index);
    let w = StreamWeights::<f64>::new(&stream);
    let iface = InitialInterface::sample_random_walk(lambda, rho, 4 * n as usize, &stream).unwrap();
    compute_growth(&w, &iface, n).unwrap()
}

fn occupied(t: &GrowthTable, z: Site, time: f64) -> Option<bool> {
    if t.is_initial(z) {
        return Some(true);
    }
    t.g(z).map(|g| g <= time)
}

// Labels hole `i` and particle `j` the way the boundary walk does: the hole
// at 0 is hole 0, the particle at 1 is particle 0.
fn labelled(c: &Configuration, first: &Configuration) -> (Vec<(i64, i64)>, Vec<(i64, i64)>) {
    let rank = |cfg: &Configuration, code: u8| -> Vec<i64> {
        (cfg.lo()..=cfg.hi()).filter(|&p| cfg.get(p) == Some(code)).collect()
    };
    let h0 = rank(first, HOLE).iter().position(|&p| p == 0).unwrap() as i64;
    let p0 = rank(first, PARTICLE).iter().position(|&p| p == 1).unwrap() as i64;
    let holes = rank(c, HOLE).into_iter().enumerate().map(|(k, p)| (k as i64 - h0, p)).collect();
    let parts = rank(c, PARTICLE).into_iter().enumerate().map(|(k, p)| (p0 - k as i64, p)).collect();
    (holes, parts)
}

fn check_walk(table: &GrowthTable, traj: &TasepTrajectory, c: &Configuration, time: f64) -> usize {
    let (holes, parts) = labelled(c, traj.initial());
    let mut checked = 0;
    for (i, p) in holes {
        if !traj.valid_at(p, time) {
            continue;
        }
        let (below, above) = (Site::new(i, i - p), Site::new(i, i - p + 1));
        if let (Some(b), Some(a)) = (occupied(table, below, time), occupied(table, above, time)) {
            assert!(b && !a, "hole {i} at {p}, t = {time}");
            checked += 1;
        }
    }
    for (j, p) in parts {
        if !traj.valid_at(p, time) {
            continue;
        }
        let (left, right) = (Site::new(p + j - 1, j), Site::new(p + j, j));
        if let (Some(l), Some(r)) = (occupied(table, left, time), occupied(table, right, time)) {
            assert!(l && !r, "particle {j} at {p}, t = {time}");
            checked += 1;
        }
    }
    checked
}

#[test]
fn reconstruction_tracks_the_growth_interface() {
    let table = growth_instance(61, 0, 0.5, 0.5, 60);
    let traj = exclusion_from_growth(&table).unwrap();
    let iface = InitialInterface::build_deterministic(table.alpha().to_vec(), table.beta().to_vec(), 0.5, 0.5).unwrap();
    let p = iface.to_exclusion();
    let c0 = traj.config_at(0.0).unwrap();
    for j in c0.lo()..=c0.hi() {
        assert_eq!(c0.get(j), p.occupation(j), "site {j}");
    }
    // Event times are the passage times of the box.
    let mut g: Vec<f64> = table.sites().map(|(_, g)| g).collect();
    g.sort_by(f64::total_cmp);
    let times: Vec<f64> = traj.events().iter().map(|e| e.time).collect();
    assert_eq!(g, times);

    let mut c = c0.clone();
    let mut checked = check_walk(&table, &traj, &c, 0.0);
    for e in traj.events() {
        c.apply(e).unwrap();
        checked += check_walk(&table, &traj, &c, e.time);
    }
    assert!(checked > 100_000, "{checked}");
    assert!(traj.config_at(traj.horizon() * 1.0001 + 1e-9).is_err());
}

#[test]
fn pair_follows_the_competition_interface() {
    for index in 0..20 {
        let table = growth_instance(62, index, 0.3 + 0.03 * index as f64, 0.6 - 0.02 * index as f64, 100);
        let traj = exclusion_from_growth(&table).unwrap();
        let (pair, until) = pair_trajectory(&traj).unwrap();
        let path = match competition_interface(&table, 200) {
            Ok(p) => p,
            Err(corner_growth::Error::BoxExhausted { sites }) => {
                let times = sites.iter().map(|&z| table.g(z).unwrap()).collect();
                corner_growth::growth::CompetitionPath::from_parts(sites, times).unwrap()
            }
            Err(e) => panic!("{e}"),
        };
        assert_eq!(check_coupling(&pair, until, &path, 0.0).unwrap(), 0);
        let mut seen = 0;
        for (k, &s) in path.times().iter().enumerate().skip(1) {
            if s > until || k + 1 >= path.sites().len() {
                break;
            }
            let z = path.sites()[k];
            assert_eq!(check_coupling(&pair, until, &path, s).unwrap(), z.x - z.y);
            let prev = path.sites()[k - 1];
            assert_eq!(((z.x - z.y) - (prev.x - prev.y)).abs(), 1);
            seen += 1;
        }
        assert!(seen > 50, "instance {index}: {seen} steps within the horizon");
    }
}

#[test]
fn hole_flux_counts_the_interface_steps() {
    let mut checked = 0;
    for index in 0..10 {
        let table = growth_instance(63, index, 0.4, 0.6, 80);
        let traj = exclusion_from_growth(&table).unwrap();
        let comp = compress(&traj).unwrap();
        let path = match competition_interface(&table, 160) {
            Ok(p) => p,
            Err(corner_growth::Error::BoxExhausted { sites }) => {
                let times = sites.iter().map(|&z| table.g(z).unwrap()).collect();
                corner_growth::growth::CompetitionPath::from_parts(sites, times).unwrap()
            }
            Err(e) => panic!("{e}"),
        };
        let mut pick = RngStream::new(63, 100 + index);
        for _ in 0..40 {
            let t = pick.uniform() * comp.t_max();
            let Ok(n) = path.psi_index(t) else { continue };
            let z = path.sites()[n];
            assert_eq!(comp.replay_to(t).unwrap().second_class(), Some(z.x - z.y));
            let x = (z.x - z.y) as f64;
            match flux_between(&comp, Species::Holes, 0.0, x, t) {
                Ok(f) => assert_eq!(z.x, -f, "instance {index}, t = {t}"),
                Err(corner_growth::Error::Horizon { .. }) => continue,
                Err(e) => panic!("{e}"),
            }
            assert_eq!(z.y, flux_between(&comp, Species::Particles, 0.0, x, t).unwrap());
            checked += 1;
        }
    }
    assert!(checked > 200, "{checked}");
}

fn right_of(c: &Configuration, x: f64, code: u8) -> i64 {
    (c.lo()..=c.hi()).filter(|&p| p as f64 > x && c.get(p) == Some(code)).count() as i64
}

#[test]
fn flux_matches_the_endpoint_count() {
    let profile = ExclusionProfile::sample_product(0.6, 0.3, 600, 600, &RngStream::new(64, 0)).unwrap();
    let setup = HarrisSpec { record_events: true, ..HarrisSpec::new(margin(50.0), 50.0) };
    let traj = harris_simulate(&profile, &setup, &RngStream::new(64, 0)).unwrap();
    let mut pick = RngStream::new(64, 1);
    for _ in 0..200 {
        let t = 50.0 * pick.uniform();
        let r = 4.0 * pick.uniform() - 2.0;
        let x0 = 10.0 * pick.uniform() - 5.0;
        let end = traj.config_at(t).unwrap();
        for (sp, code) in [(Species::Particles, PARTICLE), (Species::Holes, HOLE)] {
            let f = flux_between(&traj, sp, x0, x0 + r * t, t).unwrap();
            let expect = right_of(&end, x0 + r * t, code) - right_of(traj.initial(), x0, code);
            assert_eq!(f, expect, "t = {t}, r = {r}, x0 = {x0}");
        }
    }
    assert!(flux(&traj, Species::Particles, 100.0, 50.0).is_err());
}

#[test]
fn packed_window_has_no_flux() {
    let c = Configuration::new(-200, vec![PARTICLE; 401]).unwrap();
    let traj = simulate_window(c, 20.0, true, &[], &RngStream::new(65, 0)).unwrap();
    assert_eq!(flux(&traj, Species::Particles, 0.0, 20.0).unwrap(), 0);
}

#[test]
fn free_particle_jumps_as_a_poisson_process() {
    let t = 50.0;
    let counts: Vec<f64> = (0..2000)
        .into_par_iter()
        .map(|i| {
            let mut s = vec![HOLE; 301];
            s[0] = PARTICLE;
            let c = Configuration::new(0, s).unwrap();
            simulate_window(c, t, false, &[], &RngStream::new(66, i)).unwrap().event_count() as f64
        })
        .collect();
    let (m, v) = (mean(&counts), variance(&counts));
    let se = (t / counts.len() as f64).sqrt();
    assert!((m - t).abs() < 4.0 * se, "mean {m}");
    assert!((v / t - 1.0).abs() < 0.15, "variance {v}");
}

#[test]
fn step_profile_spreads_uniformly() {
    let t = 400.0;
    let m = margin(t);
    let x: Vec<f64> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut right = vec![0u8; m as usize + 1];
            right[0] = 1;
            let p = ExclusionProfile::new(vec![1; m as usize], right).unwrap();
            let traj = harris_simulate(&p, &HarrisSpec::new(m, t), &RngStream::new(67, i)).unwrap();
            traj.samples()[0].1 as f64 / t
        })
        .collect();
    let ks = ks_uniform_test(&x, -1.0, 1.0).unwrap();
    assert!(ks.passes(0.01), "{ks:?}");
}

#[test]
fn lazy_clocks_match_the_discrepancy_of_two_copies() {
    let t = 5.0;
    let draw = |i: u64| {
        let s = RngStream::new(68, i);
        let p = ExclusionProfile::sample_product(0.6, 0.3, 10, 11, &s).unwrap();
        let mut sites: Vec<u8> = p.left().iter().rev().copied().collect();
        sites.push(SECOND);
        sites.extend_from_slice(&p.right()[1..11]);
        Configuration::new(-10, sites).unwrap()
    };
    let n = 10_000u64;
    let lazy: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| simulate_window(draw(i), t, false, &[t], &RngStream::new(68, i)).unwrap().samples()[0].1 as f64)
        .collect();
    let pair: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| discrepancy_simulate(&draw(i), t, &RngStream::new(68, n + i)).unwrap() as f64)
        .collect();
    let ks = ks_two_sample(&lazy, &pair);
    assert!(ks.passes(0.01), "{ks:?}");
}

#[test]
fn particle_count_on_a_long_profile() {
    let rho = 0.3;
    let p = ExclusionProfile::sample_product(0.5, rho, 0, 10_001, &RngStream::new(69, 0)).unwrap();
    let c = Configuration::new(1, p.right()[1..].to_vec()).unwrap();
    let n = c.count_particles(1, 10_000).unwrap() as f64;
    let sd = (1e4 * rho * (1.0 - rho)).sqrt();
    assert!((n - 1e4 * rho).abs() < 3.0 * sd, "{n}");
    assert_eq!(c.count_particles(10_000, 1).unwrap() as f64, -n);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moves_conserve_particles(seed in 0u64..10_000, lambda in 0.05f64..0.95, rho in 0.05f64..0.95) {
        let t = 10.0;
        let p = ExclusionProfile::sample_product(lambda, rho, 200, 200, &RngStream::new(seed, 0)).unwrap();
        let setup = HarrisSpec { record_events: true, ..HarrisSpec::new(margin(t), t) };
        let traj = harris_simulate(&p, &setup, &RngStream::new(seed, 0)).unwrap();
        let c0 = traj.initial();
        let c1 = traj.config_at(t).unwrap();
        let count = |c: &Configuration, code| c.sites().iter().filter(|&&s| s == code).count();
        prop_assert_eq!(count(c0, PARTICLE), count(&c1, PARTICLE));
        prop_assert_eq!(count(&c1, SECOND), 1);
        // Particles inside [a, b] change only through the two boundary fluxes.
        let (a, b) = (-20i64, 25i64);
        let inside = |c: &Configuration| c.count_particles(a, b).unwrap();
        let f_in = flux_between(&traj, Species::Particles, a as f64 - 1.0, a as f64 - 1.0, t).unwrap();
        let f_out = flux_between(&traj, Species::Particles, b as f64, b as f64, t).unwrap();
        prop_assert_eq!(inside(&c1) - inside(c0), f_in - f_out);
    }
}
