use std::collections::BTreeSet;

use corner_growth::interface::{ExclusionProfile, InitialInterface};
use corner_growth::lattice::RngStream;
use corner_growth::stats::chi_square_gof;

fn bits(mask: u32, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((mask >> i) & 1) as u8).collect()
}

#[test]
fn staircases_and_profiles_correspond_exhaustively() {
    // Every left string ending in a particle and right string ending in a
    // hole is one complete staircase, and distinct strings give distinct ones.
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for ll in 1..=7 {
        for rl in 1..=7 {
            for lm in 0..1u32 << (ll - 1) {
                for rm in 0..1u32 << (rl - 1) {
                    let mut left = bits(lm, ll - 1);
                    left.push(1);
                    let mut right = vec![1];
                    right.extend(bits(rm, rl - 1));
                    right.push(0);
                    let p = ExclusionProfile::new(left, right).unwrap();
                    let iface = p.to_interface(0.5, 0.5).unwrap();
                    assert_eq!(iface.to_exclusion(), p);
                    assert!(seen.insert((iface.alpha().to_vec(), iface.beta().to_vec())));
                    count += 1;
                }
            }
        }
    }
    assert_eq!(count, 127 * 127);
}

#[test]
fn small_staircases_round_trip() {
    // All non-increasing corner sequences of length <= 4 down to -5.
    fn seqs(len: usize, top: i64, out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in (-5..=top).rev() {
            cur.push(v);
            seqs(len, v, out, cur);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    for len in 1..=4 {
        seqs(len, -1, &mut all, &mut Vec::new());
    }
    let mut profiles = BTreeSet::new();
    for a in &all {
        for b in all.iter().step_by(7) {
            let iface = InitialInterface::build_deterministic(a.clone(), b.clone(), 0.5, 0.5).unwrap();
            let p = iface.to_exclusion();
            assert_eq!(p.to_interface(0.5, 0.5).unwrap(), iface);
            assert!(profiles.insert(format!("{:?}", p)));
        }
    }
}

#[test]
fn walk_steps_have_the_declared_law() {
    // Corner gaps on the left arm are Geometric(lambda) on {0, 1, ...}, on the
    // right arm Geometric(1 - rho); the number of particles among the first
    // ten sites on each side is binomial.
    let (lambda, rho) = (0.35, 0.6);
    let mut gaps = [[0u64; 7]; 2];
    let mut ups = [[0u64; 11]; 2];
    let runs = 3000;
    for i in 0..runs {
        let s = RngStream::new(77, i);
        let w = InitialInterface::sample_random_walk(lambda, rho, 40, &s).unwrap();
        for (arm, seq) in [w.alpha(), w.beta()].into_iter().enumerate() {
            let mut prev = -1;
            for &v in seq {
                gaps[arm][((prev - v) as usize).min(6)] += 1;
                prev = v;
            }
        }
        let p = w.to_exclusion();
        ups[0][p.left()[..10].iter().filter(|&&b| b == 1).count()] += 1;
        ups[1][p.right()[1..11].iter().filter(|&&b| b == 1).count()] += 1;
    }
    for (arm, q) in [(0, lambda), (1, 1.0 - rho)] {
        let total: u64 = gaps[arm].iter().sum();
        let mut expected: Vec<f64> = (0..6).map(|g| total as f64 * q * (1.0 - q).powi(g)).collect();
        expected.push(total as f64 * (1.0 - q).powi(6));
        let (_, p) = chi_square_gof(&gaps[arm], &expected).unwrap();
        assert!(p > 1e-3, "gap law arm {arm}: p = {p}");
    }
    for (arm, q) in [(0, lambda), (1, rho)] {
        let binom = |k: u64| {
            let c = (0..k).fold(1.0, |c, j| c * (10 - j) as f64 / (j + 1) as f64);
            c * q.powi(k as i32) * (1.0 - q).powi(10 - k as i32)
        };
        // Merge the thin tails into their neighbours.
        let (mut obs, mut exp) = (Vec::new(), Vec::new());
        let (mut o, mut e) = (0u64, 0.0);
        for k in 0..=10 {
            o += ups[arm][k as usize];
            e += runs as f64 * binom(k);
            if e >= 20.0 {
                obs.push(o);
                exp.push(e);
                (o, e) = (0, 0.0);
            }
        }
        *obs.last_mut().unwrap() += o;
        *exp.last_mut().unwrap() += e;
        let (_, p) = chi_square_gof(&obs, &exp).unwrap();
        assert!(p > 1e-3, "particle counts arm {arm}: p = {p}");
    }
}
