use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::growth::{
    competition_interface, compute_growth_in, nems_geodesic_check, reversed_weight, CompetitionPath, GrowthTable,
    Sources,
};
use crate::interface::{ExclusionProfile, InitialInterface};
use crate::lattice::{RngStream, Site, StreamWeights};
use crate::shape::{clt_moments, mu, shape_p, DensityPair, DirectionPrediction, direction_predictions};
use crate::stats::{
    covariance_summary, deviation_at, estimate_direction, fluctuation_exponent, ks_exponential, ks_normal,
    ks_two_sample, ks_uniform_test, mean, u_from_direction, unit_direction, variance, ReplicaResult, StatSummary,
    Verdict,
};
use crate::tasep::{check_coupling, exclusion_from_growth, harris_simulate, margin, pair_trajectory, HarrisSpec};

const RAYS: usize = 25;
const NEMS_SPAN: usize = 12;
const Y_BLOCK: i64 = 10;
const HARRIS_OFFSET: u64 = 1 << 40;

fn growth_box(lambda: f64, rho: f64, nx: i64, ny: i64, stream: &RngStream) -> Result<GrowthTable> {
    let iface = InitialInterface::sample_random_walk(lambda, rho, nx.max(ny) as usize, stream)?;
    compute_growth_in(&StreamWeights::<f64>::new(stream), &iface, nx, ny, Sources::Both)
}

/// The interface up to `max_steps`, or up to where it leaves the box.
fn interface_until(table: &GrowthTable, max_steps: usize) -> Result<CompetitionPath> {
    match competition_interface(table, max_steps) {
        Err(Error::BoxExhausted { sites }) => {
            let times = sites.iter().map(|&z| table.g(z).unwrap_or(0.0)).collect();
            CompetitionPath::from_parts(sites, times)
        }
        other => other,
    }
}

/// Box sides likely to contain `ψ(t)`; a miss is caught and retried.
fn psi_box(lambda: f64, rho: f64, t: f64) -> (i64, i64) {
    let (i, j) = if lambda <= rho { ((1.0 - lambda) * (1.0 - rho), lambda * rho) } else { ((1.0 - rho).powi(2), lambda * lambda) };
    let side = |r: f64| (1.1 * r * t + 4.0 * t.sqrt() + 20.0).ceil() as i64;
    (side(i), side(j))
}

fn ray_angle(k: usize) -> f64 {
    (k as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / RAYS as f64
}

fn ray_site(k: usize, n: i64) -> Site {
    let (s, c) = ray_angle(k).sin_cos();
    Site::new((n as f64 * c).round() as i64, (n as f64 * s).round() as i64)
}

/// One replica at size multiplier `grow` (1, or 2 on retry).
pub(crate) fn run_replica(cfg: &ExperimentConfig, replica: u64, grow: i64) -> Result<ReplicaResult> {
    let stream = RngStream::new(cfg.seed, replica);
    let (l, r) = (cfg.lambda, cfg.rho);
    let n = cfg.n * grow;
    let mut out = ReplicaResult::new(replica, n);
    match cfg.experiment {
        ExperimentKind::Shape => {
            let table = growth_box(l, r, n, n, &stream)?;
            let d = DensityPair::new(l, r)?;
            let mut ratios = Vec::with_capacity(RAYS);
            let mut curved = Vec::with_capacity(RAYS);
            for k in 0..RAYS {
                let z = ray_site(k, n);
                let g = table.g(z).ok_or(Error::Coverage { site: z, what: "ray end" })?;
                ratios.push(g / shape_p(z.x as f64, z.y as f64, &d)?.p);
                curved.push(g / mu(z.x as f64, z.y as f64)?);
            }
            out.samples = ratios.into_iter().chain(curved).collect();
        }
        ExperimentKind::Direction | ExperimentKind::Udist => {
            let table = growth_box(l, r, n, n, &stream)?;
            let path = competition_interface(&table, n as usize)?;
            let half = estimate_direction(&path.sites()[..=n as usize / 2])?;
            let full = estimate_direction(path.sites())?;
            out.u = Some(u_from_direction(&full));
            if !full.degenerate {
                out.tan = Some(full.tan);
            }
            if !half.degenerate {
                out.values.insert("tan_half".into(), half.tan);
            }
            out.values.insert("degenerate".into(), full.degenerate as u8 as f64);
            let z = path.last();
            out.psi.push((path.times()[n as usize], z.x, z.y));
        }
        ExperimentKind::Clt => {
            let (nx, ny) = psi_box(l, r, cfg.t);
            let table = growth_box(l, r, nx * grow, ny * grow, &stream)?;
            out.n = nx * grow;
            let path = interface_until(&table, ((nx + ny) * grow) as usize)?;
            let z = path.psi_at(cfg.t)?;
            out.psi.push((cfg.t, z.x, z.y));
        }
        ExperimentKind::Fluct => {
            let table = growth_box(l, r, n, n, &stream)?;
            let path = interface_until(&table, 2 * n as usize)?;
            let tan = if l <= r {
                DensityPair::new(l, r)?.w_star()
            } else {
                let e = estimate_direction(path.sites())?;
                if e.degenerate {
                    return Err(Error::Domain("interface ended on an axis".into()));
                }
                e.tan
            };
            out.tan = Some(tan);
            let dir = unit_direction(tan);
            for rad in cfg.radii() {
                let dev = deviation_at(path.sites(), dir, rad)
                    .ok_or(Error::Horizon { requested: rad, horizon: n as f64 })?;
                out.deviations.push((rad, dev));
            }
        }
        ExperimentKind::Coupling => {
            let table = growth_box(l, r, n, n, &stream)?;
            let traj = exclusion_from_growth(&table)?;
            let (pair, until) = pair_trajectory(&traj)?;
            let path = interface_until(&table, 2 * n as usize)?;
            let mut verified = 0.0;
            let mut violations = 0.0;
            for k in 0..path.sites().len() - 1 {
                let s = path.times()[k];
                if s > until {
                    break;
                }
                let z = path.sites()[k];
                match check_coupling(&pair, until, &path, s) {
                    Ok(x) if x == z.x - z.y => verified += 1.0,
                    Ok(_) | Err(Error::Coupling { .. }) => violations += 1.0,
                    Err(e) => return Err(e),
                }
            }
            out.values.insert("verified".into(), verified);
            out.values.insert("violations".into(), violations);

            let (nx, ny) = psi_box(l, r, cfg.t);
            let big = growth_box(l, r, nx * grow, ny * grow, &stream)?;
            let z = interface_until(&big, ((nx + ny) * grow) as usize)?.psi_at(cfg.t)?;
            out.psi.push((cfg.t, z.x, z.y));
            let hs = RngStream::new(cfg.seed, HARRIS_OFFSET + replica);
            let m = margin(cfg.t);
            let profile = ExclusionProfile::sample_product(l, r, m as usize, m as usize + 1, &hs)?;
            let h = harris_simulate(&profile, &HarrisSpec::new(m, cfg.t), &hs)?;
            out.x = h.samples().to_vec();
        }
        ExperimentKind::Duality => {
            let table = growth_box(l, r, n, n, &stream)?;
            let path = competition_interface(&table, n as usize)?;
            let ok = nems_geodesic_check(&table, path.sites(), NEMS_SPAN);
            out.values.insert("nems_ok".into(), ok as u8 as f64);
            let c = n / 2 - Y_BLOCK / 2;
            for x in c..c + Y_BLOCK {
                for y in c..c + Y_BLOCK {
                    let z = Site::new(x, y);
                    out.samples.push(reversed_weight(&table, z).ok_or(Error::Coverage { site: z, what: "reversed weight" })?);
                }
            }
        }
        ExperimentKind::Tasep => {
            let m = margin(cfg.t);
            let times: Vec<f64> = (1..=20).map(|i| cfg.t * i as f64 / 20.0).collect();
            let run = |m: i64| -> Result<Vec<(f64, i64)>> {
                let profile = ExclusionProfile::sample_product(l, r, m as usize, m as usize + 1, &stream)?;
                let setup = HarrisSpec { sample_times: times.clone(), ..HarrisSpec::new(m, cfg.t) };
                Ok(harris_simulate(&profile, &setup, &stream)?.samples().to_vec())
            };
            out.x = run(m)?;
            out.n = m;
            if replica.is_multiple_of(20) {
                let same = run(2 * m)? == out.x;
                out.values.insert("doubling_ok".into(), same as u8 as f64);
            }
        }
    }
    Ok(out)
}

/// Is this failure cured by a bigger box?
pub(crate) fn retryable(e: &Error) -> bool {
    matches!(e, Error::BoxExhausted { .. } | Error::Horizon { .. } | Error::Coverage { .. })
}

pub(crate) fn csv_header(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Shape => &["replica", "ray", "angle", "x", "y", "g_over_p", "g_over_mu"],
        ExperimentKind::Direction | ExperimentKind::Udist => &["replica", "n", "x", "y", "tan", "tan_half", "u"],
        ExperimentKind::Clt => &["replica", "t", "i", "j"],
        ExperimentKind::Fluct => &["replica", "r", "deviation"],
        ExperimentKind::Coupling => &["replica", "verified", "violations", "t", "x_growth", "x_harris"],
        ExperimentKind::Duality => &["replica", "nems_ok", "y_mean", "y_count"],
        ExperimentKind::Tasep => &["replica", "t", "x"],
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

pub(crate) fn csv_rows(kind: ExperimentKind, r: &ReplicaResult) -> Vec<Vec<String>> {
    let id = r.replica.to_string();
    match kind {
        ExperimentKind::Shape => (0..RAYS)
            .map(|k| {
                let z = ray_site(k, r.n);
                vec![
                    id.clone(),
                    k.to_string(),
                    ray_angle(k).to_string(),
                    z.x.to_string(),
                    z.y.to_string(),
                    r.samples[k].to_string(),
                    r.samples[RAYS + k].to_string(),
                ]
            })
            .collect(),
        ExperimentKind::Direction | ExperimentKind::Udist => {
            let (_, x, y) = r.psi[0];
            vec![vec![id, r.n.to_string(), x.to_string(), y.to_string(), opt(r.tan), opt(r.value("tan_half")), opt(r.u)]]
        }
        ExperimentKind::Clt => r.psi.iter().map(|p| vec![id.clone(), p.0.to_string(), p.1.to_string(), p.2.to_string()]).collect(),
        ExperimentKind::Fluct => r.deviations.iter().map(|d| vec![id.clone(), d.0.to_string(), d.1.to_string()]).collect(),
        ExperimentKind::Coupling => {
            let (t, i, j) = r.psi[0];
            let xh = r.x.last().map_or(String::new(), |x| x.1.to_string());
            vec![vec![id, opt(r.value("verified")), opt(r.value("violations")), t.to_string(), (i - j).to_string(), xh]]
        }
        ExperimentKind::Duality => {
            vec![vec![id, opt(r.value("nems_ok")), mean(&r.samples).to_string(), r.samples.len().to_string()]]
        }
        ExperimentKind::Tasep => r.x.iter().map(|x| vec![id.clone(), x.0.to_string(), x.1.to_string()]).collect(),
    }
}

/// A uniform KS verdict; too few samples make a failing verdict, not an error.
fn uniform_verdict(s: &mut StatSummary, name: String, key: &str, xs: &[f64], a: f64, b: f64) {
    match ks_uniform_test(xs, a, b) {
        Ok(ks) => {
            s.verdicts.push(Verdict::ks(name, &ks, 0.01));
            s.ks.insert(key.into(), ks);
        }
        Err(e) => s.verdicts.push(Verdict::new(name, 0.0, 0.01, e.to_string(), false)),
    }
}

fn sd(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Aggregates an ordered replica list into estimates and verdicts.
pub(crate) fn summarize(cfg: &ExperimentConfig, results: &[ReplicaResult]) -> Result<StatSummary> {
    let mut s = StatSummary::default();
    let (l, r) = (cfg.lambda, cfg.rho);
    let d = DensityPair::new(l, r)?;
    let name = cfg.experiment.as_str();
    match cfg.experiment {
        ExperimentKind::Shape => {
            let per_ray = |k: usize| results.iter().map(|x| x.samples[k]).collect::<Vec<_>>();
            let mut regimes_ok = true;
            for k in 0..RAYS {
                let ratio = mean(&per_ray(k));
                let vs_mu = mean(&per_ray(RAYS + k));
                s.means.insert(format!("ray{k:02}.g_over_p"), ratio);
                s.means.insert(format!("ray{k:02}.g_over_mu"), vs_mu);
                s.verdicts.push(Verdict::absolute(format!("{name}.ray{k:02}"), ratio, 1.0, 0.05));
                // Linear rays sit visibly above the point-to-point curve.
                let z = ray_site(k, cfg.n);
                let lift = shape_p(z.x as f64, z.y as f64, &d)?.p / mu(z.x as f64, z.y as f64)?;
                if lift > 1.1 && vs_mu < 1.05 {
                    regimes_ok = false;
                }
                if lift == 1.0 && vs_mu > 1.05 {
                    regimes_ok = false;
                }
            }
            s.verdicts.push(Verdict::new(format!("{name}.regimes"), regimes_ok as u8 as f64, 1.0, "linear rays above mu", regimes_ok));
        }
        ExperimentKind::Direction => {
            let tans: Vec<f64> = results.iter().filter_map(|x| x.tan).collect();
            let halves: Vec<f64> = results.iter().filter_map(|x| x.value("tan_half")).collect();
            s.means.insert("tan".into(), mean(&tans));
            s.means.insert("tan_half".into(), mean(&halves));
            s.covariances.insert("sd_tan".into(), sd(&tans));
            s.covariances.insert("sd_tan_half".into(), sd(&halves));
            match direction_predictions(&d) {
                DirectionPrediction::Deterministic(w) => {
                    s.verdicts.push(Verdict::relative(format!("{name}.mean_tan"), mean(&tans), w, 0.05));
                    let shrink = sd(&tans) < sd(&halves);
                    s.verdicts.push(Verdict::new(format!("{name}.spread_shrinks"), sd(&tans), sd(&halves), "sd(N) < sd(N/2)", shrink));
                }
                DirectionPrediction::Interval(a, b) => {
                    let inside = tans.iter().filter(|&&t| t >= a * 0.9 && t <= b * 1.1).count() as f64 / tans.len().max(1) as f64;
                    s.verdicts.push(Verdict::within(format!("{name}.support"), inside, 1.0, 1.0, 1.0));
                }
            }
        }
        ExperimentKind::Udist => {
            let us: Vec<f64> = results.iter().filter_map(|x| x.u).collect();
            let (a, b) = (1.0 - 2.0 * l, 1.0 - 2.0 * r);
            uniform_verdict(&mut s, format!("{name}.ks_uniform"), "u_uniform", &us, a, b);
            let lo = us.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = us.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            s.means.insert("u".into(), mean(&us));
            s.means.insert("u_min".into(), lo);
            s.means.insert("u_max".into(), hi);
            s.verdicts.push(Verdict::within(format!("{name}.support_min"), lo, a, a - 0.05, b + 0.05));
            s.verdicts.push(Verdict::within(format!("{name}.support_max"), hi, b, a - 0.05, b + 0.05));
        }
        ExperimentKind::Clt => {
            let pts: Vec<(f64, f64)> = results.iter().map(|x| (x.psi[0].1 as f64, x.psi[0].2 as f64)).collect();
            let c = covariance_summary(&pts, cfg.t, l, r)?;
            let m = clt_moments(&d)?;
            s.means.insert("i_rate".into(), c.mean_i_rate);
            s.means.insert("j_rate".into(), c.mean_j_rate);
            s.covariances.insert("var_i".into(), c.var_i_rate);
            s.covariances.insert("var_j".into(), c.var_j_rate);
            s.covariances.insert("cov".into(), c.cov_rate);
            s.verdicts.push(Verdict::relative(format!("{name}.mean_i"), c.mean_i_rate, m.mean_i, 0.02));
            s.verdicts.push(Verdict::relative(format!("{name}.mean_j"), c.mean_j_rate, m.mean_j, 0.02));
            s.verdicts.push(Verdict::relative(format!("{name}.var_i"), c.var_i_rate, m.var_i, 0.10));
            s.verdicts.push(Verdict::relative(format!("{name}.var_j"), c.var_j_rate, m.var_j, 0.10));
            s.verdicts.push(Verdict::relative(format!("{name}.cov"), c.cov_rate, m.cov, 0.10));
            let st = cfg.t.sqrt();
            let zi: Vec<f64> = pts.iter().map(|p| (p.0 - m.mean_i * cfg.t) / st).collect();
            let zj: Vec<f64> = pts.iter().map(|p| (p.1 - m.mean_j * cfg.t) / st).collect();
            let ki = ks_normal(&zi, 0.0, m.var_i.sqrt())?;
            let kj = ks_normal(&zj, 0.0, m.var_j.sqrt())?;
            s.verdicts.push(Verdict::ks(format!("{name}.normal_i"), &ki, 0.01));
            s.verdicts.push(Verdict::ks(format!("{name}.normal_j"), &kj, 0.01));
            s.ks.insert("normal_i".into(), ki);
            s.ks.insert("normal_j".into(), kj);
        }
        ExperimentKind::Fluct => {
            let rad = cfg.radii();
            let profiles: Vec<Vec<f64>> = results
                .iter()
                .filter(|x| x.deviations.len() >= rad.len())
                .map(|x| x.deviations[..rad.len()].iter().map(|p| p.1).collect())
                .collect();
            let fit = fluctuation_exponent(&profiles, &rad, 1000, &RngStream::new(cfg.seed, cfg.replicas))?;
            let (target, lo, hi) = if l < r { (0.5, 0.40, 0.60) } else { (2.0 / 3.0, 0.55, 0.80) };
            s.verdicts.push(Verdict::within(format!("{name}.slope"), fit.slope, target, lo, hi));
            s.exponent = Some(fit);
        }
        ExperimentKind::Coupling => {
            let bad: f64 = results.iter().filter_map(|x| x.value("violations")).sum();
            let verified: f64 = results.iter().filter_map(|x| x.value("verified")).sum();
            s.means.insert("verified_steps".into(), verified);
            s.verdicts.push(Verdict::new(format!("{name}.exact"), bad, 0.0, "no violations", bad == 0.0 && verified > 0.0));
            let g: Vec<f64> = results.iter().map(|x| (x.psi[0].1 - x.psi[0].2) as f64 / cfg.t).collect();
            let h: Vec<f64> = results.iter().filter_map(|x| x.x.last()).map(|x| x.1 as f64 / cfg.t).collect();
            s.means.insert("x_rate_growth".into(), mean(&g));
            s.means.insert("x_rate_harris".into(), mean(&h));
            let ks = ks_two_sample(&g, &h);
            s.verdicts.push(Verdict::ks(format!("{name}.ks_two_sample"), &ks, 0.01));
            s.ks.insert("growth_vs_harris".into(), ks);
        }
        ExperimentKind::Duality => {
            let ok = results.iter().all(|x| x.value("nems_ok") == Some(1.0));
            s.verdicts.push(Verdict::new(format!("{name}.nems"), ok as u8 as f64, 1.0, "exact", ok));
            let ys: Vec<f64> = results.iter().flat_map(|x| x.samples.iter().copied()).collect();
            s.means.insert("y".into(), mean(&ys));
            let ks = ks_exponential(&ys);
            s.verdicts.push(Verdict::ks(format!("{name}.ks_exponential"), &ks, 0.01));
            s.ks.insert("y_exponential".into(), ks);
        }
        ExperimentKind::Tasep => {
            let rates: Vec<f64> = results.iter().filter_map(|x| x.x.last()).map(|x| x.1 as f64 / cfg.t).collect();
            s.means.insert("x_rate".into(), mean(&rates));
            if l <= r {
                s.verdicts.push(Verdict::absolute(format!("{name}.mean_x_rate"), mean(&rates), 1.0 - l - r, 0.03));
            } else {
                uniform_verdict(&mut s, format!("{name}.ks_uniform"), "x_rate_uniform", &rates, 1.0 - 2.0 * l, 1.0 - 2.0 * r);
            }
            let checks: Vec<f64> = results.iter().filter_map(|x| x.value("doubling_ok")).collect();
            let ok = checks.iter().all(|&c| c == 1.0);
            s.verdicts.push(Verdict::new(format!("{name}.margin_doubling"), checks.len() as f64, 0.0, "identical paths", ok));
        }
    }
    Ok(s)
}
