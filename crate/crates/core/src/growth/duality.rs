use crate::growth::table::GrowthTable;
use crate::lattice::Site;
use crate::scalar::Scalar;

/// `Y(z) = min(g(z + (0,1)), g(z + (1,0))) - g(z)` where all three are known.
pub fn reversed_weight<T: Scalar>(table: &GrowthTable<T>, z: Site) -> Option<T> {
    let here = table.g(z)?;
    let n = table.g(z.north())?;
    let e = table.g(z.east())?;
    Some(n.min(e) - here)
}

/// `Y` at every domain site whose north and east neighbours are domain sites.
pub fn reversed_weights<T: Scalar>(table: &GrowthTable<T>) -> Vec<(Site, T)> {
    table
        .sites()
        .filter(|&(z, _)| table.in_domain(z.north()) && table.in_domain(z.east()))
        .filter_map(|(z, _)| reversed_weight(table, z).map(|y| (z, y)))
        .collect()
}

/// Subsegment `(k, l)` of `path` that is not a maximal `Y`-path, if any.
///
/// Checks every subsegment spanning at most `span` steps among the path sites
/// that stay two steps inside the box. Sums are compared with a slack of
/// `1e-9` (or a few ulps for `f32`) relative to the passage time at the end,
/// which only absorbs rounding in the differences that define `Y`.
pub fn nems_violation<T: Scalar>(table: &GrowthTable<T>, path: &[Site], span: usize) -> Option<(usize, usize)> {
    let inside = path
        .iter()
        .take_while(|z| z.x <= table.nx() - 2 && z.y <= table.ny() - 2)
        .count();
    let ys: Vec<f64> = path[..inside]
        .iter()
        .map(|&z| reversed_weight(table, z).map_or(f64::NAN, |y| y.wide()))
        .collect();
    let rel = (64.0 * T::epsilon().wide()).max(1e-9);
    for k in 0..inside {
        let end = (k + span).min(inside - 1);
        let (a, b) = (path[k], path[end]);
        let w = (b.x - a.x + 1) as usize;
        let h = (b.y - a.y + 1) as usize;
        let mut best = vec![f64::NEG_INFINITY; w * h];
        for j in 0..h {
            for i in 0..w {
                let z = Site::new(a.x + i as i64, a.y + j as i64);
                let y = match reversed_weight(table, z) {
                    Some(v) => v.wide(),
                    None => return Some((k, end)),
                };
                let prev = if i == 0 && j == 0 {
                    0.0
                } else {
                    let l = if i > 0 { best[j * w + i - 1] } else { f64::NEG_INFINITY };
                    let d = if j > 0 { best[(j - 1) * w + i] } else { f64::NEG_INFINITY };
                    l.max(d)
                };
                best[j * w + i] = prev + y;
            }
        }
        let mut sum = 0.0;
        for l in k..=end {
            sum += ys[l];
            let z = path[l];
            let top = best[(z.y - a.y) as usize * w + (z.x - a.x) as usize];
            let scale = table.g(z.north()).map_or(1.0, |g| g.wide().abs().max(1.0));
            if !(sum >= top - rel * scale) {
                return Some((k, l));
            }
        }
    }
    None
}

/// Whether every checked subsegment of `path` is a `Y`-geodesic.
pub fn nems_geodesic_check<T: Scalar>(table: &GrowthTable<T>, path: &[Site], span: usize) -> bool {
    nems_violation(table, path, span).is_none()
}
