//! Last-passage times, cluster labels, the competition interface and the
//! reversed-weight field.

mod duality;
mod paths;
mod table;

pub use duality::{nems_geodesic_check, nems_violation, reversed_weight, reversed_weights};
pub use paths::{
    competition_interface, contact_point, geodesic_backtrack, passage_time, CompetitionPath, Contact,
    DirectedPath,
};
pub use table::{compute_growth, compute_growth_in, Back, Cell, GrowthTable, Sources};
pub(crate) use table::csv_err;

use crate::interface::InitialInterface;
use crate::lattice::{Site, WeightSource};
use crate::scalar::Scalar;

/// Weights mirrored across the diagonal, `X'(x, y) = X(y, x)`.
pub struct Reflected<'a, W: ?Sized>(pub &'a W);

impl<T: Scalar, W: WeightSource<T> + ?Sized> WeightSource<T> for Reflected<'_, W> {
    fn weight(&self, z: Site) -> Option<T> {
        self.0.weight(Site::new(z.y, z.x))
    }
}

/// The interface with its two arms exchanged (and densities `λ' = 1-ρ`, `ρ' = 1-λ`).
pub fn reflect_interface(interface: &InitialInterface) -> InitialInterface {
    let lambda = (1.0 - interface.rho()).clamp(f64::MIN_POSITIVE, 1.0);
    let rho = (1.0 - interface.lambda()).min(1.0 - f64::EPSILON);
    InitialInterface::build_deterministic(interface.beta().to_vec(), interface.alpha().to_vec(), lambda, rho)
        .expect("reflection keeps corner sequences valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::lattice::{sample_weights, LatticeBox, RngStream, WeightField};

    // Weights of the worked 2x2 block, with unit weights elsewhere.
    fn block(z: Site) -> f64 {
        match (z.x, z.y) {
            (1, 1) => 3.0,
            (1, 2) => 1.0,
            (2, 1) => 4.0,
            (2, 2) => 2.0,
            _ => 1.0,
        }
    }

    #[test]
    fn worked_rectangle() {
        let g = |z| passage_time(&block, Site::new(1, 1), z).unwrap();
        assert_eq!(g(Site::new(1, 1)), 3.0);
        assert_eq!(g(Site::new(1, 2)), 4.0);
        assert_eq!(g(Site::new(2, 1)), 7.0);
        assert_eq!(g(Site::new(2, 2)), 9.0);
        assert!(matches!(passage_time(&block, Site::new(2, 1), Site::new(1, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn worked_block_in_a_table() {
        // Tiny weights on the axes keep the block's own maximizers.
        let w = |z: Site| if z.x == 0 || z.y == 0 { 1e-3 } else { block(z) };
        let axes = InitialInterface::axes(2);
        let t: GrowthTable = compute_growth(&w, &axes, 2).unwrap();
        assert_eq!(t.g(Site::new(0, 1)), Some(1e-3));
        assert!((t.g(Site::new(2, 2)).unwrap() - 9.001).abs() < 1e-12);
        let path = geodesic_backtrack(&t, Site::new(2, 2)).unwrap();
        assert!(path.contains(&Site::new(2, 1)));
        assert_eq!(path[0], Site::new(1, 0));
        assert_eq!(contact_point(&t, Site::new(2, 2)).unwrap(), Contact::B(1));
        // g(1,0) = g(0,1): the tie sends the interface up.
        let phi = competition_interface(&t, 1).unwrap();
        assert_eq!(phi.sites(), &[Site::ORIGIN, Site::NORTH]);
        assert_eq!(t.label(Site::new(0, 1)), Some(1));
        assert_eq!(t.label(Site::new(1, 0)), Some(2));
        assert_eq!(t.label(Site::new(2, 2)), Some(2));
        let y = reversed_weight(&t, Site::new(1, 1)).unwrap();
        assert!((y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_site_box() {
        let stream = RngStream::new(4, 4);
        let field: WeightField = sample_weights(LatticeBox::new(Site::new(-1, -1), Site::new(1, 1)).unwrap(), &stream).unwrap();
        let flat = InitialInterface::build_flat(1, 1).unwrap();
        let t = compute_growth(&field, &flat, 1).unwrap();
        let x = |x, y| field.weight_at(Site::new(x, y)).unwrap();
        assert_eq!(t.g(Site::new(0, 1)), Some(x(0, 1)));
        assert_eq!(t.g(Site::new(1, 1)), Some(x(1, 1) + x(0, 1).max(x(1, 0))));
        assert_eq!(t.g(Site::new(0, 0)), Some(0.0));
        assert_eq!(t.g(Site::new(2, 1)), None);
    }

    #[test]
    fn coverage_gaps_are_reported() {
        let field: WeightField = sample_weights(LatticeBox::new(Site::new(0, 0), Site::new(3, 3)).unwrap(), &RngStream::new(0, 0)).unwrap();
        let g = InitialInterface::build_deterministic(vec![-2, -2, -3], vec![-1, -1, -1], 0.5, 0.5).unwrap();
        match compute_growth::<f64, _>(&field, &g, 3) {
            Err(Error::Coverage { site, what: "weight" }) => assert_eq!(site, Site::new(-1, 1)),
            other => panic!("{other:?}"),
        }
        let short = InitialInterface::build_deterministic(vec![-1], vec![-1, -1, -1], 0.5, 0.5).unwrap();
        match compute_growth::<f64, _>(&|_: Site| 1.0, &short, 3) {
            Err(Error::Coverage { site, .. }) => assert_eq!(site, Site::new(0, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn recurrence_holds_bitwise() {
        let stream = RngStream::new(12, 0);
        let w = crate::lattice::StreamWeights::<f64>::new(&stream);
        let iface = InitialInterface::sample_random_walk(0.4, 0.7, 80, &stream).unwrap();
        let t = compute_growth(&w, &iface, 60).unwrap();
        assert_eq!(t.recurrence_violation(&w), None);
        let t32: GrowthTable<f32> = compute_growth(&crate::lattice::StreamWeights::<f32>::new(&stream), &iface, 60).unwrap();
        assert_eq!(t32.recurrence_violation(&crate::lattice::StreamWeights::<f32>::new(&stream)), None);
    }

    #[test]
    fn labels_by_side_and_monotone() {
        let stream = RngStream::new(2, 9);
        let w = crate::lattice::StreamWeights::<f64>::new(&stream);
        let iface = InitialInterface::sample_random_walk(0.5, 0.5, 40, &stream).unwrap();
        let t = compute_growth(&w, &iface, 30).unwrap();
        for (z, _) in t.sites() {
            let l = t.label(z).unwrap();
            if z.x <= 0 {
                assert_eq!(l, 1, "{z}");
            }
            if z.y <= 0 {
                assert_eq!(l, 2, "{z}");
            }
            if l == 1 && t.in_domain(z.north()) {
                assert_eq!(t.label(z.north()), Some(1));
            }
            if l == 2 && t.in_domain(z.east()) {
                assert_eq!(t.label(z.east()), Some(2));
            }
        }
    }

    #[test]
    fn interface_separates_clusters_and_exhausts() {
        let stream = RngStream::new(3, 1);
        let w = crate::lattice::StreamWeights::<f64>::new(&stream);
        let iface = InitialInterface::sample_random_walk(0.5, 0.5, 50, &stream).unwrap();
        let t = compute_growth(&w, &iface, 40).unwrap();
        let phi = competition_interface(&t, 40).unwrap();
        assert_eq!(phi.steps(), 40);
        for &z in phi.sites() {
            assert_eq!(t.label(z.north()), Some(1));
            assert_eq!(t.label(z.east()), Some(2));
        }
        assert!(phi.times().windows(2).all(|p| p[0] < p[1]));
        match competition_interface(&t, 1000) {
            Err(Error::BoxExhausted { sites }) => {
                assert!(sites.len() > 40);
                let z = *sites.last().unwrap();
                assert!(z.x == 40 || z.y == 40);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn psi_is_right_continuous_step_function() {
        let stream = RngStream::new(5, 5);
        let w = crate::lattice::StreamWeights::<f64>::new(&stream);
        let t = compute_growth(&w, &InitialInterface::axes(20), 20).unwrap();
        let phi = competition_interface(&t, 15).unwrap();
        assert_eq!(phi.psi_at(0.0).unwrap(), Site::ORIGIN);
        let t1 = phi.times()[1];
        assert_eq!(phi.psi_at(t1 * (1.0 - 1e-12)).unwrap(), Site::ORIGIN);
        for n in 1..15 {
            assert_eq!(phi.psi_at(phi.times()[n]).unwrap(), phi.sites()[n]);
        }
        assert!(matches!(phi.psi_at(phi.times()[15]), Err(Error::Horizon { .. })));
    }

    #[test]
    fn perturbed_path_fails_the_duality_check() {
        let stream = RngStream::new(6, 0);
        let w = crate::lattice::StreamWeights::<f64>::new(&stream);
        let iface = InitialInterface::sample_random_walk(0.5, 0.5, 80, &stream).unwrap();
        let t = compute_growth(&w, &iface, 60).unwrap();
        let phi = competition_interface(&t, 50).unwrap();
        assert!(nems_geodesic_check(&t, phi.sites(), 12));
        assert!(nems_geodesic_check(&t, phi.sites(), 1));
        let mut bent = phi.sites().to_vec();
        let i = (1..bent.len() - 1)
            .find(|&i| bent[i] - bent[i - 1] != bent[i + 1] - bent[i])
            .unwrap();
        bent[i] = bent[i - 1] + (bent[i + 1] - bent[i]);
        assert!(!nems_geodesic_check(&t, &bent, 12));
    }

    #[test]
    fn directed_path_contract() {
        let p = DirectedPath::new(vec![Site::new(1, 1), Site::new(2, 1), Site::new(2, 2)], &block).unwrap();
        assert_eq!(p.weight(), 9.0);
        assert!(DirectedPath::<f64>::new(vec![Site::new(1, 1), Site::new(2, 2)], &block).is_err());
    }

    #[test]
    fn right_only_table_starts_on_the_lower_arm() {
        let stream = RngStream::new(8, 8);
        let w = crate::lattice::StreamWeights::<f64>::new(&stream);
        let iface = InitialInterface::sample_random_walk(0.5, 0.3, 40, &stream).unwrap();
        let t = compute_growth_in(&w, &iface, 30, 30, Sources::RightOnly).unwrap();
        let full = compute_growth(&w, &iface, 30).unwrap();
        for y in 1..=30 {
            for x in 1..=30 {
                let z = Site::new(x, y);
                assert!(matches!(contact_point(&t, z).unwrap(), Contact::B(_)));
                assert!(t.g(z).unwrap() <= full.g(z).unwrap());
                if let Contact::B(_) = contact_point(&full, z).unwrap() {
                    assert_eq!(t.g(z), full.g(z));
                }
            }
        }
    }
}
