//! Property tests for the counting layer and the distribution type.

use proptest::prelude::*;

use hardrods::combinatorics::{self, equilibrium_distribution};
use hardrods::master::build_generator;
use hardrods::{NumberDistribution, RodGeometry};

fn small_geometry() -> impl Strategy<Value = RodGeometry> {
    (1usize..=4).prop_flat_map(|lambda| {
        ((lambda + 1)..=18usize)
            .prop_map(move |l| RodGeometry::new(l, lambda).unwrap())
    })
}

fn distribution(g: RodGeometry) -> impl Strategy<Value = NumberDistribution> {
    proptest::collection::vec(0.0f64..1.0, g.max_rods() + 1).prop_filter_map(
        "needs positive mass",
        move |w| {
            let sum: f64 = w.iter().sum();
            if sum <= 0.0 {
                return None;
            }
            let p: Vec<f64> = w.iter().map(|x| x / sum).collect();
            NumberDistribution::new(g, p).ok()
        },
    )
}

proptest! {
    #[test]
    fn equilibrium_is_normalized_and_stationary(g in small_geometry()) {
        let eq = equilibrium_distribution(&g);
        let sum: f64 = eq.probabilities().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        let gen = build_generator(&g);
        prop_assert!(gen.stationarity_residual(&eq) < 1e-12);
    }

    #[test]
    fn rates_are_positive_interior_and_zero_at_boundaries(g in small_geometry()) {
        let rates = combinatorics::rate_table(&g);
        let n_max = g.max_rods();
        prop_assert_eq!(rates.t_down()[0], 0.0);
        prop_assert_eq!(rates.t_up()[n_max], 0.0);
        for n in 0..n_max {
            prop_assert!(rates.t_up()[n] > 0.0);
            prop_assert_eq!(rates.t_down()[n + 1], (n + 1) as f64);
        }
    }

    #[test]
    fn loop_average_decomposes_into_rates(g in small_geometry(), n_frac in 0.0f64..1.0) {
        let n = (n_frac * g.max_rods() as f64).floor() as usize;
        let rates = combinatorics::rate_table(&g);
        let lp = combinatorics::loop_avg(&g, n).unwrap();
        let expect = rates.t_up()[n] + rates.t_down()[n];
        prop_assert!((lp - expect).abs() <= 1e-12 * expect.max(1.0));
    }

    #[test]
    fn total_variation_is_a_metric_within_bounds(
        g in Just(RodGeometry::new(12, 1).unwrap()),
        p in distribution(RodGeometry::new(12, 1).unwrap()),
        q in distribution(RodGeometry::new(12, 1).unwrap()),
        r in distribution(RodGeometry::new(12, 1).unwrap()),
    ) {
        let _ = g;
        let pq = p.total_variation(&q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert!((pq - q.total_variation(&p).unwrap()).abs() < 1e-15);
        prop_assert!(p.total_variation(&p).unwrap() < 1e-15);
        // triangle inequality
        let pr = p.total_variation(&r).unwrap();
        let rq = r.total_variation(&q).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
        // overlap is the complementary measure
        prop_assert!((p.overlap(&q).unwrap() - (1.0 - pq)).abs() < 1e-12);
    }

    #[test]
    fn master_evolution_conserves_and_stays_in_simplex(
        p0 in distribution(RodGeometry::new(10, 1).unwrap()),
        t_max in 0.1f64..5.0,
    ) {
        let g = RodGeometry::new(10, 1).unwrap();
        let gen = build_generator(&g);
        let grid = [0.0, 0.5 * t_max, t_max];
        let samples = gen.evolve(&p0, &grid, 1.0).unwrap();
        for s in &samples {
            let sum: f64 = s.probabilities().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(s.probabilities().iter().all(|&x| x >= -1e-12));
        }
        // relaxation never increases the distance to equilibrium
        let eq = equilibrium_distribution(&g);
        let d0 = samples[0].total_variation(&eq).unwrap();
        let d1 = samples[2].total_variation(&eq).unwrap();
        prop_assert!(d1 <= d0 + 1e-9);
    }
}
