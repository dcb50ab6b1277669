mod common;

use common::*;
use uce_core::censor::solve_a_max;
use uce_core::welfare::{compare_equal_mean, consumer_surplus, consumer_surplus_type, mean_search_length, SurplusComparison};
use uce_core::PiecewisePolyDist;

#[test]
fn every_type_gains_from_participating() {
    let f = prior();
    for a in [0.0, 0.2, 0.4, 0.7, 1.0] {
        for n in [2, 5, 30] {
            for i in 0..20 {
                let c = 0.49 * i as f64 / 19.0;
                assert!(consumer_surplus_type(&f, a, c, n).unwrap().surplus > 0.0, "a {a} n {n} c {c}");
            }
        }
    }
}

#[test]
fn surplus_rises_with_disclosure_up_to_the_threshold() {
    let f = prior();
    for (name, h) in corpus() {
        let am = solve_a_max(&f, &h).unwrap().a_max;
        if am == 0.0 {
            continue;
        }
        for n in [2, 5] {
            let cs: Vec<f64> = (0..=10).map(|i| consumer_surplus(&f, &h, am * i as f64 / 10.0, n).unwrap()).collect();
            assert!(cs.windows(2).all(|w| w[1] > w[0]), "{name} n {n}: {cs:?}");
        }
    }
}

#[test]
fn search_length_grows_with_disclosure() {
    let (f, h) = (prior(), uniform_costs());
    let lens: Vec<f64> = (0..=8).map(|i| mean_search_length(&f, &h, 0.05 * i as f64, 4).unwrap()).collect();
    assert!((lens[0] - 1.0).abs() < 1e-12);
    assert!(lens.windows(2).all(|w| w[1] > w[0]), "{lens:?}");
}

#[test]
fn equal_means_give_equal_surplus_at_a_common_threshold() {
    let tent = |e: f64, p: f64| {
        let s = (p - e) / 0.1;
        PiecewisePolyDist::from_pieces(0.0, &[(0.1, vec![e, s]), (0.2, vec![e + 0.2 * s, -s])], vec![]).unwrap()
    };
    match compare_equal_mean(&prior(), &tent(3.0, 7.0), &tent(4.0, 6.0), 3).unwrap() {
        SurplusComparison::Compared { lower, a_max, cs, cs_cross } => {
            assert_eq!(lower, 0);
            assert!(a_max[0] < a_max[1]);
            assert!((cs_cross - cs[0]).abs() < 1e-10);
            assert!(cs[1] > cs[0]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn comparison_refuses_thresholds_above_the_top_cost_type() {
    let f = prior();
    let h1 = bimodal_costs();
    let h2 = PiecewisePolyDist::uniform(0.0, 2.0 * h1.mean()).unwrap();
    assert!(matches!(compare_equal_mean(&f, &h1, &h2, 3).unwrap(), SurplusComparison::HypothesisNotMet { .. }));
}
