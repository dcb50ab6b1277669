mod common;

use common::*;
use uce_core::cost::{average_slope, average_slope_deriv, c_bar, crossing_solution, CostShapeReport, TheoremCase};
use uce_core::Side;

#[test]
fn slope_derivative_matches_finite_differences() {
    for (name, h) in corpus() {
        let cb = c_bar(&h);
        for i in 1..40 {
            let c = cb * i as f64 / 40.0;
            let e = 1e-7;
            let fd_right = (average_slope(&h, c + e) - average_slope(&h, c)) / e;
            let fd_left = (average_slope(&h, c) - average_slope(&h, c - e)) / e;
            let (r, l) = (average_slope_deriv(&h, c, Side::Right), average_slope_deriv(&h, c, Side::Left));
            assert!((fd_right - r).abs() < 1e-4 * (1.0 + r.abs()), "{name} c {c}: {fd_right} vs {r}");
            assert!((fd_left - l).abs() < 1e-4 * (1.0 + l.abs()), "{name} c {c}: {fd_left} vs {l}");
        }
    }
}

#[test]
fn average_slope_at_the_top_is_the_reciprocal_of_the_support() {
    for (name, h) in corpus() {
        let cb = c_bar(&h);
        assert!((average_slope(&h, cb) - 1.0 / cb).abs() < 1e-12, "{name}");
    }
}

#[test]
fn bimodal_crossing_solves_the_equal_slope_condition() {
    let h = bimodal_costs();
    let rep = CostShapeReport::analyze(&h, 0.5).unwrap();
    assert_eq!(rep.theorem_case, TheoremCase::C);
    let sol = crossing_solution(&h).expect("bimodal instance has a crossing");
    assert_eq!(rep.c_sol, Some(sol));
    assert!(sol > rep.c_loc && sol < c_bar(&h));
    assert!((average_slope(&h, sol) - rep.s_loc).abs() < 1e-9);
    // S climbs back above its local minimum on the way to the crossing.
    let mid = 0.5 * (rep.c_loc + sol);
    assert!(average_slope(&h, mid) > rep.s_loc);
}

#[test]
fn uniform_costs_fall_in_the_tangency_case() {
    let rep = CostShapeReport::analyze(&uniform_costs(), 0.5).unwrap();
    assert_eq!(rep.theorem_case, TheoremCase::B);
    assert!((rep.s_loc - 1.0 / 0.18).abs() < 1e-9);
    assert!(rep.assumption_diag);
}

#[test]
fn rejects_costs_with_atoms() {
    let h = uce_core::PiecewisePolyDist::new(0.0, 0.2, vec![], vec![uce_core::Atom { at: 0.1, mass: 1.0 }]).unwrap();
    assert!(CostShapeReport::analyze(&h, 0.5).is_err());
}
