//! Independent references for the headline quantities: a dense flat
//! average for the Favard value, a closed-form area for the circle
//! drop set, and hand-checked hit-test probes.

mod common;

use favard_lab::cantor::build_generation;
use favard_lab::favard::{
    buffon_circle_mc, buffon_circle_quadrature, circle_hit_test, favard_length,
    projection_profile, AngleDomain, AngleGrid,
};
use favard_lab::harness::{bv_report, BvConfig};
use favard_lab::noodle::Noodle;
use favard_lab::projection::Direction;

/// The production grid is midpoint-based with a fixed node budget;
/// this reference is the same average taken over a grid dense enough
/// that its own error sits far below the tolerance.
#[test]
fn favard_of_straight_projections_matches_dense_reference() {
    let ks = build_generation(1).unwrap();
    let zero = Noodle::zero();

    let m = 400_001usize;
    let h = std::f64::consts::PI / m as f64;
    let mut acc = 0.0;
    for i in 0..m {
        let theta = (i as f64 + 0.5) * h;
        let profile = projection_profile(&ks, &zero, Direction::standard(theta));
        acc += profile.support_length();
    }
    let reference = acc / m as f64;

    let grid = AngleGrid::new(AngleDomain::HalfTurn, 8192).unwrap();
    let value = favard_length(&ks, &zero, &grid);

    let rel = (value - reference).abs() / reference;
    assert!(
        rel <= 1e-4,
        "favard {value} vs dense reference {reference}, rel {rel:.3e}"
    );
}

/// Cross-checks the closed-form corner-lens integral against a direct
/// one-dimensional quadrature of the same region before using the
/// closed form as the oracle for the angular methods.
#[test]
fn circle_drop_area_closed_form_is_self_consistent() {
    for &r in &[3.0f64, 10.0] {
        // Intersection of the four corner disks: x ranges over
        // [1 - b, b] and the vertical slice is (2 m(x) - 1)+ with
        // m(x) = min over corner arcs.
        let b = (r * r - 0.25).sqrt();
        let m = 2_000_000usize;
        let h = (b - (1.0 - b)) / m as f64;
        let mut lens = 0.0;
        for i in 0..m {
            let x = (1.0 - b) + (i as f64 + 0.5) * h;
            let top = (r * r - x * x).sqrt().min((r * r - (x - 1.0) * (x - 1.0)).sqrt());
            lens += (2.0 * top - 1.0).max(0.0) * h;
        }
        let sausage = 1.0 + 4.0 * r + std::f64::consts::PI * r * r;
        let direct = sausage - lens;
        let closed = common::unit_square_circle_area(r);
        assert!(
            (direct - closed).abs() <= 1e-6 * closed,
            "r={r}: direct {direct} vs closed form {closed}"
        );
    }
    // Magnitude pin so a consistent algebra slip cannot pass silently.
    assert!((common::unit_square_circle_area(10.0) - 79.97).abs() < 0.02);
}

#[test]
fn circle_quadrature_matches_closed_form_on_the_square() {
    let grid = AngleGrid::new(AngleDomain::FullTurn, 4096).unwrap();
    for &r in &[3.0f64, 10.0] {
        let value = buffon_circle_quadrature(0, r, &grid).unwrap();
        let oracle = common::unit_square_circle_area(r);
        let rel = (value - oracle).abs() / oracle;
        assert!(
            rel <= 1e-3,
            "r={r}: quadrature {value} vs closed form {oracle}, rel {rel:.3e}"
        );
    }
}

#[test]
fn circle_monte_carlo_matches_closed_form_on_the_square() {
    let est = buffon_circle_mc(0, 10.0, 1_000_000, 42).unwrap();
    let oracle = common::unit_square_circle_area(10.0);
    let err = (est.value - oracle).abs();
    assert!(
        err <= 4.0 * est.standard_error,
        "estimate {} +- {} vs closed form {oracle}",
        est.value,
        est.standard_error
    );
}

/// Hand-checked membership probes: nearest/farthest corner distances
/// computed on paper for a unit square and its first iterate.
#[test]
fn circle_hit_test_point_probes() {
    let k0 = build_generation(0).unwrap();
    // dmin 2.5, dmax ~3.64: the circle crosses the square.
    assert!(circle_hit_test((3.5, 0.5), 3.0, &k0));
    // Far outside reach.
    assert!(!circle_hit_test((10.0, 10.0), 3.0, &k0));
    // Circle strictly contains the square: no boundary contact.
    assert!(!circle_hit_test((0.5, 0.5), 3.0, &k0));

    let k1 = build_generation(1).unwrap();
    // Top-right square [3/4,1]^2: dmin 2.9, dmax ~3.15 crosses it.
    assert!(circle_hit_test((3.9, 0.875), 3.0, &k1));
    // Threads the central gap: the right column is swallowed whole
    // (dmax ~2.81) and the left column is out of reach (dmin ~3.28).
    assert!(!circle_hit_test((3.52, 0.5), 3.0, &k1));
    // dmin 3.56 already beyond the radius for every square.
    assert!(!circle_hit_test((4.56, 0.875), 3.0, &k1));
}

/// A cap that flattens like 4^(n/5) should not disturb the decay
/// trend: the normalized score must stay within a factor of two of
/// the straight-projection score at every generation.
#[test]
fn pipeline_score_stable_under_vanishing_circle_noodles() {
    let cfg = BvConfig {
        background_nodes: 512,
        min_cone_nodes: 32,
    };
    for n in 5..=8u32 {
        let flat = bv_report(n, &Noodle::zero(), &cfg).unwrap();
        let r = 4f64.powf(n as f64 / 5.0);
        let bent = bv_report(n, &Noodle::circle(r).unwrap(), &cfg).unwrap();
        let ratio = bent.summary.score / flat.summary.score;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "n={n}: circle score {} vs flat score {}",
            bent.summary.score,
            flat.summary.score
        );
    }
}
