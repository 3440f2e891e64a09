use koch_walk::fractal_calculus::{
    falpha_integral, falpha_integral_mass, gamma_norm, inverse_staircase, lift, lower,
    mass_function, midpoint_integral, point_at_mass, staircase, total_mass, StaircaseTable,
};
use koch_walk::koch_curve::{build_curve, FractalCurve};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

const ALPHA: f64 = 1.261_859_507_142_914_8;

/// Chord sum over the aligned partition at `depth`, built from the
/// independently subdivided vertex list.
fn chord_mass(curve: &FractalCurve, cells: std::ops::Range<usize>) -> f64 {
    let v = curve.vertices();
    let sum: f64 = cells.map(|i| v[i].distance_to(&v[i + 1]).powf(ALPHA)).sum();
    sum / gamma(ALPHA + 1.0)
}

#[test]
fn total_mass_is_inverse_gamma_at_every_depth() {
    let expected = 1.0 / gamma(ALPHA + 1.0);
    for depth in 1..=8 {
        let c = build_curve(depth).unwrap();
        assert!((total_mass(&c) - expected).abs() < 1e-12);
        let cells = c.segment_count() as usize;
        assert!((chord_mass(&c, 0..cells) - expected).abs() < 1e-12);
    }
    assert!((gamma_norm(ALPHA) - expected).abs() < 1e-15);
}

#[test]
fn quarter_masses_match_chord_sums() {
    let c = build_curve(5).unwrap();
    let quarter = c.segment_count() as usize / 4;
    for j in 0..4 {
        let a = j as f64 / 4.0;
        let direct = mass_function(&c, a, a + 0.25, 5).unwrap();
        let chords = chord_mass(&c, j * quarter..(j + 1) * quarter);
        assert!((direct - chords).abs() < 1e-13);
        assert!((direct - total_mass(&c) / 4.0).abs() < 1e-13);
    }
}

#[test]
fn vertices_agree_with_point_at() {
    let c = build_curve(4).unwrap();
    let n = c.segment_count();
    for (i, v) in c.vertices().iter().enumerate() {
        let p = c.point_at(i as f64 / n as f64).unwrap();
        assert!(p.distance_to(v) < 1e-14, "vertex {i}");
    }
}

#[test]
fn conjugacy_of_integration() {
    let c = build_curve(6).unwrap();
    let table = StaircaseTable::new(&c, 6).unwrap();
    let f = |p: &koch_walk::CurvePoint| p.distance().powi(2) + p.position.y;
    let on_curve = falpha_integral(f, &c, 0.0, 1.0, 4096).unwrap();
    let g = lift(f, &table);
    let on_axis = midpoint_integral(|s| g.eval(s).unwrap(), 0.0, total_mass(&c), 4096).unwrap();
    assert!((on_curve - on_axis).abs() < 1e-10);
}

#[test]
fn lift_then_lower_recovers_the_function() {
    let c = build_curve(6).unwrap();
    let table = StaircaseTable::new(&c, 6).unwrap();
    let f = |p: &koch_walk::CurvePoint| p.position.x * 3.0 - p.distance();
    let g = lift(f, &table);
    let back = lower(&g);
    for i in 0..=64 {
        let theta = table.grid_point(i * 64);
        assert!((back(&theta).unwrap() - f(&theta)).abs() < 1e-14);
    }
}

#[test]
fn falpha_integral_of_one_is_the_mass() {
    let c = build_curve(6).unwrap();
    let got = falpha_integral(|_| 1.0, &c, 0.125, 0.75, 128).unwrap();
    let expected = staircase(&c, 0.75).unwrap() - staircase(&c, 0.125).unwrap();
    assert!((got - expected).abs() < 1e-14);
    // The infinite curve: four unit curves' worth of mass on [0, 4].
    let four = falpha_integral_mass(|_| 1.0, &c, 0.0, 4.0 * total_mass(&c), 64).unwrap();
    assert!((four - 4.0 * total_mass(&c)).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mirror_symmetry(u in 0.0f64..=1.0, depth in 1u32..=8) {
        let c = build_curve(depth).unwrap();
        let p = c.point_at(u).unwrap();
        let q = c.point_at(1.0 - u).unwrap();
        prop_assert!((p.x + q.x - 1.0).abs() < 1e-12);
        prop_assert!((p.y - q.y).abs() < 1e-12);
    }

    #[test]
    fn staircase_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let c = build_curve(7).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(staircase(&c, lo).unwrap() <= staircase(&c, hi).unwrap());
    }

    #[test]
    fn staircase_power_law_envelope(i in 1u64..4096) {
        let c = build_curve(6).unwrap();
        let u = i as f64 / 4096.0;
        let s = staircase(&c, u).unwrap();
        let l = c.euclidean_distance(u).unwrap();
        let ratio = s / l.powf(c.alpha());
        prop_assert!(ratio > 0.2 && ratio < 5.0, "u = {} ratio = {}", u, ratio);
    }

    #[test]
    fn mass_is_additive_on_aligned_points(a in 0u32..=4096, b in 0u32..=4096, c_ in 0u32..=4096) {
        let c = build_curve(6).unwrap();
        let mut v = [a, b, c_].map(|i| i as f64 / 4096.0);
        v.sort_by(f64::total_cmp);
        let ab = mass_function(&c, v[0], v[1], 6).unwrap();
        let bc = mass_function(&c, v[1], v[2], 6).unwrap();
        let ac = mass_function(&c, v[0], v[2], 6).unwrap();
        prop_assert!((ab + bc - ac).abs() < 1e-12);
    }

    #[test]
    fn staircase_round_trip(s_frac in 0.0f64..=1.0) {
        let c = build_curve(8).unwrap();
        let s = s_frac * total_mass(&c);
        let u = inverse_staircase(&c, s).unwrap();
        prop_assert!((staircase(&c, u).unwrap() - s).abs() < 1e-13);
        let p = point_at_mass(&c, s);
        prop_assert!((p.u - u).abs() < 1e-15);
    }
}
