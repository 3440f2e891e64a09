use koch_walk::fractal_calculus::{total_mass, StaircaseTable};
use koch_walk::koch_curve::{build_curve, FractalCurve};
use koch_walk::numeric::uniform_grid;
use koch_walk::stable_laws::{
    cauchy_density, fit_tail_exponent, fractalized_density, gaussian_mu2_density, leading_tail,
    moment_finiteness, tail_agreement_threshold, tail_series, MomentStatus, StableInverter,
    StableLawConfig,
};

#[test]
fn closed_forms_are_reproduced() {
    let cauchy = StableInverter::new(&StableLawConfig::new(1.0)).unwrap();
    let gauss = StableInverter::new(&StableLawConfig::new(2.0)).unwrap();
    let ys = uniform_grid(-10.0, 10.0, 401);
    for (&y, p) in ys.iter().zip(cauchy.density_grid(&ys)) {
        assert!((p - cauchy_density(y)).abs() < 1e-4);
    }
    for (&y, p) in ys.iter().zip(gauss.density_grid(&ys)) {
        assert!((p - gaussian_mu2_density(y)).abs() < 1e-6);
    }
}

fn trapezoid(inv: &StableInverter, lo: f64, hi: f64, panels: usize) -> f64 {
    let ys = uniform_grid(lo, hi, panels + 1);
    let ps = inv.density_grid(&ys);
    let h = (hi - lo) / panels as f64;
    h * (ps.iter().sum::<f64>() - 0.5 * (ps[0] + ps[panels]))
}

#[test]
fn densities_are_symmetric_and_normalised() {
    for mu in [0.8, 1.0, 1.5, 2.0] {
        let inv = StableInverter::new(&StableLawConfig::new(mu)).unwrap();
        for y in [0.3, 2.0, 17.0] {
            assert_eq!(inv.density(y), inv.density(-y));
        }
        if mu >= 1.0 {
            // trapezoid over [0, 1000] on a graded grid (fine near the peak),
            // doubled by symmetry, plus the analytic tails beyond
            let body =
                2.0 * (trapezoid(&inv, 0.0, 20.0, 2000) + trapezoid(&inv, 20.0, 1000.0, 980));
            let tail = if mu < 2.0 {
                2.0 * leading_tail(1000.0, mu).unwrap() * 1000.0 / mu
            } else {
                0.0
            };
            assert!(
                (body + tail - 1.0).abs() < 1e-3,
                "mu = {mu}: {}",
                body + tail
            );
        }
    }
}

#[test]
fn inversion_approaches_the_tail_series() {
    let inv = StableInverter::new(&StableLawConfig::new(1.5)).unwrap();
    for y in [10.0, 30.0, 100.0] {
        let series = tail_series(y, 1.5, 5).unwrap();
        assert!((inv.density(y) - series).abs() / series < 1e-3, "y = {y}");
    }
    let from = tail_agreement_threshold(&StableLawConfig::new(1.5), 1.0, 256.0, 200, 0.05)
        .unwrap()
        .unwrap();
    assert!(from > 8.0 && from <= 16.0, "threshold {from}");
}

#[test]
fn gaussian_law_read_on_the_curve() {
    let c = build_curve(6).unwrap();
    let table = StaircaseTable::new(&c, 6)
        .unwrap()
        .with_mass_range(-16.0 * total_mass(&c), 16.0 * total_mass(&c))
        .unwrap();
    let law = fractalized_density(&table, &StableLawConfig::new(2.0)).unwrap();
    for u in [-3.0, -0.5, 0.0, 0.25, 0.8, 2.0, 7.5] {
        let theta = koch_walk::fractal_calculus::point_at_parameter(&c, u).unwrap();
        let got = law.at_parameter(u).unwrap();
        assert!((got - gaussian_mu2_density(theta.mass)).abs() < 1e-6);
    }
    assert!(law.at_mass(20.0 * total_mass(&c)).is_err());
}

#[test]
fn tail_exponent_is_scaled_by_the_dimension() {
    let cfg = StableLawConfig::new(1.5);
    let koch = build_curve(6).unwrap();
    let line = FractalCurve::straight_line(6).unwrap();
    for window in [(16.0, 256.0), (20.0, 300.0)] {
        let k = fit_tail_exponent(&koch, &cfg, window).unwrap();
        let l = fit_tail_exponent(&line, &cfg, window).unwrap();
        assert!((k.fitted_exponent / -3.155 - 1.0).abs() < 0.05);
        assert!((l.fitted_exponent / -2.5 - 1.0).abs() < 0.05);
        let ratio = k.fitted_exponent / l.fitted_exponent;
        assert!((ratio / koch.alpha() - 1.0).abs() < 0.05, "ratio {ratio}");
    }
    // the fit refuses windows outside the asymptotic regime
    assert!(fit_tail_exponent(&koch, &cfg, (1.0, 8.0)).is_err());
}

#[test]
fn moment_divergence_thresholds() {
    let alpha = build_curve(1).unwrap().alpha();
    for (mu, q, expected) in [
        (1.5, 1, MomentStatus::Finite),
        (1.5, 2, MomentStatus::Infinite),
        (0.7, 1, MomentStatus::Infinite),
        (2.0, 2, MomentStatus::Finite),
    ] {
        assert_eq!(
            moment_finiteness(mu, alpha, q).unwrap(),
            expected,
            "mu = {mu}, q = {q}"
        );
    }
}
