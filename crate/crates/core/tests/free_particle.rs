//! Observed free particle: the closed-form deviation against its ODE,
//! oscillation period, the unobserved limit and random consistency cases.

use proptest::prelude::*;
use qfilter_core::particle::{
    appendix_q, consistency_check, deviation_closed_form, deviation_solve, second_differences, unobserved_q,
    ObservedParticle, ObservedPath,
};

#[test]
fn zero_crossings_are_spaced_by_pi_over_kappa() {
    for kappa in [0.5, 1.0, 2.5] {
        let dt = 1e-4 / kappa;
        let mut crossings = Vec::new();
        let mut prev = deviation_closed_form(kappa, 1.0, 0.3, 0.0);
        for n in 1..=(8.0 / (kappa * dt)) as usize {
            let t = n as f64 * dt;
            let z = deviation_closed_form(kappa, 1.0, 0.3, t);
            if z.signum() != prev.signum() {
                crossings.push(t);
            }
            prev = z;
        }
        assert!(crossings.len() >= 2, "kappa = {kappa}");
        for w in crossings.windows(2) {
            let period = std::f64::consts::PI / kappa;
            assert!((w[1] - w[0] - period).abs() <= 2.0 * dt, "kappa = {kappa}: {}", w[1] - w[0]);
        }
    }
}

#[test]
fn small_kappa_recovers_ballistic_motion() {
    let (q0, v0, u, q) = (0.7, -1.3, 0.4, 2.0);
    let p = ObservedParticle::with_kappa(1e-7, q0, v0).unwrap();
    for t in [0.0, 0.5, 1.0, 3.0] {
        let observed = appendix_q(&p, u, q, t).unwrap();
        assert!((observed - unobserved_q(&p, t)).abs() < 1e-5, "t = {t}");
    }
    // lambda = 0 has no closed form, only the ballistic solution
    let free = ObservedParticle::new(1.0, 0.0, 1.0, q0, v0).unwrap();
    assert!(appendix_q(&free, u, q, 1.0).is_err());
    let y = |t: f64| u * t - q;
    let g = |_: f64| 0.0;
    let series = deviation_solve(&free, &ObservedPath::Analytic { y: &y, g: &g }, q0 + q, v0 - u, 2.0, 1e-3).unwrap();
    for (t, z) in series.times.iter().zip(&series.z) {
        assert!((z + y(*t) - unobserved_q(&free, *t)).abs() < 1e-12);
    }
}

#[test]
fn second_differences_are_exact_on_cubics() {
    let dt = 0.1;
    let f = |t: f64| 2.0 * t * t * t - t * t + 3.0;
    let values: Vec<f64> = (0..20).map(|k| f(k as f64 * dt)).collect();
    let d2 = second_differences(&values, dt);
    for (k, d) in d2.iter().enumerate() {
        let t = k as f64 * dt;
        assert!((d - (12.0 * t - 2.0)).abs() < 1e-9, "k = {k}: {d}");
    }
}

#[test]
fn sampled_paths_match_analytic_paths() {
    let p = ObservedParticle::with_kappa(1.0, 0.0, 5.5).unwrap();
    let dt = 1e-3;
    // a path with curvature exercises g
    let y = |t: f64| 0.5 * t - 1.0 + 0.1 * t * t;
    let g = |_: f64| 0.2;
    let values: Vec<f64> = (0..=6000).map(|k| y(k as f64 * dt)).collect();
    let a = deviation_solve(&p, &ObservedPath::Analytic { y: &y, g: &g }, 1.0, 5.0, 6.0, dt).unwrap();
    let s = deviation_solve(&p, &ObservedPath::Sampled { t0: 0.0, dt, values: &values }, 1.0, 5.0, 6.0, dt).unwrap();
    let diff = a.z.iter().zip(&s.z).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
}

proptest! {
    #[test]
    fn closed_form_solves_the_deviation_equation(
        kappa in 0.2f64..3.0, z0 in -3.0f64..3.0, z1 in -3.0f64..3.0, t in 0.1f64..5.0,
    ) {
        let z = |s: f64| deviation_closed_form(kappa, z0, z1, s);
        let h = 1e-3 / kappa;
        let d1 = (z(t + h) - z(t - h)) / (2.0 * h);
        let d2 = (z(t + h) - 2.0 * z(t) + z(t - h)) / (h * h);
        let residual = d2 + 2.0 * kappa * d1 + 2.0 * kappa * kappa * z(t);
        let scale = kappa * kappa * (z0.abs() + z1.abs() / kappa + 1.0);
        prop_assert!(residual.abs() < 1e-4 * scale, "residual {residual}");
        // initial conditions
        prop_assert!((z(0.0) - z0).abs() < 1e-15);
        let slope = (z(h) - z(-h)) / (2.0 * h);
        prop_assert!((slope - z1).abs() < 1e-5 * (1.0 + z1.abs() + kappa * z0.abs()));
    }

    #[test]
    fn ode_and_closed_form_agree_on_random_instances(
        kappa in 0.2f64..3.0, q0 in -3.0f64..3.0, v0 in -3.0f64..3.0, u in -2.0f64..2.0, q in -3.0f64..3.0,
    ) {
        let p = ObservedParticle::with_kappa(kappa, q0, v0).unwrap();
        let report = consistency_check(&p, u, q, 6.0 / kappa, 1e-3 / kappa).unwrap();
        prop_assert!(report.max_rel_err < 1e-6, "{}", report.max_rel_err);
    }
}
