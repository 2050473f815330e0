//! Continuously observed free particle: the deviation equation
//! `z'' + 2 kappa z' + 2 kappa^2 z = -g(t)` for `z = q - y`, its closed-form
//! solution and the registered-line solution `q(t)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest admissible `kappa * dt` for the RK4 deviation solver.
pub const KAPPA_DT_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedParticle {
    m: f64,
    lambda: f64,
    hbar: f64,
    /// Initial posterior mean position.
    pub q0: f64,
    /// Initial posterior mean velocity.
    pub v0: f64,
}

impl ObservedParticle {
    pub fn new(m: f64, lambda: f64, hbar: f64, q0: f64, v0: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter { name: "mass", reason: "must be positive" });
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidParameter { name: "hbar", reason: "must be positive" });
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter { name: "lambda", reason: "must be nonnegative" });
        }
        Ok(Self { m, lambda, hbar, q0, v0 })
    }

    /// Particle with the prescribed collapse rate (`m = hbar = 1`, `lambda = 2 kappa^2`).
    pub fn with_kappa(kappa: f64, q0: f64, v0: f64) -> Result<Self> {
        Self::new(1.0, 2.0 * kappa * kappa, 1.0, q0, v0)
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `kappa = (lambda hbar / 2m)^(1/2)`, recomputed on every call.
    pub fn kappa(&self) -> f64 {
        (self.lambda * self.hbar / (2.0 * self.m)).sqrt()
    }
}

/// Observed trajectory `y(t)` and its effective gravitation `g = y''`.
pub enum ObservedPath<'a> {
    Analytic {
        y: &'a dyn Fn(f64) -> f64,
        g: &'a dyn Fn(f64) -> f64,
    },
    /// Uniformly sampled `y(t0 + k dt)`.
    Sampled {
        t0: f64,
        dt: f64,
        values: &'a [f64],
    },
}

impl ObservedPath<'_> {
    pub fn y(&self, t: f64) -> f64 {
        match self {
            ObservedPath::Analytic { y, .. } => y(t),
            ObservedPath::Sampled { t0, dt, values } => {
                let s = ((t - t0) / dt).clamp(0.0, (values.len() - 1) as f64);
                let k = (s.floor() as usize).min(values.len().saturating_sub(2));
                let frac = s - k as f64;
                values[k] * (1.0 - frac) + values[(k + 1).min(values.len() - 1)] * frac
            }
        }
    }

    /// `g(t)`; for samples, piecewise-linear interpolation of second differences.
    pub fn g(&self, t: f64) -> f64 {
        match self {
            ObservedPath::Analytic { g, .. } => g(t),
            ObservedPath::Sampled { t0, dt, values } => {
                let n = values.len();
                let s = ((t - t0) / dt).clamp(0.0, (n - 1) as f64);
                let k = (s.floor() as usize).min(n - 2);
                let frac = s - k as f64;
                second_difference_at(values, *dt, k) * (1.0 - frac) + second_difference_at(values, *dt, k + 1) * frac
            }
        }
    }
}

/// Centered second differences with one-sided (four-point) ends.
pub fn second_differences(values: &[f64], dt: f64) -> Vec<f64> {
    (0..values.len()).map(|k| second_difference_at(values, dt, k)).collect()
}

fn second_difference_at(v: &[f64], dt: f64, k: usize) -> f64 {
    let n = v.len();
    assert!(n >= 4, "need at least four samples for second differences");
    let h2 = dt * dt;
    if k == 0 {
        (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
    } else if k == n - 1 {
        (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2
    } else {
        (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSeries {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub z_dot: Vec<f64>,
}

/// RK4 for `z'' + 2 kappa z' + 2 kappa^2 z = -g(t)`; `kappa = 0` is the
/// ballistic case `z'' = -g`.
pub fn deviation_solve(
    p: &ObservedParticle,
    path: &ObservedPath<'_>,
    z0: f64,
    z0_dot: f64,
    t_end: f64,
    dt: f64,
) -> Result<DeviationSeries> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter { name: "dt", reason: "must be positive" });
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter { name: "t_end", reason: "must be nonnegative" });
    }
    let kappa = p.kappa();
    if kappa * dt > KAPPA_DT_LIMIT {
        return Err(Error::StabilityGuard { product: kappa * dt, limit: KAPPA_DT_LIMIT });
    }
    let steps = ((t_end / dt) + 0.5).floor() as usize;
    let rhs = |t: f64, z: f64, v: f64| (v, -2.0 * kappa * v - 2.0 * kappa * kappa * z - path.g(t));
    let mut out = DeviationSeries {
        times: Vec::with_capacity(steps + 1),
        z: Vec::with_capacity(steps + 1),
        z_dot: Vec::with_capacity(steps + 1),
    };
    let (mut z, mut v) = (z0, z0_dot);
    out.times.push(0.0);
    out.z.push(z);
    out.z_dot.push(v);
    for n in 0..steps {
        let t = n as f64 * dt;
        let (a1, b1) = rhs(t, z, v);
        let (a2, b2) = rhs(t + dt / 2.0, z + a1 * dt / 2.0, v + b1 * dt / 2.0);
        let (a3, b3) = rhs(t + dt / 2.0, z + a2 * dt / 2.0, v + b2 * dt / 2.0);
        let (a4, b4) = rhs(t + dt, z + a3 * dt, v + b3 * dt);
        z += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        out.times.push((n + 1) as f64 * dt);
        out.z.push(z);
        out.z_dot.push(v);
    }
    Ok(out)
}

/// Homogeneous solution `e^(-kappa t) (z0 cos kappa t + (z0 + z0'/kappa) sin kappa t)`.
pub fn deviation_closed_form(kappa: f64, z0: f64, z0_dot: f64, t: f64) -> f64 {
    let (s, c) = (kappa * t).sin_cos();
    (-kappa * t).exp() * (z0 * c + (z0 + z0_dot / kappa) * s)
}

/// Posterior mean for the registered line `y(t) = u t - q`:
/// `q(t) = u t + e^(-kappa t) (z0 cos kappa t + (z0 + (v0 - u)/kappa) sin kappa t) - q`
/// with `z0 = q0 + q`; for `q0 = 0` this is the classic `z0 = q` form.
pub fn appendix_q(p: &ObservedParticle, u: f64, q: f64, t: f64) -> Result<f64> {
    let kappa = p.kappa();
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: "closed form needs kappa > 0; use unobserved_q for lambda = 0",
        });
    }
    Ok(u * t + deviation_closed_form(kappa, p.q0 + q, p.v0 - u, t) - q)
}

/// Unobserved (`lambda = 0`) posterior mean `q0 + v0 t`.
pub fn unobserved_q(p: &ObservedParticle, t: f64) -> f64 {
    p.q0 + p.v0 * t
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub times: Vec<f64>,
    /// `z(t) + y(t)` from the deviation ODE.
    pub q_numeric: Vec<f64>,
    pub q_closed_form: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// `max |numeric - closed| / max |closed|` (zero when both vanish).
    pub max_rel_err: f64,
}

/// Solves the deviation ODE for `y(t) = u t - q` (so `g = 0`) and compares
/// `z + y` with [`appendix_q`] pointwise.
pub fn consistency_check(p: &ObservedParticle, u: f64, q: f64, t_end: f64, dt: f64) -> Result<ConsistencyReport> {
    let y = move |t: f64| u * t - q;
    let g = |_: f64| 0.0;
    let path = ObservedPath::Analytic { y: &y, g: &g };
    let series = deviation_solve(p, &path, p.q0 + q, p.v0 - u, t_end, dt)?;
    let mut report = ConsistencyReport {
        times: series.times.clone(),
        q_numeric: Vec::with_capacity(series.times.len()),
        q_closed_form: Vec::with_capacity(series.times.len()),
        y: Vec::with_capacity(series.times.len()),
        z: series.z.clone(),
        max_rel_err: 0.0,
    };
    let mut max_diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (t, z) in series.times.iter().zip(&series.z) {
        let closed = appendix_q(p, u, q, *t)?;
        let numeric = z + y(*t);
        max_diff = max_diff.max((numeric - closed).abs());
        scale = scale.max(closed.abs());
        report.q_numeric.push(numeric);
        report.q_closed_form.push(closed);
        report.y.push(y(*t));
    }
    report.max_rel_err = if scale > 0.0 { max_diff / scale } else { max_diff };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_plot() -> ObservedParticle {
        ObservedParticle::with_kappa(1.0, 0.0, 5.5).unwrap()
    }

    #[test]
    fn kappa_is_derived() {
        let p = ObservedParticle::new(2.0, 4.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(p.kappa(), 1.0);
        assert!(ObservedParticle::new(0.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn equilibrium_stays_put() {
        let zero = |_: f64| 0.0;
        let path = ObservedPath::Analytic { y: &zero, g: &zero };
        let s = deviation_solve(&paper_plot(), &path, 0.0, 0.0, 5.0, 1e-3).unwrap();
        assert!(s.z.iter().all(|z| *z == 0.0));
    }

    #[test]
    fn homogeneous_solution_matches_closed_form() {
        let p = ObservedParticle::with_kappa(1.7, 0.0, 0.0).unwrap();
        let zero = |_: f64| 0.0;
        let path = ObservedPath::Analytic { y: &zero, g: &zero };
        let dt = 1e-3 / p.kappa();
        let s = deviation_solve(&p, &path, 0.8, -1.3, 5.0, dt).unwrap();
        let scale = s.z.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        for (t, z) in s.times.iter().zip(&s.z) {
            let want = deviation_closed_form(p.kappa(), 0.8, -1.3, *t);
            assert!((z - want).abs() / scale <= 1e-6);
        }
    }

    #[test]
    fn constant_gravitation_settles() {
        let p = ObservedParticle::with_kappa(2.0, 0.0, 0.0).unwrap();
        let y = |_: f64| 0.0;
        let g = |_: f64| 3.0;
        let path = ObservedPath::Analytic { y: &y, g: &g };
        let s = deviation_solve(&p, &path, 0.0, 0.0, 20.0, 1e-3).unwrap();
        assert!((s.z.last().unwrap() + 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let zero = |_: f64| 0.0;
        let path = ObservedPath::Analytic { y: &zero, g: &zero };
        let p = paper_plot();
        assert!(deviation_solve(&p, &path, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(matches!(deviation_solve(&p, &path, 0.0, 0.0, 1.0, 0.5), Err(Error::StabilityGuard { .. })));
        let free = ObservedParticle::new(1.0, 0.0, 1.0, 0.0, 2.0).unwrap();
        assert!(appendix_q(&free, 0.5, 1.0, 1.0).is_err());
        assert_eq!(unobserved_q(&free, 3.0), 6.0);
    }

    #[test]
    fn appendix_examples() {
        let p = paper_plot();
        assert_eq!(appendix_q(&p, 0.5, 1.0, 0.0).unwrap(), 0.0);
        for k in 0..=60 {
            let t = k as f64 * 0.1;
            let want = (-t).exp() * (6.0 * t.sin() + t.cos()) + 0.5 * t - 1.0;
            assert!((appendix_q(&p, 0.5, 1.0, t).unwrap() - want).abs() <= 1e-12);
        }
        // e^-1 (cos 1 + 6 sin 1) - 0.5
        let at_one = appendix_q(&p, 0.5, 1.0, 1.0).unwrap();
        assert!((at_one - 1.5561253642650863).abs() < 1e-12);
    }

    #[test]
    fn consistency_examples() {
        let r = consistency_check(&paper_plot(), 0.5, 1.0, 6.0, 1e-3).unwrap();
        assert!(r.max_rel_err <= 1e-6);
        let still = ObservedParticle::with_kappa(1.0, 0.0, 0.0).unwrap();
        let r = consistency_check(&still, 0.0, 0.0, 6.0, 1e-3).unwrap();
        assert!(r.q_numeric.iter().chain(&r.q_closed_form).all(|q| *q == 0.0));
        assert_eq!(r.max_rel_err, 0.0);
    }

    #[test]
    fn sampled_path_second_differences() {
        let dt = 0.01;
        let values: Vec<f64> = (0..200).map(|k| 1.5 * (k as f64 * dt).powi(2)).collect();
        let path = ObservedPath::Sampled { t0: 0.0, dt, values: &values };
        for t in [0.0, 0.5, 1.0, 1.99] {
            assert!((path.g(t) - 3.0).abs() < 1e-8);
        }
        assert!((path.y(0.505) - 1.5 * 0.505f64.powi(2)).abs() < 1e-4);
    }
}
