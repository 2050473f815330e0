//! Continuously observed particle on a periodic position grid.
//!
//! Observation model `dY = (2 lambda)^(1/2) X dt + dy` with coupling
//! `L = (lambda/2)^(1/2) x` and `H = p^2/2m + phi(x)`. The posterior is
//! propagated in its unnormalized (linear) form by Strang splitting: half a
//! kinetic step in Fourier space, the exact diagonal factor
//! `exp(c x dY - c^2 x^2 dt - i phi dt/hbar)` with `c = (lambda/2)^(1/2)`,
//! another half kinetic step, then renormalization. The diagonal factor is the
//! Itô-exact solution of `d chi = -c^2 x^2 chi dt / 2 + c x chi dY`, so the same
//! step serves sampled innovations and smooth observation records.
//!
//! Amplitudes are stored as `psi(x_j) sqrt(dx)`, so `sum |a_j|^2 = 1`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::{is_power_of_two, FftPlan};
use crate::filter::FilterSystem;
use crate::operator::{Operator, StateVector, Tolerance};
use crate::rng::TrajectoryRng;
use crate::C64;

/// Minimum packet standard deviation, in grid cells.
pub const MIN_CELLS_PER_SIGMA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    x_min: f64,
    length: f64,
}

impl Grid {
    /// `n` points on `[x_min, x_max)`, periodic.
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if !is_power_of_two(n) || n < 4 {
            return Err(Error::InvalidParameter { name: "grid size", reason: "must be a power of two, at least 4" });
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter { name: "grid extent", reason: "need x_min < x_max" });
        }
        Ok(Self { n, x_min, length: x_max - x_min })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / self.length;
        (0..self.n).map(|j| if j < self.n / 2 { j as f64 } else { j as f64 - self.n as f64 } * dk).collect()
    }
}

/// `psi(x) ~ exp(-a (x - q0)^2 + i p0 (x - q0)/hbar)` sampled on the grid.
/// `Re a > 0`; the position variance is `1 / (4 Re a)`.
pub fn gaussian_packet(grid: &Grid, q0: f64, p0: f64, a: C64, hbar: f64) -> Result<StateVector> {
    if !(a.re > 0.0) {
        return Err(Error::InvalidParameter { name: "packet width", reason: "Re a must be positive" });
    }
    let amps = grid
        .xs()
        .into_iter()
        .map(|x| {
            let d = x - q0;
            (-a * d * d + C64::new(0.0, p0 * d / hbar)).exp()
        })
        .collect();
    StateVector::new(amps)?.normalized()
}

/// Model of a particle of mass `m` under continuous position observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionModel {
    m: f64,
    lambda: f64,
    hbar: f64,
    grid: Grid,
    potential: Vec<f64>,
}

/// Builds the observation model on `grid`; `potential` is sampled at the grid points.
pub fn position_observation_system(
    m: f64,
    lambda: f64,
    hbar: f64,
    potential: impl Fn(f64) -> f64,
    grid: Grid,
) -> Result<PositionModel> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter { name: "mass", reason: "must be positive" });
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter { name: "lambda", reason: "must be nonnegative" });
    }
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::InvalidParameter { name: "hbar", reason: "must be positive" });
    }
    let potential = grid.xs().into_iter().map(potential).collect();
    Ok(PositionModel { m, lambda, hbar, grid, potential })
}

impl PositionModel {
    pub fn grid(&self) -> &Grid {
        &self.grid
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

    /// `c = (lambda/2)^(1/2)`, so that `L = c x`.
    pub fn coupling_strength(&self) -> f64 {
        (self.lambda / 2.0).sqrt()
    }

    /// `kappa = (lambda hbar / 2m)^(1/2)`
    pub fn kappa(&self) -> f64 {
        (self.lambda * self.hbar / (2.0 * self.m)).sqrt()
    }

    /// Stationary posterior variance `(hbar / 2 lambda m)^(1/2)`.
    pub fn stationary_variance(&self) -> Result<f64> {
        if self.lambda == 0.0 {
            return Err(Error::InvalidParameter { name: "lambda", reason: "no stationary regime at 0" });
        }
        Ok((self.hbar / (2.0 * self.lambda * self.m)).sqrt())
    }

    /// The Gaussian that the free observed particle's posterior converges to:
    /// variance `V`, symmetrized covariance `hbar/2` and momentum variance
    /// `hbar^2/(2V)`, i.e. `a = (1 - i) / (4V)`.
    pub fn stationary_packet(&self, q0: f64, p0: f64) -> Result<StateVector> {
        let v = self.stationary_variance()?;
        gaussian_packet(&self.grid, q0, p0, C64::new(1.0, -1.0) / (4.0 * v), self.hbar)
    }

    pub fn position_operator(&self) -> Operator {
        Operator::from_real_diag(&self.grid.xs())
    }

    /// Spectral momentum `F^-1 diag(hbar k) F` as a dense matrix.
    pub fn momentum_operator(&self) -> Operator {
        let k: Vec<f64> = self.grid.wavenumbers().iter().map(|k| self.hbar * k).collect();
        self.spectral_multiplier(&k)
    }

    /// Dense `H = p^2/2m + phi(x)`, with `p^2` applied spectrally.
    pub fn hamiltonian(&self) -> Operator {
        let kin: Vec<f64> = self.grid.wavenumbers().iter().map(|k| (self.hbar * k).powi(2) / (2.0 * self.m)).collect();
        &self.spectral_multiplier(&kin) + &Operator::from_real_diag(&self.potential)
    }

    fn spectral_multiplier(&self, symbol: &[f64]) -> Operator {
        let n = self.grid.len();
        let plan = FftPlan::new(n);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = StateVector::basis(n, j).into_amplitudes();
            plan.forward(&mut e);
            for (z, s) in e.iter_mut().zip(symbol) {
                *z *= s;
            }
            plan.inverse(&mut e);
            cols.push(e);
        }
        Operator::from_fn(n, |i, j| cols[j][i])
    }

    /// Dense [`FilterSystem`] with `L = (lambda/2)^(1/2) x`.
    pub fn filter_system(&self) -> Result<FilterSystem> {
        let l = self.position_operator().scale_real(self.coupling_strength());
        FilterSystem::new(self.hbar, self.hamiltonian().hermitian_part(), l, Tolerance::new(1e-8)?)
    }

    /// `<x>` and `|(x - <x>) psi|^2` for a normalized state.
    pub fn moments(&self, psi: &StateVector) -> (f64, f64) {
        let mut mean = 0.0;
        let mut second = 0.0;
        for (j, a) in psi.amplitudes().iter().enumerate() {
            let (x, w) = (self.grid.x(j), a.norm_sqr());
            mean += w * x;
            second += w * x * x;
        }
        (mean, (second - mean * mean).max(0.0))
    }

    /// `<p>` via the spectral representation.
    pub fn momentum_mean(&self, psi: &StateVector, plan: &FftPlan) -> f64 {
        let mut buf = psi.amplitudes().to_vec();
        plan.forward(&mut buf);
        let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        let k = self.grid.wavenumbers();
        self.hbar * buf.iter().zip(&k).map(|(z, k)| z.norm_sqr() * k).sum::<f64>() / total
    }

    fn check_resolution(&self, variance: f64) -> Result<()> {
        let cell = self.grid.dx();
        let sigma = variance.sqrt();
        if sigma < MIN_CELLS_PER_SIGMA * cell {
            return Err(Error::GridTooCoarse { dispersion: sigma, cell });
        }
        Ok(())
    }
}

/// Source of the observation increments `dY`.
pub enum Observation<'a> {
    /// `dY = 2c <x> dt + dy~` with a Wiener innovation: the output measure.
    Sampled { seed: u64, index: u64 },
    /// A smooth registered signal `Y(t) = y(t)`, so `dY = (2 lambda)^(1/2) y dt`
    /// evaluated at the step midpoint.
    Signal(&'a dyn Fn(f64) -> f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionRecord {
    pub times: Vec<f64>,
    /// Posterior mean `q(t) = <psi|x psi>`.
    pub mean: Vec<f64>,
    /// Posterior dispersion `|(q - x) psi|^2`.
    pub variance: Vec<f64>,
    pub momentum_mean: Vec<f64>,
    /// One observation increment per step.
    pub dy: Vec<f64>,
    /// Largest `|mean - box center| / (box length / 2)` of the state as held
    /// on the grid; near 1 the packet touches the periodic boundary.
    pub frame_excursion: f64,
    /// State on the grid; with a co-moving frame it is translated by
    /// `mean - <x>_grid` and boosted by `momentum_mean - <p>_grid`.
    pub final_state: StateVector,
}

/// Split-step propagator for a fixed `dt`.
#[derive(Debug, Clone)]
pub struct PositionFilter<'m> {
    model: &'m PositionModel,
    plan: FftPlan,
    half_kinetic: Vec<C64>,
    dt: f64,
    comoving: bool,
}

impl<'m> PositionFilter<'m> {
    pub fn new(model: &'m PositionModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter { name: "dt", reason: "must be positive" });
        }
        let plan = FftPlan::new(model.grid.len());
        let half_kinetic = model
            .grid
            .wavenumbers()
            .iter()
            .map(|k| {
                let phase = -model.hbar * k * k / (2.0 * model.m) * dt / 2.0;
                C64::new(phase.cos(), phase.sin())
            })
            .collect();
        Ok(Self { model, plan, half_kinetic, dt, comoving: false })
    }

    /// Keeps the packet centered on the grid for a free particle.
    ///
    /// After each step the state is shifted by whole cells toward the box
    /// center and boosted by whole grid wavenumbers toward zero mean
    /// momentum; the shift and boost are tracked and added back to the
    /// reported moments. Free evolution is Galilean covariant and the
    /// observation factor `exp(c x dY - c^2 x^2 dt)` only changes by the
    /// offset `dY -> dY - 2 c s dt`, so the posterior is unchanged up to
    /// the periodic wrap of negligible tails.
    pub fn with_comoving_frame(mut self) -> Result<Self> {
        if self.model.potential.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidParameter {
                name: "comoving frame",
                reason: "needs a free particle (zero potential)",
            });
        }
        self.comoving = true;
        Ok(self)
    }

    fn kinetic_half(&self, buf: &mut [C64]) {
        self.plan.forward(buf);
        for (z, u) in buf.iter_mut().zip(&self.half_kinetic) {
            *z *= u;
        }
        self.plan.inverse(buf);
    }

    /// One Strang step with observation increment `dy`; returns the
    /// renormalized state.
    pub fn step(&self, psi: &StateVector, dy: f64) -> StateVector {
        let m = self.model;
        let c = m.coupling_strength();
        let dt = self.dt;
        let mut buf = psi.amplitudes().to_vec();
        self.kinetic_half(&mut buf);
        let exponents: Vec<f64> = (0..buf.len())
            .map(|j| {
                let x = m.grid.x(j);
                c * x * dy - c * c * x * x * dt
            })
            .collect();
        // shift by the largest exponent so the factor never overflows
        let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (j, z) in buf.iter_mut().enumerate() {
            let phase = -m.potential[j] * dt / m.hbar;
            *z *= C64::new(0.0, phase).exp() * (exponents[j] - top).exp();
        }
        self.kinetic_half(&mut buf);
        let mut out = StateVector::new(buf).expect("grid is nonempty");
        out.normalize_in_place();
        out
    }

    /// Rotates `psi` by whole cells and multiplies by a grid plane wave so its
    /// mean sits within one cell of the center and its momentum within one
    /// wavenumber of zero. Returns the applied `(translation, boost)`.
    fn recenter(&self, psi: &mut StateVector, mean: f64, p: f64) -> (f64, f64) {
        let grid = &self.model.grid;
        let n = grid.len() as i64;
        let dx = grid.dx();
        let center = grid.x_min + grid.length / 2.0;
        let cells = ((mean - center) / dx).round() as i64;
        let dk = 2.0 * PI / grid.length;
        let quanta = (p / (self.model.hbar * dk)).round() as i64;
        let amps = psi.amplitudes_mut();
        if cells != 0 {
            // new(x) = old(x + cells dx)
            amps.rotate_left(cells.rem_euclid(n) as usize);
        }
        if quanta != 0 {
            let k = quanta as f64 * dk;
            for (j, z) in amps.iter_mut().enumerate() {
                let phase = -k * grid.x(j);
                *z *= C64::new(phase.cos(), phase.sin());
            }
        }
        (cells as f64 * dx, self.model.hbar * quanta as f64 * dk)
    }

    /// Runs the filter from `psi0` over `[0, t_end]`.
    pub fn run(&self, psi0: &StateVector, t_end: f64, obs: Observation<'_>) -> Result<PositionRecord> {
        let m = self.model;
        if psi0.dim() != m.grid.len() {
            return Err(Error::DimensionMismatch { expected: m.grid.len(), found: psi0.dim() });
        }
        psi0.ensure_normalized(Tolerance::new(1e-9)?)?;
        let steps = ((t_end / self.dt) + 0.5).floor() as usize;
        let two_c = 2.0 * m.coupling_strength();
        let mut rng = match obs {
            Observation::Sampled { seed, index } => Some(TrajectoryRng::stream(seed, index)),
            Observation::Signal(_) => None,
        };
        let mut psi = psi0.clone();
        let (q, v) = m.moments(&psi);
        m.check_resolution(v)?;
        let mut rec = PositionRecord {
            times: Vec::with_capacity(steps + 1),
            mean: Vec::with_capacity(steps + 1),
            variance: Vec::with_capacity(steps + 1),
            momentum_mean: Vec::with_capacity(steps + 1),
            dy: Vec::with_capacity(steps),
            frame_excursion: 0.0,
            final_state: psi.clone(),
        };
        rec.times.push(0.0);
        rec.mean.push(q);
        rec.variance.push(v);
        rec.momentum_mean.push(m.momentum_mean(&psi, &self.plan));
        let center = m.grid.x_min + m.grid.length / 2.0;
        let half = m.grid.length / 2.0;
        rec.frame_excursion = (q - center).abs() / half;
        let mut q = q;
        // frame translation and boost: true state psi(x) ~ e^(i boost x/hbar) grid(x - shift)
        let (mut shift, mut boost) = (0.0, 0.0);
        for n in 0..steps {
            let t = n as f64 * self.dt;
            let dy = match (&obs, rng.as_mut()) {
                (Observation::Signal(y), _) => two_c * y(t + self.dt / 2.0) * self.dt,
                (Observation::Sampled { .. }, Some(r)) => two_c * q * self.dt + r.wiener_increment(self.dt),
                (Observation::Sampled { .. }, None) => unreachable!("sampled observation owns a stream"),
            };
            // frame origin at the Strang midpoint
            let s_mid = shift + boost / m.m * self.dt / 2.0;
            psi = self.step(&psi, dy - two_c * s_mid * self.dt);
            shift += boost / m.m * self.dt;
            let (mut mean, var) = m.moments(&psi);
            m.check_resolution(var)?;
            let mut p = m.momentum_mean(&psi, &self.plan);
            if self.comoving {
                let (ds, dp) = self.recenter(&mut psi, mean, p);
                shift += ds;
                boost += dp;
                mean -= ds;
                p -= dp;
            }
            rec.frame_excursion = rec.frame_excursion.max((mean - center).abs() / half);
            q = mean + shift;
            rec.times.push(t + self.dt);
            rec.mean.push(q);
            rec.variance.push(var);
            rec.momentum_mean.push(p + boost);
            rec.dy.push(dy);
        }
        rec.final_state = psi;
        Ok(rec)
    }
}
