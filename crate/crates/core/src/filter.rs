//! Time-continuous measurement: the linear stochastic decoherence equation,
//! nonlinear posterior filters for diffusive and counting observation, the
//! master equation and ensemble reductions.
//!
//! All trajectory engines are pure functions of `(system, initial state,
//! config, trajectory index)`; randomness comes from
//! [`TrajectoryRng::stream`] so any scheduling of trajectories over workers
//! reproduces the same paths.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, spectral_norm};
use crate::operator::{DensityOperator, Operator, StateVector, Tolerance};
use crate::rng::TrajectoryRng;
use crate::C64;

/// Tolerance of the `K + K^dag = L^dag L` identity check.
pub const GENERATOR_TOL: f64 = 1e-10;
/// Upper bound on `dt * |K|` for the explicit schemes.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Upper bound on the per-step jump probability of the counting filter.
pub const JUMP_LIMIT: f64 = 0.1;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "hbar", reason: "must be positive and finite" })
    }
}

/// Diffusive measurement model `(hbar, H, L)` with `K = L^dag L / 2 + (i/hbar) H`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSystem {
    hbar: f64,
    h: Operator,
    l: Operator,
}

impl FilterSystem {
    pub fn new(hbar: f64, h: Operator, l: Operator, tol: Tolerance) -> Result<Self> {
        check_hbar(hbar)?;
        if h.dim() != l.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: l.dim() });
        }
        h.ensure_hermitian(tol)?;
        Ok(Self { hbar, h, l })
    }

    /// Builds the system from a prescribed generator `K`, recovering
    /// `H = -i hbar (K - L^dag L / 2)`. Rejects `K` unless
    /// `K + K^dag = L^dag L` within [`GENERATOR_TOL`].
    pub fn from_generator(hbar: f64, k: Operator, l: Operator) -> Result<Self> {
        check_hbar(hbar)?;
        if k.dim() != l.dim() {
            return Err(Error::DimensionMismatch { expected: k.dim(), found: l.dim() });
        }
        let ll = &l.adjoint() * &l;
        let deviation = (&k + &k.adjoint()).max_abs_diff(&ll);
        if deviation > GENERATOR_TOL {
            return Err(Error::GeneratorMismatch { deviation });
        }
        let h = (&k - &ll.scale_real(0.5)).scale(C64::new(0.0, -hbar)).hermitian_part();
        Ok(Self { hbar, h, l })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.h
    }

    pub fn coupling(&self) -> &Operator {
        &self.l
    }

    /// `K = L^dag L / 2 + (i/hbar) H`, derived on every call.
    pub fn k(&self) -> Operator {
        let ll = &self.l.adjoint() * &self.l;
        &ll.scale_real(0.5) + &self.h.scale(C64::new(0.0, 1.0 / self.hbar))
    }

    /// `max |K + K^dag - L^dag L|`
    pub fn generator_deviation(&self) -> f64 {
        let k = self.k();
        (&k + &k.adjoint()).max_abs_diff(&(&self.l.adjoint() * &self.l))
    }

    /// Lindblad right-hand side `-K rho - rho K^dag + L rho L^dag`.
    pub fn lindblad(&self, rho: &Operator) -> Operator {
        let k = self.k();
        let k_rho = &k * rho;
        let jump = &(&self.l * rho) * &self.l.adjoint();
        &(&jump - &k_rho) - &k_rho.adjoint()
    }
}

/// Counting model `(hbar, E, C, nu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingSystem {
    hbar: f64,
    e: Operator,
    c: Operator,
    nu: f64,
}

impl CountingSystem {
    pub fn new(hbar: f64, e: Operator, c: Operator, nu: f64, tol: Tolerance) -> Result<Self> {
        check_hbar(hbar)?;
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter { name: "nu", reason: "must be positive and finite" });
        }
        if e.dim() != c.dim() {
            return Err(Error::DimensionMismatch { expected: e.dim(), found: c.dim() });
        }
        e.ensure_hermitian(tol)?;
        Ok(Self { hbar, e, c, nu })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn energy(&self) -> &Operator {
        &self.e
    }

    pub fn collapse(&self) -> &Operator {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.e.dim()
    }

    /// Diffusive system with `L = nu^(1/2) (C - I)` and
    /// `H = E + i hbar (nu/2) (C - C^dag)`.
    pub fn induced(&self) -> FilterSystem {
        let id = Operator::identity(self.dim());
        let l = (&self.c - &id).scale_real(self.nu.sqrt());
        let anti = (&self.c - &self.c.adjoint()).scale(C64::new(0.0, self.hbar * self.nu / 2.0));
        let h = (&self.e + &anti).hermitian_part();
        FilterSystem { hbar: self.hbar, h, l }
    }
}

/// Counting system whose `nu -> infinity` limit is the diffusive filter of
/// `(L, H)`: `C = I + nu^(-1/2) L`, `E = H + hbar nu^(1/2) (L - L^dag) / 2i`.
pub fn central_limit_bridge(sys: &FilterSystem, nu: f64) -> Result<CountingSystem> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter { name: "nu", reason: "must be positive and finite" });
    }
    let l = sys.coupling();
    let id = Operator::identity(sys.dim());
    let c_op = &id + &l.scale_real(nu.powf(-0.5));
    let anti = (l - &l.adjoint()).scale(C64::new(0.0, -sys.hbar() * nu.sqrt() / 2.0));
    let e = (sys.hamiltonian() + &anti).hermitian_part();
    Ok(CountingSystem { hbar: sys.hbar(), e, c: c_op, nu })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    EulerMaruyama,
    /// Predictor-corrector on the drift, Euler on the noise.
    HeunDrift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub renormalize_each_step: bool,
    /// Run even when `dt * |K|` exceeds [`STABILITY_LIMIT`].
    pub force: bool,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, seed: u64) -> Result<Self> {
        let cfg = Self { dt, t_end, scheme: Scheme::EulerMaruyama, seed, renormalize_each_step: true, force: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter { name: "dt", reason: "must be positive" });
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter { name: "t_end", reason: "must be at least dt" });
        }
        Ok(())
    }

    /// Number of steps; the final time is `steps * dt`.
    pub fn steps(&self) -> usize {
        libm_round(self.t_end / self.dt) as usize
    }

    fn guard(&self, k_norm: f64) -> Result<()> {
        self.validate()?;
        let product = self.dt * k_norm;
        if product > STABILITY_LIMIT && !self.force {
            return Err(Error::StabilityGuard { product, limit: STABILITY_LIMIT });
        }
        Ok(())
    }
}

fn libm_round(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Which quantities a trajectory keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    /// Expectations `<psi|A psi> / |psi|^2` recorded at every step.
    pub observables: Vec<Operator>,
    /// Keep state snapshots every `state_stride` steps (0 disables).
    pub state_stride: usize,
}

impl Probe {
    pub fn none() -> Self {
        Self { observables: Vec::new(), state_stride: 0 }
    }

    pub fn observables(observables: Vec<Operator>) -> Self {
        Self { observables, state_stride: 0 }
    }

    pub fn with_state_stride(mut self, stride: usize) -> Self {
        self.state_stride = stride;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    /// Unnormalized `chi` of the linear equation, input measure.
    Linear,
    /// Normalized posterior, diffusive observation.
    Diffusive,
    /// Normalized posterior, counting observation.
    Counting,
}

/// One sample path `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub kind: RecordKind,
    pub index: u64,
    pub dt: f64,
    /// `steps + 1` grid points starting at 0.
    pub times: Vec<f64>,
    /// Observation increments, one per step.
    pub dy: Vec<f64>,
    /// Innovation increments, one per step.
    pub innovation: Vec<f64>,
    /// Jump flags per step (counting only, otherwise all false).
    pub jumps: Vec<bool>,
    /// `|chi|^2` at each grid point; identically one for posterior filters.
    pub norm2: Vec<f64>,
    /// `expectations[k][j]`: observable `k` at grid point `j`.
    pub expectations: Vec<Vec<C64>>,
    /// `(grid index, state)` snapshots.
    pub states: Vec<(usize, StateVector)>,
}

impl TrajectoryRecord {
    fn new(kind: RecordKind, index: u64, dt: f64, steps: usize, observables: usize) -> Self {
        Self {
            kind,
            index,
            dt,
            times: Vec::with_capacity(steps + 1),
            dy: Vec::with_capacity(steps),
            innovation: Vec::with_capacity(steps),
            jumps: Vec::with_capacity(steps),
            norm2: Vec::with_capacity(steps + 1),
            expectations: vec![Vec::with_capacity(steps + 1); observables],
            states: Vec::new(),
        }
    }

    pub fn steps(&self) -> usize {
        self.dy.len()
    }

    pub fn jump_times(&self) -> Vec<f64> {
        self.jumps.iter().enumerate().filter(|(_, j)| **j).map(|(k, _)| self.times[k + 1]).collect()
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.iter().filter(|j| **j).count()
    }

    pub fn final_norm2(&self) -> f64 {
        self.norm2.last().copied().unwrap_or(1.0)
    }

    /// Grid index of `t`, if `t` lies on the time grid.
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        let k = libm_round(t / self.dt);
        if k < 0.0 || k as usize >= self.times.len() || (k * self.dt - t).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::TimeNotOnGrid { time: t });
        }
        Ok(k as usize)
    }

    pub fn state_at(&self, t: f64) -> Result<&StateVector> {
        let k = self.grid_index(t)?;
        self.states.iter().find(|(j, _)| *j == k).map(|(_, s)| s).ok_or(Error::StatesNotRecorded)
    }

    fn observe(&mut self, step: usize, t: f64, psi: &StateVector, probe: &Probe) {
        let n2 = psi.norm2();
        self.times.push(t);
        self.norm2.push(n2);
        for (slot, a) in self.expectations.iter_mut().zip(&probe.observables) {
            slot.push(psi.inner(&a.apply_unchecked(psi)) / n2);
        }
        if probe.state_stride > 0 && step.is_multiple_of(probe.state_stride) {
            self.states.push((step, psi.clone()));
        }
    }
}

fn check_probe(dim: usize, probe: &Probe) -> Result<()> {
    for a in &probe.observables {
        if a.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: a.dim() });
        }
    }
    Ok(())
}

fn check_initial(dim: usize, psi0: &StateVector, tol: Tolerance) -> Result<()> {
    if psi0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: psi0.dim() });
    }
    psi0.ensure_normalized(tol)
}

/// Explicit step `psi <- psi + drift(psi) dt + noise(psi) dw` with optional
/// drift predictor-corrector.
fn sde_step(
    psi: &StateVector,
    scheme: Scheme,
    dt: f64,
    dw: f64,
    drift: impl Fn(&StateVector) -> StateVector,
    noise: &StateVector,
) -> StateVector {
    let a0 = drift(psi);
    let mut next = psi.clone();
    next.axpy(c(dw), noise);
    match scheme {
        Scheme::EulerMaruyama => next.axpy(c(dt), &a0),
        Scheme::HeunDrift => {
            let mut pred = next.clone();
            pred.axpy(c(dt), &a0);
            let a1 = drift(&pred);
            next.axpy(c(0.5 * dt), &a0);
            next.axpy(c(0.5 * dt), &a1);
        }
    }
    next
}

/// Precomputed operators of a diffusive model.
#[derive(Debug, Clone)]
pub struct DiffusiveStepper {
    k: Operator,
    l: Operator,
    scheme: Scheme,
    dt: f64,
}

impl DiffusiveStepper {
    pub fn new(sys: &FilterSystem, cfg: &IntegratorConfig) -> Result<Self> {
        let k = sys.k();
        cfg.guard(spectral_norm(&k))?;
        Ok(Self { k, l: sys.coupling().clone(), scheme: cfg.scheme, dt: cfg.dt })
    }

    /// `r = Re <psi|L psi>` for normalized `psi`.
    pub fn mean_coupling(&self, psi: &StateVector) -> f64 {
        psi.inner(&self.l.apply_unchecked(psi)).re
    }

    /// Linear equation `d chi = -K chi dt + L chi dy`.
    pub fn linear_step(&self, chi: &StateVector, dy: f64) -> StateVector {
        let noise = self.l.apply_unchecked(chi);
        let k = &self.k;
        sde_step(chi, self.scheme, self.dt, dy, |x| k.apply_unchecked(x).scaled(c(-1.0)), &noise)
    }

    /// Posterior equation `d psi = -K~ psi dt + L~ psi dy~` with
    /// `L~ = L - r`, `K~ = K - r L + r^2/2` and `r = Re <L>` frozen over the
    /// step. Returns the unnormalized update.
    pub fn filter_step(&self, psi: &StateVector, r: f64, innovation: f64) -> StateVector {
        let l_psi = self.l.apply_unchecked(psi);
        let mut noise = l_psi;
        noise.axpy(c(-r), psi);
        let (k, l) = (&self.k, &self.l);
        let drift = |x: &StateVector| {
            let mut out = k.apply_unchecked(x).scaled(c(-1.0));
            out.axpy(c(r), &l.apply_unchecked(x));
            out.axpy(c(-0.5 * r * r), x);
            out
        };
        sde_step(psi, self.scheme, self.dt, innovation, drift, &noise)
    }
}

/// Integrates `d chi + K chi dt = L chi dy` under the input measure
/// (`dy ~ N(0, dt)`); `chi` is never renormalized.
pub fn simulate_linear_diffusive(
    sys: &FilterSystem,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
    probe: &Probe,
    index: u64,
) -> Result<TrajectoryRecord> {
    let tol = Tolerance::default();
    check_initial(sys.dim(), psi0, Tolerance::new(1e-9)?)?;
    check_probe(sys.dim(), probe)?;
    let stepper = DiffusiveStepper::new(sys, cfg)?;
    let mut rng = TrajectoryRng::stream(cfg.seed, index);
    let steps = cfg.steps();
    let mut rec = TrajectoryRecord::new(RecordKind::Linear, index, cfg.dt, steps, probe.observables.len());
    let mut chi = psi0.clone();
    rec.observe(0, 0.0, &chi, probe);
    for n in 0..steps {
        let dy = rng.wiener_increment(cfg.dt);
        chi = stepper.linear_step(&chi, dy);
        let norm2 = chi.norm2();
        if !(norm2 > tol.abs()) || !norm2.is_finite() {
            return Err(Error::Annihilated { norm: norm2.sqrt(), time: (n + 1) as f64 * cfg.dt });
        }
        rec.dy.push(dy);
        rec.innovation.push(dy);
        rec.jumps.push(false);
        rec.observe(n + 1, (n + 1) as f64 * cfg.dt, &chi, probe);
    }
    Ok(rec)
}

/// Nonlinear posterior filter driven by a standard Wiener innovation
/// (output measure). The observation increment is `dy = 2 Re<L> dt + dy~`.
pub fn simulate_filter_diffusive(
    sys: &FilterSystem,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
    probe: &Probe,
    index: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = TrajectoryRng::stream(cfg.seed, index);
    let dt = cfg.dt;
    drive_filter_diffusive(sys, psi0, cfg, probe, index, |_| rng.wiener_increment(dt))
}

/// Posterior filter fed by externally supplied innovation increments.
pub fn drive_filter_diffusive(
    sys: &FilterSystem,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
    probe: &Probe,
    index: u64,
    mut innovation: impl FnMut(usize) -> f64,
) -> Result<TrajectoryRecord> {
    check_initial(sys.dim(), psi0, Tolerance::new(1e-9)?)?;
    check_probe(sys.dim(), probe)?;
    let stepper = DiffusiveStepper::new(sys, cfg)?;
    let steps = cfg.steps();
    let mut rec = TrajectoryRecord::new(RecordKind::Diffusive, index, cfg.dt, steps, probe.observables.len());
    let mut psi = psi0.clone();
    rec.observe(0, 0.0, &psi, probe);
    for n in 0..steps {
        let r = stepper.mean_coupling(&psi);
        let d_inn = innovation(n);
        psi = stepper.filter_step(&psi, r, d_inn);
        if cfg.renormalize_each_step {
            let norm = psi.normalize_in_place();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Annihilated { norm, time: (n + 1) as f64 * cfg.dt });
            }
        }
        rec.dy.push(2.0 * r * cfg.dt + d_inn);
        rec.innovation.push(d_inn);
        rec.jumps.push(false);
        rec.observe(n + 1, (n + 1) as f64 * cfg.dt, &psi, probe);
    }
    Ok(rec)
}

#[derive(Debug, Clone)]
struct CountingStepper {
    c: Operator,
    ctc: Operator,
    e_gen: Operator,
    nu: f64,
}

impl CountingStepper {
    fn new(sys: &CountingSystem, cfg: &IntegratorConfig) -> Result<Self> {
        let ctc = &sys.c.adjoint() * &sys.c;
        let e_gen = sys.e.scale(C64::new(0.0, 1.0 / sys.hbar));
        let k_norm = spectral_norm(&(&ctc.scale_real(sys.nu / 2.0) + &e_gen));
        cfg.guard(k_norm)?;
        Ok(Self { c: sys.c.clone(), ctc, e_gen, nu: sys.nu })
    }

    /// Smooth part `-(nu/2 (C^dag C - |C psi|^2) + (i/hbar) E) psi`.
    fn drift(&self, psi: &StateVector, c_norm2: f64) -> StateVector {
        let mut out = self.ctc.apply_unchecked(psi).scaled(c(-self.nu / 2.0));
        out.axpy(c(self.nu / 2.0 * c_norm2), psi);
        out.axpy(c(-1.0), &self.e_gen.apply_unchecked(psi));
        out
    }
}

/// Counting posterior filter sampled by thinning.
///
/// Each step integrates the smooth drift, then jumps with probability
/// `nu |C psi|^2 dt` evaluated at the pre-step state; steps where that
/// probability exceeds [`JUMP_LIMIT`] are refused. A jump applies `C` to the
/// drifted state, and the result is renormalized. Skipping the drift on jump
/// steps would bias the no-jump evidence by a relative `O(nu dt)`.
pub fn simulate_filter_counting(
    sys: &CountingSystem,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
    probe: &Probe,
    index: u64,
) -> Result<TrajectoryRecord> {
    let tol = Tolerance::default();
    check_initial(sys.dim(), psi0, Tolerance::new(1e-9)?)?;
    check_probe(sys.dim(), probe)?;
    let stepper = CountingStepper::new(sys, cfg)?;
    let mut rng = TrajectoryRng::stream(cfg.seed, index);
    let steps = cfg.steps();
    let dt = cfg.dt;
    let sqrt_nu = sys.nu.sqrt();
    let mut rec = TrajectoryRecord::new(RecordKind::Counting, index, dt, steps, probe.observables.len());
    let mut psi = psi0.clone();
    rec.observe(0, 0.0, &psi, probe);
    for n in 0..steps {
        let t_next = (n + 1) as f64 * dt;
        let c_psi = stepper.c.apply_unchecked(&psi);
        let c_norm2 = c_psi.norm2();
        let p = sys.nu * c_norm2 * dt;
        if p > JUMP_LIMIT {
            return Err(Error::JumpRateTooLarge { probability: p, limit: JUMP_LIMIT });
        }
        let jump = rng.uniform() < p;
        let c_norm = c_norm2.sqrt();
        let st = &stepper;
        let zero = StateVector::zeros(psi.dim());
        let mut next = sde_step(&psi, cfg.scheme, dt, 0.0, |x| st.drift(x, c_norm2), &zero);
        if jump {
            if c_norm <= tol.abs() {
                return Err(Error::Annihilated { norm: c_norm, time: t_next });
            }
            next = stepper.c.apply_unchecked(&next);
        }
        let norm = next.normalize_in_place();
        if !(norm > tol.abs()) {
            return Err(Error::Annihilated { norm, time: t_next });
        }
        psi = next;
        let dn = if jump { 1.0 } else { 0.0 };
        let innovation = if c_norm > 0.0 { dn / (sqrt_nu * c_norm) } else { 0.0 } - sqrt_nu * c_norm * dt;
        rec.dy.push((dn - sys.nu * dt) / sqrt_nu);
        rec.innovation.push(innovation);
        rec.jumps.push(jump);
        rec.observe(n + 1, t_next, &psi, probe);
    }
    Ok(rec)
}

/// A counting trajectory of the bridge system together with the diffusive
/// posterior of `(L, H)` driven by the same innovation path.
#[derive(Debug, Clone)]
pub struct CoupledBridge {
    pub counting: TrajectoryRecord,
    pub diffusive: TrajectoryRecord,
}

pub fn simulate_bridge_coupled(
    diffusive: &FilterSystem,
    nu: f64,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
    probe: &Probe,
    index: u64,
) -> Result<CoupledBridge> {
    let bridge = central_limit_bridge(diffusive, nu)?;
    let counting = simulate_filter_counting(&bridge, psi0, cfg, probe, index)?;
    let innovations = counting.innovation.clone();
    let diffusive = drive_filter_diffusive(diffusive, psi0, cfg, probe, index, |n| innovations[n])?;
    Ok(CoupledBridge { counting, diffusive })
}

/// Deterministic density trajectory of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    pub min_eigenvalue: f64,
    pub max_trace_error: f64,
}

impl MasterTrajectory {
    pub fn at(&self, t: f64) -> Result<&Operator> {
        let k = libm_round(t / self.dt);
        let idx = k as usize;
        if k < 0.0 || idx >= self.times.len() || (k * self.dt - t).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::TimeNotOnGrid { time: t });
        }
        Ok(&self.states[idx])
    }

    pub fn last(&self) -> &Operator {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Fourth-order Runge-Kutta for `d rho/dt + K rho + rho K^dag = L rho L^dag`.
/// Positivity is checked at every grid point.
pub fn master_equation_evolve(
    sys: &FilterSystem,
    rho0: &DensityOperator,
    dt: f64,
    t_end: f64,
    tol: Tolerance,
) -> Result<MasterTrajectory> {
    if rho0.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: rho0.dim() });
    }
    let cfg = IntegratorConfig { force: true, ..IntegratorConfig::new(dt, t_end, 0)? };
    let steps = cfg.steps();
    let mut rho = rho0.op().clone();
    let mut traj = MasterTrajectory {
        dt,
        times: vec![0.0],
        states: vec![rho.clone()],
        min_eigenvalue: hermitian_eigen(&rho).min_value(),
        max_trace_error: 0.0,
    };
    let add = |a: &Operator, b: &Operator, s: f64| a + &b.scale_real(s);
    for n in 0..steps {
        let k1 = sys.lindblad(&rho);
        let k2 = sys.lindblad(&add(&rho, &k1, dt / 2.0));
        let k3 = sys.lindblad(&add(&rho, &k2, dt / 2.0));
        let k4 = sys.lindblad(&add(&rho, &k3, dt));
        let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        rho = add(&rho, &incr, dt / 6.0).hermitian_part();
        let t = (n + 1) as f64 * dt;
        let min = hermitian_eigen(&rho).min_value();
        if min < -tol.abs() {
            return Err(Error::PositivityViolated { min_eigenvalue: min, time: t });
        }
        traj.min_eigenvalue = traj.min_eigenvalue.min(min);
        traj.max_trace_error = traj.max_trace_error.max((rho.trace().re - 1.0).abs());
        traj.times.push(t);
        traj.states.push(rho.clone());
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Plain average of `P_psi` over posterior trajectories.
    OutputMeasure,
    /// `|chi|^2`-weighted average of `P_{chi/|chi|}` over linear trajectories.
    InputMeasureWeighted,
}

/// Running sum for ensemble averages. Merging is associative, so partial
/// sums from different workers combine in any grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    weighting: Weighting,
    sum: Operator,
    weight: f64,
    count: usize,
}

impl EnsembleAccumulator {
    pub fn new(dim: usize, weighting: Weighting) -> Self {
        Self { weighting, sum: Operator::zeros(dim), weight: 0.0, count: 0 }
    }

    pub fn add_state(&mut self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.sum.dim() {
            return Err(Error::DimensionMismatch { expected: self.sum.dim(), found: psi.dim() });
        }
        let n2 = psi.norm2();
        let (w, scale) = match self.weighting {
            Weighting::OutputMeasure => (1.0, 1.0 / n2),
            Weighting::InputMeasureWeighted => (n2, 1.0),
        };
        self.sum = &self.sum + &Operator::outer(psi, psi).scale_real(scale);
        self.weight += w;
        self.count += 1;
        Ok(())
    }

    pub fn merge(mut self, other: &EnsembleAccumulator) -> Result<Self> {
        if self.weighting != other.weighting {
            return Err(Error::GridMismatch);
        }
        self.sum = self.sum.try_add(&other.sum)?;
        self.weight += other.weight;
        self.count += other.count;
        Ok(self)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn total_weight(&self) -> f64 {
        self.weight
    }

    /// Self-normalized estimate of `rho(t)`.
    pub fn density(&self) -> Result<DensityOperator> {
        if self.count == 0 || !(self.weight > 0.0) {
            return Err(Error::EmptyEnsemble);
        }
        Ok(DensityOperator::new_unchecked(self.sum.scale_real(1.0 / self.weight).hermitian_part()))
    }
}

/// `rho(t) = integral P_psi(t) Pr(t, d omega)` estimated from records.
pub fn ensemble_average(records: &[TrajectoryRecord], t: f64, weighting: Weighting) -> Result<DensityOperator> {
    let first = records.first().ok_or(Error::EmptyEnsemble)?;
    let mut acc = EnsembleAccumulator::new(first.states.first().map_or(0, |s| s.1.dim()), weighting);
    for rec in records {
        if rec.dt != first.dt || rec.times.len() != first.times.len() {
            return Err(Error::GridMismatch);
        }
        acc.add_state(rec.state_at(t)?)?;
    }
    acc.density()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{sigma_x, sigma_z, trace_distance};

    fn plus() -> StateVector {
        let h = 0.5f64.sqrt();
        StateVector::from_real(&[h, h]).unwrap()
    }

    fn dephasing(gamma: f64) -> FilterSystem {
        FilterSystem::new(1.0, Operator::zeros(2), sigma_z().scale_real(gamma.sqrt()), Tolerance::default()).unwrap()
    }

    #[test]
    fn generator_identity() {
        let sys = dephasing(0.7);
        assert!(sys.generator_deviation() < 1e-15);
        let bad_k = &sys.k() + &Operator::identity(2).scale_real(1e-6);
        assert!(matches!(
            FilterSystem::from_generator(1.0, bad_k, sys.coupling().clone()),
            Err(Error::GeneratorMismatch { .. })
        ));
        let back = FilterSystem::from_generator(1.0, sys.k(), sys.coupling().clone()).unwrap();
        assert!(back.hamiltonian().max_abs() < 1e-15);
    }

    #[test]
    fn schrodinger_limit_preserves_norm() {
        let h = sigma_x();
        let sys = FilterSystem::new(1.0, h, Operator::zeros(2), Tolerance::default()).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 1.0, 5).unwrap().with_scheme(Scheme::HeunDrift);
        let rec = simulate_linear_diffusive(&sys, &plus(), &cfg, &Probe::none(), 0).unwrap();
        assert!((rec.final_norm2() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn eigenstate_of_hermitian_coupling_is_frozen() {
        let sys = dephasing(1.0);
        let cfg = IntegratorConfig::new(1e-3, 0.5, 9).unwrap();
        let up = StateVector::basis(2, 0);
        let probe = Probe::none().with_state_stride(500);
        let rec = simulate_filter_diffusive(&sys, &up, &cfg, &probe, 3).unwrap();
        assert!(rec.state_at(0.5).unwrap().max_abs_diff(&up) < 1e-12);
    }

    #[test]
    fn filter_keeps_unit_norm() {
        let sys = dephasing(1.0);
        let cfg = IntegratorConfig::new(1e-3, 1.0, 1).unwrap();
        let rec = simulate_filter_diffusive(&sys, &plus(), &cfg, &Probe::none(), 0).unwrap();
        assert!(rec.norm2.iter().all(|n| (n.sqrt() - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn stability_guard_refuses_large_steps() {
        let sys = dephasing(20.0);
        let cfg = IntegratorConfig::new(0.02, 1.0, 1).unwrap();
        assert!(matches!(
            simulate_linear_diffusive(&sys, &plus(), &cfg, &Probe::none(), 0),
            Err(Error::StabilityGuard { .. })
        ));
        let forced = IntegratorConfig { force: true, ..cfg };
        assert!(!matches!(
            simulate_linear_diffusive(&sys, &plus(), &forced, &Probe::none(), 0),
            Err(Error::StabilityGuard { .. })
        ));
    }

    #[test]
    fn counting_identity_collapse_changes_nothing() {
        let sys =
            CountingSystem::new(1.0, Operator::zeros(2), Operator::identity(2), 5.0, Tolerance::default()).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 2.0, 4).unwrap();
        let probe = Probe::none().with_state_stride(1);
        let rec = simulate_filter_counting(&sys, &plus(), &cfg, &probe, 0).unwrap();
        assert!(rec.jump_count() > 0);
        assert!(rec.states.iter().all(|(_, s)| s.max_abs_diff(&plus()) < 1e-12));
    }

    #[test]
    fn counting_sigma_x_alternates() {
        let sys = CountingSystem::new(1.0, Operator::zeros(2), sigma_x(), 5.0, Tolerance::default()).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 4.0, 8).unwrap();
        let probe = Probe::observables(vec![sigma_z()]);
        let rec = simulate_filter_counting(&sys, &StateVector::basis(2, 0), &cfg, &probe, 2).unwrap();
        let mut expected = 1.0;
        for (k, jump) in rec.jumps.iter().enumerate() {
            if *jump {
                expected = -expected;
            }
            assert!((rec.expectations[0][k + 1].re - expected).abs() < 1e-12);
        }
        assert!(rec.jump_count() >= 2);
    }

    #[test]
    fn counting_refuses_high_jump_probability() {
        let sys = CountingSystem::new(1.0, Operator::zeros(2), sigma_x(), 500.0, Tolerance::default()).unwrap();
        let cfg = IntegratorConfig { force: true, ..IntegratorConfig::new(1e-3, 1.0, 8).unwrap() };
        assert!(matches!(
            simulate_filter_counting(&sys, &plus(), &cfg, &Probe::none(), 0),
            Err(Error::JumpRateTooLarge { .. })
        ));
    }

    #[test]
    fn counting_annihilation_is_reported() {
        let lower = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let sys = CountingSystem::new(1.0, Operator::zeros(2), lower, 1.0, Tolerance::default()).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 1.0, 0).unwrap();
        let rec = simulate_filter_counting(&sys, &StateVector::basis(2, 0), &cfg, &Probe::none(), 0).unwrap();
        // |C psi| = 0 means the jump probability is zero: no jump is ever proposed.
        assert_eq!(rec.jump_count(), 0);
    }

    #[test]
    fn bridge_examples() {
        let sys = dephasing(1.0);
        let bridge = central_limit_bridge(&sys, 100.0).unwrap();
        assert!(bridge.energy().max_abs_diff(sys.hamiltonian()) == 0.0);

        let l = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let sys = FilterSystem::new(1.0, sigma_z(), l, Tolerance::default()).unwrap();
        for nu in [1.0, 1e2, 1e4, 1e6] {
            let induced = central_limit_bridge(&sys, nu).unwrap().induced();
            assert!(induced.generator_deviation() < 1e-10);
            assert!(induced.coupling().max_abs_diff(sys.coupling()) < 1e-9);
            assert!(induced.hamiltonian().max_abs_diff(sys.hamiltonian()) < 1e-8 * nu.sqrt().max(1.0));
        }
    }

    #[test]
    fn master_equation_examples() {
        let tol = Tolerance::default();
        let stationary = DensityOperator::new(Operator::from_real_diag(&[0.25, 0.75]), tol).unwrap();
        let sys = FilterSystem::new(1.0, sigma_z(), Operator::zeros(2), tol).unwrap();
        let traj = master_equation_evolve(&sys, &stationary, 1e-2, 1.0, tol).unwrap();
        assert!(traj.last().max_abs_diff(stationary.op()) < 1e-14);

        let gamma = 0.8;
        let rho0 = DensityOperator::pure(&plus()).unwrap();
        let traj = master_equation_evolve(&dephasing(gamma), &rho0, 1e-3, 1.0, tol).unwrap();
        let want = 0.5 * (-2.0 * gamma).exp();
        assert!((traj.at(1.0).unwrap().get(0, 1).re - want).abs() / want < 1e-9);
        assert!(traj.max_trace_error < 1e-12);
    }

    #[test]
    fn single_record_ensemble_is_its_projector() {
        let sys = dephasing(1.0);
        let cfg = IntegratorConfig::new(1e-3, 0.2, 3).unwrap();
        let probe = Probe::none().with_state_stride(100);
        let rec = simulate_filter_diffusive(&sys, &plus(), &cfg, &probe, 0).unwrap();
        let psi = rec.state_at(0.2).unwrap().clone();
        let rho = ensemble_average(core::slice::from_ref(&rec), 0.2, Weighting::OutputMeasure).unwrap();
        assert!(rho.op().max_abs_diff(&Operator::projector_onto(&psi).unwrap()) < 1e-14);
        assert!(matches!(ensemble_average(&[], 0.2, Weighting::OutputMeasure), Err(Error::EmptyEnsemble)));
        assert!(matches!(
            ensemble_average(core::slice::from_ref(&rec), 0.15, Weighting::OutputMeasure),
            Err(Error::StatesNotRecorded)
        ));
    }

    #[test]
    fn small_ensemble_tracks_master_equation() {
        let sys = dephasing(1.0);
        let cfg = IntegratorConfig::new(1e-3, 0.5, 77).unwrap();
        let probe = Probe::none().with_state_stride(500);
        let records: Vec<_> =
            (0..400).map(|k| simulate_filter_diffusive(&sys, &plus(), &cfg, &probe, k).unwrap()).collect();
        let avg = ensemble_average(&records, 0.5, Weighting::OutputMeasure).unwrap();
        let rho0 = DensityOperator::pure(&plus()).unwrap();
        let master = master_equation_evolve(&sys, &rho0, 1e-3, 0.5, Tolerance::default()).unwrap();
        assert!(trace_distance(avg.op(), master.last()).unwrap() < 0.06);
    }
}
