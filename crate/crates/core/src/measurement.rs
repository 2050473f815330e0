//! Instantaneous measurement models.
//!
//! Two-level "atom" coupled to a two-state pointer (the cat), decoherence to
//! block-diagonal states, Bayes conditioning, the projection postulate and
//! Lüders selection, generalized instruments `V(y)` and nondemolition checks.
//! Pointer systems are always the second tensor factor; the basis index of
//! `|σ, τ>` is `2σ + τ`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::operator::{commutator, DensityOperator, Operator, StateVector, Tolerance};
use crate::C64;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Permutation unitary `U[ψ⊗φ](σ, τ) = ψ(σ) φ(τ xor σ)`.
pub fn cat_unitary() -> Operator {
    // (U chi)(s, t) = chi(s, t ^ s): row (s, t) picks column (s, t ^ s)
    Operator::from_fn(4, |row, col| {
        let (s, t) = (row / 2, row % 2);
        if col == 2 * s + (t ^ s) {
            C64::new(1.0, 0.0)
        } else {
            zero()
        }
    })
}

/// Atom state and the pointer initialized to `δ_0` (cat alive).
#[derive(Debug, Clone, PartialEq)]
pub struct CatSystem {
    atom: StateVector,
}

impl CatSystem {
    pub fn new(atom: StateVector, tol: Tolerance) -> Result<Self> {
        if atom.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: atom.dim() });
        }
        atom.ensure_normalized(tol)?;
        Ok(Self { atom })
    }

    pub fn atom(&self) -> &StateVector {
        &self.atom
    }

    pub fn initial_joint(&self) -> StateVector {
        self.atom.kron(&StateVector::basis(2, 0))
    }

    pub fn interact(&self) -> StateVector {
        cat_unitary().apply_unchecked(&self.initial_joint())
    }
}

/// `χ(σ, τ) = ψ(σ) δ(τ xor σ)`: the entangled atom-pointer state.
pub fn cat_interact(psi: &StateVector, tol: Tolerance) -> Result<StateVector> {
    Ok(CatSystem::new(psi.clone(), tol)?.interact())
}

/// Schmidt weights of `χ` across the atom/pointer cut.
pub fn schmidt_weights(chi: &StateVector) -> Result<Vec<f64>> {
    if chi.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: chi.dim() });
    }
    let joint = Operator::outer(chi, chi);
    let reduced = crate::operator::partial_trace_second_op(&joint, 2, 2)?;
    Ok(crate::linalg::hermitian_eigen(&reduced).values().to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decohered {
    /// `Σ_τ Pr(τ) P_δτ ⊗ P_δτ`
    pub joint: DensityOperator,
    /// `Σ_τ Pr(τ) P_δτ`
    pub atom: DensityOperator,
    pub probabilities: [f64; 2],
}

/// Replaces the entangled `χ` by the block-diagonal mixture over pointer
/// readings. Fails unless `χ(σ, τ) = 0` for `σ ≠ τ` within `tol`.
pub fn decohere(chi: &StateVector, tol: Tolerance) -> Result<Decohered> {
    if chi.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: chi.dim() });
    }
    let a = chi.amplitudes();
    let off = a[1].norm().max(a[2].norm());
    if off > tol.abs() {
        return Err(Error::NotBlockSupported { amplitude: off });
    }
    let probabilities = [a[0].norm_sqr(), a[3].norm_sqr()];
    let joint = Operator::from_real_diag(&[probabilities[0], 0.0, 0.0, probabilities[1]]);
    let atom = Operator::from_real_diag(&probabilities);
    Ok(Decohered {
        joint: DensityOperator::new_unchecked(joint),
        atom: DensityOperator::new_unchecked(atom),
        probabilities,
    })
}

/// Subnormalized conditional family `ϱ(τ) = Pr(τ) P_δτ` of the cat model.
pub fn cat_conditional_family(psi: &StateVector) -> Result<Vec<Operator>> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: psi.dim() });
    }
    Ok((0..2)
        .map(|tau| {
            let mut d = [0.0; 2];
            d[tau] = psi.amplitudes()[tau].norm_sqr();
            Operator::from_real_diag(&d)
        })
        .collect())
}

/// Bayes rule `ρ_τ = ϱ(τ) / Pr(τ)` with `Pr(τ) = Tr ϱ(τ)`.
pub fn bayes_condition(family: &[Operator], outcome: usize, tol: Tolerance) -> Result<DensityOperator> {
    let slice =
        family.get(outcome).ok_or(Error::InvalidParameter { name: "outcome", reason: "not in the outcome family" })?;
    let probability = slice.trace().re;
    if !(probability > tol.abs()) {
        return Err(Error::ZeroProbability { probability });
    }
    DensityOperator::new(slice.scale_real(1.0 / probability), Tolerance::new(tol.abs().max(1e-9))?)
}

/// Decoherence `ρ ↦ EρE + FρF` with `E = I - F`.
pub fn project_postulate(rho: &DensityOperator, f: &Operator, tol: Tolerance) -> Result<DensityOperator> {
    f.ensure_projector(tol)?;
    let e = &Operator::identity(f.dim()) - f;
    let r = rho.op();
    let out = (&(&e * r) * &e).try_add(&(&(f * r) * f))?;
    Ok(DensityOperator::new_unchecked(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LudersOutcome {
    /// `E = I - F` observed.
    Complement,
    /// `F` observed.
    Selected,
}

/// Lüders selection: `ψ ↦ Fψ / |Fψ|` (or with `E = I - F`).
pub fn luders_update(psi: &StateVector, f: &Operator, outcome: LudersOutcome, tol: Tolerance) -> Result<StateVector> {
    f.ensure_projector(tol)?;
    let branch = match outcome {
        LudersOutcome::Selected => f.clone(),
        LudersOutcome::Complement => &Operator::identity(f.dim()) - f,
    };
    let projected = branch.apply(psi)?;
    let norm2 = projected.norm2();
    if !(norm2 > tol.abs()) {
        return Err(Error::ZeroProbability { probability: norm2 });
    }
    projected.normalized()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentOutcome {
    pub label: String,
    /// Measure weight `μ(y)`.
    pub weight: f64,
    pub kraus: Operator,
}

/// Finite (or quadrature-sampled) instrument with `Σ_y V(y)^† V(y) μ(y) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    outcomes: Vec<InstrumentOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub label: String,
    /// `f(y) μ(y) = |V(y)ψ|² μ(y)`
    pub probability: f64,
    pub posterior: StateVector,
}

impl Instrument {
    pub fn new(outcomes: Vec<InstrumentOutcome>, tol: Tolerance) -> Result<Self> {
        let first = outcomes.first().ok_or(Error::EmptyEnsemble)?;
        let n = first.kraus.dim();
        let mut total = Operator::zeros(n);
        for o in &outcomes {
            if !(o.weight >= 0.0) || !o.weight.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "measure weight",
                    reason: "must be finite and nonnegative",
                });
            }
            let effect = &o.kraus.adjoint() * &o.kraus;
            total = total.try_add(&effect.scale_real(o.weight))?;
        }
        let deviation = total.max_abs_diff(&Operator::identity(n));
        if deviation > tol.abs() {
            return Err(Error::IncompleteInstrument { deviation });
        }
        Ok(Self { outcomes })
    }

    /// Projection-valued instrument `V(τ) = E(τ)` with counting measure.
    pub fn projective(projectors: Vec<(String, Operator)>, tol: Tolerance) -> Result<Self> {
        for (_, p) in &projectors {
            p.ensure_projector(tol)?;
        }
        Self::new(
            projectors.into_iter().map(|(label, kraus)| InstrumentOutcome { label, weight: 1.0, kraus }).collect(),
            tol,
        )
    }

    pub fn outcomes(&self) -> &[InstrumentOutcome] {
        &self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].kraus.dim()
    }

    /// Outcome probabilities `|V(y)ψ|² μ(y)`.
    pub fn weights(&self, psi: &StateVector) -> Result<Vec<f64>> {
        self.outcomes.iter().map(|o| Ok(o.kraus.apply(psi)?.norm2() * o.weight)).collect()
    }

    /// Unselected post-measurement density `Σ_y μ(y) V(y) P_ψ V(y)^†`.
    pub fn mixture(&self, psi: &StateVector) -> Result<DensityOperator> {
        let mut rho = Operator::zeros(self.dim());
        for o in &self.outcomes {
            let v_psi = o.kraus.apply(psi)?;
            rho = &rho + &Operator::outer(&v_psi, &v_psi).scale_real(o.weight);
        }
        Ok(DensityOperator::new_unchecked(rho))
    }

    /// Samples an outcome by inversion of the cumulative weights with the
    /// uniform draw `u` in `[0, 1)`.
    pub fn apply(&self, psi: &StateVector, u: f64, tol: Tolerance) -> Result<MeasurementOutcome> {
        psi.ensure_normalized(tol)?;
        let weights = self.weights(psi)?;
        let total: f64 = weights.iter().sum();
        if !(total > tol.abs()) {
            return Err(Error::ZeroProbability { probability: total });
        }
        let target = u.clamp(0.0, 1.0) * total;
        let mut acc = 0.0;
        let mut index = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc && *w > 0.0 {
                index = k;
                break;
            }
        }
        let chosen = &self.outcomes[index];
        let posterior = chosen.kraus.apply(psi)?.normalized()?;
        Ok(MeasurementOutcome { index, label: chosen.label.clone(), probability: weights[index], posterior })
    }
}

/// Free-function form of [`Instrument::apply`].
pub fn instrument_apply(inst: &Instrument, psi: &StateVector, u: f64, tol: Tolerance) -> Result<MeasurementOutcome> {
    inst.apply(psi, u, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondemolitionReport {
    /// `[F ⊗ I, G] χ_0 = 0` for every `χ_0 = ψ ⊗ δ_0`.
    pub commutes_on_initial: bool,
    pub max_violation: f64,
    /// `X_0 = Σ_τ E(τ) F E(τ)`
    pub x0: Operator,
    /// `Y_0 = Σ_τ g(τ) E(τ)`
    pub y0: Operator,
    pub reduced_commute: bool,
}

/// Pointer observable `G` = multiplication by `g(σ + τ mod 2)` on the joint
/// space, checked against `F ⊗ I` on product initial states. The states
/// `ψ ⊗ δ_0` span `{|00>, |10>}`, so the commutator is tested on that basis.
pub fn nondemolition_check(f: &Operator, g: [f64; 2], tol: Tolerance) -> Result<NondemolitionReport> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: f.dim() });
    }
    let big_g = Operator::from_real_diag(&[g[0], g[1], g[1], g[0]]);
    let lifted = f.kron(&Operator::identity(2));
    let comm = commutator(&lifted, &big_g)?;
    let max_violation = [StateVector::basis(4, 0), StateVector::basis(4, 2)]
        .iter()
        .map(|chi0| comm.apply_unchecked(chi0).norm())
        .fold(0.0, f64::max);

    let projectors = [Operator::from_real_diag(&[1.0, 0.0]), Operator::from_real_diag(&[0.0, 1.0])];
    let mut x0 = Operator::zeros(2);
    let mut y0 = Operator::zeros(2);
    for (tau, e) in projectors.iter().enumerate() {
        x0 = &x0 + &(&(e * f) * e);
        y0 = &y0 + &e.scale_real(g[tau]);
    }
    let reduced_commute = commutator(&x0, &y0)?.max_abs() <= tol.abs();
    Ok(NondemolitionReport { commutes_on_initial: max_violation <= tol.abs(), max_violation, x0, y0, reduced_commute })
}

/// Binary entropy `-p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}
