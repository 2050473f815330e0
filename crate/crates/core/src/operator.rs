//! Dense complex operators, state vectors and density operators on a
//! finite-dimensional Hilbert space, together with the state functional
//! `<A> = Tr(A rho)`, dispersions, commutators, partial traces and the von
//! Neumann entropy.
//!
//! Matrices are stored row-major. Dimensions are small (qubits, truncated
//! oscillators, position grids of a few hundred points), so every operation
//! is a plain dense loop.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::C64;

/// Absolute tolerance used by every predicate check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs_tol: f64,
}

impl Tolerance {
    pub const DEFAULT_ABS: f64 = 1e-10;

    pub fn new(abs_tol: f64) -> Result<Self> {
        if !(abs_tol >= 0.0) || !abs_tol.is_finite() {
            return Err(Error::InvalidParameter { name: "tolerance", reason: "must be a finite nonnegative number" });
        }
        Ok(Self { abs_tol })
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.abs_tol
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: Self::DEFAULT_ABS }
    }
}

/// A complex state vector. Normalization is not enforced: the linear
/// decoherence equation propagates unnormalized amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyDimension);
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `|k>`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amps: vec![C64::new(0.0, 0.0); dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm2(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// Returns `psi / |psi|`; fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized { norm2: n * n });
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Rescales in place and returns the norm before rescaling.
    pub fn normalize_in_place(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
        n
    }

    pub fn is_normalized(&self, tol: Tolerance) -> bool {
        (self.norm2() - 1.0).abs() <= tol.abs()
    }

    pub fn ensure_normalized(&self, tol: Tolerance) -> Result<()> {
        if self.is_normalized(tol) {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm2: self.norm2() })
        }
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { amps: self.amps.iter().map(|a| a * s).collect() }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &StateVector) {
        assert_eq!(self.dim(), other.dim(), "axpy dimension mismatch");
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += s * b;
        }
    }

    /// Tensor product `self ⊗ other`, first factor major.
    pub fn kron(&self, other: &StateVector) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    /// Builds an operator from `dim * dim` row-major entries.
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_rows(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (k, d) in diag.iter().enumerate() {
            op.data[k * op.dim + k] = *d;
        }
        op
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// `|a><b|`
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        let n = a.dim();
        assert_eq!(n, b.dim(), "outer product dimension mismatch");
        Self::from_fn(n, |i, j| a.amplitudes()[i] * b.amplitudes()[j].conj())
    }

    /// Orthoprojector `P_psi` onto the line through `psi` (any nonzero norm).
    pub fn projector_onto(psi: &StateVector) -> Result<Self> {
        let unit = psi.normalized()?;
        Ok(Self::outer(&unit, &unit))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.matmul(other))
    }

    fn zip_with(&self, other: &Operator, f: impl Fn(C64, C64) -> C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect() }
    }

    fn matmul(&self, other: &Operator) -> Self {
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// Matrix-vector product `A psi`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi.dim() });
        }
        Ok(self.apply_unchecked(psi))
    }

    pub(crate) fn apply_unchecked(&self, psi: &StateVector) -> StateVector {
        let n = self.dim;
        let x = psi.amplitudes();
        let amps = (0..n).map(|i| self.data[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum()).collect();
        StateVector { amps }
    }

    /// `<psi|A|psi>`
    pub fn sandwich(&self, psi: &StateVector) -> Result<C64> {
        let a_psi = self.apply(psi)?;
        Ok(psi.inner(&a_psi))
    }

    /// Kronecker product `self ⊗ other`, first factor major.
    pub fn kron(&self, other: &Operator) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| self.get(r / m, c / m) * other.get(r % m, c % m))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: Tolerance) -> bool {
        self.hermiticity_deviation() <= tol.abs()
    }

    pub fn projector_deviation(&self) -> f64 {
        let sq = self.matmul(self);
        self.hermiticity_deviation().max(sq.max_abs_diff(self))
    }

    pub fn is_projector(&self, tol: Tolerance) -> bool {
        self.projector_deviation() <= tol.abs()
    }

    pub fn ensure_hermitian(&self, tol: Tolerance) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol.abs() {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn ensure_projector(&self, tol: Tolerance) -> Result<()> {
        let deviation = self.projector_deviation();
        if deviation > tol.abs() {
            return Err(Error::NotProjector { deviation });
        }
        Ok(())
    }

    /// `(A + A^dag) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        self.matmul(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Pauli matrices.
pub fn sigma_x() -> Operator {
    Operator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn sigma_y() -> Operator {
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    Operator::from_rows(2, vec![z, -i, i, z]).unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::from_real_diag(&[1.0, -1.0])
}

/// Positive semidefinite, unit-trace, Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity, all within `tol`.
    pub fn new(op: Operator, tol: Tolerance) -> Result<Self> {
        op.ensure_hermitian(tol)?;
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol.abs() || tr.im.abs() > tol.abs() {
            return Err(Error::NotDensity { reason: "trace differs from one", value: tr.re - 1.0 });
        }
        let min = hermitian_eigen(&op).min_value();
        if min < -tol.abs() {
            return Err(Error::NotDensity { reason: "negative eigenvalue", value: min });
        }
        Ok(Self { op })
    }

    pub(crate) fn new_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        Ok(Self { op: Operator::projector_onto(psi)? })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: Operator::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// `sum_k w_k |psi_k><psi_k|` with normalized states and weights summing to one.
    pub fn mixture(weighted: &[(f64, StateVector)], tol: Tolerance) -> Result<Self> {
        let first = weighted.first().ok_or(Error::EmptyEnsemble)?;
        let mut op = Operator::zeros(first.1.dim());
        for (w, psi) in weighted {
            op = op.try_add(&Operator::projector_onto(psi)?.scale_real(*w))?;
        }
        Self::new(op, tol)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    #[inline]
    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn purity(&self) -> f64 {
        (&self.op * &self.op).trace().re
    }
}

/// State functional `<A> = Tr(A rho)`.
pub fn expectation(a: &Operator, rho: &DensityOperator) -> Result<C64> {
    Ok(a.try_mul(rho.op())?.trace())
}

/// Dispersion `(<A^2> - <A>^2)^(1/2)` of a Hermitian observable.
///
/// Variances in `[-tol, 0)` are rounding noise and clamp to zero; anything
/// more negative means the inputs are inconsistent.
pub fn uncertainty(a: &Operator, rho: &DensityOperator, tol: Tolerance) -> Result<f64> {
    a.ensure_hermitian(tol)?;
    let mean = expectation(a, rho)?.re;
    let second = expectation(&(a * a), rho)?.re;
    let variance = second - mean * mean;
    if variance < -tol.abs() {
        return Err(Error::NegativeVariance { variance });
    }
    Ok(variance.max(0.0).sqrt())
}

/// `[A, B] = AB - BA`
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.try_mul(b)?.try_sub(&b.try_mul(a)?)
}

/// Traces out the second tensor factor of a `d1 * d2` dimensional density.
pub fn partial_trace_second(rho: &DensityOperator, d1: usize, d2: usize) -> Result<DensityOperator> {
    Ok(DensityOperator::new_unchecked(partial_trace_second_op(rho.op(), d1, d2)?))
}

/// Partial trace over the second factor for an arbitrary operator.
pub fn partial_trace_second_op(op: &Operator, d1: usize, d2: usize) -> Result<Operator> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::EmptyDimension);
    }
    if op.dim() != d1 * d2 {
        return Err(Error::DimensionMismatch { expected: d1 * d2, found: op.dim() });
    }
    Ok(Operator::from_fn(d1, |i, j| (0..d2).map(|k| op.get(i * d2 + k, j * d2 + k)).sum()))
}

/// Von Neumann entropy `-sum p log2 p` over the spectrum, in bits.
pub fn entropy(rho: &DensityOperator, tol: Tolerance) -> Result<f64> {
    let eig = hermitian_eigen(rho.op());
    let mut s = 0.0;
    for &p in eig.values() {
        if p < -tol.abs() {
            return Err(Error::NegativeEigenvalue { eigenvalue: p });
        }
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Trace distance `||a - b||_1 / 2` between two Hermitian operators.
pub fn trace_distance(a: &Operator, b: &Operator) -> Result<f64> {
    let diff = a.try_sub(b)?;
    let eig = hermitian_eigen(&diff.hermitian_part());
    Ok(0.5 * eig.values().iter().map(|v| v.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus() -> StateVector {
        let h = 0.5f64.sqrt();
        StateVector::from_real(&[h, h]).unwrap()
    }

    #[test]
    fn expectation_examples() {
        let tol = Tolerance::default();
        let rho = DensityOperator::pure(&plus()).unwrap();
        let id = expectation(&Operator::identity(2), &rho).unwrap();
        assert!((id - c(1.0, 0.0)).norm() < 1e-14);

        let p0 = Operator::from_real_diag(&[1.0, 0.0]);
        assert!((expectation(&p0, &rho).unwrap().re - 0.5).abs() < 1e-14);

        let mixed = DensityOperator::maximally_mixed(2);
        assert_eq!(expectation(&sigma_z(), &mixed).unwrap(), c(0.0, 0.0));
        assert!(DensityOperator::new(mixed.op().clone(), tol).is_ok());
    }

    #[test]
    fn expectation_rejects_dimension_mismatch() {
        let rho = DensityOperator::maximally_mixed(3);
        assert!(matches!(expectation(&sigma_x(), &rho), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn uncertainty_examples() {
        let tol = Tolerance::default();
        let up = DensityOperator::pure(&StateVector::basis(2, 0)).unwrap();
        assert_eq!(uncertainty(&sigma_z(), &up, tol).unwrap(), 0.0);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((uncertainty(&sigma_x(), &mixed, tol).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uncertainty_rejects_non_hermitian() {
        let a = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let rho = DensityOperator::maximally_mixed(2);
        assert!(matches!(uncertainty(&a, &rho, Tolerance::default()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn uncertainty_flags_inconsistent_variance() {
        // Not a valid density: the negative weight makes <A^2> - <A>^2 < 0.
        let fake = DensityOperator::new_unchecked(Operator::from_real_diag(&[2.0, -1.0]));
        let a = Operator::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(uncertainty(&a, &fake, Tolerance::default()), Err(Error::NegativeVariance { .. })));
    }

    #[test]
    fn pauli_commutators() {
        assert_eq!(commutator(&sigma_x(), &sigma_x()).unwrap().max_abs(), 0.0);
        let xy = commutator(&sigma_x(), &sigma_y()).unwrap();
        let expected = sigma_z().scale(c(0.0, 2.0));
        assert!(xy.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let tol = Tolerance::default();
        let p0 = Operator::from_real_diag(&[1.0, 0.0]);
        let p1 = Operator::from_real_diag(&[0.0, 1.0]);
        let joint = (&p0.kron(&p0) + &p1.kron(&p1)).scale_real(0.5);
        let joint = DensityOperator::new(joint, tol).unwrap();
        let reduced = partial_trace_second(&joint, 2, 2).unwrap();
        assert!(reduced.op().max_abs_diff(&Operator::identity(2).scale_real(0.5)) < 1e-15);

        let rho1 = DensityOperator::pure(&plus()).unwrap();
        let rho2 = DensityOperator::maximally_mixed(3);
        let prod = DensityOperator::new(rho1.op().kron(rho2.op()), tol).unwrap();
        let back = partial_trace_second(&prod, 2, 3).unwrap();
        assert!(back.op().max_abs_diff(rho1.op()) < 1e-15);

        // chi(s, t) = psi(s) delta(t xor s)
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let chi = StateVector::new(vec![alpha, c(0.0, 0.0), c(0.0, 0.0), beta]).unwrap();
        let joint = DensityOperator::pure(&chi).unwrap();
        let reduced = partial_trace_second(&joint, 2, 2).unwrap();
        assert!(reduced.op().max_abs_diff(&Operator::from_real_diag(&[0.36, 0.64])) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_factorization() {
        let rho = DensityOperator::maximally_mixed(6);
        assert!(matches!(partial_trace_second(&rho, 4, 2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn entropy_examples() {
        let tol = Tolerance::default();
        let pure = DensityOperator::pure(&plus()).unwrap();
        assert!(entropy(&pure, tol).unwrap().abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((entropy(&mixed, tol).unwrap() - 1.0).abs() < 1e-15);
        let skew = DensityOperator::new(Operator::from_real_diag(&[0.9, 0.1]), tol).unwrap();
        // -0.9 log2 0.9 - 0.1 log2 0.1, evaluated independently
        assert!((entropy(&skew, tol).unwrap() - 0.468_995_593_589_281_2).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_negative_spectrum() {
        let fake = DensityOperator::new_unchecked(Operator::from_real_diag(&[1.1, -0.1]));
        assert!(matches!(entropy(&fake, Tolerance::default()), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn density_validation() {
        let tol = Tolerance::default();
        assert!(DensityOperator::new(Operator::from_real_diag(&[0.5, 0.6]), tol).is_err());
        assert!(DensityOperator::new(Operator::from_real_diag(&[1.5, -0.5]), tol).is_err());
        assert!(DensityOperator::new(sigma_y(), tol).is_err());
    }

    #[test]
    fn projector_predicates() {
        let tol = Tolerance::default();
        assert!(Operator::projector_onto(&plus()).unwrap().is_projector(tol));
        assert!(!sigma_x().is_projector(tol));
        assert!(sigma_x().is_hermitian(tol));
    }

    #[test]
    fn tolerance_must_be_nonnegative() {
        assert!(Tolerance::new(-1.0).is_err());
        assert!(Tolerance::new(f64::NAN).is_err());
        assert_eq!(Tolerance::new(0.0).unwrap().abs(), 0.0);
    }
}
