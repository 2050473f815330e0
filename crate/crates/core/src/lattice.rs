//! Orthoprojector lattice: meet, join, complement and the order `E <= F`.
//!
//! Meet and join are computed spectrally. The range intersection of `E` and
//! `F` is the kernel of the positive operator `(I - E) + (I - F)`; the range
//! sum is the support of `E + F`. Eigenvalues below [`RANK_TOL`] count as zero.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::operator::{DensityOperator, Operator, StateVector, Tolerance};
use crate::C64;

/// Rank threshold for kernel and support detection.
pub const RANK_TOL: f64 = 1e-8;

/// `E ∧ F`: orthoprojector onto `range(E) ∩ range(F)`.
pub fn projector_meet(e: &Operator, f: &Operator, tol: Tolerance) -> Result<Operator> {
    e.ensure_projector(tol)?;
    f.ensure_projector(tol)?;
    let id = Operator::identity(e.dim());
    let gap = (&id - e).try_add(&(&id - f))?;
    Ok(hermitian_eigen(&gap).spectral_projector(|v| v <= RANK_TOL))
}

/// `E ∨ F`: orthoprojector onto `range(E) + range(F)`.
pub fn projector_join(e: &Operator, f: &Operator, tol: Tolerance) -> Result<Operator> {
    e.ensure_projector(tol)?;
    f.ensure_projector(tol)?;
    let sum = e.try_add(f)?;
    Ok(hermitian_eigen(&sum).spectral_projector(|v| v > RANK_TOL))
}

/// Orthocomplement `I - E`.
pub fn complement(e: &Operator) -> Operator {
    &Operator::identity(e.dim()) - e
}

/// Lattice order on projectors: `E <= F` iff `EF = E`.
pub fn precedes(e: &Operator, f: &Operator, tol: Tolerance) -> bool {
    e.dim() == f.dim() && (e * f).max_abs_diff(e) <= tol.abs()
}

pub fn commute(e: &Operator, f: &Operator, tol: Tolerance) -> bool {
    e.dim() == f.dim() && (e * f).max_abs_diff(&(f * e)) <= tol.abs()
}

/// `max |(E ∨ F) ∧ G - E ∨ (F ∧ G)|`; vanishes when `E <= G` in an
/// orthomodular lattice.
pub fn modular_defect(e: &Operator, f: &Operator, g: &Operator, tol: Tolerance) -> Result<f64> {
    let lhs = projector_meet(&projector_join(e, f, tol)?, g, tol)?;
    let rhs = projector_join(e, &projector_meet(f, g, tol)?, tol)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// `max |(E ∨ F) ∧ G - (E ∧ G) ∨ (F ∧ G)|`; zero for commuting triples.
pub fn distributivity_defect(e: &Operator, f: &Operator, g: &Operator, tol: Tolerance) -> Result<f64> {
    let lhs = projector_meet(&projector_join(e, f, tol)?, g, tol)?;
    let rhs = projector_join(&projector_meet(e, g, tol)?, &projector_meet(f, g, tol)?, tol)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// A rank-one event that `rho` neither affirms nor denies.
///
/// The vector is the discrete Fourier combination of the eigenvectors of
/// `rho`, which is unbiased with respect to that basis, so
/// `Tr(E rho) = 1/n` exactly in exact arithmetic. Returns `(E, Tr(E rho))`.
pub fn dispersion_witness(rho: &DensityOperator) -> Result<(Operator, f64)> {
    let n = rho.dim();
    if n < 2 {
        return Err(Error::InvalidParameter { name: "dimension", reason: "needs at least two levels" });
    }
    let eig = hermitian_eigen(rho.op());
    let mut amps = Vec::from_iter(core::iter::repeat_n(C64::new(0.0, 0.0), n));
    for (j, v) in eig.vectors().iter().enumerate() {
        // phase 2 pi j / n; any unimodular choice works, this one is canonical
        let phase = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        for (a, x) in amps.iter_mut().zip(v.amplitudes()) {
            *a += phase * x;
        }
    }
    let e = Operator::projector_onto(&StateVector::new(amps)?.normalized()?)?;
    let p = (&e * rho.op()).trace().re;
    Ok((e, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::operator::StateVector;
    use crate::C64;

    fn line(theta: f64) -> Operator {
        let psi = StateVector::from_real(&[libm_cos(theta), libm_sin(theta)]).unwrap();
        Operator::projector_onto(&psi).unwrap()
    }

    fn libm_cos(x: f64) -> f64 {
        x.cos()
    }

    fn libm_sin(x: f64) -> f64 {
        x.sin()
    }

    const LOOSE: f64 = 1e-9;

    #[test]
    fn meet_examples() {
        let tol = Tolerance::default();
        let e = line(0.3);
        assert!(projector_meet(&e, &e, tol).unwrap().max_abs_diff(&e) < LOOSE);
        let f = line(1.1);
        assert!(projector_meet(&e, &f, tol).unwrap().max_abs() < LOOSE);
        let id = Operator::identity(2);
        assert!(projector_meet(&id, &f, tol).unwrap().max_abs_diff(&f) < LOOSE);
    }

    #[test]
    fn join_examples() {
        let tol = Tolerance::default();
        let (e, f) = (line(0.3), line(1.1));
        let id = Operator::identity(2);
        assert!(projector_join(&e, &f, tol).unwrap().max_abs_diff(&id) < LOOSE);
        let zero = Operator::zeros(2);
        assert!(projector_join(&zero, &f, tol).unwrap().max_abs_diff(&f) < LOOSE);

        let p0 = Operator::from_real_diag(&[1.0, 0.0, 0.0]);
        let p2 = Operator::from_real_diag(&[0.0, 0.0, 1.0]);
        let j = projector_join(&p0, &p2, tol).unwrap();
        assert!(j.max_abs_diff(&(&p0 + &p2)) < LOOSE);
        assert!(precedes(&p0, &j, Tolerance::new(LOOSE).unwrap()));
    }

    #[test]
    fn rejects_non_projectors() {
        let tol = Tolerance::default();
        let bad = Operator::from_real_diag(&[0.5, 1.0]);
        assert!(matches!(projector_meet(&bad, &line(0.2), tol), Err(Error::NotProjector { .. })));
        assert!(matches!(projector_join(&line(0.2), &bad, tol), Err(Error::NotProjector { .. })));
    }

    #[test]
    fn distributivity_fails_for_three_lines() {
        let tol = Tolerance::default();
        let (e, f, g) = (line(0.0), line(PI / 2.0), line(PI / 4.0));
        // (E v F) ^ G = G but E ^ G = F ^ G = 0; G has entries 1/2
        assert!((distributivity_defect(&e, &f, &g, tol).unwrap() - 0.5).abs() < LOOSE);
        let (p, q) = (Operator::from_real_diag(&[1.0, 0.0, 0.0]), Operator::from_real_diag(&[0.0, 1.0, 0.0]));
        let r = Operator::from_real_diag(&[1.0, 1.0, 0.0]);
        assert!(distributivity_defect(&p, &q, &r, tol).unwrap() < LOOSE);
        assert!(modular_defect(&p, &q, &r, tol).unwrap() < LOOSE);
    }

    #[test]
    fn witness_has_probability_one_over_n() {
        let rho = DensityOperator::new(Operator::from_real_diag(&[0.7, 0.2, 0.1]), Tolerance::default()).unwrap();
        let (e, p) = dispersion_witness(&rho).unwrap();
        assert!(e.is_projector(Tolerance::new(1e-12).unwrap()));
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
        let pure = DensityOperator::pure(&StateVector::basis(2, 0)).unwrap();
        assert!((dispersion_witness(&pure).unwrap().1 - 0.5).abs() < 1e-12);
        let one = DensityOperator::pure(&StateVector::basis(1, 0)).unwrap();
        assert!(dispersion_witness(&one).is_err());
    }

    #[test]
    fn complex_lines_in_three_dimensions() {
        let tol = Tolerance::new(1e-9).unwrap();
        let i = C64::new(0.0, 1.0);
        let a = StateVector::new(alloc::vec![C64::new(1.0, 0.0), i, C64::new(0.0, 0.0)]).unwrap();
        let b = StateVector::new(alloc::vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), i]).unwrap();
        let pa = Operator::projector_onto(&a).unwrap();
        let pb = Operator::projector_onto(&b).unwrap();
        let plane = projector_join(&pa, &pb, tol).unwrap();
        assert!((plane.trace().re - 2.0).abs() < LOOSE);
        assert!(precedes(&pa, &plane, tol) && precedes(&pb, &plane, tol));
        assert!(projector_meet(&pa, &pb, tol).unwrap().max_abs() < LOOSE);
    }
}
