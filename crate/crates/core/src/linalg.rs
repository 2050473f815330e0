//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Output ordering is deterministic: eigenvalues descending; each
//! eigenvector is rephased so that its first component with modulus above
//! `PHASE_EPS` is real and positive.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::operator::{Operator, StateVector};
use crate::C64;

const MAX_SWEEPS: usize = 100;
const PHASE_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: Vec<f64>,
    vectors: Vec<StateVector>,
}

impl HermitianEigen {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Orthoprojector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> Operator {
        let n = self.vectors.first().map_or(1, StateVector::dim);
        let mut p = Operator::zeros(n);
        for (v, vec) in self.values.iter().zip(&self.vectors) {
            if keep(*v) {
                p = &p + &Operator::outer(vec, vec);
            }
        }
        p
    }
}

/// Eigendecomposition of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &Operator) -> HermitianEigen {
    let n = a.dim();
    let mut m: Vec<C64> = a.hermitian_part().entries().to_vec();
    let mut v: Vec<C64> = Operator::identity(n).entries().to_vec();
    let idx = |i: usize, j: usize| i * n + j;

    let scale = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let threshold = scale * f64::EPSILON * 1e-2;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[idx(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold || scale == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[idx(p, q)];
                let mag = apq.norm();
                if mag <= threshold * 1e-3 {
                    continue;
                }
                let app = m[idx(p, p)].re;
                let aqq = m[idx(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let phase = apq / mag;
                // J = diag(1, conj(phase)) applied before the real rotation.
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                // m <- m J (columns p, q)
                for k in 0..n {
                    let mkp = m[idx(k, p)];
                    let mkq = m[idx(k, q)];
                    m[idx(k, p)] = mkp * jpp + mkq * jqp;
                    m[idx(k, q)] = mkp * jpq + mkq * jqq;
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = vkp * jpp + vkq * jqp;
                    v[idx(k, q)] = vkp * jpq + vkq * jqq;
                }
                // m <- J^dag m (rows p, q)
                for k in 0..n {
                    let mpk = m[idx(p, k)];
                    let mqk = m[idx(q, k)];
                    m[idx(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
                    m[idx(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
                }
                m[idx(p, q)] = C64::new(0.0, 0.0);
                m[idx(q, p)] = C64::new(0.0, 0.0);
                m[idx(p, p)] = C64::new(m[idx(p, p)].re, 0.0);
                m[idx(q, q)] = C64::new(m[idx(q, q)].re, 0.0);
            }
        }
    }

    let mut pairs: Vec<(f64, StateVector)> = (0..n)
        .map(|k| {
            let mut col: Vec<C64> = (0..n).map(|i| v[idx(i, k)]).collect();
            fix_phase(&mut col);
            (m[idx(k, k)].re, StateVector::new(col).expect("nonempty"))
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let (values, vectors) = pairs.into_iter().unzip();
    HermitianEigen { values, vectors }
}

fn fix_phase(col: &mut [C64]) {
    if let Some(lead) = col.iter().find(|z| z.norm() > PHASE_EPS).copied() {
        let rot = lead.conj() / lead.norm();
        for z in col.iter_mut() {
            *z *= rot;
        }
    }
}

/// Largest singular value of `a`.
pub fn spectral_norm(a: &Operator) -> f64 {
    let gram = &a.adjoint() * a;
    hermitian_eigen(&gram).max_value().max(0.0).sqrt()
}
