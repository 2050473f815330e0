//! Truncated harmonic-oscillator matrices.
//!
//! `Q = sqrt(hbar/2) (a + a^dag)` and `P = i sqrt(hbar/2) (a^dag - a)` on the
//! first `n` number states. The truncation breaks `[Q, P] = i hbar` only in
//! the last diagonal entry.

#[allow(unused_imports)]
use num_traits::Float;

use crate::operator::{Operator, StateVector};
use crate::C64;

/// Lowering operator `a |k> = sqrt(k) |k-1>`.
pub fn annihilation(n: usize) -> Operator {
    Operator::from_fn(n, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn creation(n: usize) -> Operator {
    annihilation(n).adjoint()
}

pub fn position(n: usize, hbar: f64) -> Operator {
    (&annihilation(n) + &creation(n)).scale_real((hbar / 2.0).sqrt())
}

pub fn momentum(n: usize, hbar: f64) -> Operator {
    (&creation(n) - &annihilation(n)).scale(C64::new(0.0, (hbar / 2.0).sqrt()))
}

/// Number state `|0>`, the minimum-uncertainty Gaussian.
pub fn ground_state(n: usize) -> StateVector {
    StateVector::basis(n, 0)
}
