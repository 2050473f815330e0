//! In-place radix-2 FFT for power-of-two lengths.
//!
//! Forward transform uses `exp(-2 pi i jk/N)` without scaling; the inverse
//! divides by `N`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Precomputed twiddles `exp(-2 pi i k/N)` for `k < N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<C64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(is_power_of_two(n), "fft length {n} is not a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let ang = -2.0 * PI * k as f64 / n as f64;
                C64::new(ang.cos(), ang.sin())
            })
            .collect();
        Self { n, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn transform(&self, buf: &mut [C64], inverse: bool) {
        let n = self.n;
        assert_eq!(buf.len(), n, "buffer length does not match the plan");
        let bits = n.trailing_zeros();
        if bits == 0 {
            return;
        }
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.transform(buf, false);
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.transform(buf, true);
        let inv = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= inv;
        }
    }
}

pub fn fft(buf: &mut [C64]) {
    FftPlan::new(buf.len()).forward(buf);
}

pub fn ifft(buf: &mut [C64]) {
    FftPlan::new(buf.len()).inverse(buf);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dft(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let ang = -2.0 * PI * (j * k) as f64 / n as f64;
                        v * C64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<C64> = (0..16).map(|j| C64::new((j as f64 * 0.7).sin(), j as f64 * 0.1)).collect();
        let mut y = x.clone();
        fft(&mut y);
        for (a, b) in y.iter().zip(dft(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
        ifft(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_point_is_identity() {
        let mut y = [C64::new(2.0, -1.0)];
        fft(&mut y);
        assert_eq!(y[0], C64::new(2.0, -1.0));
    }
}
