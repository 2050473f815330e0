//! Parallel trajectory fan-out with deterministic reductions.
//!
//! Trajectory indices are cut into fixed chunks of [`CHUNK`]. Each chunk is
//! folded sequentially in index order, and chunk results are merged
//! sequentially in chunk order, so the floating-point result does not depend
//! on the number of workers or on scheduling.

use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const CHUNK: u64 = 64;

pub fn pool(workers: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Validation(format!("workers: {e}")))
}

/// Folds `sample(k)` for `k in 0..m` into per-chunk accumulators created by
/// `init` and merges them left to right.
pub fn fold_trajectories<T, A>(
    pool: &rayon::ThreadPool,
    m: u64,
    sample: impl Fn(u64) -> CliResult<T> + Sync,
    init: impl Fn() -> A + Sync,
    fold: impl Fn(&mut A, T) -> CliResult<()> + Sync,
    merge: impl Fn(A, A) -> CliResult<A>,
) -> CliResult<A>
where
    T: Send,
    A: Send,
{
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<A> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                for k in c * CHUNK..((c + 1) * CHUNK).min(m) {
                    fold(&mut acc, sample(k)?)?;
                }
                Ok(acc)
            })
            .collect::<CliResult<Vec<A>>>()
    })?;
    let mut it = parts.into_iter();
    let mut total = it.next().unwrap_or_else(&init);
    for part in it {
        total = merge(total, part)?;
    }
    Ok(total)
}

/// Ordered `sample(k)` for `k in 0..m`.
// the closure is Send where `sample` by value would not be
#[allow(clippy::redundant_closure)]
pub fn map_trajectories<T: Send>(
    pool: &rayon::ThreadPool,
    m: u64,
    sample: impl Fn(u64) -> CliResult<T> + Sync,
) -> CliResult<Vec<T>> {
    pool.install(|| (0..m).into_par_iter().map(|k| sample(k)).collect())
}

/// Running mean and variance by plain sums, merged exactly in order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(self, o: Moments) -> Moments {
        Moments { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(workers: usize, m: u64) -> f64 {
        let p = pool(Some(workers)).unwrap();
        fold_trajectories(
            &p,
            m,
            |k| Ok(1.0 / (k as f64 + 1.0)),
            || 0.0,
            |a, x| {
                *a += x;
                Ok(())
            },
            |a, b| Ok(a + b),
        )
        .unwrap()
    }

    #[test]
    fn reduction_is_independent_of_workers() {
        let a = total(1, 1000);
        assert_eq!(a.to_bits(), total(3, 1000).to_bits());
        assert_eq!(a.to_bits(), total(8, 1000).to_bits());
        assert_eq!(total(2, 0), 0.0);
    }

    #[test]
    fn errors_propagate() {
        let p = pool(Some(2)).unwrap();
        let r = map_trajectories(&p, 10, |k| if k == 7 { Err(CliError::Invariant("seven".into())) } else { Ok(k) });
        assert!(matches!(r, Err(CliError::Invariant(_))));
        assert_eq!(map_trajectories(&p, 4, Ok).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn moments_match_direct_formulas() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..2].iter().for_each(|x| a.push(*x));
        xs[2..].iter().for_each(|x| b.push(*x));
        let m = a.merge(b);
        assert_eq!(m.mean(), 3.5);
        // sum of squared deviations 6.25 + 2.25 + 0.25 + 12.25 = 21
        assert!((m.variance() - 7.0).abs() < 1e-12);
    }
}
