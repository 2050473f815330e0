//! Randomized property suite for the projector lattice.

use qfilter_core::lattice::{
    complement, dispersion_witness, distributivity_defect, modular_defect, projector_join, projector_meet,
};
use qfilter_core::rng::TrajectoryRng;
use qfilter_core::{DensityOperator, Operator, StateVector, Tolerance, C64};

use crate::error::CliResult;
use crate::output::Check;

/// Lattice identities are checked to this absolute entry tolerance.
pub const LATTICE_TOL: f64 = 1e-9;

fn gaussian_vector(rng: &mut TrajectoryRng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.standard_normal(), rng.standard_normal())).collect()
}

/// Haar-like orthonormal basis by Gram-Schmidt on complex Gaussian vectors.
pub fn random_basis(rng: &mut TrajectoryRng, n: usize) -> CliResult<Vec<StateVector>> {
    let mut basis: Vec<StateVector> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v = StateVector::new(gaussian_vector(rng, n))?;
        for b in &basis {
            let c = b.inner(&v);
            v.axpy(-c, b);
        }
        if v.norm() > 1e-6 {
            basis.push(v.normalized()?);
        }
    }
    Ok(basis)
}

fn projector_from(basis: &[StateVector], members: impl Fn(usize) -> bool) -> Operator {
    let n = basis[0].dim();
    let mut p = Operator::zeros(n);
    for (k, b) in basis.iter().enumerate() {
        if members(k) {
            p = &p + &Operator::outer(b, b);
        }
    }
    p
}

/// Random density of random rank: `A A^dag / Tr` with `A` of `rank` columns.
pub fn random_density(rng: &mut TrajectoryRng, n: usize, rank: usize) -> CliResult<DensityOperator> {
    let mut rho = Operator::zeros(n);
    for _ in 0..rank {
        let v = StateVector::new(gaussian_vector(rng, n))?;
        rho = &rho + &Operator::outer(&v, &v);
    }
    let tr = rho.trace().re;
    Ok(DensityOperator::new(rho.scale_real(1.0 / tr).hermitian_part(), Tolerance::new(1e-9)?)?)
}

fn random_line(rng: &mut TrajectoryRng, n: usize) -> CliResult<Operator> {
    let v = StateVector::new(gaussian_vector(rng, n))?.normalized()?;
    Ok(Operator::projector_onto(&v)?)
}

/// Orthomodularity on commuting triples with `E <= I - F <= G`, meet/join
/// duality, a distributivity-failure witness among random dimension-2
/// lines, and a dispersion witness for `densities` random states.
pub fn logic_suite(seed: u64, triples: usize, densities: usize) -> CliResult<Vec<Check>> {
    let tol = Tolerance::new(LATTICE_TOL)?;
    let mut rng = TrajectoryRng::from_seed(seed);

    let mut modular: f64 = 0.0;
    let mut duality: f64 = 0.0;
    for i in 0..triples {
        let n = 2 + i % 4;
        let basis = random_basis(&mut rng, n)?;
        // per basis vector: in F, else in G and possibly in E
        let flags: Vec<(bool, bool, bool)> = (0..n)
            .map(|_| {
                let in_f = rng.uniform() < 0.4;
                let in_e = !in_f && rng.uniform() < 0.5;
                let in_g = !in_f || rng.uniform() < 0.5;
                (in_e, in_f, in_g)
            })
            .collect();
        let e = projector_from(&basis, |k| flags[k].0);
        let f = projector_from(&basis, |k| flags[k].1);
        let g = projector_from(&basis, |k| flags[k].2);
        modular = modular.max(modular_defect(&e, &f, &g, tol)?);
        let meet = projector_meet(&e, &g, tol)?;
        let dual = complement(&projector_join(&complement(&e), &complement(&g), tol)?);
        duality = duality.max(meet.max_abs_diff(&dual));
    }

    let mut witness = None;
    for attempt in 0..100 {
        let (e, f, g) = (random_line(&mut rng, 2)?, random_line(&mut rng, 2)?, random_line(&mut rng, 2)?);
        let d = distributivity_defect(&e, &f, &g, tol)?;
        if d > 1e-3 {
            witness = Some((attempt, d));
            break;
        }
    }

    let mut worst_margin = f64::INFINITY;
    for i in 0..densities {
        let n = 2 + i % 5;
        let rank = 1 + (rng.next_u64() % n as u64) as usize;
        let rho = random_density(&mut rng, n, rank)?;
        let (_, p) = dispersion_witness(&rho)?;
        worst_margin = worst_margin.min(p.min(1.0 - p));
    }

    Ok(vec![
        Check::at_most(format!("orthomodular defect over {triples} commuting triples"), modular, LATTICE_TOL),
        Check::at_most("meet/join duality defect", duality, LATTICE_TOL),
        Check::holds(
            match witness {
                Some((a, d)) => format!("distributivity failure in dim 2 (attempt {a}, defect {d:.3})"),
                None => "distributivity failure in dim 2".into(),
            },
            witness.is_some(),
        ),
        Check::holds(
            format!("no dispersion-free state among {densities} random densities (min margin {worst_margin:.3e})"),
            worst_margin > 1e-9,
        ),
    ])
}
