//! Seeded pseudo-random states, operators and observables.
//!
//! Everything is driven by a [`ChaCha8Rng`]; the same seed always yields the
//! same sequence, which keeps verifier reports reproducible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{
    CMatrix, CVector, DensityMatrix, Operator, SpectralObservable, StateVector, C64,
};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for sample `index` under `seed`, so samples can be
/// drawn in parallel without changing the result.
pub fn stream(seed: u64, index: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index + 1);
    r
}

fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unit vector (normalized complex Gaussian).
pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> StateVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
        if v.norm() > 1e-8 {
            return StateVector::normalized(v).expect("nonzero");
        }
    }
}

/// Columns of a random unitary (Gram–Schmidt on a complex Gaussian matrix).
pub fn random_basis(rng: &mut impl Rng, dim: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v.unscale(n));
        }
    }
    basis
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> Operator {
    let basis = random_basis(rng, dim);
    Operator::certified(CMatrix::from_columns(&basis)).expect("square")
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> Operator {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    Operator::new(g).expect("square").hermitian_part()
}

/// Random full-rank or low-rank mixed state (normalized `G G†`).
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=dim);
    let g = CMatrix::from_fn(dim, rank, |_, _| gaussian_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = Operator::new(m.unscale(tr)).expect("square").hermitian_part();
    DensityMatrix::new(op).expect("G G† is a state")
}

/// Random orthogonal projector of the given rank.
pub fn random_projector(rng: &mut impl Rng, dim: usize, rank: usize) -> Operator {
    let basis = random_basis(rng, dim);
    Operator::projector_onto_span(&basis[..rank]).expect("rank >= 1")
}

/// Random partition of `0..n` into between 2 and `n` non-empty groups
/// (a single group when `n == 1`).
pub fn random_partition(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let parts = rng.random_range(2..=n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = idx[..parts].iter().map(|&k| vec![k]).collect();
    for &k in &idx[parts..] {
        let g = rng.random_range(0..parts);
        groups[g].push(k);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Observable whose projectors are spans of the given groups of `basis`.
pub fn observable_in_basis(basis: &[CVector], groups: &[Vec<usize>]) -> SpectralObservable {
    let projectors = groups
        .iter()
        .map(|g| {
            let vs: Vec<CVector> = g.iter().map(|&k| basis[k].clone()).collect();
            Operator::projector_onto_span(&vs).expect("non-empty group")
        })
        .collect();
    SpectralObservable::from_projectors(projectors).expect("orthonormal basis")
}

/// Random observable with a random eigenbasis and random degeneracies.
pub fn random_observable(rng: &mut impl Rng, dim: usize) -> SpectralObservable {
    let basis = random_basis(rng, dim);
    let groups = random_partition(rng, dim);
    observable_in_basis(&basis, &groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::FLAG_TOL;

    #[test]
    fn same_seed_same_vector() {
        let a = random_unit_vector(&mut rng(7), 5);
        let b = random_unit_vector(&mut rng(7), 5);
        assert_eq!(a, b);
        let c = random_unit_vector(&mut stream(7, 3), 5);
        let d = random_unit_vector(&mut stream(7, 4), 5);
        assert_ne!(c, d);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut r = rng(1);
        for dim in 1..9 {
            assert!(random_unitary(&mut r, dim).is_unitary(FLAG_TOL));
        }
    }

    #[test]
    fn random_observables_are_valid() {
        let mut r = rng(2);
        for dim in 1..9 {
            let obs = random_observable(&mut r, dim);
            assert_eq!(obs.dim(), dim);
            let _ = random_density(&mut r, dim);
            let p = random_projector(&mut r, dim, dim.div_ceil(2));
            assert!(p.is_projector(FLAG_TOL));
        }
    }
}
