use super::operator::kron_flags;
use super::{CMatrix, HilbertError, Operator, Result, StateVector, C64};

/// Kronecker product, left factor major.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        Operator::with_flags(
            self.matrix().kronecker(other.matrix()),
            kron_flags(self.flags(), other.flags()),
        )
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        // product of unit vectors is a unit vector
        StateVector::from_unit_unchecked(self.amplitudes().kronecker(other.amplitudes()))
    }
}

/// Value (0 or 1) of qubit `site` in computational basis index `index` of an
/// `n_sites` chain. Site 0 is the most significant bit.
#[inline]
pub fn site_bit(index: usize, site: usize, n_sites: usize) -> usize {
    (index >> (n_sites - 1 - site)) & 1
}

/// Extends an operator on the qubits `sites` (in that tensor order) by the
/// identity on the rest of an `n_sites` chain.
pub fn embed_local(m: &Operator, sites: &[usize], n_sites: usize) -> Result<Operator> {
    for (k, &s) in sites.iter().enumerate() {
        if s >= n_sites {
            return Err(HilbertError::SiteOutOfRange { site: s, n_sites });
        }
        if sites[..k].contains(&s) {
            return Err(HilbertError::DuplicateSite(s));
        }
    }
    let local_dim = 1usize << sites.len();
    if m.dim() != local_dim {
        return Err(HilbertError::DimensionMismatch {
            expected: local_dim,
            found: m.dim(),
        });
    }
    let dim = 1usize << n_sites;
    let mask: usize = sites.iter().map(|&s| 1usize << (n_sites - 1 - s)).sum();
    let local_index = |index: usize| -> usize {
        sites
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | site_bit(index, s, n_sites))
    };
    let mut out = CMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for row in 0..dim {
        let lr = local_index(row);
        for col in 0..dim {
            if row & !mask == col & !mask {
                out[(row, col)] = m.entry(lr, local_index(col));
            }
        }
    }
    Ok(Operator::with_flags(out, m.flags()))
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::sampling;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn tensor_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
            let mut rng = sampling::rng(seed);
            let a = sampling::random_hermitian(&mut rng, da);
            let b = sampling::random_unitary(&mut rng, db);
            let c = sampling::random_hermitian(&mut rng, dc);
            let left = a.tensor(&b).tensor(&c);
            let right = a.tensor(&b.tensor(&c));
            prop_assert!(left.approx_eq(&right, 1e-14));
        }

        #[test]
        fn disjoint_embeddings_commute(seed in any::<u64>(), n in 2usize..5) {
            let mut rng = sampling::rng(seed);
            let sites: Vec<usize> = (0..n).collect();
            let split = 1 + (seed as usize) % (n - 1);
            let (left, right) = sites.split_at(split);
            let m = sampling::random_hermitian(&mut rng, 1 << left.len());
            let k = sampling::random_unitary(&mut rng, 1 << right.len());
            let a = embed_local(&m, left, n).unwrap();
            let b = embed_local(&k, right, n).unwrap();
            prop_assert!(a.commutator(&b).norm() < 1e-12);
        }
    }
}
