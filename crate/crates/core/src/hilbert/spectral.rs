use super::operator::max_abs_entry;
use super::{
    CMatrix, HilbertError, Operator, Result, C64, EIGEN_SEPARATION, FLAG_TOL,
};

/// Finite-spectrum observable `A = Σ λ_i P_i` with a complete, pairwise
/// orthogonal projector family.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralObservable {
    eigenvalues: Vec<f64>,
    projectors: Vec<Operator>,
}

impl SpectralObservable {
    pub fn new(eigenvalues: Vec<f64>, projectors: Vec<Operator>) -> Result<Self> {
        if eigenvalues.len() != projectors.len() {
            return Err(HilbertError::CountMismatch {
                eigenvalues: eigenvalues.len(),
                projectors: projectors.len(),
            });
        }
        let first = projectors.first().ok_or(HilbertError::ZeroDimension)?;
        let dim = first.dim();
        for p in &projectors {
            if p.dim() != dim {
                return Err(HilbertError::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            p.require_projector(FLAG_TOL)?;
        }
        for a in 0..eigenvalues.len() {
            for b in a + 1..eigenvalues.len() {
                if (eigenvalues[a] - eigenvalues[b]).abs() <= EIGEN_SEPARATION {
                    return Err(HilbertError::DegenerateEigenvalues {
                        first: eigenvalues[a],
                        second: eigenvalues[b],
                    });
                }
                let residual = max_abs_entry((&projectors[a] * &projectors[b]).matrix());
                if residual > FLAG_TOL {
                    return Err(HilbertError::NotOrthogonal {
                        first: a,
                        second: b,
                        residual,
                    });
                }
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for p in &projectors {
            sum += p.matrix();
        }
        let residual = max_abs_entry(&(sum - CMatrix::identity(dim, dim)));
        if residual > FLAG_TOL {
            return Err(HilbertError::Incomplete { residual });
        }
        let projectors = projectors
            .into_iter()
            .map(|p| p.certify(FLAG_TOL))
            .collect();
        Ok(Self {
            eigenvalues,
            projectors,
        })
    }

    /// Labels outcome `k` with eigenvalue `k`.
    pub fn from_projectors(projectors: Vec<Operator>) -> Result<Self> {
        let eigenvalues = (0..projectors.len()).map(|k| k as f64).collect();
        Self::new(eigenvalues, projectors)
    }

    /// The trivial one-outcome observable `I`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            eigenvalues: vec![1.0],
            projectors: vec![Operator::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn projector(&self, i: usize) -> Option<&Operator> {
        self.projectors.get(i)
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> Operator {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p.matrix() * C64::new(*l, 0.0);
        }
        Operator::new(m).expect("square").hermitian_part()
    }

    /// Largest Frobenius norm of `[P_i, Q_j]` over all pairs.
    pub fn max_commutator_norm(&self, other: &SpectralObservable) -> f64 {
        let mut worst: f64 = 0.0;
        for p in &self.projectors {
            for q in &other.projectors {
                worst = worst.max(p.commutator(q).norm());
            }
        }
        worst
    }

    /// Merges projectors according to `coarsening`; the merged outcome takes
    /// the eigenvalue of the first fine outcome in its group.
    pub fn coarsen(&self, coarsening: &Coarsening) -> Result<Self> {
        coarsening.validate(self.len())?;
        let mut eigenvalues = Vec::with_capacity(coarsening.groups.len());
        let mut projectors = Vec::with_capacity(coarsening.groups.len());
        for group in &coarsening.groups {
            eigenvalues.push(self.eigenvalues[group[0]]);
            let mut m = CMatrix::zeros(self.dim(), self.dim());
            for &k in group {
                m += self.projectors[k].matrix();
            }
            projectors.push(Operator::certified(m)?);
        }
        Self::new(eigenvalues, projectors)
    }
}

/// Partition of fine outcome indices; group `g` becomes coarse outcome `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coarsening {
    groups: Vec<Vec<usize>>,
}

impl Coarsening {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        Self { groups }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn validate(&self, fine_len: usize) -> Result<()> {
        let mut seen = vec![false; fine_len];
        for group in &self.groups {
            if group.is_empty() {
                return Err(HilbertError::InvalidCoarsening("empty group".into()));
            }
            for &k in group {
                if k >= fine_len {
                    return Err(HilbertError::InvalidCoarsening(format!(
                        "fine index {k} out of range (family has {fine_len} outcomes)"
                    )));
                }
                if seen[k] {
                    return Err(HilbertError::InvalidCoarsening(format!(
                        "fine index {k} appears in more than one group"
                    )));
                }
                seen[k] = true;
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(HilbertError::InvalidCoarsening(format!(
                "fine index {k} is not covered"
            )));
        }
        Ok(())
    }

    /// Recovers the partition relating two families: each coarse projector
    /// must equal the sum of the fine projectors it contains.
    pub fn infer(
        fine: &SpectralObservable,
        coarse: &SpectralObservable,
        tol: f64,
    ) -> Result<Self> {
        if fine.dim() != coarse.dim() {
            return Err(HilbertError::DimensionMismatch {
                expected: fine.dim(),
                found: coarse.dim(),
            });
        }
        let mut groups = Vec::with_capacity(coarse.len());
        for (g, c) in coarse.projectors().iter().enumerate() {
            let group: Vec<usize> = fine
                .projectors()
                .iter()
                .enumerate()
                .filter(|(_, p)| {
                    // P ≤ C  ⇔  C P = P for commuting projectors
                    max_abs_entry(&(c.matrix() * p.matrix() - p.matrix())) <= tol
                })
                .map(|(k, _)| k)
                .collect();
            if group.is_empty() {
                return Err(HilbertError::InvalidCoarsening(format!(
                    "coarse projector {g} contains no fine projector"
                )));
            }
            let mut sum = CMatrix::zeros(fine.dim(), fine.dim());
            for &k in &group {
                sum += fine.projectors()[k].matrix();
            }
            let residual = max_abs_entry(&(sum - c.matrix()));
            if residual > tol {
                return Err(HilbertError::InvalidCoarsening(format!(
                    "coarse projector {g} is not a sum of fine projectors (residual {residual:e})"
                )));
            }
            groups.push(group);
        }
        let out = Self { groups };
        out.validate(fine.len())?;
        Ok(out)
    }

    /// Coarse index of the group that contains exactly `fine_index`.
    pub fn singleton_of(&self, fine_index: usize) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.len() == 1 && g[0] == fine_index)
    }

    pub fn group_of(&self, fine_index: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&fine_index))
    }
}

/// Spectral decomposition of a hermitian operator.
///
/// Eigenvalues come back in descending order; eigenvalues closer than `tol`
/// are merged into one projector carrying their mean.
pub fn spectral_decompose(m: &Operator, tol: f64) -> Result<SpectralObservable> {
    m.require_hermitian(FLAG_TOL)?;
    let dim = m.dim();
    let eig = m.hermitian_part().into_matrix().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if (eig.eigenvalues[*c.last().unwrap()] - eig.eigenvalues[k]).abs() <= tol => {
                c.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let mean = c.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / c.len() as f64;
        eigenvalues.push(mean);
        let vectors: Vec<_> = c
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect();
        projectors.push(Operator::projector_onto_span(&vectors)?);
    }
    SpectralObservable::new(eigenvalues, projectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{pauli, CVector, StateVector, MERGE_TOL};
    use crate::sampling;
    use proptest::prelude::*;

    #[test]
    fn sigma_z_splits_into_basis_projectors() {
        let obs = spectral_decompose(&pauli::sigma_z(), MERGE_TOL).unwrap();
        assert_eq!(obs.eigenvalues().len(), 2);
        assert!((obs.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((obs.eigenvalues()[1] + 1.0).abs() < 1e-14);
        let p0 = Operator::projector_onto(pauli::ket0().amplitudes()).unwrap();
        let p1 = Operator::projector_onto(pauli::ket1().amplitudes()).unwrap();
        assert!(obs.projectors()[0].approx_eq(&p0, 1e-14));
        assert!(obs.projectors()[1].approx_eq(&p1, 1e-14));
    }

    #[test]
    fn identity_merges_into_one_projector() {
        let obs = spectral_decompose(&Operator::identity(3), MERGE_TOL).unwrap();
        assert_eq!(obs.len(), 1);
        assert!((obs.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!(obs.projectors()[0].approx_eq(&Operator::identity(3), 1e-14));
    }

    #[test]
    fn sigma_x_projectors_reconstruct_by_hand() {
        let obs = spectral_decompose(&pauli::sigma_x(), MERGE_TOL).unwrap();
        // |±⟩⟨±| = ½[[1, ±1], [±1, 1]], so 1·P₊ − 1·P₋ = [[0,1],[1,0]]
        let plus = Operator::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let minus = Operator::from_real_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap();
        assert!(obs.projectors()[0].approx_eq(&plus, 1e-14));
        assert!(obs.projectors()[1].approx_eq(&minus, 1e-14));
        let by_hand = &plus - &minus;
        assert!(by_hand.approx_eq(&pauli::sigma_x(), 0.0));
        assert!(obs.reconstruct().approx_eq(&pauli::sigma_x(), 1e-14));
    }

    #[test]
    fn non_hermitian_input_names_worst_entry() {
        let m = Operator::from_real_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        match spectral_decompose(&m, MERGE_TOL) {
            Err(HilbertError::NotHermitian { row, col, asymmetry }) => {
                assert_eq!((row, col), (0, 1));
                assert!((asymmetry - 1.5).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn merging_respects_tolerance() {
        let m = Operator::diagonal(&[1.0, 1.0 + 1e-10, -2.0]);
        assert_eq!(spectral_decompose(&m, MERGE_TOL).unwrap().len(), 2);
        let split = Operator::diagonal(&[1.0, 1.0 + 1e-6, -2.0]);
        assert_eq!(spectral_decompose(&split, MERGE_TOL).unwrap().len(), 3);
    }

    #[test]
    fn observable_validation_rejects_bad_families() {
        let p0 = Operator::projector_onto(pauli::ket0().amplitudes()).unwrap();
        let plus = Operator::projector_onto(pauli::plus().amplitudes()).unwrap();
        assert!(matches!(
            SpectralObservable::from_projectors(vec![p0.clone()]),
            Err(HilbertError::Incomplete { .. })
        ));
        assert!(matches!(
            SpectralObservable::from_projectors(vec![p0.clone(), plus]),
            Err(HilbertError::NotOrthogonal { .. })
        ));
        let p1 = Operator::projector_onto(pauli::ket1().amplitudes()).unwrap();
        assert!(matches!(
            SpectralObservable::new(vec![1.0, 1.0], vec![p0, p1]),
            Err(HilbertError::DegenerateEigenvalues { .. })
        ));
    }

    #[test]
    fn coarsening_round_trip() {
        let fine = pauli::fourier_observable(3);
        let c = Coarsening::new(vec![vec![0], vec![1, 2]]);
        let coarse = fine.coarsen(&c).unwrap();
        assert_eq!(coarse.len(), 2);
        assert_eq!(Coarsening::infer(&fine, &coarse, 1e-10).unwrap(), c);
        assert_eq!(c.singleton_of(0), Some(0));
        assert_eq!(c.singleton_of(1), None);
        assert!(Coarsening::new(vec![vec![0], vec![0, 1, 2]]).validate(3).is_err());
        assert!(Coarsening::new(vec![vec![0], vec![1]]).validate(3).is_err());
        let unrelated = pauli::computational_observable(3);
        assert!(Coarsening::infer(&fine, &unrelated, 1e-10).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(crate::hilbert::DensityMatrix::new(Operator::diagonal(&[0.5, 0.6])).is_err());
        assert!(crate::hilbert::DensityMatrix::new(Operator::diagonal(&[1.5, -0.5])).is_err());
        assert!(crate::hilbert::DensityMatrix::new(Operator::diagonal(&[0.25, 0.75])).is_ok());
        assert!(StateVector::new(CVector::from_element(2, C64::new(1.0, 0.0))).is_err());
    }

    proptest! {
        #[test]
        fn decomposition_invariants(seed in any::<u64>(), dim in 1usize..9, degenerate in any::<bool>()) {
            let mut rng = sampling::rng(seed);
            let m = if degenerate {
                sampling::random_observable(&mut rng, dim).reconstruct()
            } else {
                sampling::random_hermitian(&mut rng, dim)
            };
            let obs = spectral_decompose(&m, MERGE_TOL).unwrap();
            let mut sum = CMatrix::zeros(dim, dim);
            for (a, p) in obs.projectors().iter().enumerate() {
                sum += p.matrix();
                for (b, q) in obs.projectors().iter().enumerate() {
                    let prod = p * q;
                    let expected = if a == b { p.clone() } else { Operator::zeros(dim) };
                    prop_assert!(prod.approx_eq(&expected, 1e-10));
                }
            }
            prop_assert!(max_abs_entry(&(sum - CMatrix::identity(dim, dim))) < 1e-10);
            prop_assert!(obs.reconstruct().approx_eq(&m, 1e-10));
        }
    }
}
