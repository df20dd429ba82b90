use std::sync::Arc;

use serde::Serialize;

use super::{ModifiedBornError, RegionOperatorAssignment, Result};
use crate::hilbert::{site_bit, CMatrix, CVector, NonlinearMap, Operator, C64, FLAG_TOL};
use crate::spacetime::{LatticeModel, LatticeRegion};

/// Diagonal of `N_O = Σ_{s∈O} n_s` in the computational basis, where
/// `n_s = |1⟩⟨1|` on site `s`.
pub fn number_counts(model: &LatticeModel, sites: &[usize]) -> Vec<f64> {
    (0..model.dim())
        .map(|b| {
            sites
                .iter()
                .map(|&s| site_bit(b, s, model.n_sites))
                .sum::<usize>() as f64
        })
        .collect()
}

/// Image of basis index `b` under the shift by `k`: bit `s` of the result
/// is bit `s + k` of `b`.
fn shifted_index(model: &LatticeModel, b: usize, k: usize) -> usize {
    let n = model.n_sites;
    (0..n).fold(0, |acc, s| (acc << 1) | site_bit(b, (s + k) % n, n))
}

/// Permutation unitary with `U† n_s U = n_{s+k}`.
pub fn translation_unitary(model: &LatticeModel, k: usize) -> Operator {
    let dim = model.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        m[(shifted_index(model, b, k), b)] = C64::new(1.0, 0.0);
    }
    Operator::certified(m).expect("square")
}

/// `U v` for the shift by `k` without building the matrix.
pub(crate) fn translate(model: &LatticeModel, k: usize, v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    for b in 0..v.len() {
        out[shifted_index(model, b, k)] = v[b];
    }
    out
}

/// `U† v`.
pub(crate) fn translate_back(model: &LatticeModel, k: usize, v: &CVector) -> CVector {
    CVector::from_fn(v.len(), |b, _| v[shifted_index(model, b, k)])
}

fn weighted_mean(counts: &[f64], v: &CVector) -> f64 {
    counts
        .iter()
        .zip(v.iter())
        .map(|(c, a)| c * a.norm_sqr())
        .sum()
}

/// `v_b ↦ e^{−iθ c_b} v_b`.
fn diagonal_phase(counts: &[f64], theta: f64, v: &CVector) -> CVector {
    CVector::from_fn(v.len(), |b, _| v[b] * C64::from_polar(1.0, -theta * counts[b]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum FamilyRole {
    /// Trivially satisfies every constraint.
    Witness,
    /// Candidate whose verdicts are an experimental output.
    Candidate,
    /// Built to violate exactly one constraint.
    Control { constraint: u8 },
    Experimental,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Identity,
    /// `B_O(ψ) = exp(iλ⟨ψ|N_O|ψ⟩) ψ`.
    LocalNonlinearPhase { lambda: f64 },
    /// One map for every region: `exp(−iλ c(ψ) N) ψ` with `N` the total
    /// number operator and `c = ⟨ψ|N|ψ⟩/‖ψ‖²`.
    GlobalCoupledRotation { lambda: f64 },
    /// Linear `exp(−iλ N_O)`.
    LocalNumberRotation { lambda: f64 },
    /// `e^{iκτ_O}` with `τ_O` the region's time step.
    TimeStepPhase { kappa: f64 },
    /// `exp(−iλ c_O(ψ) N_O) ψ` with `c_O = ⟨ψ|N_O|ψ⟩/‖ψ‖²`.
    LocalNonlinearRotation { lambda: f64 },
}

impl Family {
    pub const NAMES: [&'static str; 6] = [
        "identity",
        "local-nonlinear-phase",
        "global-coupled-rotation",
        "local-number-rotation",
        "time-step-phase",
        "local-nonlinear-rotation",
    ];

    pub fn by_name(name: &str, parameter: f64) -> Result<Self> {
        Ok(match name {
            "identity" => Self::Identity,
            "local-nonlinear-phase" => Self::LocalNonlinearPhase { lambda: parameter },
            "global-coupled-rotation" => Self::GlobalCoupledRotation { lambda: parameter },
            "local-number-rotation" => Self::LocalNumberRotation { lambda: parameter },
            "time-step-phase" => Self::TimeStepPhase { kappa: parameter },
            "local-nonlinear-rotation" => Self::LocalNonlinearRotation { lambda: parameter },
            other => return Err(ModifiedBornError::UnknownFamily(other.to_string())),
        })
    }

    pub fn all(parameter: f64) -> Vec<Self> {
        Self::NAMES
            .iter()
            .map(|n| Self::by_name(n, parameter).expect("listed"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => Self::NAMES[0],
            Self::LocalNonlinearPhase { .. } => Self::NAMES[1],
            Self::GlobalCoupledRotation { .. } => Self::NAMES[2],
            Self::LocalNumberRotation { .. } => Self::NAMES[3],
            Self::TimeStepPhase { .. } => Self::NAMES[4],
            Self::LocalNonlinearRotation { .. } => Self::NAMES[5],
        }
    }

    pub fn role(&self) -> FamilyRole {
        match self {
            Self::Identity => FamilyRole::Witness,
            Self::LocalNonlinearPhase { .. } => FamilyRole::Candidate,
            Self::GlobalCoupledRotation { .. } => FamilyRole::Control { constraint: 1 },
            Self::LocalNumberRotation { .. } => FamilyRole::Control { constraint: 2 },
            Self::TimeStepPhase { .. } => FamilyRole::Control { constraint: 3 },
            Self::LocalNonlinearRotation { .. } => FamilyRole::Experimental,
        }
    }

    pub fn build(&self, model: LatticeModel) -> Result<RegionOperatorAssignment> {
        let all_sites: Vec<usize> = (0..model.n_sites).collect();
        let total = Arc::new(number_counts(&model, &all_sites));
        let family = *self;
        RegionOperatorAssignment::from_fn(model, self.name(), move |region| {
            family.map_for(&model, region, &total)
        })
    }

    fn map_for(&self, model: &LatticeModel, region: &LatticeRegion, total: &Arc<Vec<f64>>) -> NonlinearMap {
        let dim = model.dim();
        let name = format!(
            "{}@{}:{}-{}",
            self.name(),
            region.time_step(),
            region.first(),
            region.last()
        );
        let local = Arc::new(number_counts(model, &region.sites()));
        match *self {
            Self::Identity => NonlinearMap::identity(dim),
            Self::LocalNonlinearPhase { lambda } => {
                let (c, ci) = (local.clone(), local);
                NonlinearMap::new(name, dim, move |v| {
                    v * C64::from_polar(1.0, lambda * weighted_mean(&c, v))
                })
                .claim_norm_preserving()
                .with_inverse(move |v| v * C64::from_polar(1.0, -lambda * weighted_mean(&ci, v)))
            }
            Self::GlobalCoupledRotation { lambda } => nonlinear_rotation(name, dim, total.clone(), lambda),
            Self::LocalNumberRotation { lambda } => {
                let op = Operator::diagonal(&local).unitary_exp(lambda).expect("real diagonal");
                let named = NonlinearMap::linear(name, op.certify(FLAG_TOL));
                debug_assert!(named.claims().invertible);
                named
            }
            Self::TimeStepPhase { kappa } => {
                let phase = C64::from_polar(1.0, kappa * region.time_step() as f64);
                NonlinearMap::new(name, dim, move |v| v * phase)
                    .claim_norm_preserving()
                    .with_inverse(move |v| v * phase.conj())
            }
            Self::LocalNonlinearRotation { lambda } => nonlinear_rotation(name, dim, local, lambda),
        }
    }
}

/// `v ↦ exp(−iλ c(v) N) v` for diagonal `N`; `c` is invariant under the
/// rotation, so the inverse rotates by `+λ c`.
fn nonlinear_rotation(name: String, dim: usize, counts: Arc<Vec<f64>>, lambda: f64) -> NonlinearMap {
    let angle = {
        let counts = counts.clone();
        move |v: &CVector| {
            let n2 = v.norm_squared();
            if n2 == 0.0 {
                0.0
            } else {
                lambda * weighted_mean(&counts, v) / n2
            }
        }
    };
    let (fwd_counts, inv_counts, inv_angle) = (counts.clone(), counts, angle.clone());
    NonlinearMap::new(name, dim, move |v| diagonal_phase(&fwd_counts, angle(v), v))
        .claim_norm_preserving()
        .with_inverse(move |v| diagonal_phase(&inv_counts, -inv_angle(v), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed_local, StateVector};
    use crate::sampling;

    fn model() -> LatticeModel {
        LatticeModel::new(4, 3, true).unwrap()
    }

    #[test]
    fn translation_moves_number_operators() {
        let m = model();
        for k in 0..4 {
            let u = translation_unitary(&m, k);
            assert!(u.is_unitary(1e-15));
            for s in 0..4 {
                let n_s = Operator::diagonal(&number_counts(&m, &[s]));
                let n_shift = Operator::diagonal(&number_counts(&m, &[(s + k) % 4]));
                let conj = &(&u.adjoint() * &n_s) * &u;
                assert!(conj.approx_eq(&n_shift, 0.0), "k={k} s={s}");
            }
        }
    }

    #[test]
    fn fast_translation_matches_matrix() {
        let m = model();
        let v = sampling::random_unit_vector(&mut sampling::rng(1), 16).into_amplitudes();
        let u = translation_unitary(&m, 3);
        assert_eq!(translate(&m, 3, &v), u.apply(&v));
        assert_eq!(translate_back(&m, 3, &translate(&m, 3, &v)), v);
    }

    #[test]
    fn number_counts_match_embedded_operator() {
        let m = model();
        let n1 = Operator::diagonal(&[0.0, 1.0]);
        let sum = &embed_local(&n1, &[3], 4).unwrap() + &embed_local(&n1, &[0], 4).unwrap();
        assert!(Operator::diagonal(&number_counts(&m, &[3, 0])).approx_eq(&sum, 0.0));
    }

    #[test]
    fn every_family_builds_and_inverts() {
        for family in Family::all(0.8) {
            let a = family.build(model()).unwrap();
            assert_eq!(a.regions().count(), 39);
            for map in a.assign.values().take(5) {
                assert!(map.verify(20, 2).passed(), "{}", map.name());
            }
        }
    }

    #[test]
    fn local_phase_value() {
        // |ψ⟩ = |1000⟩: ⟨N_{site 0}⟩ = 1, so B = e^{iλ}
        let m = model();
        let a = Family::LocalNonlinearPhase { lambda: 0.3 }.build(m).unwrap();
        let region = LatticeRegion::new(m, 0, 0, 0).unwrap();
        let psi = StateVector::basis(16, 0b1000);
        let out = a.get(&region).unwrap().apply(psi.amplitudes());
        assert!((out[8] - C64::from_polar(1.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn unknown_family() {
        assert!(matches!(
            Family::by_name("nope", 1.0),
            Err(ModifiedBornError::UnknownFamily(_))
        ));
    }
}
