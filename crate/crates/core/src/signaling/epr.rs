use rayon::prelude::*;
use serde::Serialize;

use super::law::{evolve_nonlinear, NonlinearLaw, DEFAULT_DT};
use super::{Result, SignalingError};
use crate::hilbert::{
    pauli, CMatrix, CVector, Operator, SpectralObservable, StateVector, Tensor, C64,
};

/// Ensemble weights below this are dropped.
const MEMBER_CUTOFF: f64 = 1e-14;
/// Singular values below this do not count toward the Schmidt rank.
const SCHMIDT_TOL: f64 = 1e-10;

/// Alice (left factor) chooses between two measurements on her half of a
/// shared pure state; Bob (right factor) evolves his half under `law` and
/// records `⟨bob_observable⟩`.
#[derive(Clone, Debug)]
pub struct EprScenario {
    pub shared_state: StateVector,
    pub alice_z: SpectralObservable,
    pub alice_x: SpectralObservable,
    pub bob_observable: SpectralObservable,
    pub law: NonlinearLaw,
    pub t: f64,
    pub dt: f64,
}

impl EprScenario {
    /// Singlet, Alice σz or σx, Bob σy under the x-feedback law.
    pub fn standard(t: f64) -> Self {
        Self {
            shared_state: pauli::singlet(),
            alice_z: pauli::pauli_observable(pauli::Axis::Z),
            alice_x: pauli::pauli_observable(pauli::Axis::X),
            bob_observable: pauli::pauli_observable(pauli::Axis::Y),
            law: NonlinearLaw::x_feedback(),
            t,
            dt: DEFAULT_DT,
        }
    }

    pub fn with_law(mut self, law: NonlinearLaw) -> Self {
        self.law = law;
        self
    }

    fn dims(&self) -> Result<(usize, usize)> {
        let alice = self.alice_z.dim();
        let shared = self.shared_state.dim();
        if self.alice_x.dim() != alice || !shared.is_multiple_of(alice) {
            return Err(SignalingError::BadBipartition {
                shared,
                alice,
                bob: shared / alice.max(1),
            });
        }
        let bob = shared / alice;
        if self.bob_observable.dim() != bob {
            return Err(SignalingError::BadBipartition {
                shared,
                alice,
                bob: self.bob_observable.dim(),
            });
        }
        Ok((alice, bob))
    }
}

/// Bob-side proper mixture of pure states left by one of Alice's choices.
#[derive(Clone, Debug, PartialEq)]
pub struct BobEnsemble {
    pub members: Vec<(f64, StateVector)>,
}

impl BobEnsemble {
    /// For each outcome of `alice`, the reduced state of Bob's factor in the
    /// collapsed global state, split into its eigenvectors.
    pub fn induced(shared: &StateVector, alice: &SpectralObservable, bob_dim: usize) -> Result<Self> {
        let alice_dim = alice.dim();
        let mut members = Vec::new();
        for p in alice.projectors() {
            let collapsed = p.tensor(&Operator::identity(bob_dim)).apply(shared.amplitudes());
            let m = amplitude_matrix(&collapsed, alice_dim, bob_dim);
            let rho_b = m.transpose() * m.conjugate();
            let eig = rho_b.symmetric_eigen();
            for (k, &w) in eig.eigenvalues.iter().enumerate() {
                if w > MEMBER_CUTOFF {
                    let v: CVector = eig.eigenvectors.column(k).into_owned();
                    members.push((w, StateVector::normalized(v)?));
                }
            }
        }
        Ok(Self { members })
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(w, _)| w).sum()
    }

    pub fn density(&self) -> Operator {
        let dim = self.members[0].1.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, psi) in &self.members {
            m += psi.density().operator().matrix() * C64::new(*w, 0.0);
        }
        Operator::new(m).expect("square").hermitian_part()
    }
}

fn amplitude_matrix(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |a, b| v[a * cols + b])
}

fn schmidt_rank(psi: &StateVector, alice: usize, bob: usize) -> usize {
    amplitude_matrix(psi.amplitudes(), alice, bob)
        .singular_values()
        .iter()
        .filter(|&&s| s > SCHMIDT_TOL)
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EprSignal {
    /// Ensemble average of Bob's observable after Alice's first choice.
    pub signal_z_choice: f64,
    pub signal_x_choice: f64,
    /// `signal_x_choice − signal_z_choice`.
    pub delta: f64,
    pub schmidt_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignalSample {
    pub t: f64,
    pub signal_z: f64,
    pub signal_x: f64,
    pub delta: f64,
}

impl SignalSample {
    pub fn to_csv(samples: &[SignalSample]) -> String {
        let mut out = String::from("t,signal_z,signal_x,delta\n");
        for s in samples {
            out.push_str(&format!("{},{},{},{}\n", s.t, s.signal_z, s.signal_x, s.delta));
        }
        out
    }
}

/// Ensemble averages at `n_points + 1` evenly spaced times in `[0, s.t]`.
pub fn epr_time_series(s: &EprScenario, n_points: usize) -> Result<Vec<SignalSample>> {
    let (_, bob) = s.dims()?;
    let n_points = n_points.max(1);
    let observable = s.bob_observable.reconstruct();
    let ensembles = [
        BobEnsemble::induced(&s.shared_state, &s.alice_z, bob)?,
        BobEnsemble::induced(&s.shared_state, &s.alice_x, bob)?,
    ];
    // trajectories[e][m][k]: member m of ensemble e at time point k
    let trajectories: Vec<Vec<Vec<f64>>> = ensembles
        .iter()
        .map(|ens| {
            ens.members
                .par_iter()
                .map(|(_, psi)| {
                    let mut current = psi.clone();
                    let mut values = vec![current.expectation(&observable)];
                    for k in 1..=n_points {
                        let seg = s.t * k as f64 / n_points as f64
                            - s.t * (k - 1) as f64 / n_points as f64;
                        current = evolve_nonlinear(&current, &s.law, seg, s.dt)?;
                        values.push(current.expectation(&observable));
                    }
                    Ok(values)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let average = |e: usize, k: usize| -> f64 {
        ensembles[e]
            .members
            .iter()
            .zip(&trajectories[e])
            .map(|((w, _), vals)| w * vals[k])
            .sum()
    };
    Ok((0..=n_points)
        .map(|k| {
            let signal_z = average(0, k);
            let signal_x = average(1, k);
            SignalSample {
                t: s.t * k as f64 / n_points as f64,
                signal_z,
                signal_x,
                delta: signal_x - signal_z,
            }
        })
        .collect())
}

pub fn epr_signal(s: &EprScenario) -> Result<EprSignal> {
    let (alice, bob) = s.dims()?;
    let last = *epr_time_series(s, 1)?.last().expect("two samples");
    let schmidt_rank = schmidt_rank(&s.shared_state, alice, bob);
    let warning = (schmidt_rank < 2)
        .then(|| "shared state is a product state; no signal is possible".to_string());
    Ok(EprSignal {
        signal_z_choice: last.signal_z,
        signal_x_choice: last.signal_x,
        delta: last.delta,
        schmidt_rank,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use proptest::prelude::*;

    #[test]
    fn singlet_ensembles_have_equal_density() {
        let z = BobEnsemble::induced(&pauli::singlet(), &pauli::pauli_observable(pauli::Axis::Z), 2).unwrap();
        let x = BobEnsemble::induced(&pauli::singlet(), &pauli::pauli_observable(pauli::Axis::X), 2).unwrap();
        assert_eq!(z.members.len(), 2);
        assert!((z.total_weight() - 1.0).abs() < 1e-15);
        let half = Operator::identity(2).scale(C64::new(0.5, 0.0));
        assert!(z.density().approx_eq(&half, 1e-15));
        assert!(x.density().approx_eq(&half, 1e-15));
        // Alice σz up leaves Bob in |1⟩
        assert!((z.members[0].1.inner(&pauli::ket1()).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_time_gives_zero_delta() {
        let r = epr_signal(&EprScenario::standard(0.0)).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.schmidt_rank, 2);
        assert!(r.warning.is_none());
    }

    #[test]
    fn default_law_signals_tanh() {
        let r = epr_signal(&EprScenario::standard(0.5)).unwrap();
        assert!((r.delta - 1f64.tanh()).abs() < 1e-6);
        assert!((r.delta - 0.7615941559557649).abs() < 1e-6);
        assert!(r.signal_z_choice.abs() < 1e-15);
    }

    #[test]
    fn linear_law_does_not_signal() {
        let s = EprScenario::standard(0.7).with_law(NonlinearLaw::linear("x", pauli::sigma_x()));
        assert!(epr_signal(&s).unwrap().delta.abs() < 1e-10);
    }

    #[test]
    fn product_state_warns() {
        let mut s = EprScenario::standard(0.5);
        s.shared_state = pauli::ket0().tensor(&pauli::plus());
        let r = epr_signal(&s).unwrap();
        assert_eq!(r.schmidt_rank, 1);
        assert!(r.warning.is_some());
        assert!(r.delta.abs() < 1e-12);
    }

    #[test]
    fn time_series_matches_closed_form() {
        let s = EprScenario::standard(1.0);
        let series = epr_time_series(&s, 20).unwrap();
        assert_eq!(series.len(), 21);
        for p in &series {
            assert!((p.delta - (2.0 * p.t).tanh()).abs() < 1e-6, "{p:?}");
        }
        let csv = SignalSample::to_csv(&series);
        assert!(csv.starts_with("t,signal_z,signal_x,delta\n0,"));
        assert_eq!(csv.lines().count(), 22);
    }

    #[test]
    fn bad_bipartition() {
        let mut s = EprScenario::standard(0.1);
        s.shared_state = sampling::random_unit_vector(&mut sampling::rng(0), 3);
        assert!(matches!(epr_signal(&s), Err(SignalingError::BadBipartition { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn linear_laws_never_signal(seed in any::<u64>(), t in 0.0..1.5f64) {
            let mut rng = sampling::rng(seed);
            let h = sampling::random_hermitian(&mut rng, 2);
            let mut s = EprScenario::standard(t).with_law(NonlinearLaw::linear("h", h));
            s.shared_state = sampling::random_unit_vector(&mut rng, 4);
            s.alice_z = sampling::random_observable(&mut rng, 2);
            s.alice_x = sampling::random_observable(&mut rng, 2);
            s.bob_observable = sampling::random_observable(&mut rng, 2);
            prop_assert!(epr_signal(&s).unwrap().delta.abs() < 1e-10);
        }
    }
}
