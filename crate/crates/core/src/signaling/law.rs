use std::fmt;
use std::sync::Arc;

use super::{Result, SignalingError};
use crate::hilbert::{pauli, CVector, Operator, StateVector, C64, FLAG_TOL};

/// Default RK4 step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Largest tolerated `|‖ψ‖ − 1|` after a single step.
const MAX_DRIFT: f64 = 1e-6;

pub type HamiltonianFn = Arc<dyn Fn(&StateVector) -> Operator + Send + Sync>;

/// A state-dependent Hamiltonian `ψ ↦ H(ψ)` driving `ψ′ = −i H(ψ) ψ`.
#[derive(Clone)]
pub struct NonlinearLaw {
    name: String,
    description: String,
    hamiltonian: HamiltonianFn,
}

impl fmt::Debug for NonlinearLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearLaw")
            .field("name", &self.name)
            .finish()
    }
}

impl NonlinearLaw {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        hamiltonian: impl Fn(&StateVector) -> Operator + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            hamiltonian: Arc::new(hamiltonian),
        }
    }

    /// `H(ψ) = 0`.
    pub fn null(dim: usize) -> Self {
        Self::new("null", "H = 0", move |_| Operator::zeros(dim))
    }

    /// State-independent `H`.
    pub fn linear(name: impl Into<String>, h: Operator) -> Self {
        Self::new(name, "state-independent hamiltonian", move |_| h.clone())
    }

    /// `H(ψ) = ⟨ψ|σx|ψ⟩ σz` on one qubit.
    pub fn x_feedback() -> Self {
        let sx = pauli::sigma_x();
        let sz = pauli::sigma_z();
        Self::new("x-feedback", "H(psi) = <psi|sigma_x|psi> sigma_z", move |psi| {
            let c = psi.expectation(&sx);
            sz.scale(C64::new(c, 0.0))
        })
    }

    /// Qubit laws available by name: `null`, `linear-z`, `x-feedback`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "null" => Some(Self::null(2)),
            "linear-z" => Some(Self::linear("linear-z", pauli::sigma_z())),
            "x-feedback" => Some(Self::x_feedback()),
            _ => None,
        }
    }

    pub fn shipped() -> Vec<Self> {
        ["null", "linear-z", "x-feedback"]
            .iter()
            .filter_map(|n| Self::by_name(n))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn hamiltonian(&self, psi: &StateVector) -> Operator {
        (self.hamiltonian)(psi)
    }

    fn checked_hamiltonian(&self, psi: &StateVector) -> Result<Operator> {
        let h = self.hamiltonian(psi);
        let (_, _, asymmetry) = h.max_asymmetry();
        if asymmetry > FLAG_TOL {
            return Err(SignalingError::NonHermitianLaw {
                law: self.name.clone(),
                asymmetry,
            });
        }
        Ok(h)
    }

    /// `−i H(v/‖v‖) v`, the right-hand side at an intermediate RK stage.
    fn velocity(&self, v: &CVector) -> Result<CVector> {
        let psi = StateVector::normalized(v.clone())?;
        let h = self.checked_hamiltonian(&psi)?;
        Ok(h.apply(v) * C64::new(0.0, -1.0))
    }
}

/// Integrates `ψ′ = −i H(ψ) ψ` from 0 to `t` with classical RK4, renormalizing
/// after every step. The last step is shortened to land on `t`.
pub fn evolve_nonlinear(
    psi: &StateVector,
    law: &NonlinearLaw,
    t: f64,
    dt: f64,
) -> Result<StateVector> {
    if !(dt > 0.0 && dt.is_finite() && t >= 0.0 && t.is_finite()) {
        return Err(SignalingError::BadStep { dt, t });
    }
    let mut v = psi.amplitudes().clone();
    let mut elapsed = 0.0;
    while elapsed < t {
        let h = dt.min(t - elapsed);
        let half = C64::new(h / 2.0, 0.0);
        let k1 = law.velocity(&v)?;
        let k2 = law.velocity(&(&v + &k1 * half))?;
        let k3 = law.velocity(&(&v + &k2 * half))?;
        let k4 = law.velocity(&(&v + &k3 * C64::new(h, 0.0)))?;
        v += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
            * C64::new(h / 6.0, 0.0);
        elapsed += h;
        let norm = v.norm();
        if (norm - 1.0).abs() > MAX_DRIFT || !norm.is_finite() {
            return Err(SignalingError::Integration {
                drift: (norm - 1.0).abs(),
                time: elapsed,
            });
        }
        v.unscale_mut(norm);
    }
    Ok(StateVector::normalized(v)?)
}

/// Evolves the ray of `v` and restores its norm, so the law also acts on
/// vectors shortened by earlier projections.
pub fn evolve_nonlinear_unnormalized(
    v: &CVector,
    law: &NonlinearLaw,
    t: f64,
    dt: f64,
) -> Result<CVector> {
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(v.clone());
    }
    let psi = StateVector::normalized(v.clone())?;
    Ok(evolve_nonlinear(&psi, law, t, dt)?.into_amplitudes() * C64::new(norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use proptest::prelude::*;

    fn sy(psi: &StateVector) -> f64 {
        psi.expectation(&pauli::sigma_y())
    }

    #[test]
    fn null_law_leaves_state() {
        let psi = sampling::random_unit_vector(&mut sampling::rng(1), 2);
        let out = evolve_nonlinear(&psi, &NonlinearLaw::null(2), 1.0, DEFAULT_DT).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn linear_z_on_eigenstate_is_phase_only() {
        let law = NonlinearLaw::by_name("linear-z").unwrap();
        let out = evolve_nonlinear(&pauli::ket0(), &law, 2.0, DEFAULT_DT).unwrap();
        assert!((out.inner(&pauli::ket0()).norm() - 1.0).abs() < 1e-12);
        // RK4 reproduces exp(−iσz t) to local order dt⁵
        let exact = C64::from_polar(1.0, -2.0);
        assert!((out.amplitudes()[0] - exact).norm() < 1e-10);
    }

    #[test]
    fn x_feedback_closed_form() {
        // Bloch reduction: x = cos φ, y = sin φ, φ′ = 2 cos φ ⇒ y(t) = tanh 2t
        let law = NonlinearLaw::x_feedback();
        for start in [pauli::plus(), pauli::minus()] {
            for t in [0.0, 0.25, 0.5, 1.0, 3.0] {
                let out = evolve_nonlinear(&start, &law, t, DEFAULT_DT).unwrap();
                assert!((sy(&out) - (2.0 * t).tanh()).abs() < 1e-6, "t={t}");
            }
        }
    }

    #[test]
    fn independent_euler_oracle_agrees() {
        // crude Bloch-vector Euler integration with tiny steps
        let (mut x, mut y, mut z) = (1.0f64, 0.0f64, 0.0f64);
        let h = 1e-6;
        for _ in 0..500_000 {
            let w = 2.0 * x;
            let (dx, dy) = (-w * y, w * x);
            x += h * dx;
            y += h * dy;
            z += 0.0;
        }
        let out = evolve_nonlinear(&pauli::plus(), &NonlinearLaw::x_feedback(), 0.5, DEFAULT_DT).unwrap();
        assert!((sy(&out) - y).abs() < 1e-5);
        assert!((out.expectation(&pauli::sigma_x()) - x).abs() < 1e-5);
        assert!(z.abs() < 1e-12);
    }

    #[test]
    fn large_steps_are_rejected() {
        let big = NonlinearLaw::linear("big", pauli::sigma_x().scale(C64::new(1e3, 0.0)));
        assert!(matches!(
            evolve_nonlinear(&pauli::ket0(), &big, 1.0, 0.1),
            Err(SignalingError::Integration { .. })
        ));
        assert!(evolve_nonlinear(&pauli::ket0(), &big, 1.0, 0.0).is_err());
        assert!(evolve_nonlinear(&pauli::ket0(), &big, -1.0, 0.1).is_err());
    }

    #[test]
    fn non_hermitian_law_is_rejected() {
        let bad = NonlinearLaw::new("bad", "", |_| {
            Operator::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
        });
        assert!(matches!(
            evolve_nonlinear(&pauli::ket0(), &bad, 0.1, DEFAULT_DT),
            Err(SignalingError::NonHermitianLaw { .. })
        ));
    }

    #[test]
    fn unnormalized_evolution_keeps_norm() {
        let v = pauli::plus().into_amplitudes() * C64::new(0.5, 0.0);
        let out = evolve_nonlinear_unnormalized(&v, &NonlinearLaw::x_feedback(), 0.3, DEFAULT_DT).unwrap();
        assert!((out.norm() - 0.5).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn shipped_laws_preserve_norm(seed in any::<u64>(), t in 0.0..2.0f64) {
            let psi = sampling::random_unit_vector(&mut sampling::rng(seed), 2);
            for law in NonlinearLaw::shipped() {
                let out = evolve_nonlinear(&psi, &law, t, DEFAULT_DT).unwrap();
                prop_assert!((out.norm() - 1.0).abs() < 1e-9);
                prop_assert!(law.hamiltonian(&psi).is_hermitian(1e-12));
            }
        }
    }
}
