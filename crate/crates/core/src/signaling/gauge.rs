use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::law::{evolve_nonlinear_unnormalized, NonlinearLaw};
use super::{Result, SignalingError};
use crate::hilbert::{
    pauli, CVector, MapVerification, NonlinearMap, Operator, SpectralObservable, C64,
};
use crate::sampling;

/// Statistics agreement required between the two pictures.
pub const GAUGE_TOL: f64 = 1e-9;
/// Samples used by [`gauge_transform`] to check the map's flags.
const FLAG_SAMPLES: usize = 64;

/// Invertible norm-preserving relabelling `T` of Hilbert space.
#[derive(Clone, Debug)]
pub struct GaugeMap {
    map: NonlinearMap,
    inverse: NonlinearMap,
}

impl GaugeMap {
    /// Uses the inverse attached to `map`.
    pub fn new(map: NonlinearMap) -> Result<Self> {
        let inverse = map.inverse_map().ok_or_else(|| SignalingError::Unverified {
            name: map.name().to_string(),
            detail: "no inverse supplied".into(),
        })?;
        Ok(Self { map, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(NonlinearMap::identity(dim)).expect("has inverse")
    }

    pub fn global_phase(dim: usize, alpha: f64) -> Self {
        Self::new(NonlinearMap::global_phase(dim, alpha)).expect("has inverse")
    }

    /// `ψ ↦ exp(iλ|⟨e₁,ψ⟩|²) ψ`. The modulus of the first amplitude is
    /// unchanged by the map, so the inverse uses the opposite phase.
    pub fn nonlinear_phase(dim: usize, lambda: f64) -> Self {
        let phase = move |v: &CVector, sign: f64| {
            let a = if v.is_empty() { 0.0 } else { v[0].norm_sqr() };
            v * C64::from_polar(1.0, sign * lambda * a)
        };
        let map = NonlinearMap::new(format!("nonlinear-phase({lambda})"), dim, move |v| {
            phase(v, 1.0)
        })
        .claim_norm_preserving()
        .with_inverse(move |v| phase(v, -1.0));
        Self::new(map).expect("has inverse")
    }

    /// `ψ ↦ exp(−iλ f(ψ) G) ψ` with `f(ψ) = ⟨ψ|G|ψ⟩/‖ψ‖²`. The rotation
    /// commutes with `G`, so `f` is unchanged and the inverse rotates back.
    pub fn nonlinear_rotation(generator: Operator, lambda: f64) -> Result<Self> {
        generator.require_hermitian(crate::hilbert::FLAG_TOL)?;
        let dim = generator.dim();
        let g = Arc::new(generator);
        let rotate = {
            let g = g.clone();
            move |v: &CVector, sign: f64| -> CVector {
                let n2 = v.norm_squared();
                if n2 == 0.0 {
                    return v.clone();
                }
                let f = v.dotc(&g.apply(v)).re / n2;
                g.unitary_exp(sign * lambda * f)
                    .expect("hermitian checked")
                    .apply(v)
            }
        };
        let back = rotate.clone();
        let map = NonlinearMap::new(format!("nonlinear-rotation({lambda})"), dim, move |v| {
            rotate(v, 1.0)
        })
        .claim_norm_preserving()
        .with_inverse(move |v| back(v, -1.0));
        Self::new(map)
    }

    /// Negative control: the nonlinear rotation with its inverse replaced by
    /// the identity.
    pub fn broken(dim: usize, lambda: f64) -> Self {
        let good = Self::nonlinear_rotation(default_generator(dim), lambda).expect("hermitian");
        let map = good
            .map
            .replace_inverse(Arc::new(|v: &CVector| v.clone()));
        let mut out = Self::new(map).expect("has inverse");
        out.map = rename(&out.map, format!("broken-rotation({lambda})"));
        out.inverse = rename(&out.inverse, format!("broken-rotation({lambda})^-1"));
        out
    }

    /// Identity, global phase and nonlinear phase: maps expected to pass.
    pub fn shipped(dim: usize) -> Vec<Self> {
        vec![
            Self::identity(dim),
            Self::global_phase(dim, 0.4),
            Self::nonlinear_phase(dim, 0.7),
        ]
    }

    /// Maps available by name: `identity`, `global-phase`, `nonlinear-phase`,
    /// `nonlinear-rotation`, `broken`. `parameter` is α or λ.
    pub fn by_name(name: &str, dim: usize, parameter: f64) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity(dim)),
            "global-phase" => Some(Self::global_phase(dim, parameter)),
            "nonlinear-phase" => Some(Self::nonlinear_phase(dim, parameter)),
            "nonlinear-rotation" => Self::nonlinear_rotation(default_generator(dim), parameter).ok(),
            "broken" => Some(Self::broken(dim, parameter)),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        self.map.name()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn map(&self) -> &NonlinearMap {
        &self.map
    }

    pub fn inverse(&self) -> &NonlinearMap {
        &self.inverse
    }

    pub fn forward(&self, v: &CVector) -> CVector {
        self.map.apply(v)
    }

    pub fn backward(&self, v: &CVector) -> CVector {
        self.inverse.apply(v)
    }

    pub fn verify(&self, samples: usize, seed: u64) -> MapVerification {
        self.map.verify(samples, seed)
    }
}

fn rename(map: &NonlinearMap, name: String) -> NonlinearMap {
    let f = map.forward_fn();
    let mut out = NonlinearMap::new(name, map.dim(), move |v| f(v));
    if map.claims().norm_preserving {
        out = out.claim_norm_preserving();
    }
    if let Some(inv) = map.inverse_map() {
        let g = inv.forward_fn();
        out = out.with_inverse(move |v| g(v));
    }
    out
}

/// Generator of the nonlinear rotation: the Fourier-basis number operator.
fn default_generator(dim: usize) -> Operator {
    pauli::fourier_observable(dim).reconstruct()
}

/// Time evolution of a theory: linear `exp(−iHt)` or a nonlinear law.
#[derive(Clone, Debug)]
pub enum Evolution {
    Hamiltonian(Operator),
    Law { law: NonlinearLaw, dt: f64 },
}

impl Evolution {
    pub fn step(&self, v: &CVector, t: f64) -> Result<CVector> {
        match self {
            Evolution::Hamiltonian(h) => Ok(h.unitary_exp(t)?.apply(v)),
            Evolution::Law { law, dt } => evolve_nonlinear_unnormalized(v, law, t, *dt),
        }
    }
}

/// One protocol step: evolve for `t`, then select `outcome` of `families[family]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Step {
    pub t: f64,
    pub family: usize,
    pub outcome: usize,
}

#[derive(Clone, Debug)]
pub struct Theory {
    dim: usize,
    evolution: Evolution,
    families: Vec<SpectralObservable>,
}

impl Theory {
    pub fn new(dim: usize, evolution: Evolution, families: Vec<SpectralObservable>) -> Result<Self> {
        if let Evolution::Hamiltonian(h) = &evolution {
            if h.dim() != dim {
                return Err(SignalingError::Invalid(format!(
                    "hamiltonian has dimension {}, theory {dim}",
                    h.dim()
                )));
            }
            h.require_hermitian(crate::hilbert::FLAG_TOL)?;
        }
        if families.is_empty() {
            return Err(SignalingError::Invalid("theory needs a projector family".into()));
        }
        if let Some(f) = families.iter().find(|f| f.dim() != dim) {
            return Err(SignalingError::Invalid(format!(
                "projector family has dimension {}, theory {dim}",
                f.dim()
            )));
        }
        Ok(Self {
            dim,
            evolution,
            families,
        })
    }

    /// Random hamiltonian and two random observables.
    pub fn random(rng: &mut impl Rng, dim: usize) -> Self {
        let h = sampling::random_hermitian(rng, dim);
        let families = vec![
            sampling::random_observable(rng, dim),
            sampling::random_observable(rng, dim),
        ];
        Self::new(dim, Evolution::Hamiltonian(h), families).expect("consistent dimensions")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn families(&self) -> &[SpectralObservable] {
        &self.families
    }

    fn projector(&self, step: &Step) -> Result<&Operator> {
        self.families
            .get(step.family)
            .and_then(|f| f.projector(step.outcome))
            .ok_or_else(|| SignalingError::Invalid(format!("no outcome {step:?}")))
    }

    /// `‖P_n U(t_n) ⋯ P_1 U(t_1) ψ‖²`.
    pub fn sequence_probability(&self, psi: &CVector, protocol: &[Step]) -> Result<f64> {
        let mut v = psi.clone();
        for step in protocol {
            v = self.evolution.step(&v, step.t)?;
            v = self.projector(step)?.apply(&v);
        }
        Ok(v.norm_squared())
    }

    fn random_protocol(&self, rng: &mut impl Rng) -> Vec<Step> {
        let len = rng.random_range(1..=3);
        (0..len)
            .map(|_| {
                let family = rng.random_range(0..self.families.len());
                Step {
                    t: rng.random_range(0.0..2.0),
                    family,
                    outcome: rng.random_range(0..self.families[family].len()),
                }
            })
            .collect()
    }
}

/// A theory described in gauge-transformed coordinates `Φ = TΨ`.
#[derive(Clone, Debug)]
pub struct GaugedTheory {
    theory: Theory,
    gauge: GaugeMap,
}

impl GaugedTheory {
    pub fn gauge(&self) -> &GaugeMap {
        &self.gauge
    }

    pub fn prepare(&self, psi: &CVector) -> CVector {
        self.gauge.forward(psi)
    }

    /// `T ∘ U(t) ∘ T⁻¹`.
    pub fn evolve(&self, phi: &CVector, t: f64) -> Result<CVector> {
        let v = self.theory.evolution.step(&self.gauge.backward(phi), t)?;
        Ok(self.gauge.forward(&v))
    }

    /// `T ∘ P ∘ T⁻¹`.
    pub fn project(&self, phi: &CVector, p: &Operator) -> CVector {
        self.gauge.forward(&p.apply(&self.gauge.backward(phi)))
    }

    /// `‖P T⁻¹(Φ)‖²`.
    pub fn weight(&self, phi: &CVector, p: &Operator) -> f64 {
        p.apply(&self.gauge.backward(phi)).norm_squared()
    }

    pub fn sequence_probability(&self, psi: &CVector, protocol: &[Step]) -> Result<f64> {
        let mut phi = self.prepare(psi);
        let Some((last, rest)) = protocol.split_last() else {
            return Ok(self.gauge.backward(&phi).norm_squared());
        };
        for step in rest {
            phi = self.evolve(&phi, step.t)?;
            phi = self.project(&phi, self.theory.projector(step)?);
        }
        phi = self.evolve(&phi, last.t)?;
        Ok(self.weight(&phi, self.theory.projector(last)?))
    }
}

/// The theory in `T`-coordinates; refuses maps whose claimed flags fail.
pub fn gauge_transform(theory: &Theory, gauge: &GaugeMap) -> Result<GaugedTheory> {
    if gauge.dim() != theory.dim {
        return Err(SignalingError::Invalid(format!(
            "gauge map has dimension {}, theory {}",
            gauge.dim(),
            theory.dim
        )));
    }
    let check = gauge.verify(FLAG_SAMPLES, 0);
    if !(check.passed() && gauge.map.claims().norm_preserving && gauge.map.claims().invertible) {
        return Err(SignalingError::Unverified {
            name: gauge.name().to_string(),
            detail: format!(
                "norm deviation {:e}, inverse deviation {:?}",
                check.max_norm_deviation, check.max_inverse_deviation
            ),
        });
    }
    Ok(unchecked(theory, gauge))
}

fn unchecked(theory: &Theory, gauge: &GaugeMap) -> GaugedTheory {
    GaugedTheory {
        theory: theory.clone(),
        gauge: gauge.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeReport {
    pub gauge: String,
    pub samples: usize,
    pub flags: MapVerification,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    /// Flags hold and the two pictures agree within `tolerance`.
    pub pass: bool,
}

/// Compares outcome statistics of both pictures on `samples` random initial
/// states and protocols. Failures are reported, never raised.
pub fn verify_gauge_equivalence(
    theory: &Theory,
    gauge: &GaugeMap,
    samples: usize,
    seed: u64,
) -> GaugeReport {
    let flags = gauge.verify(FLAG_SAMPLES, seed);
    let max_discrepancy = if gauge.dim() == theory.dim {
        let gauged = unchecked(theory, gauge);
        (0..samples as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = sampling::stream(seed, k);
                let psi = sampling::random_unit_vector(&mut rng, theory.dim);
                let protocol = theory.random_protocol(&mut rng);
                let a = theory.sequence_probability(psi.amplitudes(), &protocol);
                let b = gauged.sequence_probability(psi.amplitudes(), &protocol);
                match (a, b) {
                    (Ok(a), Ok(b)) => (a - b).abs(),
                    _ => f64::INFINITY,
                }
            })
            .reduce(|| 0.0, f64::max)
    } else {
        f64::INFINITY
    };
    GaugeReport {
        gauge: gauge.name().to_string(),
        samples,
        pass: flags.passed() && max_discrepancy < GAUGE_TOL,
        flags,
        max_discrepancy,
        tolerance: GAUGE_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theory(seed: u64, dim: usize) -> Theory {
        Theory::random(&mut sampling::rng(seed), dim)
    }

    #[test]
    fn identity_gauge_is_exact() {
        let th = theory(1, 3);
        let r = verify_gauge_equivalence(&th, &GaugeMap::identity(3), 50, 0);
        assert_eq!(r.max_discrepancy, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn global_phase_gauge_agrees() {
        let th = theory(2, 3);
        let r = verify_gauge_equivalence(&th, &GaugeMap::global_phase(3, 1.1), 100, 3);
        assert!(r.max_discrepancy < 1e-12, "{r:?}");
    }

    #[test]
    fn nonlinear_phase_gauge_agrees() {
        for dim in [2, 3, 4] {
            let th = theory(10 + dim as u64, dim);
            let r = verify_gauge_equivalence(&th, &GaugeMap::nonlinear_phase(dim, 0.7), 100, 5);
            assert!(r.pass, "{r:?}");
            assert!(r.max_discrepancy < 1e-10);
        }
    }

    #[test]
    fn nonlinear_rotation_gauge_agrees() {
        let th = theory(4, 3);
        let g = GaugeMap::nonlinear_rotation(default_generator(3), 1.3).unwrap();
        assert!(verify_gauge_equivalence(&th, &g, 100, 6).pass);
    }

    #[test]
    fn nonlinear_law_theory_is_gauge_invariant() {
        let th = Theory::new(
            2,
            Evolution::Law {
                law: NonlinearLaw::x_feedback(),
                dt: 1e-2,
            },
            vec![
                pauli::pauli_observable(pauli::Axis::Z),
                pauli::pauli_observable(pauli::Axis::X),
            ],
        )
        .unwrap();
        let r = verify_gauge_equivalence(&th, &GaugeMap::nonlinear_phase(2, 0.7), 20, 1);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn broken_inverse_is_flagged() {
        let th = theory(7, 3);
        let broken = GaugeMap::broken(3, 1.3);
        let r = verify_gauge_equivalence(&th, &broken, 100, 0);
        assert!(!r.pass);
        assert!(!r.flags.inverse_ok);
        assert!(r.max_discrepancy > 1e-3, "{r:?}");
        assert!(matches!(
            gauge_transform(&th, &broken),
            Err(SignalingError::Unverified { .. })
        ));
    }

    #[test]
    fn transform_preserves_probabilities_pointwise() {
        let th = theory(8, 2);
        let g = gauge_transform(&th, &GaugeMap::nonlinear_phase(2, 0.7)).unwrap();
        let psi = sampling::random_unit_vector(&mut sampling::rng(9), 2);
        let protocol = [
            Step { t: 0.3, family: 0, outcome: 0 },
            Step { t: 1.1, family: 1, outcome: 1 },
        ];
        let a = th.sequence_probability(psi.amplitudes(), &protocol).unwrap();
        let b = g.sequence_probability(psi.amplitudes(), &protocol).unwrap();
        assert!((a - b).abs() < 1e-12);
        // the gauged state itself differs from the original
        let phi = g.prepare(psi.amplitudes());
        assert!((phi - psi.amplitudes()).norm() > 1e-3);
    }

    #[test]
    fn shipped_maps_verify() {
        for g in GaugeMap::shipped(4) {
            assert!(g.verify(50, 1).passed(), "{}", g.name());
        }
        assert!(GaugeMap::by_name("nope", 2, 0.0).is_none());
        assert_eq!(GaugeMap::by_name("broken", 2, 1.0).unwrap().name(), "broken-rotation(1)");
    }

    #[test]
    fn reports_are_deterministic() {
        let th = theory(3, 3);
        let g = GaugeMap::nonlinear_phase(3, 0.7);
        let a = verify_gauge_equivalence(&th, &g, 64, 11);
        let b = verify_gauge_equivalence(&th, &g, 64, 11);
        assert_eq!(a, b);
    }
}
