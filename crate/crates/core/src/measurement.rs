//! Probability calculus for successive projective measurements.
//!
//! Measurement order is argument order: in `joint_probability(ρ, A, B, i, j)`
//! the observable `A` is measured first, so `P(i,j) = Tr(Q_j P_i ρ P_i Q_j)`.
//! Conditioning on an outcome of probability below [`ZERO_PROBABILITY`] is an
//! error rather than a NaN.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hilbert::{
    Coarsening, DensityMatrix, HilbertError, Operator, SpectralObservable, StateVector,
    FLAG_TOL,
};
use crate::spacetime::Region;

/// Conditioning threshold for `Tr(Pρ)`.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Probability comparison tolerance.
pub const PROBABILITY_TOL: f64 = 1e-10;
/// Largest commutator norm for which two instruments count as compatible.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("outcome index {index} out of range for a family of {len} outcomes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("conditioning on an outcome of probability {probability:e} (threshold {threshold:e})")]
    ZeroProbability { probability: f64, threshold: f64 },
    #[error("instruments are not compatible: max commutator norm {norm:e}")]
    Incompatible { norm: f64 },
    #[error("instrument `{label}`: {reason}")]
    InvalidInstrument { label: String, reason: String },
    #[error("fine outcome {fine_index} is not kept as its own projector by the coarse family")]
    ContextNotShared { fine_index: usize },
}

pub type Result<T, E = MeasurementError> = std::result::Result<T, E>;

fn projector(obs: &SpectralObservable, index: usize) -> Result<&Operator> {
    obs.projector(index).ok_or(MeasurementError::IndexOutOfRange {
        index,
        len: obs.len(),
    })
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(HilbertError::DimensionMismatch { expected, found }.into());
    }
    Ok(())
}

/// `Tr(Q_j P_i ρ₀ P_i Q_j)` for `A = Σ λ_i P_i` measured before `B = Σ μ_j Q_j`.
pub fn joint_probability(
    rho0: &DensityMatrix,
    a: &SpectralObservable,
    b: &SpectralObservable,
    i: usize,
    j: usize,
) -> Result<f64> {
    check_dims(rho0.dim(), a.dim())?;
    check_dims(rho0.dim(), b.dim())?;
    let p = projector(a, i)?.matrix();
    let q = projector(b, j)?.matrix();
    let m = q * p * rho0.operator().matrix() * p * q;
    Ok(m.trace().re)
}

/// Full table `P(i,j)` for `A` then `B`.
pub fn joint_distribution(
    rho0: &DensityMatrix,
    a: &SpectralObservable,
    b: &SpectralObservable,
) -> Result<OutcomeDistribution> {
    let mut out = OutcomeDistribution::default();
    for i in 0..a.len() {
        for j in 0..b.len() {
            out.insert(vec![i, j], joint_probability(rho0, a, b, i, j)?);
        }
    }
    Ok(out)
}

/// `PρP / Tr(Pρ)` with the default threshold.
pub fn luders_update(rho: &DensityMatrix, p: &Operator) -> Result<DensityMatrix> {
    luders_update_with_threshold(rho, p, ZERO_PROBABILITY)
}

pub fn luders_update_with_threshold(
    rho: &DensityMatrix,
    p: &Operator,
    threshold: f64,
) -> Result<DensityMatrix> {
    check_dims(rho.dim(), p.dim())?;
    p.require_projector(FLAG_TOL)?;
    let probability = rho.expectation(p);
    if probability <= threshold {
        return Err(MeasurementError::ZeroProbability {
            probability,
            threshold,
        });
    }
    let m = p.matrix() * rho.operator().matrix() * p.matrix();
    let op = Operator::new(m.unscale(probability))?.hermitian_part();
    Ok(DensityMatrix::new(op)?)
}

/// Pre-conditioning: `P(j|i) = Tr(Q_j P_i ρ₀ P_i Q_j) / Tr(P_i ρ₀)`.
pub fn pre_condition_probability(
    rho0: &DensityMatrix,
    a: &SpectralObservable,
    b: &SpectralObservable,
    i: usize,
    j: usize,
) -> Result<f64> {
    let joint = joint_probability(rho0, a, b, i, j)?;
    let marginal = rho0.expectation(projector(a, i)?);
    if marginal <= ZERO_PROBABILITY {
        return Err(MeasurementError::ZeroProbability {
            probability: marginal,
            threshold: ZERO_PROBABILITY,
        });
    }
    Ok(joint / marginal)
}

/// Post-conditioning on the later outcome `j`:
/// `P(i|j) = P(i,j) / Σ_k P(k,j)`, with `k` running over the outcomes of `A`.
pub fn post_condition_probability(
    rho0: &DensityMatrix,
    a: &SpectralObservable,
    b: &SpectralObservable,
    i: usize,
    j: usize,
) -> Result<f64> {
    let joint = joint_probability(rho0, a, b, i, j)?;
    let mut denominator = 0.0;
    for k in 0..a.len() {
        denominator += joint_probability(rho0, a, b, k, j)?;
    }
    if denominator <= ZERO_PROBABILITY {
        return Err(MeasurementError::ZeroProbability {
            probability: denominator,
            threshold: ZERO_PROBABILITY,
        });
    }
    Ok(joint / denominator)
}

/// `‖P₁P₂⋯PₙΨ‖²`; the last projector in the slice acts first.
pub fn sequence_probability(psi: &StateVector, projectors: &[Operator]) -> Result<f64> {
    let mut v = psi.amplitudes().clone();
    for p in projectors.iter().rev() {
        check_dims(psi.dim(), p.dim())?;
        v = p.apply(&v);
    }
    Ok(v.norm_squared())
}

/// Probabilities of every outcome tuple for a sequence of measurements; the
/// first family is measured first. Tuple entries follow measurement order.
pub fn sequence_distribution(
    psi: &StateVector,
    families: &[SpectralObservable],
) -> Result<OutcomeDistribution> {
    for f in families {
        check_dims(psi.dim(), f.dim())?;
    }
    let mut out = OutcomeDistribution::default();
    let mut stack = vec![(Vec::new(), psi.amplitudes().clone())];
    while let Some((indices, v)) = stack.pop() {
        if indices.len() == families.len() {
            out.insert(indices, v.norm_squared());
            continue;
        }
        for (k, p) in families[indices.len()].projectors().iter().enumerate() {
            let mut next = indices.clone();
            next.push(k);
            stack.push((next, p.apply(&v)));
        }
    }
    Ok(out)
}

/// Joint outcome probabilities keyed by outcome-index tuples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutcomeDistribution {
    outcomes: BTreeMap<Vec<usize>, f64>,
}

impl OutcomeDistribution {
    pub fn insert(&mut self, indices: Vec<usize>, p: f64) {
        self.outcomes.insert(indices, p);
    }

    pub fn get(&self, indices: &[usize]) -> Option<f64> {
        self.outcomes.get(indices).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.outcomes.iter()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.outcomes.values().sum()
    }
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            indices: &'a [usize],
            p: f64,
        }
        #[derive(Serialize)]
        struct Wire<'a> {
            outcomes: Vec<Entry<'a>>,
            total: f64,
        }
        Wire {
            outcomes: self
                .outcomes
                .iter()
                .map(|(k, &p)| Entry { indices: k, p })
                .collect(),
            total: self.total(),
        }
        .serialize(s)
    }
}

/// A non-contextual Lüders instrument: an observable with labelled outcomes,
/// optionally attached to a space-time region.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    label: String,
    observable: SpectralObservable,
    outcome_labels: Vec<String>,
    region: Option<Region>,
}

impl Instrument {
    pub fn new(
        label: impl Into<String>,
        observable: SpectralObservable,
        outcome_labels: Vec<String>,
    ) -> Result<Self> {
        let label = label.into();
        if outcome_labels.len() != observable.len() {
            return Err(MeasurementError::InvalidInstrument {
                label,
                reason: format!(
                    "{} outcome labels for {} projectors",
                    outcome_labels.len(),
                    observable.len()
                ),
            });
        }
        for (k, l) in outcome_labels.iter().enumerate() {
            if outcome_labels[..k].contains(l) {
                return Err(MeasurementError::InvalidInstrument {
                    label,
                    reason: format!("duplicate outcome label `{l}`"),
                });
            }
        }
        Ok(Self {
            label,
            observable,
            outcome_labels,
            region: None,
        })
    }

    /// Outcomes labelled `<label>0`, `<label>1`, ….
    pub fn with_default_labels(label: impl Into<String>, observable: SpectralObservable) -> Self {
        let label = label.into();
        let outcome_labels = (0..observable.len()).map(|k| format!("{label}{k}")).collect();
        Self {
            label,
            observable,
            outcome_labels,
            region: None,
        }
    }

    /// Single-outcome instrument whose projector is the identity.
    pub fn identity(label: impl Into<String>, dim: usize) -> Self {
        Self::with_default_labels(label, SpectralObservable::trivial(dim))
    }

    pub fn at(mut self, region: Region) -> Self {
        self.region = Some(region);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observable(&self) -> &SpectralObservable {
        &self.observable
    }

    pub fn outcome_labels(&self) -> &[String] {
        &self.outcome_labels
    }

    pub fn region(&self) -> Option<&Region> {
        self.region.as_ref()
    }

    pub fn len(&self) -> usize {
        self.observable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observable.is_empty()
    }

    pub fn projector(&self, i: usize) -> Result<&Operator> {
        projector(&self.observable, i)
    }

    /// Largest `‖[P_i, Q_j]‖` between the two instruments' projectors.
    pub fn compatibility_defect(&self, other: &Instrument) -> f64 {
        self.observable.max_commutator_norm(&other.observable)
    }

    /// The product instrument `I ∧ J` with projectors `Q_j P_i`; outcome
    /// `(i, j)` has index `i * |J| + j`. Requires compatible instruments.
    pub fn conjunction(&self, other: &Instrument) -> Result<Instrument> {
        let norm = self.compatibility_defect(other);
        if norm >= COMPATIBILITY_TOL {
            return Err(MeasurementError::Incompatible { norm });
        }
        let mut projectors = Vec::new();
        let mut labels = Vec::new();
        for (i, p) in self.observable.projectors().iter().enumerate() {
            for (j, q) in other.observable.projectors().iter().enumerate() {
                // QP is hermitian only up to the commutator
                projectors.push(Operator::new((q * p).into_matrix())?.hermitian_part());
                labels.push(format!(
                    "{}∧{}",
                    self.outcome_labels[i], other.outcome_labels[j]
                ));
            }
        }
        // vanishing products are kept so indices stay i * |J| + j
        let observable = SpectralObservable::from_projectors(projectors)?;
        Instrument::new(format!("{}∧{}", self.label, other.label), observable, labels)
    }
}

/// One conditioning step recorded in a [`PreparationProcedure`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditioningRecord {
    pub instrument: String,
    pub outcome: usize,
}

/// A state together with the instrument outcomes it was conditioned on.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparationProcedure {
    state: DensityMatrix,
    history: Vec<ConditioningRecord>,
}

impl PreparationProcedure {
    pub fn new(state: DensityMatrix) -> Self {
        Self {
            state,
            history: Vec::new(),
        }
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn history(&self) -> &[ConditioningRecord] {
        &self.history
    }

    /// `P^I_i(W) = Tr(P_i ρ_W)`.
    pub fn outcome_probability(&self, instrument: &Instrument, i: usize) -> Result<f64> {
        check_dims(self.state.dim(), instrument.observable.dim())?;
        Ok(self.state.expectation(instrument.projector(i)?))
    }

    /// `π^I_i W`: the procedure post-selected on outcome `i` of `instrument`.
    pub fn condition(&self, instrument: &Instrument, i: usize) -> Result<Self> {
        let state = luders_update(&self.state, instrument.projector(i)?)?;
        let mut history = self.history.clone();
        history.push(ConditioningRecord {
            instrument: instrument.label.clone(),
            outcome: i,
        });
        Ok(Self { state, history })
    }
}

/// Free-function form of [`PreparationProcedure::condition`].
pub fn condition(
    w: &PreparationProcedure,
    instrument: &Instrument,
    i: usize,
) -> Result<PreparationProcedure> {
    w.condition(instrument, i)
}

/// Both sides of the composition law for one outcome pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionPair {
    pub i: usize,
    pub j: usize,
    /// `P^{I∧J}_{ij}(W)`.
    pub joint: f64,
    /// `P^J_j(π^I_i W) · P^I_i(W)`.
    pub sequential: f64,
    /// `max |π^{I∧J}_{ij}W − π^J_j π^I_i W|` when both are defined.
    pub state_discrepancy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport {
    pub compatibility_defect: f64,
    pub max_probability_discrepancy: f64,
    pub max_state_discrepancy: f64,
    pub pairs: Vec<CompositionPair>,
}

impl CompositionReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_probability_discrepancy < tol && self.max_state_discrepancy < tol
    }
}

/// Evaluates `P^{I∧J}_{ij}(W) = P^J_j(π^I_i W) P^I_i(W)` and
/// `π^{I∧J}_{ij} = π^J_j π^I_i` for every outcome pair of two compatible
/// instruments.
pub fn verify_composition_law(
    w: &PreparationProcedure,
    first: &Instrument,
    second: &Instrument,
) -> Result<CompositionReport> {
    let defect = first.compatibility_defect(second);
    if defect >= COMPATIBILITY_TOL {
        return Err(MeasurementError::Incompatible { norm: defect });
    }
    let both = first.conjunction(second)?;
    let mut pairs = Vec::new();
    let mut max_p: f64 = 0.0;
    let mut max_s: f64 = 0.0;
    for i in 0..first.len() {
        let p_i = w.outcome_probability(first, i)?;
        let conditioned = if p_i > ZERO_PROBABILITY {
            Some(w.condition(first, i)?)
        } else {
            None
        };
        for j in 0..second.len() {
            let k = i * second.len() + j;
            let joint = w.outcome_probability(&both, k)?;
            let sequential = match &conditioned {
                Some(wi) => wi.outcome_probability(second, j)? * p_i,
                None => 0.0,
            };
            let state_discrepancy = match &conditioned {
                Some(wi) if joint > ZERO_PROBABILITY => {
                    let direct = w.condition(&both, k)?;
                    let stepwise = wi.condition(second, j)?;
                    Some(direct.state.max_abs_diff(&stepwise.state))
                }
                _ => None,
            };
            max_p = max_p.max((joint - sequential).abs());
            if let Some(d) = state_discrepancy {
                max_s = max_s.max(d);
            }
            pairs.push(CompositionPair {
                i,
                j,
                joint,
                sequential,
                state_discrepancy,
            });
        }
    }
    Ok(CompositionReport {
        compatibility_defect: defect,
        max_probability_discrepancy: max_p,
        max_state_discrepancy: max_s,
        pairs,
    })
}

/// Which conditioning formula a contextuality probe evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningMode {
    /// `P(j|i)`: later outcome given the earlier one.
    Pre,
    /// `P(i|j)`: earlier outcome given the later one.
    Post,
}

/// Which of the two measurements has its projector family swapped between
/// the fine and coarse context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextSide {
    /// The later measurement (whose outcome is the conditioning one under
    /// post-conditioning).
    Later,
    /// The earlier measurement (whose outcome is inferred under
    /// post-conditioning).
    Earlier,
}

/// `(p_fine, p_coarse, delta)` with `delta = p_fine − p_coarse`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContextualityReport {
    pub p_fine: f64,
    pub p_coarse: f64,
    pub delta: f64,
}

/// Post-conditioning `P(i|j)` for `A` then `B`, once with `B = b_fine` and
/// once with `B = b_coarse`. The coarse family must keep `Q_j` of the fine
/// family as one of its own projectors.
pub fn contextuality_probe(
    rho0: &DensityMatrix,
    a: &SpectralObservable,
    b_fine: &SpectralObservable,
    b_coarse: &SpectralObservable,
    i: usize,
    j: usize,
) -> Result<ContextualityReport> {
    contextuality_probe_with(
        rho0,
        a,
        b_fine,
        b_coarse,
        i,
        j,
        ConditioningMode::Post,
        ContextSide::Later,
    )
}

/// General probe. `fixed` is the measurement whose family does not change;
/// `side` says whether the fine/coarse pair is measured after (`Later`) or
/// before (`Earlier`) it. `shared` is the fine index of the projector kept by
/// the coarse family, `other` the outcome index on `fixed`.
#[allow(clippy::too_many_arguments)]
pub fn contextuality_probe_with(
    rho0: &DensityMatrix,
    fixed: &SpectralObservable,
    fine: &SpectralObservable,
    coarse: &SpectralObservable,
    other: usize,
    shared: usize,
    mode: ConditioningMode,
    side: ContextSide,
) -> Result<ContextualityReport> {
    let partition = Coarsening::infer(fine, coarse, PROBABILITY_TOL)?;
    let shared_coarse = partition
        .singleton_of(shared)
        .ok_or(MeasurementError::ContextNotShared { fine_index: shared })?;
    let eval = |family: &SpectralObservable, idx: usize| -> Result<f64> {
        match (side, mode) {
            (ContextSide::Later, ConditioningMode::Post) => {
                post_condition_probability(rho0, fixed, family, other, idx)
            }
            (ContextSide::Later, ConditioningMode::Pre) => {
                pre_condition_probability(rho0, fixed, family, other, idx)
            }
            (ContextSide::Earlier, ConditioningMode::Post) => {
                post_condition_probability(rho0, family, fixed, idx, other)
            }
            (ContextSide::Earlier, ConditioningMode::Pre) => {
                pre_condition_probability(rho0, family, fixed, idx, other)
            }
        }
    };
    let p_fine = eval(fine, shared)?;
    let p_coarse = eval(coarse, shared_coarse)?;
    Ok(ContextualityReport {
        p_fine,
        p_coarse,
        delta: p_fine - p_coarse,
    })
}
