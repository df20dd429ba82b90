//! Region-operator assignments `O ↦ B_O` on a qubit-chain lattice, the
//! modified sequence probability `‖X₁⋯XₙΨ‖²` with `Xᵢ = PᵢBᵢ` after a
//! time-like past region, and sampling verifiers for the three consistency
//! constraints (space-like commutation, restriction, covariance).

mod families;
mod verify;

pub use families::{number_counts, translation_unitary, Family, FamilyRole};
pub use verify::{
    check_commutation_constraint, check_covariance_constraint, check_restriction_constraint,
    shipped_families, verify_assignment, AssignmentVerdict, ConstraintReport, Metric,
    ShippedFamily, VerifierConfig, Witness, COVARIANCE_NOTE,
};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::hilbert::{
    embed_local, pauli, CVector, HilbertError, NonlinearMap, Operator, SpectralObservable,
    StateVector, FLAG_TOL,
};
use crate::spacetime::{
    causal_sort, classify_regions, CausalRelation, LatticeModel, LatticeRegion, Region,
    SpacetimeError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModifiedBornError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error(transparent)]
    Measurement(#[from] crate::measurement::MeasurementError),
    #[error("no operator assigned to region {0:?}")]
    Unassigned(LatticeRegion),
    #[error("map for region {region:?} has dimension {found}, expected {expected}")]
    WrongDimension {
        region: LatticeRegion,
        expected: usize,
        found: usize,
    },
    #[error("map `{name}` failed its flag verification")]
    UnverifiedMap { name: String },
    #[error("projector is not supported on the event region (commutator {residual:e} with site {site})")]
    NotLocal { site: usize, residual: f64 },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
}

pub type Result<T, E = ModifiedBornError> = std::result::Result<T, E>;

/// Total assignment of a (possibly nonlinear) map to every region of a model.
#[derive(Clone, Debug)]
pub struct RegionOperatorAssignment {
    model: LatticeModel,
    family_name: String,
    assign: BTreeMap<LatticeRegion, NonlinearMap>,
}

impl RegionOperatorAssignment {
    /// Requires a map for every region of `model`, each of full chain
    /// dimension and passing its own flag verifier.
    pub fn new(
        model: LatticeModel,
        family_name: impl Into<String>,
        assign: BTreeMap<LatticeRegion, NonlinearMap>,
    ) -> Result<Self> {
        for region in model.all_regions() {
            let map = assign
                .get(&region)
                .ok_or(ModifiedBornError::Unassigned(region))?;
            if map.dim() != model.dim() {
                return Err(ModifiedBornError::WrongDimension {
                    region,
                    expected: model.dim(),
                    found: map.dim(),
                });
            }
        }
        for map in assign.values() {
            if !map.verify(8, 0).passed() {
                return Err(ModifiedBornError::UnverifiedMap {
                    name: map.name().to_string(),
                });
            }
        }
        Ok(Self {
            model,
            family_name: family_name.into(),
            assign,
        })
    }

    pub fn from_fn(
        model: LatticeModel,
        family_name: impl Into<String>,
        f: impl Fn(&LatticeRegion) -> NonlinearMap,
    ) -> Result<Self> {
        let assign = model.all_regions().iter().map(|r| (*r, f(r))).collect();
        Self::new(model, family_name, assign)
    }

    pub fn identity(model: LatticeModel) -> Self {
        Self::from_fn(model, "identity", |_| NonlinearMap::identity(model.dim()))
            .expect("identity is total and verified")
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn family_name(&self) -> &str {
        &self.family_name
    }

    pub fn get(&self, region: &LatticeRegion) -> Result<&NonlinearMap> {
        self.assign
            .get(region)
            .ok_or(ModifiedBornError::Unassigned(*region))
    }

    pub fn regions(&self) -> impl Iterator<Item = &LatticeRegion> {
        self.assign.keys()
    }
}

/// A projector localized in the algebra of a lattice region.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementEvent {
    region: LatticeRegion,
    projector: Operator,
}

impl MeasurementEvent {
    /// Checks the projector flag and support: the projector must commute
    /// with σx and σz on every site outside the region.
    pub fn new(region: LatticeRegion, projector: Operator) -> Result<Self> {
        let n = region.model().n_sites;
        if projector.dim() != region.model().dim() {
            return Err(HilbertError::DimensionMismatch {
                expected: region.model().dim(),
                found: projector.dim(),
            }
            .into());
        }
        projector.require_projector(FLAG_TOL)?;
        for site in (0..n).filter(|s| !region.contains_site(*s)) {
            for pauli_op in [pauli::sigma_x(), pauli::sigma_z()] {
                let outside = embed_local(&pauli_op, &[site], n)?;
                let residual = projector.commutator(&outside).norm();
                if residual > 1e-10 {
                    return Err(ModifiedBornError::NotLocal { site, residual });
                }
            }
        }
        Ok(Self { region, projector })
    }

    /// Embeds `local` (acting on the region's sites in interval order).
    pub fn local(region: LatticeRegion, local: &Operator) -> Result<Self> {
        let full = embed_local(local, &region.sites(), region.model().n_sites)?;
        Self::new(region, full.certify(FLAG_TOL))
    }

    pub fn region(&self) -> &LatticeRegion {
        &self.region
    }

    pub fn projector(&self) -> &Operator {
        &self.projector
    }
}

/// Application order and `B` insertions of one modified-probability run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModifiedSequence {
    pub probability: f64,
    /// Event indices in the order they act on the state (past first).
    pub order: Vec<usize>,
    /// `inserted[i]`: event `i` has a time-like past region in the set and
    /// was applied as `PᵢBᵢ`.
    pub inserted: Vec<bool>,
}

fn event_regions(events: &[MeasurementEvent]) -> Vec<Region> {
    events.iter().map(|e| Region::from(e.region)).collect()
}

/// Events with some other event region in their time-like past.
fn past_flags(regions: &[Region]) -> Result<Vec<bool>> {
    let mut flags = vec![false; regions.len()];
    for (i, flag) in flags.iter_mut().enumerate() {
        for (j, other) in regions.iter().enumerate() {
            if i != j && classify_regions(&regions[i], other)? == CausalRelation::TimeLikePast {
                *flag = true;
            }
        }
    }
    Ok(flags)
}

pub fn modified_sequence(
    psi: &StateVector,
    events: &[MeasurementEvent],
    assignment: &RegionOperatorAssignment,
) -> Result<ModifiedSequence> {
    for e in events {
        if e.region.model() != assignment.model() {
            return Err(SpacetimeError::ModelMismatch.into());
        }
    }
    let regions = event_regions(events);
    let order = causal_sort(&regions)?;
    let inserted = past_flags(&regions)?;
    let mut v: CVector = psi.amplitudes().clone();
    for &i in &order {
        if inserted[i] {
            v = assignment.get(&events[i].region)?.apply(&v);
        }
        v = events[i].projector.apply(&v);
    }
    Ok(ModifiedSequence {
        probability: v.norm_squared(),
        order,
        inserted,
    })
}

/// `‖X₁X₂⋯XₙΨ‖²` with the events causally ordered and `Xᵢ = PᵢBᵢ` exactly
/// when another event region lies in the time-like past of `Oᵢ`.
pub fn modified_sequence_probability(
    psi: &StateVector,
    events: &[MeasurementEvent],
    assignment: &RegionOperatorAssignment,
) -> Result<f64> {
    Ok(modified_sequence(psi, events, assignment)?.probability)
}

/// The unmodified rule on the same events: projectors in causal order.
pub fn unmodified_sequence_probability(
    psi: &StateVector,
    events: &[MeasurementEvent],
) -> Result<f64> {
    let order = causal_sort(&event_regions(events))?;
    // sequence_probability applies the last projector first
    let chain: Vec<Operator> = order
        .iter()
        .rev()
        .map(|&i| events[i].projector.clone())
        .collect();
    Ok(crate::measurement::sequence_probability(psi, &chain)?)
}

/// One complete projector family attached to a region.
#[derive(Clone, Debug)]
pub struct RegionFamily {
    pub region: LatticeRegion,
    pub family: SpectralObservable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry {
    pub indices: Vec<usize>,
    pub raw: f64,
    pub normalized: f64,
}

/// Sum of modified probabilities over every outcome tuple. Nothing is
/// renormalized in place; `normalized` is `raw / raw_total`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationAudit {
    pub raw_total: f64,
    pub deviation: f64,
    pub outcomes: Vec<AuditEntry>,
}

pub fn normalization_audit(
    psi: &StateVector,
    slots: &[RegionFamily],
    assignment: &RegionOperatorAssignment,
) -> Result<NormalizationAudit> {
    let mut raws = Vec::new();
    let mut indices = vec![0usize; slots.len()];
    loop {
        let events = slots
            .iter()
            .zip(&indices)
            .map(|(slot, &k)| {
                MeasurementEvent::new(slot.region, slot.family.projectors()[k].clone())
            })
            .collect::<Result<Vec<_>>>()?;
        raws.push((indices.clone(), modified_sequence_probability(psi, &events, assignment)?));
        // odometer over outcome tuples
        let mut pos = slots.len();
        loop {
            if pos == 0 {
                let raw_total: f64 = raws.iter().map(|(_, p)| p).sum();
                return Ok(NormalizationAudit {
                    raw_total,
                    deviation: raw_total - 1.0,
                    outcomes: raws
                        .into_iter()
                        .map(|(indices, raw)| AuditEntry {
                            indices,
                            raw,
                            normalized: raw / raw_total,
                        })
                        .collect(),
                });
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < slots[pos].family.len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}
