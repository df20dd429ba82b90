use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::families::{translate, translate_back, Family, FamilyRole};
use super::{RegionOperatorAssignment, Result};
use crate::hilbert::{embed_local, CVector, Operator};
use crate::sampling;
use crate::spacetime::{classify_lattice, CausalRelation, LatticeModel, LatticeRegion, SpacetimeError};

/// How two output vectors are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `‖a − b‖`.
    #[default]
    Vector,
    /// `min_θ ‖a − e^{iθ} b‖`: equality of rays, blind to global phases.
    Ray,
}

impl Metric {
    pub fn distance(self, a: &CVector, b: &CVector) -> f64 {
        match self {
            Metric::Vector => (a - b).norm(),
            Metric::Ray => {
                let z = b.dotc(a);
                if z.norm() == 0.0 {
                    (a - b).norm()
                } else {
                    (a - b * (z / z.norm())).norm()
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifierConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub metric: Metric,
    pub max_witnesses: usize,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 0,
            tolerance: 1e-9,
            metric: Metric::Vector,
            max_witnesses: 5,
        }
    }
}

/// A sample whose residual reached the tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub sample: usize,
    pub regions: Vec<LatticeRegion>,
    /// `(site shift, time-step shift)` for covariance samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<(usize, isize)>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub constraint: u8,
    pub samples: usize,
    pub max_residual: f64,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

struct Sample {
    residual: f64,
    regions: Vec<LatticeRegion>,
    shift: Option<(usize, isize)>,
}

fn run<F>(constraint: u8, cfg: &VerifierConfig, eval: F) -> Result<ConstraintReport>
where
    F: Fn(&mut sampling::SampleRng) -> Result<Option<Sample>> + Sync,
{
    let results = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sampling::stream(cfg.seed, k as u64);
            eval(&mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_residual: f64 = 0.0;
    let mut witnesses = Vec::new();
    let mut evaluated = 0;
    for (k, s) in results.into_iter().enumerate() {
        let Some(s) = s else { continue };
        evaluated += 1;
        max_residual = max_residual.max(s.residual);
        if s.residual >= cfg.tolerance && witnesses.len() < cfg.max_witnesses {
            witnesses.push(Witness {
                sample: k,
                regions: s.regions,
                shift: s.shift,
                residual: s.residual,
            });
        }
    }
    Ok(ConstraintReport {
        constraint,
        samples: evaluated,
        max_residual,
        pass: max_residual < cfg.tolerance,
        witnesses,
        note: None,
    })
}

/// Random projector of random rank in the algebra of `region`.
fn local_projector(rng: &mut impl Rng, region: &LatticeRegion) -> Result<Operator> {
    let local_dim = 1usize << region.len();
    let rank = rng.random_range(1..local_dim);
    let p = sampling::random_projector(rng, local_dim, rank);
    Ok(embed_local(&p, &region.sites(), region.model().n_sites)?)
}

fn pick<T: Copy>(rng: &mut impl Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// Space-like pairs `(O, O′)`: `B_O` must commute with `B_{O′}` and with
/// projectors of `A(O′)`.
pub fn check_commutation_constraint(
    a: &RegionOperatorAssignment,
    cfg: &VerifierConfig,
) -> Result<ConstraintReport> {
    let regions = a.model().all_regions();
    let mut pairs = Vec::new();
    for o in &regions {
        for o2 in &regions {
            if classify_lattice(o, o2)? == CausalRelation::SpaceLike {
                pairs.push((*o, *o2));
            }
        }
    }
    let dim = a.model().dim();
    run(1, cfg, |rng| {
        if pairs.is_empty() {
            return Ok(None);
        }
        let (o, o2) = pick(rng, &pairs);
        let psi = sampling::random_unit_vector(rng, dim).into_amplitudes();
        let p = local_projector(rng, &o2)?;
        let (b, b2) = (a.get(&o)?, a.get(&o2)?);
        let r1 = cfg.metric.distance(&b.apply(&b2.apply(&psi)), &b2.apply(&b.apply(&psi)));
        let r2 = cfg.metric.distance(&b.apply(&p.apply(&psi)), &p.apply(&b.apply(&psi)));
        Ok(Some(Sample {
            residual: r1.max(r2),
            regions: vec![o, o2],
            shift: None,
        }))
    })
}

/// Nested pairs `O ⊂ O′` at one time step: `P B_{O′} = P B_O` for `P ∈ A(O)`.
pub fn check_restriction_constraint(
    a: &RegionOperatorAssignment,
    cfg: &VerifierConfig,
) -> Result<ConstraintReport> {
    let regions = a.model().all_regions();
    let mut pairs = Vec::new();
    for o in &regions {
        for o2 in &regions {
            if o != o2 && o.is_within(o2) {
                pairs.push((*o, *o2));
            }
        }
    }
    let dim = a.model().dim();
    run(2, cfg, |rng| {
        if pairs.is_empty() {
            return Ok(None);
        }
        let (o, o2) = pick(rng, &pairs);
        let psi = sampling::random_unit_vector(rng, dim).into_amplitudes();
        let p = local_projector(rng, &o)?;
        let lhs = p.apply(&a.get(&o2)?.apply(&psi));
        let rhs = p.apply(&a.get(&o)?.apply(&psi));
        Ok(Some(Sample {
            residual: cfg.metric.distance(&lhs, &rhs),
            regions: vec![o, o2],
            shift: None,
        }))
    })
}

pub const COVARIANCE_NOTE: &str =
    "only lattice translations (site shifts and time-step shifts) are checked; boosts have no unitary on a finite chain";

/// `B_{gO} = U(g)† B_O U(g)` for lattice translations `g`. Site shifts act
/// by permutation; time-step shifts act trivially on the fixed state space.
pub fn check_covariance_constraint(
    a: &RegionOperatorAssignment,
    cfg: &VerifierConfig,
) -> Result<ConstraintReport> {
    let model: LatticeModel = *a.model();
    if !model.periodic {
        return Err(SpacetimeError::NotPeriodic.into());
    }
    let steps = model.n_steps as isize;
    let mut cases = Vec::new();
    for o in model.all_regions() {
        for k in 0..model.n_sites {
            for dtau in -(steps - 1)..steps {
                if let Some(go) = o.translated(k, dtau)? {
                    cases.push((o, go, k, dtau));
                }
            }
        }
    }
    let dim = model.dim();
    let mut report = run(3, cfg, |rng| {
        let (o, go, k, dtau) = pick(rng, &cases);
        let psi = sampling::random_unit_vector(rng, dim).into_amplitudes();
        let lhs = a.get(&go)?.apply(&psi);
        let rhs = translate_back(&model, k, &a.get(&o)?.apply(&translate(&model, k, &psi)));
        Ok(Some(Sample {
            residual: cfg.metric.distance(&lhs, &rhs),
            regions: vec![o, go],
            shift: Some((k, dtau)),
        }))
    })?;
    report.note = Some(COVARIANCE_NOTE.to_string());
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssignmentVerdict {
    pub family: String,
    #[serde(flatten)]
    pub role: FamilyRole,
    pub commutation: ConstraintReport,
    pub restriction: ConstraintReport,
    pub covariance: ConstraintReport,
    pub all_pass: bool,
    /// Witness: all pass. Control for constraint k: exactly k fails.
    /// Candidate: constraint 1 passes. Experimental: no expectation.
    pub as_expected: bool,
}

impl AssignmentVerdict {
    pub fn reports(&self) -> [&ConstraintReport; 3] {
        [&self.commutation, &self.restriction, &self.covariance]
    }
}

pub fn verify_assignment(
    a: &RegionOperatorAssignment,
    role: FamilyRole,
    cfg: &VerifierConfig,
) -> Result<AssignmentVerdict> {
    let commutation = check_commutation_constraint(a, cfg)?;
    let restriction = check_restriction_constraint(a, cfg)?;
    let covariance = check_covariance_constraint(a, cfg)?;
    let passes = [commutation.pass, restriction.pass, covariance.pass];
    let as_expected = match role {
        FamilyRole::Witness => passes.iter().all(|p| *p),
        FamilyRole::Control { constraint } => passes
            .iter()
            .enumerate()
            .all(|(k, p)| *p != (k + 1 == constraint as usize)),
        FamilyRole::Candidate => passes[0],
        FamilyRole::Experimental => true,
    };
    Ok(AssignmentVerdict {
        family: a.family_name().to_string(),
        role,
        all_pass: passes.iter().all(|p| *p),
        as_expected,
        commutation,
        restriction,
        covariance,
    })
}

/// A shipped family with its assignment on a model and its three reports.
#[derive(Clone, Debug)]
pub struct ShippedFamily {
    pub family: Family,
    pub assignment: RegionOperatorAssignment,
    pub verdict: AssignmentVerdict,
}

/// Every shipped family built on `model` with coupling `parameter`, each
/// verified under `cfg`.
pub fn shipped_families(
    model: LatticeModel,
    parameter: f64,
    cfg: &VerifierConfig,
) -> Result<Vec<ShippedFamily>> {
    Family::all(parameter)
        .into_iter()
        .map(|family| {
            let assignment = family.build(model)?;
            let verdict = verify_assignment(&assignment, family.role(), cfg)?;
            Ok(ShippedFamily {
                family,
                assignment,
                verdict,
            })
        })
        .collect()
}
