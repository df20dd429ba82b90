use serde::Serialize;
use serde_json::{json, Value};

use qcausal::measurement::{
    contextuality_probe_with, joint_distribution, post_condition_probability,
    pre_condition_probability, ConditioningMode, ContextSide, MeasurementError,
};
use qcausal::modified_born::{verify_assignment, Family, Metric, VerifierConfig};
use qcausal::sampling;
use qcausal::signaling::{
    epr_signal, epr_time_series, onset_in_frame, verify_gauge_equivalence, EprScenario, GaugeMap,
    SignalSample, Theory,
};
use qcausal::spacetime::LatticeModel;

use crate::config::{self, MetricName, ModeName, ScenarioConfig, SideName};
use crate::CliError;

/// Below this a linear law counts as non-signaling.
pub const LINEAR_SIGNAL_BOUND: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-10;

pub struct CommandOutput {
    pub outputs: Value,
    /// Description of the first failed check, if any.
    pub failure: Option<String>,
    pub csv: Option<String>,
}

impl CommandOutput {
    fn ok(outputs: impl Serialize) -> Result<Self, CliError> {
        Ok(Self {
            outputs: to_value(outputs)?,
            failure: None,
            csv: None,
        })
    }
}

fn to_value(v: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Compute(e.to_string()))
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

/// Undefined conditionals (zero-probability conditioning) become `null`.
fn conditional(r: Result<f64, MeasurementError>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(p) => Ok(Some(p)),
        Err(MeasurementError::ZeroProbability { .. }) => Ok(None),
        Err(e) => Err(compute(e)),
    }
}

pub fn probabilities(cfg: &ScenarioConfig) -> Result<CommandOutput, CliError> {
    let input = config::section(&cfg.probabilities, "probabilities")?.resolve()?;
    let (rho, a, b) = (&input.rho, &input.a, &input.b);
    if a.dim() != rho.dim() || b.dim() != rho.dim() {
        return Err(CliError::Config(format!(
            "probabilities: state has dimension {}, observables {} and {}",
            rho.dim(),
            a.dim(),
            b.dim()
        )));
    }
    let dist = joint_distribution(rho, a, b).map_err(compute)?;
    let (na, nb) = (a.len(), b.len());
    let joint: Vec<Vec<f64>> = (0..na)
        .map(|i| (0..nb).map(|j| dist.get(&[i, j]).unwrap_or(0.0)).collect())
        .collect();
    let mut pre = vec![vec![None; nb]; na];
    let mut post = vec![vec![None; nb]; na];
    for i in 0..na {
        for j in 0..nb {
            pre[i][j] = conditional(pre_condition_probability(rho, a, b, i, j))?;
            post[i][j] = conditional(post_condition_probability(rho, a, b, i, j))?;
        }
    }
    let sum = |xs: Vec<Option<f64>>| -> Option<f64> { xs.into_iter().sum() };
    let pre_row_sums: Vec<Option<f64>> = pre.iter().map(|row| sum(row.clone())).collect();
    let post_column_sums: Vec<Option<f64>> =
        (0..nb).map(|j| sum(post.iter().map(|row| row[j]).collect())).collect();
    let total = dist.total();
    let failure = ((total - 1.0).abs() > NORMALIZATION_TOL)
        .then(|| format!("joint table sums to {total}"));
    Ok(CommandOutput {
        outputs: json!({
            "dim": rho.dim(),
            "a_eigenvalues": a.eigenvalues(),
            "b_eigenvalues": b.eigenvalues(),
            "joint": joint,
            "pre_condition": pre,
            "post_condition": post,
            "normalization": {
                "total": total,
                "pre_condition_row_sums": pre_row_sums,
                "post_condition_column_sums": post_column_sums,
            },
        }),
        failure,
        csv: None,
    })
}

pub fn contextuality(cfg: &ScenarioConfig) -> Result<CommandOutput, CliError> {
    let input = config::section(&cfg.contextuality, "contextuality")?.resolve()?;
    let mode = match input.mode {
        ModeName::Pre => ConditioningMode::Pre,
        ModeName::Post => ConditioningMode::Post,
    };
    let side = match input.side {
        SideName::Later => ContextSide::Later,
        SideName::Earlier => ContextSide::Earlier,
    };
    let report = contextuality_probe_with(
        &input.rho,
        &input.fixed,
        &input.fine,
        &input.coarse,
        input.other,
        input.shared,
        mode,
        side,
    )
    .map_err(|e| match e {
        MeasurementError::ZeroProbability { .. } => compute(e),
        other => CliError::Config(format!("contextuality: {other}")),
    })?;
    CommandOutput::ok(json!({
        "mode": mode,
        "side": side,
        "other": input.other,
        "shared": input.shared,
        "p_fine": report.p_fine,
        "p_coarse": report.p_coarse,
        "delta": report.delta,
    }))
}

pub fn signaling(cfg: &ScenarioConfig) -> Result<CommandOutput, CliError> {
    let sc = config::section(&cfg.signaling, "signaling")?;
    let law = sc.validate()?;
    // shipped laws with a state-independent hamiltonian
    let linear = matches!(sc.law.as_str(), "null" | "linear-z");
    let mut scenario = EprScenario::standard(sc.t).with_law(law);
    scenario.dt = sc.dt;
    let signal = epr_signal(&scenario).map_err(compute)?;
    let series = epr_time_series(&scenario, sc.points).map_err(compute)?;
    let failure = (linear && signal.delta.abs() >= LINEAR_SIGNAL_BOUND).then(|| {
        format!(
            "linear law `{}` signals: |delta| = {:e}",
            sc.law,
            signal.delta.abs()
        )
    });
    Ok(CommandOutput {
        outputs: json!({
            "law": sc.law,
            "linear": linear,
            "t": sc.t,
            "dt": sc.dt,
            "signal": signal,
            "series": series,
        }),
        failure,
        csv: Some(SignalSample::to_csv(&series)),
    })
}

pub fn onset(cfg: &ScenarioConfig) -> Result<CommandOutput, CliError> {
    let oc = config::section(&cfg.onset, "onset")?;
    oc.validate()?;
    let report = onset_in_frame(oc.v, oc.distance, oc.eps).map_err(compute)?;
    CommandOutput::ok(report)
}

pub fn verify_b(cfg: &ScenarioConfig) -> Result<CommandOutput, CliError> {
    let vc = config::section(&cfg.verify_b, "verify_b")?;
    vc.validate()?;
    let family = Family::by_name(&vc.family, vc.parameter).map_err(|_| {
        CliError::Config(format!(
            "verify_b.family: unknown family `{}` (known: {})",
            vc.family,
            Family::NAMES.join(", ")
        ))
    })?;
    if !vc.periodic {
        return Err(CliError::Config(
            "verify_b.periodic: the covariance check needs a periodic chain".into(),
        ));
    }
    let model = LatticeModel::new(vc.sites, vc.steps, vc.periodic)
        .map_err(|e| CliError::Config(format!("verify_b: {e}")))?;
    let verifier = VerifierConfig {
        samples: vc.samples,
        seed: cfg.seed,
        tolerance: vc.tolerance,
        metric: match vc.metric {
            MetricName::Vector => Metric::Vector,
            MetricName::Ray => Metric::Ray,
        },
        max_witnesses: vc.max_witnesses,
    };
    let assignment = family.build(model).map_err(compute)?;
    let verdict = verify_assignment(&assignment, family.role(), &verifier).map_err(compute)?;
    let failed: Vec<u8> = verdict
        .reports()
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.constraint)
        .collect();
    let failure = (!failed.is_empty()).then(|| {
        format!("family `{}` fails constraint(s) {failed:?}", family.name())
    });
    Ok(CommandOutput {
        outputs: json!({
            "family": family,
            "model": { "sites": model.n_sites, "steps": model.n_steps, "periodic": model.periodic },
            "verifier": verifier,
            "verdict": verdict,
        }),
        failure,
        csv: None,
    })
}

pub fn gauge(cfg: &ScenarioConfig) -> Result<CommandOutput, CliError> {
    let gc = config::section(&cfg.gauge, "gauge")?;
    if gc.dim < 2 {
        return Err(CliError::Config("gauge.dim: must be at least 2".into()));
    }
    let map = GaugeMap::by_name(&gc.gauge, gc.dim, gc.parameter).ok_or_else(|| {
        CliError::Config(format!("gauge.gauge: unknown gauge map `{}`", gc.gauge))
    })?;
    let theory = Theory::random(&mut sampling::rng(cfg.seed), gc.dim);
    let report = verify_gauge_equivalence(&theory, &map, gc.samples, cfg.seed);
    let failure = (!report.pass).then(|| {
        format!(
            "gauge `{}` changes statistics: max discrepancy {:e}",
            report.gauge, report.max_discrepancy
        )
    });
    Ok(CommandOutput {
        outputs: to_value(&report)?,
        failure,
        csv: None,
    })
}
