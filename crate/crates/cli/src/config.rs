//! Scenario files: TOML with a `version`, an optional `seed` and one table
//! per command. Unknown keys are rejected.

use serde::Deserialize;

use qcausal::hilbert::{
    pauli, spectral_decompose, Coarsening, DensityMatrix, Operator, SpectralObservable,
    StateVector, C64, MERGE_TOL,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub probabilities: Option<ProbabilitiesConfig>,
    pub contextuality: Option<ContextualityConfig>,
    pub signaling: Option<SignalingConfig>,
    pub onset: Option<OnsetConfig>,
    pub verify_b: Option<VerifyBConfig>,
    pub gauge: Option<GaugeConfig>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "version: expected {SCHEMA_VERSION}, found {}",
                cfg.version
            )));
        }
        Ok(cfg)
    }
}

pub fn section<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing table [{name}]")))
}

fn required<T: Clone>(value: &Option<T>, fallback: Option<T>, field: &str) -> Result<T, CliError> {
    value
        .clone()
        .or(fallback)
        .ok_or_else(|| CliError::Config(format!("{field}: missing")))
}

fn bad(field: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {detail}"))
}

/// A named state (`ket0`, `ket1`, `plus`, `minus`, `singlet`, `mixed-N`,
/// `uniform-N`), an amplitude list or a real density matrix.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StateSpec {
    Named(String),
    Amplitudes {
        amplitudes: Vec<f64>,
        #[serde(default)]
        imag: Option<Vec<f64>>,
    },
    Density {
        density: Vec<Vec<f64>>,
    },
}

fn dim_suffix(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok().filter(|n| *n >= 1)
}

impl StateSpec {
    pub fn resolve(&self, field: &str) -> Result<DensityMatrix, CliError> {
        match self {
            Self::Named(name) => {
                let psi = match name.as_str() {
                    "ket0" => pauli::ket0(),
                    "ket1" => pauli::ket1(),
                    "plus" => pauli::plus(),
                    "minus" => pauli::minus(),
                    "singlet" => pauli::singlet(),
                    other => {
                        if let Some(n) = dim_suffix(other, "mixed-") {
                            return Ok(DensityMatrix::maximally_mixed(n));
                        }
                        match dim_suffix(other, "uniform-") {
                            Some(n) => pauli::fourier_vector(n, 0),
                            None => return Err(bad(field, format!("unknown state `{other}`"))),
                        }
                    }
                };
                Ok(DensityMatrix::pure(&psi))
            }
            Self::Amplitudes { amplitudes, imag } => {
                let imag = imag.clone().unwrap_or_else(|| vec![0.0; amplitudes.len()]);
                if imag.len() != amplitudes.len() {
                    return Err(bad(field, "imag must match amplitudes in length"));
                }
                let values: Vec<C64> = amplitudes
                    .iter()
                    .zip(&imag)
                    .map(|(re, im)| C64::new(*re, *im))
                    .collect();
                let psi = StateVector::from_complex(&values).map_err(|e| bad(field, e))?;
                Ok(DensityMatrix::pure(&psi))
            }
            Self::Density { density } => {
                let op = Operator::from_real_rows(density).map_err(|e| bad(field, e))?;
                DensityMatrix::new(op).map_err(|e| bad(field, e))
            }
        }
    }
}

/// A named observable (`sigma_x`, `sigma_y`, `sigma_z`, `fourier-N`,
/// `computational-N`) or a hermitian matrix split into real and imaginary
/// parts.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ObservableSpec {
    Named(String),
    Matrix {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        imag: Option<Vec<Vec<f64>>>,
    },
}

impl ObservableSpec {
    pub fn resolve(&self, field: &str) -> Result<SpectralObservable, CliError> {
        match self {
            Self::Named(name) => match name.as_str() {
                "sigma_x" => Ok(pauli::pauli_observable(pauli::Axis::X)),
                "sigma_y" => Ok(pauli::pauli_observable(pauli::Axis::Y)),
                "sigma_z" => Ok(pauli::pauli_observable(pauli::Axis::Z)),
                other => {
                    if let Some(n) = dim_suffix(other, "fourier-") {
                        Ok(pauli::fourier_observable(n))
                    } else if let Some(n) = dim_suffix(other, "computational-") {
                        Ok(pauli::computational_observable(n))
                    } else {
                        Err(bad(field, format!("unknown observable `{other}`")))
                    }
                }
            },
            Self::Matrix { matrix, imag } => {
                let rows = matrix
                    .iter()
                    .enumerate()
                    .map(|(r, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(c, re)| {
                                let im = imag
                                    .as_ref()
                                    .and_then(|m| m.get(r))
                                    .and_then(|row| row.get(c))
                                    .copied()
                                    .unwrap_or(0.0);
                                C64::new(*re, im)
                            })
                            .collect()
                    })
                    .collect::<Vec<Vec<C64>>>();
                let op = Operator::from_rows(&rows).map_err(|e| bad(field, e))?;
                spectral_decompose(&op, MERGE_TOL).map_err(|e| bad(field, e))
            }
        }
    }
}

fn coarsened(
    obs: SpectralObservable,
    groups: &Option<Vec<Vec<usize>>>,
    field: &str,
) -> Result<SpectralObservable, CliError> {
    match groups {
        None => Ok(obs),
        Some(g) => obs
            .coarsen(&Coarsening::new(g.clone()))
            .map_err(|e| bad(field, e)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilitiesConfig {
    pub preset: Option<String>,
    pub state: Option<StateSpec>,
    pub a: Option<ObservableSpec>,
    pub b: Option<ObservableSpec>,
}

pub struct ProbabilitiesInput {
    pub rho: DensityMatrix,
    pub a: SpectralObservable,
    pub b: SpectralObservable,
}

impl ProbabilitiesConfig {
    pub fn resolve(&self) -> Result<ProbabilitiesInput, CliError> {
        let named = |s: &str| Some(ObservableSpec::Named(s.to_string()));
        let (state, a, b) = match self.preset.as_deref() {
            None => (None, None, None),
            Some("qubit-zx") => (Some(StateSpec::Named("ket0".into())), named("sigma_z"), named("sigma_x")),
            Some("repeat-z") => (Some(StateSpec::Named("mixed-2".into())), named("sigma_z"), named("sigma_z")),
            Some(other) => return Err(bad("probabilities.preset", format!("unknown preset `{other}`"))),
        };
        Ok(ProbabilitiesInput {
            rho: required(&self.state, state, "probabilities.state")?.resolve("probabilities.state")?,
            a: required(&self.a, a, "probabilities.a")?.resolve("probabilities.a")?,
            b: required(&self.b, b, "probabilities.b")?.resolve("probabilities.b")?,
        })
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Pre,
    Post,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    Later,
    Earlier,
}

/// `fixed` is the observable left alone; `fine` is replaced by its
/// coarsening `coarse_groups`. `shared` (fine index) must stay a singleton.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextualityConfig {
    pub preset: Option<String>,
    pub state: Option<StateSpec>,
    pub fixed: Option<ObservableSpec>,
    pub fixed_groups: Option<Vec<Vec<usize>>>,
    pub fine: Option<ObservableSpec>,
    pub coarse_groups: Option<Vec<Vec<usize>>>,
    pub other: Option<usize>,
    pub shared: Option<usize>,
    pub mode: Option<ModeName>,
    pub side: Option<SideName>,
}

pub struct ContextualityInput {
    pub rho: DensityMatrix,
    pub fixed: SpectralObservable,
    pub fine: SpectralObservable,
    pub coarse: SpectralObservable,
    pub other: usize,
    pub shared: usize,
    pub mode: ModeName,
    pub side: SideName,
}

struct ContextPreset {
    state: &'static str,
    fixed: &'static str,
    fixed_groups: Option<Vec<Vec<usize>>>,
    fine: &'static str,
    coarse_groups: Vec<Vec<usize>>,
    side: SideName,
}

fn context_preset(name: &str) -> Result<ContextPreset, CliError> {
    let split = || vec![vec![0], vec![1, 2]];
    Ok(match name {
        // A = {E, I−E} first, then the Fourier family or its coarsening
        "qutrit" => ContextPreset {
            state: "uniform-3",
            fixed: "computational-3",
            fixed_groups: Some(split()),
            fine: "fourier-3",
            coarse_groups: split(),
            side: SideName::Later,
        },
        // computational family or {E, I−E} first, then the Fourier family
        "qutrit-earlier" => ContextPreset {
            state: "uniform-3",
            fixed: "fourier-3",
            fixed_groups: None,
            fine: "computational-3",
            coarse_groups: split(),
            side: SideName::Earlier,
        },
        "commuting" => ContextPreset {
            state: "uniform-3",
            fixed: "computational-3",
            fixed_groups: Some(split()),
            fine: "computational-3",
            coarse_groups: split(),
            side: SideName::Later,
        },
        other => return Err(bad("contextuality.preset", format!("unknown preset `{other}`"))),
    })
}

impl ContextualityConfig {
    pub fn resolve(&self) -> Result<ContextualityInput, CliError> {
        let preset = self.preset.as_deref().map(context_preset).transpose()?;
        let p = preset.as_ref();
        let state = required(&self.state, p.map(|p| StateSpec::Named(p.state.into())), "contextuality.state")?;
        let fixed = required(&self.fixed, p.map(|p| ObservableSpec::Named(p.fixed.into())), "contextuality.fixed")?;
        let fine = required(&self.fine, p.map(|p| ObservableSpec::Named(p.fine.into())), "contextuality.fine")?;
        let fixed_groups = self.fixed_groups.clone().or_else(|| p.and_then(|p| p.fixed_groups.clone()));
        let coarse_groups = required(&self.coarse_groups, p.map(|p| p.coarse_groups.clone()), "contextuality.coarse_groups")?;
        let fine = fine.resolve("contextuality.fine")?;
        Ok(ContextualityInput {
            rho: state.resolve("contextuality.state")?,
            fixed: coarsened(fixed.resolve("contextuality.fixed")?, &fixed_groups, "contextuality.fixed_groups")?,
            coarse: coarsened(fine.clone(), &Some(coarse_groups), "contextuality.coarse_groups")?,
            fine,
            other: self.other.unwrap_or(0),
            shared: self.shared.unwrap_or(0),
            mode: self.mode.unwrap_or(ModeName::Post),
            side: self.side.or(p.map(|p| p.side)).unwrap_or(SideName::Later),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalingConfig {
    #[serde(default = "default_law")]
    pub law: String,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_law() -> String {
    "x-feedback".into()
}
fn default_t() -> f64 {
    0.5
}
fn default_dt() -> f64 {
    qcausal::signaling::DEFAULT_DT
}
fn default_points() -> usize {
    50
}

impl SignalingConfig {
    pub fn validate(&self) -> Result<qcausal::signaling::NonlinearLaw, CliError> {
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(bad("signaling.t", "must be finite and non-negative"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(bad("signaling.dt", "must be finite and positive"));
        }
        if self.points == 0 {
            return Err(bad("signaling.points", "must be at least 1"));
        }
        qcausal::signaling::NonlinearLaw::by_name(&self.law)
            .ok_or_else(|| bad("signaling.law", format!("unknown law `{}`", self.law)))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnsetConfig {
    pub v: f64,
    #[serde(rename = "L")]
    pub distance: f64,
    #[serde(default)]
    pub eps: f64,
}

impl OnsetConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.v.is_finite() && self.v.abs() < 1.0) {
            return Err(bad("onset.v", "need |v| < 1"));
        }
        if !self.distance.is_finite() {
            return Err(bad("onset.L", "must be finite"));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(bad("onset.eps", "must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBConfig {
    pub family: String,
    #[serde(default = "default_family_parameter")]
    pub parameter: f64,
    #[serde(default = "default_sites")]
    pub sites: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_true")]
    pub periodic: bool,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub metric: MetricName,
    #[serde(default = "default_witnesses")]
    pub max_witnesses: usize,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    #[default]
    Vector,
    Ray,
}

fn default_family_parameter() -> f64 {
    0.8
}
fn default_sites() -> usize {
    4
}
fn default_steps() -> usize {
    3
}
fn default_true() -> bool {
    true
}
fn default_samples() -> usize {
    200
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_witnesses() -> usize {
    5
}

impl VerifyBConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=6).contains(&self.sites) {
            return Err(bad("verify_b.sites", "must be between 1 and 6"));
        }
        if self.steps == 0 {
            return Err(bad("verify_b.steps", "must be at least 1"));
        }
        if !self.parameter.is_finite() {
            return Err(bad("verify_b.parameter", "must be finite"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(bad("verify_b.tolerance", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    pub gauge: String,
    #[serde(default = "default_gauge_parameter")]
    pub parameter: f64,
    #[serde(default = "default_gauge_dim")]
    pub dim: usize,
    #[serde(default = "default_gauge_samples")]
    pub samples: usize,
}

fn default_gauge_parameter() -> f64 {
    0.7
}
fn default_gauge_dim() -> usize {
    2
}
fn default_gauge_samples() -> usize {
    100
}
