//! Nonlinear evolution and its consequences for entangled pairs: ensemble
//! signaling, frame-dependent signal onset, and gauge maps that only
//! relabel Hilbert space.

mod epr;
mod gauge;
mod law;
mod onset;

pub use epr::{epr_signal, epr_time_series, BobEnsemble, EprScenario, EprSignal, SignalSample};
pub use gauge::{
    gauge_transform, verify_gauge_equivalence, Evolution, GAUGE_TOL, GaugeMap, GaugeReport, GaugedTheory,
    Step, Theory,
};
pub use law::{evolve_nonlinear, evolve_nonlinear_unnormalized, NonlinearLaw, DEFAULT_DT};
pub use onset::{onset_in_frame, OnsetReport};

use thiserror::Error;

use crate::hilbert::HilbertError;
use crate::spacetime::SpacetimeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalingError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error("step dt = {dt} must be positive and finite, duration t = {t} non-negative")]
    BadStep { dt: f64, t: f64 },
    #[error("norm drift {drift:e} at t = {time} exceeds 1e-6; reduce the step")]
    Integration { drift: f64, time: f64 },
    #[error("law `{law}` returned a non-hermitian hamiltonian (asymmetry {asymmetry:e})")]
    NonHermitianLaw { law: String, asymmetry: f64 },
    #[error("shared state of dimension {shared} does not factor as {alice} x {bob}")]
    BadBipartition { shared: usize, alice: usize, bob: usize },
    #[error("gauge map `{name}` failed verification: {detail}")]
    Unverified { name: String, detail: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = SignalingError> = std::result::Result<T, E>;
