use serde::Serialize;

use super::{Result, SignalingError};
use crate::spacetime::{boost_event, lorentz_gamma, Event};

/// Where Bob's signal starts, as observed at rest and as predicted by an
/// observer moving with velocity `v` who places collapse on their own
/// simultaneity slice through Alice's switch at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OnsetReport {
    pub v: f64,
    pub distance: f64,
    pub eps: f64,
    pub rest_onset: Event,
    pub boosted_prediction: Event,
    /// `|boosted_prediction.t − rest_onset.t| = |v|·L`.
    pub discrepancy: f64,
    /// The same two events in the moving frame.
    pub rest_onset_moving_frame: Event,
    pub boosted_prediction_moving_frame: Event,
}

/// Bob sits at `x = L`. The moving observer's slice `t = v x` meets his
/// world line at `t = v L`, so they expect the onset `eps` later than that.
pub fn onset_in_frame(v: f64, distance: f64, eps: f64) -> Result<OnsetReport> {
    lorentz_gamma(v)?;
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(SignalingError::Invalid(format!(
            "distance L = {distance} must be positive"
        )));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(SignalingError::Invalid(format!(
            "delay eps = {eps} must be non-negative"
        )));
    }
    let shift = v * distance;
    let rest_onset = Event::new(eps, distance);
    let boosted_prediction = Event::new(shift + eps, distance);
    Ok(OnsetReport {
        v,
        distance,
        eps,
        rest_onset,
        boosted_prediction,
        discrepancy: shift.abs(),
        rest_onset_moving_frame: boost_event(&rest_onset, v)?,
        boosted_prediction_moving_frame: boost_event(&boosted_prediction, v)?,
    })
}
