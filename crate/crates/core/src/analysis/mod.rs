//! From raw measurements to stability figures: phase comparison, edge
//! pairing, drift fitting, Savitzky–Golay smoothing and Allan deviation.

mod allan;
mod decimate;
mod fit;
mod pairing;
mod phase;
mod savgol;

pub use allan::{allan_deviation, default_taus, AllanCurve, AllanPoint};
pub use decimate::{decimate_series_to_1hz, decimate_to_1hz};
pub use fit::{fit_linear_drift, summary_stats, DriftFit, SummaryStats};
pub use pairing::{pair_edge_times, PairResult};
pub use phase::{complex_phase_difference, phase_to_time_error, sine_time_error, unwrap_phase};
pub use savgol::{savgol, savgol_coefficients, SavGolSpec};

use crate::error::{Error, Result};

/// Which measurement produced a time-error series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Sine,
    Pulse,
    Dmtd,
}

/// Time error Δt (seconds) against time (seconds). `rate_hz` is the nominal
/// sampling rate; pulse-derived series may have gaps where edges were lost.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeErrorSeries {
    pub kind: SourceKind,
    pub rate_hz: f64,
    pub times_s: Vec<f64>,
    pub values_s: Vec<f64>,
}

impl TimeErrorSeries {
    pub fn new(kind: SourceKind, rate_hz: f64, times_s: Vec<f64>, values_s: Vec<f64>) -> Result<Self> {
        crate::sigmodel::check_rate(rate_hz)?;
        if times_s.len() != values_s.len() {
            return Err(Error::param(format!(
                "{} timestamps for {} values",
                times_s.len(),
                values_s.len()
            )));
        }
        Ok(Self {
            kind,
            rate_hz,
            times_s,
            values_s,
        })
    }

    /// Series on a uniform grid starting at `start_time_s`.
    pub fn uniform(kind: SourceKind, rate_hz: f64, start_time_s: f64, values_s: Vec<f64>) -> Result<Self> {
        crate::sigmodel::check_rate(rate_hz)?;
        let times_s = (0..values_s.len()).map(|i| start_time_s + i as f64 / rate_hz).collect();
        Self::new(kind, rate_hz, times_s, values_s)
    }

    pub fn len(&self) -> usize {
        self.values_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_s.is_empty()
    }
}
