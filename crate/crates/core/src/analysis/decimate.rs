use num_complex::Complex64;

use super::TimeErrorSeries;
use crate::ddc::{fir_decimate, plan_stages, ComplexBaseband, DecimatorSpec};
use crate::error::{Error, Result};

const MAX_STAGE_FACTOR: u64 = 25;

fn cascade_to_1hz(rate_hz: f64) -> Result<DecimatorSpec> {
    if rate_hz.fract() != 0.0 || rate_hz < 1.0 {
        return Err(Error::param(format!(
            "rate {rate_hz} Hz is not a whole number of hertz"
        )));
    }
    let factors = plan_stages(rate_hz as u64, MAX_STAGE_FACTOR)?;
    if factors.is_empty() {
        return Err(Error::param("input is already at 1 Hz"));
    }
    DecimatorSpec::design(&factors, 120.0, 0.65, 0.35)
}

/// Low-pass and decimate a baseband record to one sample per second, using
/// stages of at most 25 (25 kS/s runs as 25, 10, 10, 10).
pub fn decimate_to_1hz(baseband: &ComplexBaseband) -> Result<ComplexBaseband> {
    fir_decimate(baseband, &cascade_to_1hz(baseband.sample_rate_hz)?)
}

/// As [`decimate_to_1hz`] for a uniformly sampled time-error series.
pub fn decimate_series_to_1hz(series: &TimeErrorSeries) -> Result<TimeErrorSeries> {
    let start = *series
        .times_s
        .first()
        .ok_or_else(|| Error::Empty("time-error series".into()))?;
    let bb = ComplexBaseband::new(
        series.rate_hz,
        start,
        series.values_s.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
    )?;
    let out = decimate_to_1hz(&bb)?;
    TimeErrorSeries::uniform(
        series.kind,
        1.0,
        out.start_time_s,
        out.iq.iter().map(|z| z.re).collect(),
    )
}
