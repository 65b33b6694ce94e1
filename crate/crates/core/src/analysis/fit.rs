use super::TimeErrorSeries;
use crate::error::{Error, Result};

/// Least-squares line `Δt ≈ slope · t + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftFit {
    /// Fractional frequency offset (s/s).
    pub slope: f64,
    /// Value of the line at `t = 0`.
    pub intercept_s: f64,
    pub residual_rms_s: f64,
}

/// Ordinary least squares against the series timestamps (centred for conditioning).
pub fn fit_linear_drift(series: &TimeErrorSeries) -> Result<DriftFit> {
    let n = series.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let t = &series.times_s;
    let y = &series.values_s;
    let nf = n as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (ti, yi) in t.iter().zip(y) {
        let dt = ti - tm;
        stt += dt * dt;
        sty += dt * (yi - ym);
    }
    if stt <= 0.0 || !stt.is_finite() {
        return Err(Error::Numeric("all timestamps are equal".into()));
    }
    let slope = sty / stt;
    let at_mean = ym;
    let ss: f64 = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| (yi - (at_mean + slope * (ti - tm))).powi(2))
        .sum();
    Ok(DriftFit {
        slope,
        intercept_s: at_mean - slope * tm,
        residual_rms_s: (ss / nf).sqrt(),
    })
}

/// Mean, population standard deviation and (when at least three points are
/// available) the fitted drift of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean_s: f64,
    pub sigma_s: f64,
    pub linear_drift: Option<f64>,
}

pub fn summary_stats(series: &TimeErrorSeries) -> Result<SummaryStats> {
    let n = series.len();
    if n == 0 {
        return Err(Error::Empty("time-error series has no values".into()));
    }
    let v = &series.values_s;
    let mean_s = v.iter().sum::<f64>() / n as f64;
    let sigma_s = (v.iter().map(|x| (x - mean_s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let linear_drift = if n >= 3 {
        fit_linear_drift(series).ok().map(|f| f.slope)
    } else {
        None
    };
    Ok(SummaryStats {
        mean_s,
        sigma_s,
        linear_drift,
    })
}
