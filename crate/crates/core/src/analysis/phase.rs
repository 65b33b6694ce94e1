use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::{SourceKind, TimeErrorSeries};
use crate::ddc::ComplexBaseband;
use crate::error::{Error, Result};

fn wrap(p: f64) -> f64 {
    if p <= -PI {
        p + TAU
    } else if p > PI {
        p - TAU
    } else {
        p
    }
}

/// `arg(zA / zB)` per sample, in (−π, π].
pub fn complex_phase_difference(za: &[Complex64], zb: &[Complex64]) -> Result<Vec<f64>> {
    if za.len() != zb.len() {
        return Err(Error::param(format!("length mismatch: {} vs {}", za.len(), zb.len())));
    }
    za.iter()
        .zip(zb)
        .enumerate()
        .map(|(i, (a, b))| {
            if b.norm_sqr() == 0.0 {
                return Err(Error::Numeric(format!("divisor sample {i} is zero")));
            }
            Ok(wrap((a * b.conj()).arg()))
        })
        .collect()
}

/// Remove 2π jumps so that successive differences lie in (−π, π]. The
/// correction is kept as an integer number of turns, so long records do not
/// accumulate rounding error.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut turns = 0.0_f64;
    let mut prev: Option<f64> = None;
    for &p in wrapped {
        if let Some(q) = prev {
            let d = p - q;
            let k = ((d - wrap(d)) / TAU).round();
            turns -= k;
        }
        out.push(p + turns * TAU);
        prev = Some(p);
    }
    out
}

/// Convert phase (rad) at carrier `carrier_hz` to time error `Δt = Δφ / (2π f_r)`.
pub fn phase_to_time_error(
    phase_rad: &[f64],
    carrier_hz: f64,
    rate_hz: f64,
    start_time_s: f64,
) -> Result<TimeErrorSeries> {
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(Error::param(format!("carrier must be positive, got {carrier_hz}")));
    }
    let k = 1.0 / (TAU * carrier_hz);
    TimeErrorSeries::uniform(
        SourceKind::Sine,
        rate_hz,
        start_time_s,
        phase_rad.iter().map(|p| p * k).collect(),
    )
}

/// Time error of channel A relative to channel B from their baseband phasors.
pub fn sine_time_error(a: &ComplexBaseband, b: &ComplexBaseband, carrier_hz: f64) -> Result<TimeErrorSeries> {
    if a.sample_rate_hz != b.sample_rate_hz || a.start_time_s != b.start_time_s {
        return Err(Error::param("channels must share rate and start time"));
    }
    let phase = unwrap_phase(&complex_phase_difference(&a.iq, &b.iq)?);
    phase_to_time_error(&phase, carrier_hz, a.sample_rate_hz, a.start_time_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_phase_difference() {
        let za = [Complex64::from_polar(1.0, 0.3), Complex64::from_polar(2.0, -3.0)];
        let zb = [Complex64::from_polar(0.5, 0.1), Complex64::from_polar(1.0, 3.0)];
        let d = complex_phase_difference(&za, &zb).unwrap();
        assert!((d[0] - 0.2).abs() < 1e-15);
        assert!((d[1] - (-6.0 + TAU)).abs() < 1e-14);
        assert!(complex_phase_difference(&za, &[Complex64::default(); 2]).is_err());
        assert!(complex_phase_difference(&za, &zb[..1]).is_err());
    }

    #[test]
    fn pi_maps_to_positive_pi() {
        let d = complex_phase_difference(&[Complex64::new(-1.0, -0.0)], &[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(d[0], PI);
    }

    #[test]
    fn unwrap_example() {
        let u = unwrap_phase(&[0.0, PI - 0.1, -PI + 0.1]);
        assert_eq!(u[0], 0.0);
        assert_eq!(u[1], PI - 0.1);
        assert!((u[2] - (PI + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn unwrap_long_ramp_has_no_drift() {
        let step = 2.9;
        let n = 1_000_000;
        let wrapped: Vec<f64> = (0..n).map(|i| wrap((step * i as f64) % TAU)).collect();
        let u = unwrap_phase(&wrapped);
        let last = u[n - 1] - step * (n - 1) as f64;
        assert!(last.abs() < 1e-6, "{last}");
    }

    #[test]
    fn phase_to_time_scale() {
        let s = phase_to_time_error(&[2.2556e-5], 10e6, 1.0, 0.0).unwrap();
        assert!((s.values_s[0] - 2.2556e-5 / (TAU * 1e7)).abs() < 1e-27);
        assert!(phase_to_time_error(&[0.0], 0.0, 1.0, 0.0).is_err());
    }
}
