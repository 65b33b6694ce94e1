//! Dual-mixer time-difference (DMTD) reference measurement.
//!
//! Each channel is mixed with a transfer oscillator offset from the
//! reference by the beat frequency `f_b` and low-pass filtered. Zero
//! crossings of the two beat notes are timed with a counter; the beat-domain
//! interval shrinks back to carrier time by `f_b / f_r`.

use std::f64::consts::TAU;

use crate::analysis::{SourceKind, TimeErrorSeries};
use crate::ddc::{design_fir_lowpass, FirStage};
use crate::error::{Error, Result};
use crate::sigmodel::cycles_frac;

#[derive(Debug, Clone, PartialEq)]
pub struct DmtdConfig {
    pub sample_rate_hz: f64,
    pub reference_freq_hz: f64,
    pub transfer_freq_hz: f64,
    pub lowpass: FirStage,
}

impl DmtdConfig {
    /// Default beat filter: passband to 5·f_b, stopband from 50·f_b (or half
    /// the aliased sum frequency, if lower), 100 dB.
    pub fn new(sample_rate_hz: f64, reference_freq_hz: f64, transfer_freq_hz: f64) -> Result<Self> {
        crate::sigmodel::check_rate(sample_rate_hz)?;
        let nyq = sample_rate_hz / 2.0;
        for f in [reference_freq_hz, transfer_freq_hz] {
            if !(f > 0.0 && f < nyq) {
                return Err(Error::Nyquist {
                    carrier_hz: f,
                    sample_rate_hz,
                });
            }
        }
        let fb = (reference_freq_hz - transfer_freq_hz).abs();
        if fb == 0.0 {
            return Err(Error::param("transfer oscillator must be offset from the reference"));
        }
        let sum = (reference_freq_hz + transfer_freq_hz) % sample_rate_hz;
        let sum_alias = sum.min(sample_rate_hz - sum);
        let pass = 5.0 * fb;
        let stop = (50.0 * fb).min(0.5 * sum_alias).min(0.9 * nyq);
        if pass >= stop {
            return Err(Error::param(format!(
                "beat {fb} Hz leaves no room for a filter below the mixing image at {sum_alias} Hz"
            )));
        }
        let lowpass = design_fir_lowpass(pass / nyq, 100.0, (stop - pass) / nyq)?;
        Ok(Self {
            sample_rate_hz,
            reference_freq_hz,
            transfer_freq_hz,
            lowpass,
        })
    }

    pub fn with_lowpass(mut self, lowpass: FirStage) -> Self {
        self.lowpass = lowpass;
        self
    }

    pub fn beat_hz(&self) -> f64 {
        (self.reference_freq_hz - self.transfer_freq_hz).abs()
    }
}

/// Low-pass filtered mixer output.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatSignal {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub samples: Vec<f64>,
}

/// Mix with `sin(2π f_t n / f_s)` and low-pass; the result is the beat note at
/// the input amplitude, stamped at the centre of each filter window.
pub fn dmtd_beat(x: &[f64], start_time_s: f64, cfg: &DmtdConfig) -> Result<BeatSignal> {
    if cfg.lowpass.decimation() != 1 {
        return Err(Error::param("beat filter must not decimate"));
    }
    let fb = cfg.beat_hz() / cfg.sample_rate_hz;
    let gain = cfg.lowpass.magnitude(fb);
    if gain < 0.5f64.sqrt() {
        return Err(Error::param(format!(
            "beat {} Hz is outside the filter passband (gain {gain})",
            cfg.beat_hz()
        )));
    }
    let h = cfg.lowpass.taps();
    if x.len() < h.len() {
        return Err(Error::TooShort {
            needed: h.len(),
            got: x.len(),
        });
    }
    let ratio = cfg.transfer_freq_hz / cfg.sample_rate_hz;
    let mixed: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(n, v)| 2.0 * v * (TAU * cycles_frac(ratio, n as u64)).sin())
        .collect();
    let samples = mixed
        .windows(h.len())
        .map(|w| w.iter().zip(h.iter().rev()).map(|(a, b)| a * b).sum())
        .collect();
    Ok(BeatSignal {
        sample_rate_hz: cfg.sample_rate_hz,
        start_time_s: start_time_s + cfg.lowpass.group_delay() / cfg.sample_rate_hz,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCrossing {
    pub time_s: f64,
    pub rising: bool,
}

/// Sign changes located by linear interpolation. Rising: `s[i] < 0 ≤ s[i+1]`;
/// falling: `s[i] > 0 ≥ s[i+1]`.
pub fn zero_crossings(beat: &BeatSignal) -> Vec<ZeroCrossing> {
    let s = &beat.samples;
    let out: Vec<ZeroCrossing> = s
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let rising = w[0] < 0.0 && w[1] >= 0.0;
            let falling = w[0] > 0.0 && w[1] <= 0.0;
            (rising || falling).then(|| ZeroCrossing {
                time_s: beat.start_time_s + (i as f64 + w[0] / (w[0] - w[1])) / beat.sample_rate_hz,
                rising,
            })
        })
        .collect();
    if out.is_empty() {
        log::warn!("beat signal has no zero crossings");
    }
    out
}

/// Time-interval counter clocked at `clock_hz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TicSpec {
    pub clock_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TicReading {
    pub counts: u64,
    pub interval_s: f64,
}

/// Whole clock periods between start and stop. Intervals within 1e-9 of a
/// count of an exact multiple are counted as that multiple, so float rounding
/// of the timestamps cannot lose a period.
pub fn tic_count(start_s: f64, stop_s: f64, spec: &TicSpec) -> Result<TicReading> {
    if !(spec.clock_hz.is_finite() && spec.clock_hz > 0.0) {
        return Err(Error::param("counter clock must be positive"));
    }
    let d = stop_s - start_s;
    if !(d >= 0.0) {
        return Err(Error::param(format!("stop precedes start by {} s", -d)));
    }
    let x = d * spec.clock_hz;
    let r = x.round();
    let counts = if (x - r).abs() <= 1e-9 { r } else { x.floor() } as u64;
    Ok(TicReading {
        counts,
        interval_s: counts as f64 / spec.clock_hz,
    })
}

/// Carrier-domain time error from a beat-domain interval: `Δt · f_b / f_r`.
pub fn dmtd_time_error(dt_beat_s: f64, reference_freq_hz: f64, beat_hz: f64) -> Result<f64> {
    if !(beat_hz > 0.0) {
        return Err(Error::param(format!("beat frequency must be positive, got {beat_hz}")));
    }
    if !(reference_freq_hz > 0.0) {
        return Err(Error::param("reference frequency must be positive"));
    }
    Ok(dt_beat_s * beat_hz / reference_freq_hz)
}

/// Full DMTD measurement of channel A against channel B. Each crossing of A is
/// paired with the nearest same-direction crossing of B; the counter runs from
/// the earlier to the later, and the sign records which came first.
pub fn dmtd_measure(
    a: &[f64],
    b: &[f64],
    start_time_s: f64,
    cfg: &DmtdConfig,
    tic: &TicSpec,
) -> Result<TimeErrorSeries> {
    if a.len() != b.len() {
        return Err(Error::param("channels differ in length"));
    }
    let ca = zero_crossings(&dmtd_beat(a, start_time_s, cfg)?);
    let cb = zero_crossings(&dmtd_beat(b, start_time_s, cfg)?);
    let fb = cfg.beat_hz();
    let half = 0.5 / fb;
    // With the transfer above the reference the beat phase runs backwards.
    let sign = if cfg.transfer_freq_hz > cfg.reference_freq_hz {
        -1.0
    } else {
        1.0
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut j = 0;
    for x in &ca {
        while j < cb.len() && cb[j].time_s < x.time_s - half {
            j += 1;
        }
        let nearest = cb[j..]
            .iter()
            .take_while(|y| y.time_s <= x.time_s + half)
            .filter(|y| y.rising == x.rising)
            .min_by(|p, q| (p.time_s - x.time_s).abs().total_cmp(&(q.time_s - x.time_s).abs()));
        let Some(y) = nearest else { continue };
        let dt = if y.time_s >= x.time_s {
            tic_count(x.time_s, y.time_s, tic)?.interval_s
        } else {
            -tic_count(y.time_s, x.time_s, tic)?.interval_s
        };
        times.push(x.time_s);
        values.push(sign * dmtd_time_error(dt, cfg.reference_freq_hz, fb)?);
    }
    if values.is_empty() {
        return Err(Error::Empty("no paired beat crossings".into()));
    }
    TimeErrorSeries::new(SourceKind::Dmtd, 2.0 * fb, times, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigmodel::{synth_sine, PhaseErrorModel, SineModel};

    #[test]
    fn counter_quantizes_down() {
        let tic = TicSpec { clock_hz: 250e6 };
        assert_eq!(tic_count(0.0, 17e-9, &tic).unwrap().counts, 4);
        let r = tic_count(1.0, 1.0 + 3.0 * 4e-9, &tic).unwrap();
        assert_eq!(r.counts, 3);
        assert!((r.interval_s - 12e-9).abs() < 1e-24);
        assert!(tic_count(1.0, 0.5, &tic).is_err());
    }

    #[test]
    fn beat_interval_scales_down() {
        // One count of a 250 MHz counter at f_b/f_r = 1e-3 is 4 ps.
        let v = dmtd_time_error(4e-9, 10e6, 10e3).unwrap();
        assert!((v - 4e-12).abs() < 1e-24);
        assert!(dmtd_time_error(1.0, 10e6, 0.0).is_err());
    }

    #[test]
    fn zero_crossing_interpolation() {
        let beat = BeatSignal {
            sample_rate_hz: 2.0,
            start_time_s: 1.0,
            samples: vec![-1.0, 3.0, 1.0, 0.0, -2.0],
        };
        let z = zero_crossings(&beat);
        assert_eq!(z.len(), 2);
        assert!(z[0].rising && (z[0].time_s - (1.0 + 0.25 / 2.0)).abs() < 1e-15);
        assert!(!z[1].rising && (z[1].time_s - 2.5).abs() < 1e-15);
    }

    #[test]
    fn heterodyne_magnifies_time_shifts() {
        let fs = 25e6;
        let (fr, ft) = (10e6, 10e6 - 10e3);
        let cfg = DmtdConfig::new(fs, fr, ft).unwrap();
        let delta = 1e-9;
        let shift = PhaseErrorModel::Constant {
            phase_rad: -TAU * fr * delta,
        };
        let a = synth_sine(&SineModel::new(fr), fs, 0.002).unwrap();
        let b = synth_sine(&SineModel::new(fr).with_phase_error(shift), fs, 0.002).unwrap();
        let za = zero_crossings(&dmtd_beat(a.samples(), 0.0, &cfg).unwrap());
        let zb = zero_crossings(&dmtd_beat(b.samples(), 0.0, &cfg).unwrap());
        assert_eq!(za.len(), zb.len());
        for (x, y) in za.iter().zip(&zb) {
            let d = y.time_s - x.time_s;
            assert!((d - delta * fr / 10e3).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn measures_known_offset_either_side() {
        let fs = 25e6;
        let fr = 10e6;
        let dphi = 0.3;
        let truth = dphi / (TAU * fr);
        let a = synth_sine(
            &SineModel::new(fr).with_phase_error(PhaseErrorModel::Constant { phase_rad: dphi }),
            fs,
            0.003,
        )
        .unwrap();
        let b = synth_sine(&SineModel::new(fr), fs, 0.003).unwrap();
        for ft in [fr - 10e3, fr + 10e3] {
            let cfg = DmtdConfig::new(fs, fr, ft).unwrap();
            let s = dmtd_measure(a.samples(), b.samples(), 0.0, &cfg, &TicSpec { clock_hz: 250e6 }).unwrap();
            assert!(s.len() > 40);
            for v in &s.values_s {
                assert!((v - truth).abs() <= 4e-12, "ft={ft}: {v} vs {truth}");
            }
        }
    }
}
