//! Sub-sample pulse edge timing.
//!
//! A Schmitt trigger finds each edge to the nearest sample. A short window
//! around it is then interpolated by zero-padding its spectrum, and the first
//! crossing of the refinement level is located by linear interpolation
//! between adjacent dense samples.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Rising,
    Falling,
}

/// Level at which the interpolated edge is timed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefineLevel {
    /// The trigger's own firing threshold (high for rising, low for falling edges).
    Fixed,
    /// `before + fraction · (after − before)`, where `before` and `after` are
    /// the medians of the samples preceding and following the coarse index.
    /// Insensitive to the pulse amplitude and baseline.
    PerEvent { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerSpec {
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub polarity: Polarity,
    /// Samples kept before the coarse index.
    pub window_before: usize,
    /// Samples kept from the coarse index onwards.
    pub window_after: usize,
    pub interp_factor: usize,
    pub level: RefineLevel,
}

impl Default for TriggerSpec {
    fn default() -> Self {
        Self {
            low_threshold: 0.3,
            high_threshold: 0.7,
            polarity: Polarity::Rising,
            window_before: 8,
            window_after: 8,
            interp_factor: 20,
            level: RefineLevel::Fixed,
        }
    }
}

impl TriggerSpec {
    /// Thresholds scaled to a signal whose nominal high level is `amplitude`.
    pub fn scaled(mut self, amplitude: f64) -> Self {
        self.low_threshold *= amplitude;
        self.high_threshold *= amplitude;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.low_threshold.is_finite() && self.high_threshold.is_finite()) {
            return Err(Error::param("thresholds must be finite"));
        }
        if self.low_threshold >= self.high_threshold {
            return Err(Error::param(format!(
                "low threshold {} must be below high threshold {}",
                self.low_threshold, self.high_threshold
            )));
        }
        if self.window_before + self.window_after < 8 || self.window_before == 0 || self.window_after == 0 {
            return Err(Error::param(
                "edge window needs samples on both sides and at least 8 in total",
            ));
        }
        if self.interp_factor == 0 {
            return Err(Error::param("interpolation factor must be at least 1"));
        }
        if let RefineLevel::PerEvent { fraction } = self.level {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::param(format!(
                    "level fraction must lie in (0, 1), got {fraction}"
                )));
            }
        }
        Ok(())
    }
}

/// Coarse trigger indices plus an explanation when nothing could fire.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmittResult {
    pub indices: Vec<usize>,
    pub diagnostic: Option<String>,
}

/// Hysteresis trigger. A rising event fires at the first sample ≥ high after
/// the trigger was armed by a sample ≤ low; falling edges mirror this.
pub fn schmitt_detect(samples: &[f64], spec: &TriggerSpec) -> Result<SchmittResult> {
    spec.validate()?;
    let (lo, hi) = (spec.low_threshold, spec.high_threshold);
    let mut indices = Vec::new();
    let mut armed = false;
    for (i, &x) in samples.iter().enumerate() {
        match spec.polarity {
            Polarity::Rising => {
                if x <= lo {
                    armed = true;
                } else if armed && x >= hi {
                    indices.push(i);
                    armed = false;
                }
            }
            Polarity::Falling => {
                if x >= hi {
                    armed = true;
                } else if armed && x <= lo {
                    indices.push(i);
                    armed = false;
                }
            }
        }
    }
    let diagnostic = if indices.is_empty() {
        let (min, max) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        Some(if samples.is_empty() {
            "no samples".to_string()
        } else if max < hi || min > lo {
            format!("thresholds [{lo}, {hi}] lie outside the signal range [{min}, {max}]")
        } else {
            "no complete transition through both thresholds".to_string()
        })
    } else {
        None
    };
    Ok(SchmittResult { indices, diagnostic })
}

/// Cached FFT plans for band-limited interpolation of fixed-size windows.
pub struct Interpolator {
    factor: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
    spec: Vec<Complex64>,
    dense: Vec<Complex64>,
}

impl Interpolator {
    pub fn new(len: usize, factor: usize) -> Result<Self> {
        if len < 8 {
            return Err(Error::param(format!(
                "interpolation window needs at least 8 samples, got {len}"
            )));
        }
        if factor == 0 {
            return Err(Error::param("interpolation factor must be at least 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            factor,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len * factor),
            len,
            spec: vec![Complex64::default(); len],
            dense: vec![Complex64::default(); len * factor],
        })
    }

    /// Zero-pad the spectrum of `window` to `len · factor` bins. For even
    /// lengths the Nyquist bin is split evenly between the two halves.
    /// Dense sample `i` corresponds to original position `i / factor`.
    pub fn interpolate(&mut self, window: &[f64]) -> Result<Vec<f64>> {
        let n = self.len;
        if window.len() != n {
            return Err(Error::param(format!(
                "window length {} differs from plan length {n}",
                window.len()
            )));
        }
        if self.factor == 1 {
            return Ok(window.to_vec());
        }
        for (s, &x) in self.spec.iter_mut().zip(window) {
            *s = Complex64::new(x, 0.0);
        }
        self.forward.process(&mut self.spec);
        let m = n * self.factor;
        self.dense.iter_mut().for_each(|d| *d = Complex64::default());
        let half = n / 2;
        if n.is_multiple_of(2) {
            self.dense[..half].copy_from_slice(&self.spec[..half]);
            self.dense[m - half + 1..].copy_from_slice(&self.spec[half + 1..]);
            self.dense[half] = self.spec[half] * 0.5;
            self.dense[m - half] = self.spec[half] * 0.5;
        } else {
            self.dense[..=half].copy_from_slice(&self.spec[..=half]);
            self.dense[m - half..].copy_from_slice(&self.spec[half + 1..]);
        }
        self.inverse.process(&mut self.dense);
        let scale = 1.0 / n as f64;
        Ok(self.dense.iter().map(|z| z.re * scale).collect())
    }
}

/// Band-limited interpolation of a short window by `factor`.
pub fn spectral_interpolate(window: &[f64], factor: usize) -> Result<Vec<f64>> {
    Interpolator::new(window.len(), factor)?.interpolate(window)
}

/// Fractional sample index of the first crossing of `threshold` in `dense`,
/// mapped back to original sample units.
///
/// `window_start` is the original index of the window's first sample. Ties
/// resolve to the first dense sample at or past the threshold.
pub fn refine_edge(
    dense: &[f64],
    threshold: f64,
    factor: usize,
    window_start: usize,
    polarity: Polarity,
) -> Result<f64> {
    if factor == 0 {
        return Err(Error::param("interpolation factor must be at least 1"));
    }
    let hit = dense.windows(2).position(|w| match polarity {
        Polarity::Rising => w[0] < threshold && threshold <= w[1],
        Polarity::Falling => w[0] > threshold && threshold >= w[1],
    });
    let i = hit.ok_or_else(|| Error::Numeric(format!("no dense sample pair brackets level {threshold}")))?;
    let pos = i as f64 + (threshold - dense[i]) / (dense[i + 1] - dense[i]);
    Ok(window_start as f64 + pos / factor as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeEvent {
    pub coarse_index: usize,
    pub fractional_index: f64,
    pub time_s: f64,
}

/// Refined edges of one channel in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeEventSeries {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub events: Vec<EdgeEvent>,
}

impl EdgeEventSeries {
    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time_s).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDetection {
    pub series: EdgeEventSeries,
    /// Coarse events whose window ran past either end of the input or into
    /// an excluded range.
    pub dropped_at_bounds: usize,
    /// Events whose refinement failed or broke time ordering.
    pub unrefined: usize,
    pub diagnostic: Option<String>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Detect, window, interpolate and refine every edge in one channel.
pub fn detect_edges(
    samples: &[f64],
    sample_rate_hz: f64,
    start_time_s: f64,
    spec: &TriggerSpec,
) -> Result<EdgeDetection> {
    detect_edges_masked(samples, sample_rate_hz, start_time_s, spec, &[])
}

/// As [`detect_edges`], but events whose observation window overlaps any of
/// the `excluded` sample ranges (e.g. zero-filled gaps) are dropped and counted
/// in `dropped_at_bounds`.
pub fn detect_edges_masked(
    samples: &[f64],
    sample_rate_hz: f64,
    start_time_s: f64,
    spec: &TriggerSpec,
    excluded: &[Range<usize>],
) -> Result<EdgeDetection> {
    crate::sigmodel::check_rate(sample_rate_hz)?;
    let coarse = schmitt_detect(samples, spec)?;
    let (wb, wa) = (spec.window_before, spec.window_after);
    let mut interp = Interpolator::new(wb + wa, spec.interp_factor)?;
    let mut events: Vec<EdgeEvent> = Vec::with_capacity(coarse.indices.len());
    let mut dropped_at_bounds = 0;
    let mut unrefined = 0;
    for &c in &coarse.indices {
        if c < wb || c + wa > samples.len() || excluded.iter().any(|r| r.start < c + wa && c - wb < r.end) {
            dropped_at_bounds += 1;
            continue;
        }
        let start = c - wb;
        let window = &samples[start..c + wa];
        let level = match spec.level {
            RefineLevel::Fixed => match spec.polarity {
                Polarity::Rising => spec.high_threshold,
                Polarity::Falling => spec.low_threshold,
            },
            RefineLevel::PerEvent { fraction } => {
                let before = median(&mut window[..wb].to_vec());
                let after = median(&mut window[wb..].to_vec());
                before + fraction * (after - before)
            }
        };
        let dense = interp.interpolate(window)?;
        match refine_edge(&dense, level, spec.interp_factor, start, spec.polarity) {
            Ok(f) if events.last().is_none_or(|e| e.fractional_index < f) => events.push(EdgeEvent {
                coarse_index: c,
                fractional_index: f,
                time_s: start_time_s + f / sample_rate_hz,
            }),
            _ => unrefined += 1,
        }
    }
    Ok(EdgeDetection {
        series: EdgeEventSeries {
            sample_rate_hz,
            start_time_s,
            events,
        },
        dropped_at_bounds,
        unrefined,
        diagnostic: coarse.diagnostic,
    })
}
