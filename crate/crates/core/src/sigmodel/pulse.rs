use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{check_rate, sample_count, RealSampleStream, SampleFormat};
use crate::error::{Error, Result};

/// Tail magnitude below which a step response is treated as settled.
const TAIL: f64 = 1e-12;

/// Step response of an underdamped second-order low-pass filter:
///
/// `h(t) = 1 − e^(−ζω₀t) sin(√(1−ζ²) ω₀ t + acos ζ) / √(1−ζ²)` for `t ≥ 0`, else 0.
pub fn lp2_step_response(t: f64, cutoff_rad_per_s: f64, damping: f64) -> Result<f64> {
    let shape = Lp2::new(cutoff_rad_per_s, damping)?;
    Ok(shape.exact(t))
}

#[derive(Debug, Clone, Copy)]
struct Lp2 {
    decay: f64,
    wd: f64,
    phase: f64,
    inv_s: f64,
    settle_s: f64,
}

impl Lp2 {
    fn new(w0: f64, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(Error::param(format!("damping must lie in (0, 1), got {zeta}")));
        }
        if !(w0.is_finite() && w0 > 0.0) {
            return Err(Error::param(format!("cutoff must be positive, got {w0}")));
        }
        let s = (1.0 - zeta * zeta).sqrt();
        let decay = zeta * w0;
        Ok(Self {
            decay,
            wd: s * w0,
            phase: zeta.acos(),
            inv_s: 1.0 / s,
            settle_s: (s * TAIL).ln() / -decay,
        })
    }

    fn exact(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            1.0 - self.inv_s * (-self.decay * t).exp() * (self.wd * t + self.phase).sin()
        }
    }

    /// Step response with the settled tail clamped to exactly 1.
    fn step(&self, t: f64) -> f64 {
        if t >= self.settle_s {
            1.0
        } else {
            self.exact(t)
        }
    }

    fn pulse(&self, t: f64, high_s: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else if t < high_s {
            self.step(t)
        } else if t >= high_s + self.settle_s {
            0.0
        } else {
            self.step(t) - self.step(t - high_s)
        }
    }
}

/// A periodic pulse train with per-pulse timing errors.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseModel {
    pub period_s: f64,
    pub high_s: f64,
    /// Natural frequency ω₀ of the shaping filter (rad/s).
    pub cutoff_rad_per_s: f64,
    /// Damping ratio ζ, strictly between 0 and 1.
    pub damping: f64,
    pub amplitude: f64,
    /// Timing error of pulse `n`; pulses past the end of the list have none.
    pub time_errors_s: Vec<f64>,
    /// Signal-to-noise ratio `(A²/2) / σ²` in dB; `None` for a clean signal.
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
}

impl PulseModel {
    pub fn new(period_s: f64, high_s: f64, cutoff_rad_per_s: f64, damping: f64) -> Self {
        Self {
            period_s,
            high_s,
            cutoff_rad_per_s,
            damping,
            amplitude: 1.0,
            time_errors_s: Vec::new(),
            snr_db: None,
            noise_seed: 0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_time_errors(mut self, time_errors_s: Vec<f64>) -> Self {
        self.time_errors_s = time_errors_s;
        self
    }

    pub fn with_noise(mut self, snr_db: f64, seed: u64) -> Self {
        self.snr_db = Some(snr_db);
        self.noise_seed = seed;
        self
    }

    pub fn noise_sigma(&self) -> f64 {
        match self.snr_db {
            Some(snr) => self.amplitude.abs() / (2.0 * 10f64.powf(snr / 10.0)).sqrt(),
            None => 0.0,
        }
    }

    fn validate(&self) -> Result<Lp2> {
        let shape = Lp2::new(self.cutoff_rad_per_s, self.damping)?;
        if !(self.period_s.is_finite() && self.period_s > 0.0) {
            return Err(Error::param(format!("period must be positive, got {}", self.period_s)));
        }
        if !(self.high_s > 0.0 && self.high_s < self.period_s) {
            return Err(Error::param(format!(
                "high time {} must lie in (0, period)",
                self.high_s
            )));
        }
        if let Some(te) = self.time_errors_s.iter().find(|te| !(te.abs() < self.period_s / 2.0)) {
            return Err(Error::param(format!(
                "time error {te} s reaches half the period {} s",
                self.period_s
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::param("amplitude must be finite"));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::param(format!("SNR must be finite, got {snr}")));
            }
        }
        Ok(shape)
    }
}

/// Incremental pulse-train generator.
pub struct PulseSource {
    shape: Lp2,
    fs: f64,
    period_samples: f64,
    high_s: f64,
    amplitude: f64,
    time_errors_samples: Vec<f64>,
    max_te_samples: f64,
    noise: Option<(Xoshiro256PlusPlus, f64)>,
    index: u64,
}

impl PulseSource {
    pub fn new(model: &PulseModel, sample_rate_hz: f64) -> Result<Self> {
        check_rate(sample_rate_hz)?;
        let shape = model.validate()?;
        let time_errors_samples: Vec<f64> = model.time_errors_s.iter().map(|t| t * sample_rate_hz).collect();
        let max_te_samples = time_errors_samples.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
        Ok(Self {
            shape,
            fs: sample_rate_hz,
            period_samples: model.period_s * sample_rate_hz,
            high_s: model.high_s,
            amplitude: model.amplitude,
            time_errors_samples,
            max_te_samples,
            noise: model
                .snr_db
                .map(|_| (Xoshiro256PlusPlus::seed_from_u64(model.noise_seed), model.noise_sigma())),
            index: 0,
        })
    }

    fn te(&self, n: i64) -> f64 {
        if n >= 0 {
            self.time_errors_samples.get(n as usize).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    fn clean(&self, k: u64) -> f64 {
        let k = k as f64;
        let active = (self.high_s + self.shape.settle_s) * self.fs;
        let n_hi = ((k + self.max_te_samples) / self.period_samples).floor() as i64;
        let n_lo = (((k - active - self.max_te_samples) / self.period_samples).floor() as i64).max(0);
        let mut acc = 0.0;
        for n in n_lo..=n_hi {
            // Sample offsets stay exact integers when the period is a whole
            // number of samples, so a clean train repeats bit-for-bit.
            let pos = k - n as f64 * self.period_samples - self.te(n);
            acc += self.shape.pulse(pos / self.fs, self.high_s);
        }
        acc
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for (i, y) in out.iter_mut().enumerate() {
            *y = self.amplitude * self.clean(self.index + i as u64);
        }
        self.index += out.len() as u64;
        if let Some((rng, sigma)) = &mut self.noise {
            for y in out.iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *y += *sigma * g;
            }
        }
    }
}

/// Synthesize a single-channel pulse train of the given duration.
pub fn synth_pulse(model: &PulseModel, sample_rate_hz: f64, duration_s: f64) -> Result<RealSampleStream> {
    let n = sample_count(sample_rate_hz, duration_s)?;
    let mut src = PulseSource::new(model, sample_rate_hz)?;
    let mut samples = vec![0.0; n];
    src.fill(&mut samples);
    RealSampleStream::new(sample_rate_hz, 1, SampleFormat::Float64, 0.0, samples)
}
