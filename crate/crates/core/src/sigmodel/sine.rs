use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{check_rate, cycles_frac, sample_count, RealSampleStream, SampleFormat};
use crate::error::{Error, Result};

/// Phase error of the oscillator as a function of time since stream start.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseErrorModel {
    Zero,
    Constant {
        phase_rad: f64,
    },
    /// `offset + rate * t`; a rate of `2π f_r d` models a fractional drift `d` (s/s).
    Linear {
        offset_rad: f64,
        rate_rad_per_s: f64,
    },
    Sinusoidal {
        amplitude_rad: f64,
        freq_hz: f64,
    },
    /// Independent Gaussian phase per sample.
    White {
        rms_rad: f64,
        seed: u64,
    },
    /// Samples of φ(t) at `rate_hz`, linearly interpolated and held past the end.
    Table {
        rate_hz: f64,
        values_rad: Vec<f64>,
    },
}

impl PhaseErrorModel {
    /// Phase error equivalent to a constant fractional frequency offset
    /// (time error growing at `drift` seconds per second) on a carrier.
    pub fn drift(carrier_hz: f64, drift: f64) -> Self {
        PhaseErrorModel::Linear {
            offset_rad: 0.0,
            rate_rad_per_s: TAU * carrier_hz * drift,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            PhaseErrorModel::Zero => true,
            PhaseErrorModel::Constant { phase_rad } => phase_rad.is_finite(),
            PhaseErrorModel::Linear {
                offset_rad,
                rate_rad_per_s,
            } => offset_rad.is_finite() && rate_rad_per_s.is_finite(),
            PhaseErrorModel::Sinusoidal { amplitude_rad, freq_hz } => amplitude_rad.is_finite() && freq_hz.is_finite(),
            PhaseErrorModel::White { rms_rad, .. } => rms_rad.is_finite() && *rms_rad >= 0.0,
            PhaseErrorModel::Table { rate_hz, values_rad } => {
                *rate_hz > 0.0 && !values_rad.is_empty() && values_rad.iter().all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid phase error model {self:?}")))
        }
    }

    /// `Some((offset, rate))` when the phase is affine in time.
    fn affine(&self) -> Option<(f64, f64)> {
        match *self {
            PhaseErrorModel::Zero => Some((0.0, 0.0)),
            PhaseErrorModel::Constant { phase_rad } => Some((phase_rad, 0.0)),
            PhaseErrorModel::Linear {
                offset_rad,
                rate_rad_per_s,
            } => Some((offset_rad, rate_rad_per_s)),
            _ => None,
        }
    }
}

/// A sine reference `A sin(2π f_r t + φ_e(t))` with optional additive white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SineModel {
    pub carrier_hz: f64,
    pub amplitude: f64,
    pub phase_error: PhaseErrorModel,
    /// Signal-to-noise ratio `(A²/2) / σ²` in dB; `None` for a clean signal.
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
}

impl SineModel {
    pub fn new(carrier_hz: f64) -> Self {
        Self {
            carrier_hz,
            amplitude: 0.5,
            phase_error: PhaseErrorModel::Zero,
            snr_db: None,
            noise_seed: 0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_phase_error(mut self, phase_error: PhaseErrorModel) -> Self {
        self.phase_error = phase_error;
        self
    }

    pub fn with_noise(mut self, snr_db: f64, seed: u64) -> Self {
        self.snr_db = Some(snr_db);
        self.noise_seed = seed;
        self
    }

    /// Standard deviation of the additive noise.
    pub fn noise_sigma(&self) -> f64 {
        match self.snr_db {
            Some(snr) => (self.amplitude * self.amplitude / 2.0 / 10f64.powf(snr / 10.0)).sqrt(),
            None => 0.0,
        }
    }
}

/// Samples between exact re-evaluations of the carrier phase on the fast path.
const RESYNC: usize = 512;

/// Incremental sine generator; successive [`fill`](Self::fill) calls continue
/// the same waveform, so arbitrarily long signals can be produced in chunks.
pub struct SineSource {
    ratio: f64,
    sample_rate_hz: f64,
    amplitude: f64,
    phase: PhaseEval,
    noise: Option<(Xoshiro256PlusPlus, f64)>,
    index: u64,
}

enum PhaseEval {
    Affine { offset: f64, rate: f64 },
    Sinusoidal { amplitude: f64, freq: f64 },
    White { rng: Xoshiro256PlusPlus, rms: f64 },
    Table { rate: f64, values: Vec<f64> },
}

impl PhaseEval {
    fn at(&mut self, t: f64) -> f64 {
        match self {
            PhaseEval::Affine { offset, rate } => *offset + *rate * t,
            PhaseEval::Sinusoidal { amplitude, freq } => *amplitude * (TAU * *freq * t).sin(),
            PhaseEval::White { rng, rms } => {
                let g: f64 = StandardNormal.sample(rng);
                *rms * g
            }
            PhaseEval::Table { rate, values } => {
                let pos = (t * *rate).max(0.0);
                let i = pos.floor() as usize;
                if i + 1 >= values.len() {
                    values[values.len() - 1]
                } else {
                    let f = pos - i as f64;
                    values[i] + f * (values[i + 1] - values[i])
                }
            }
        }
    }
}

impl SineSource {
    pub fn new(model: &SineModel, sample_rate_hz: f64) -> Result<Self> {
        check_rate(sample_rate_hz)?;
        if !(model.carrier_hz.is_finite() && model.carrier_hz > 0.0) {
            return Err(Error::param(format!(
                "carrier must be positive, got {}",
                model.carrier_hz
            )));
        }
        if model.carrier_hz >= sample_rate_hz / 2.0 {
            return Err(Error::Nyquist {
                carrier_hz: model.carrier_hz,
                sample_rate_hz,
            });
        }
        if !model.amplitude.is_finite() {
            return Err(Error::param("amplitude must be finite"));
        }
        model.phase_error.validate()?;
        let phase = match (&model.phase_error, model.phase_error.affine()) {
            (_, Some((offset, rate))) => PhaseEval::Affine { offset, rate },
            (PhaseErrorModel::Sinusoidal { amplitude_rad, freq_hz }, _) => PhaseEval::Sinusoidal {
                amplitude: *amplitude_rad,
                freq: *freq_hz,
            },
            (PhaseErrorModel::White { rms_rad, seed }, _) => PhaseEval::White {
                rng: Xoshiro256PlusPlus::seed_from_u64(*seed),
                rms: *rms_rad,
            },
            (PhaseErrorModel::Table { rate_hz, values_rad }, _) => PhaseEval::Table {
                rate: *rate_hz,
                values: values_rad.clone(),
            },
            _ => unreachable!("affine models handled above"),
        };
        let noise = match model.snr_db {
            Some(snr) if !snr.is_finite() => return Err(Error::param(format!("SNR must be finite, got {snr}"))),
            Some(_) => Some((Xoshiro256PlusPlus::seed_from_u64(model.noise_seed), model.noise_sigma())),
            None => None,
        };
        Ok(Self {
            ratio: model.carrier_hz / sample_rate_hz,
            sample_rate_hz,
            amplitude: model.amplitude,
            phase,
            noise,
            index: 0,
        })
    }

    /// Index of the next sample to be produced.
    pub fn position(&self) -> u64 {
        self.index
    }

    /// Write the next `out.len()` samples.
    pub fn fill(&mut self, out: &mut [f64]) {
        match self.phase {
            PhaseEval::Affine { offset, rate } => self.fill_affine(out, offset, rate),
            _ => {
                for (i, y) in out.iter_mut().enumerate() {
                    let k = self.index + i as u64;
                    let phi = self.phase.at(k as f64 / self.sample_rate_hz);
                    *y = self.amplitude * (TAU * cycles_frac(self.ratio, k) + phi).sin();
                }
            }
        }
        self.index += out.len() as u64;
        if let Some((rng, sigma)) = &mut self.noise {
            for y in out.iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *y += *sigma * g;
            }
        }
    }

    /// Affine phase: rotate a phasor and re-anchor it to the exact phase every
    /// `RESYNC` samples, keeping the error near 1e-13 rad at any index.
    fn fill_affine(&mut self, out: &mut [f64], offset: f64, rate: f64) {
        let step = Complex64::from_polar(1.0, TAU * self.ratio + rate / self.sample_rate_hz);
        for (c, block) in out.chunks_mut(RESYNC).enumerate() {
            let k0 = self.index + (c * RESYNC) as u64;
            let theta = TAU * cycles_frac(self.ratio, k0) + offset + rate * (k0 as f64 / self.sample_rate_hz);
            let mut p = Complex64::from_polar(1.0, theta);
            for y in block.iter_mut() {
                *y = self.amplitude * p.im;
                p *= step;
            }
        }
    }
}

/// Synthesize a single-channel sine reference of the given duration.
pub fn synth_sine(model: &SineModel, sample_rate_hz: f64, duration_s: f64) -> Result<RealSampleStream> {
    let n = sample_count(sample_rate_hz, duration_s)?;
    let mut src = SineSource::new(model, sample_rate_hz)?;
    let mut samples = vec![0.0; n];
    src.fill(&mut samples);
    RealSampleStream::new(sample_rate_hz, 1, SampleFormat::Float64, 0.0, samples)
}
