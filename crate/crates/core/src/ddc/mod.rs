//! Digital down-conversion: NCO mixing, multistage FIR decimation, a
//! fixed-point CIC reference chain, and the residual-SNR metric used to
//! compare them.

mod cic;
mod compare;
mod fir;
mod nco;

pub use cic::{cic_decimate, CicArithmetic, CicSpec};
pub use compare::{compare_cic_fir, CicFirRow, CompareOptions};
pub use fir::{
    design_decimating_lowpass, design_fir_lowpass, kaiser_beta, kaiser_window, plan_stages, DecimatorSpec, FirStage,
    LowpassDesign, StreamingDecimator, DEFAULT_MAX_TAPS,
};
pub use nco::{nco_mix, Nco};

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigmodel::cycles_frac;

/// Reported by [`snr_of_residual`] when the residual has no variance at all.
pub const SNR_SATURATED_DB: f64 = f64::INFINITY;

/// Complex samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBaseband {
    pub sample_rate_hz: f64,
    /// Time of the first sample, in the input stream's time base.
    pub start_time_s: f64,
    pub iq: Vec<Complex64>,
}

impl ComplexBaseband {
    pub fn new(sample_rate_hz: f64, start_time_s: f64, iq: Vec<Complex64>) -> Result<Self> {
        crate::sigmodel::check_rate(sample_rate_hz)?;
        Ok(Self {
            sample_rate_hz,
            start_time_s,
            iq,
        })
    }

    pub fn len(&self) -> usize {
        self.iq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iq.is_empty()
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.start_time_s + index as f64 / self.sample_rate_hz
    }
}

/// Down-converter tuning. The residual beat `f_b = f_r − f_t` is the rate at
/// which the baseband phasor of a reference at `f_r` rotates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdcConfig {
    pub sample_rate_hz: f64,
    pub nco_freq_hz: f64,
    pub reference_freq_hz: f64,
    pub nco_phase_rad: f64,
}

impl DdcConfig {
    /// Tune the NCO exactly to the reference.
    pub fn new(sample_rate_hz: f64, reference_freq_hz: f64) -> Self {
        Self {
            sample_rate_hz,
            nco_freq_hz: reference_freq_hz,
            reference_freq_hz,
            nco_phase_rad: 0.0,
        }
    }

    pub fn with_nco_freq(mut self, nco_freq_hz: f64) -> Self {
        self.nco_freq_hz = nco_freq_hz;
        self
    }

    pub fn beat_hz(&self) -> f64 {
        self.reference_freq_hz - self.nco_freq_hz
    }

    pub fn validate(&self) -> Result<()> {
        crate::sigmodel::check_rate(self.sample_rate_hz)?;
        for f in [self.nco_freq_hz, self.reference_freq_hz] {
            if !(f.is_finite() && f >= 0.0) {
                return Err(Error::param(format!("frequency must be non-negative, got {f}")));
            }
            if f >= self.sample_rate_hz / 2.0 {
                return Err(Error::Nyquist {
                    carrier_hz: f,
                    sample_rate_hz: self.sample_rate_hz,
                });
            }
        }
        if !self.nco_phase_rad.is_finite() {
            return Err(Error::param("NCO phase must be finite"));
        }
        Ok(())
    }

    pub fn nco(&self) -> Nco {
        Nco::new(self.nco_freq_hz, self.sample_rate_hz, self.nco_phase_rad)
    }
}

/// Decimate a complex sequence through a FIR cascade. Output sample `j` is
/// stamped at the centre of the input window it was computed from.
pub fn fir_decimate(input: &ComplexBaseband, spec: &DecimatorSpec) -> Result<ComplexBaseband> {
    let needed = spec.warmup() + 1;
    if input.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: input.len(),
        });
    }
    let mut dec = StreamingDecimator::new(spec, input.sample_rate_hz, input.start_time_s);
    let mut out = Vec::with_capacity(input.len() / spec.total_decimation() + 1);
    dec.push(&input.iq, &mut out);
    ComplexBaseband::new(dec.output_rate_hz(), dec.first_output_time_s(), out)
}

/// Mixes any number of equally sampled real channels against one shared NCO
/// and decimates each, chunk by chunk.
pub struct DdcBank {
    nco: Nco,
    decimators: Vec<StreamingDecimator>,
    mixed: Vec<Vec<Complex64>>,
    lo: Vec<Complex64>,
}

impl DdcBank {
    pub fn new(cfg: &DdcConfig, spec: &DecimatorSpec, channels: usize, start_time_s: f64) -> Result<Self> {
        cfg.validate()?;
        if channels == 0 {
            return Err(Error::param("need at least one channel"));
        }
        Ok(Self {
            nco: cfg.nco(),
            decimators: (0..channels)
                .map(|_| StreamingDecimator::new(spec, cfg.sample_rate_hz, start_time_s))
                .collect(),
            mixed: vec![Vec::new(); channels],
            lo: Vec::new(),
        })
    }

    pub fn output_rate_hz(&self) -> f64 {
        self.decimators[0].output_rate_hz()
    }

    pub fn first_output_time_s(&self) -> f64 {
        self.decimators[0].first_output_time_s()
    }

    /// Feed one equally long chunk per channel; outputs are appended per channel.
    pub fn push(&mut self, chunks: &[&[f64]], out: &mut [Vec<Complex64>]) -> Result<()> {
        let n = self.decimators.len();
        if chunks.len() != n || out.len() != n {
            return Err(Error::param(format!("expected {n} channels")));
        }
        let len = chunks[0].len();
        if chunks.iter().any(|c| c.len() != len) {
            return Err(Error::param("channel chunks differ in length"));
        }
        self.lo.resize(len, Complex64::default());
        self.nco.fill_conj(&mut self.lo);
        for (m, c) in self.mixed.iter_mut().zip(chunks) {
            m.clear();
            m.extend(c.iter().zip(&self.lo).map(|(x, lo)| x * lo));
        }
        for ((d, m), o) in self.decimators.iter_mut().zip(&self.mixed).zip(out.iter_mut()) {
            d.push(m, o);
        }
        Ok(())
    }
}

/// Mix one real channel to baseband and decimate it.
pub fn downconvert(
    samples: &[f64],
    start_time_s: f64,
    cfg: &DdcConfig,
    spec: &DecimatorSpec,
) -> Result<ComplexBaseband> {
    cfg.validate()?;
    let needed = spec.warmup() + 1;
    if samples.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: samples.len(),
        });
    }
    let mut bank = DdcBank::new(cfg, spec, 1, start_time_s)?;
    let mut out = vec![Vec::new()];
    for chunk in samples.chunks(1 << 16) {
        bank.push(&[chunk], &mut out)?;
    }
    ComplexBaseband::new(bank.output_rate_hz(), bank.first_output_time_s(), out.pop().unwrap())
}

/// Phase of the reference relative to the NCO at each baseband sample: the
/// residual beat rotation `2π f_b (t − t₀)` is removed and the `1/(2j)` factor
/// of real-to-complex mixing is undone. `t₀` is the time of input sample 0.
pub fn baseband_phase(baseband: &ComplexBaseband, beat_hz: f64, input_start_time_s: f64) -> Vec<f64> {
    let offset = baseband.start_time_s - input_start_time_s;
    let base = beat_hz * offset;
    let step = beat_hz / baseband.sample_rate_hz;
    baseband
        .iq
        .iter()
        .enumerate()
        .map(|(n, z)| {
            let cycles = base.fract() + cycles_frac(step.abs(), n as u64) * step.signum();
            let rot = Complex64::from_polar(1.0, -TAU * cycles);
            let p = (z * rot).arg() + FRAC_PI_2;
            if p > std::f64::consts::PI {
                p - TAU
            } else {
                p
            }
        })
        .collect()
}

/// SNR (dB) of `r = zA / zB`: squared magnitude of the mean of `r` over its variance.
pub fn snr_of_residual(za: &[Complex64], zb: &[Complex64]) -> Result<f64> {
    if za.len() != zb.len() {
        return Err(Error::param(format!("length mismatch: {} vs {}", za.len(), zb.len())));
    }
    if za.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: za.len(),
        });
    }
    let mut mags: Vec<f64> = zb.iter().map(|z| z.norm()).collect();
    mags.sort_unstable_by(f64::total_cmp);
    let floor = 1e-12 * mags[mags.len() / 2];
    if let Some(i) = zb.iter().position(|z| z.norm() <= floor) {
        return Err(Error::Numeric(format!("divisor sample {i} is effectively zero")));
    }
    let r: Vec<Complex64> = za.iter().zip(zb).map(|(a, b)| a / b).collect();
    let n = r.len() as f64;
    let mean = r.iter().sum::<Complex64>() / n;
    let var = r.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / n;
    if var == 0.0 {
        return Ok(SNR_SATURATED_DB);
    }
    Ok(10.0 * (mean.norm_sqr() / var).log10())
}
