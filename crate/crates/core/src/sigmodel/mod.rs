//! Signal models for the reference oscillators and the ADC front end.
//!
//! Two shapes are supported: a pure sine whose phase error is a
//! configurable function of time, and a pulse train built from the step
//! response of a second-order low-pass filter. Both produce a
//! [`RealSampleStream`], which can then be passed through [`quantize`] to
//! emulate a fixed-width converter.

mod adc;
mod pulse;
mod sine;

pub use adc::{quantize, AdcSpec, ClipStats};
pub use pulse::{lp2_step_response, synth_pulse, PulseModel, PulseSource};
pub use sine::{synth_sine, PhaseErrorModel, SineModel, SineSource};

use crate::error::{Error, Result};

/// Storage format of a sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// Integer converter codes carried in signed 16-bit words.
    Int16,
    /// Floating-point samples.
    Float64,
}

/// Real-valued samples on a uniform time grid, interleaved across channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSampleStream {
    sample_rate_hz: f64,
    channels: usize,
    format: SampleFormat,
    start_time_s: f64,
    samples: Vec<f64>,
}

impl RealSampleStream {
    /// Build a stream from interleaved samples.
    ///
    /// Integer streams must hold integral values inside the `i16` range.
    pub fn new(
        sample_rate_hz: f64,
        channels: usize,
        format: SampleFormat,
        start_time_s: f64,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::param(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if channels == 0 {
            return Err(Error::param("channel count must be at least 1"));
        }
        if !samples.len().is_multiple_of(channels) {
            return Err(Error::param(format!(
                "{} samples do not divide evenly into {channels} channels",
                samples.len()
            )));
        }
        if !start_time_s.is_finite() {
            return Err(Error::param("start time must be finite"));
        }
        if format == SampleFormat::Int16 {
            if let Some(bad) = samples
                .iter()
                .find(|v| v.fract() != 0.0 || **v < i16::MIN as f64 || **v > i16::MAX as f64)
            {
                return Err(Error::param(format!("{bad} is not a valid 16-bit code")));
            }
        }
        Ok(Self {
            sample_rate_hz,
            channels,
            format,
            start_time_s,
            samples,
        })
    }

    /// Build an interleaved stream from per-channel vectors of equal length.
    pub fn from_channels(
        sample_rate_hz: f64,
        format: SampleFormat,
        start_time_s: f64,
        channels: &[Vec<f64>],
    ) -> Result<Self> {
        let n = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::param("channels have different lengths"));
        }
        let mut samples = Vec::with_capacity(n * channels.len());
        for i in 0..n {
            samples.extend(channels.iter().map(|c| c[i]));
        }
        Self::new(sample_rate_hz, channels.len(), format, start_time_s, samples)
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn format(&self) -> SampleFormat {
        self.format
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    /// Interleaved samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.samples.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copy out one channel.
    pub fn channel(&self, index: usize) -> Result<Vec<f64>> {
        if index >= self.channels {
            return Err(Error::param(format!(
                "channel {index} out of range for {}-channel stream",
                self.channels
            )));
        }
        Ok(self
            .samples
            .iter()
            .skip(index)
            .step_by(self.channels)
            .copied()
            .collect())
    }

    /// Timestamp of sample `index` (per channel).
    pub fn time_of(&self, index: usize) -> f64 {
        self.start_time_s + index as f64 / self.sample_rate_hz
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Fractional part of `ratio * k`, computed with an error-free product so the
/// carrier phase stays exact for indices far beyond 2^24.
pub(crate) fn cycles_frac(ratio: f64, k: u64) -> f64 {
    let kf = k as f64;
    let p = ratio * kf;
    let e = ratio.mul_add(kf, -p);
    let f = (p - p.floor()) + e;
    f - f.floor()
}

pub(crate) fn check_rate(sample_rate_hz: f64) -> Result<()> {
    if sample_rate_hz.is_finite() && sample_rate_hz > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )))
    }
}

pub(crate) fn sample_count(sample_rate_hz: f64, duration_s: f64) -> Result<usize> {
    check_rate(sample_rate_hz)?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::param(format!("duration must be positive, got {duration_s}")));
    }
    let n = (duration_s * sample_rate_hz).round();
    if n < 1.0 {
        return Err(Error::param("duration is shorter than one sample"));
    }
    Ok(n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaving_round_trips() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![-1.0, -2.0, -3.0];
        let s = RealSampleStream::from_channels(10.0, SampleFormat::Int16, 0.0, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.samples(), &[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]);
        assert_eq!(s.channel(0).unwrap(), a);
        assert_eq!(s.channel(1).unwrap(), b);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn rejects_non_integer_codes() {
        assert!(RealSampleStream::new(1.0, 1, SampleFormat::Int16, 0.0, vec![0.5]).is_err());
        assert!(RealSampleStream::new(1.0, 1, SampleFormat::Int16, 0.0, vec![40000.0]).is_err());
        assert!(RealSampleStream::new(1.0, 2, SampleFormat::Float64, 0.0, vec![0.0; 3]).is_err());
    }

    #[test]
    fn cycles_frac_is_exact_for_large_indices() {
        // The stored value of 0.4 exceeds 0.4 by 2.2204460492503131e-17, so the
        // exact fractional part of 0.4 * k is 0.4 + k * 2.22e-17.
        let ratio = 0.4_f64;
        let k = 2_500_000_001_u64;
        let expected = 0.4 + k as f64 * 2.220446049250313e-17;
        let exact = cycles_frac(ratio, k);
        assert!((exact - expected).abs() < 1e-15, "{exact} vs {expected}");
        let p = ratio * k as f64;
        let naive = p - p.floor();
        assert!((naive - expected).abs() > 1e-9);
    }
}
