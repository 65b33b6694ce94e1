use super::{RealSampleStream, SampleFormat};
use crate::error::{Error, Result};

/// Converter model: `bits` of resolution, with `input_level` the fraction of
/// full scale reached by an input of magnitude `full_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcSpec {
    pub bits: u32,
    pub full_scale: f64,
    pub input_level: f64,
}

impl AdcSpec {
    /// 14-bit converter driven at half scale.
    pub fn new(bits: u32) -> Self {
        Self {
            bits,
            full_scale: 1.0,
            input_level: 0.5,
        }
    }

    pub fn with_input_level(mut self, level: f64) -> Self {
        self.input_level = level;
        self
    }

    pub fn max_code(&self) -> i64 {
        (1_i64 << (self.bits - 1)) - 1
    }

    pub fn min_code(&self) -> i64 {
        -(1_i64 << (self.bits - 1))
    }

    fn validate(&self) -> Result<()> {
        if !(2..=24).contains(&self.bits) {
            return Err(Error::param(format!("ADC bits must lie in [2, 24], got {}", self.bits)));
        }
        if !(self.full_scale.is_finite() && self.full_scale > 0.0) {
            return Err(Error::param("full scale must be positive"));
        }
        if !(self.input_level.is_finite() && self.input_level > 0.0) {
            return Err(Error::param("input level must be positive"));
        }
        Ok(())
    }
}

impl Default for AdcSpec {
    fn default() -> Self {
        Self::new(14)
    }
}

/// Number of samples clamped at each rail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClipStats {
    pub clipped_high: usize,
    pub clipped_low: usize,
}

impl ClipStats {
    pub fn total(&self) -> usize {
        self.clipped_high + self.clipped_low
    }
}

/// Round samples to integer converter codes, clamping at the rails.
///
/// Code = round(x / full_scale · input_level · (2^(bits−1) − 1)). Streams that
/// are already integer are returned unchanged, so quantizing twice is the same
/// as quantizing once. Results fit `Int16` for up to 16 bits; wider codes are
/// carried as integral `Float64` samples.
pub fn quantize(stream: &RealSampleStream, adc: &AdcSpec) -> Result<(RealSampleStream, ClipStats)> {
    adc.validate()?;
    if stream.format() == SampleFormat::Int16 {
        return Ok((stream.clone(), ClipStats::default()));
    }
    let gain = adc.input_level / adc.full_scale * adc.max_code() as f64;
    let (lo, hi) = (adc.min_code() as f64, adc.max_code() as f64);
    let mut stats = ClipStats::default();
    let mut codes = Vec::with_capacity(stream.samples().len());
    for &x in stream.samples() {
        if !x.is_finite() {
            return Err(Error::Numeric(format!("cannot quantize non-finite sample {x}")));
        }
        let c = (x * gain).round();
        codes.push(if c > hi {
            stats.clipped_high += 1;
            hi
        } else if c < lo {
            stats.clipped_low += 1;
            lo
        } else {
            c
        });
    }
    let format = if adc.bits <= 16 {
        SampleFormat::Int16
    } else {
        SampleFormat::Float64
    };
    let out = RealSampleStream::new(
        stream.sample_rate_hz(),
        stream.channels(),
        format,
        stream.start_time_s(),
        codes,
    )?;
    Ok((out, stats))
}
