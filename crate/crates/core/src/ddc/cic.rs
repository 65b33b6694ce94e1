use num_complex::Complex64;

use super::fir::{kaiser_window, FirStage};
use super::{ComplexBaseband, DecimatorSpec, StreamingDecimator};
use crate::error::{Error, Result};

/// Half-band lengths following the CIC, in processing order.
const HALFBAND_LENGTHS: [usize; 2] = [31, 63];
const HALFBAND_BETA: f64 = 6.0;
/// Fractional bits of the fixed-point half-band coefficients (18-bit signed).
const COEFF_FRAC_BITS: u32 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CicArithmetic {
    /// Integer data path: `word_bits` samples, wrapping 64-bit integrators,
    /// 18-bit half-band coefficients.
    Fixed,
    /// The same filters evaluated in `f64`, without quantization.
    Float,
}

/// A CIC decimator of order `stages`, followed by `halfbands` decimate-by-two
/// half-band filters, as found in common SDR receive chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CicSpec {
    /// Rate change of the CIC section alone.
    pub decimation: usize,
    pub stages: usize,
    pub differential_delay: usize,
    /// Width of the data path between filters.
    pub word_bits: u32,
    /// Width of the delivered samples; `None` keeps the full data-path word.
    pub output_bits: Option<u32>,
    pub halfbands: usize,
    pub arithmetic: CicArithmetic,
    /// Pre-shift the input when the CIC registers would exceed 64 bits;
    /// otherwise such configurations are rejected.
    pub allow_scaling: bool,
}

impl CicSpec {
    pub fn new(decimation: usize) -> Self {
        Self {
            decimation,
            stages: 4,
            differential_delay: 1,
            word_bits: 24,
            output_bits: Some(16),
            halfbands: 2,
            arithmetic: CicArithmetic::Fixed,
            allow_scaling: true,
        }
    }

    /// Split an overall decimation between the CIC and two half-bands.
    pub fn for_total_decimation(total: usize) -> Result<Self> {
        if total < 4 || !total.is_multiple_of(4) {
            return Err(Error::param(format!(
                "total decimation {total} must be a multiple of 4 (two half-band stages)"
            )));
        }
        Ok(Self::new(total / 4))
    }

    pub fn with_halfbands(mut self, halfbands: usize) -> Self {
        self.halfbands = halfbands;
        self
    }

    pub fn with_arithmetic(mut self, arithmetic: CicArithmetic) -> Self {
        self.arithmetic = arithmetic;
        self
    }

    pub fn total_decimation(&self) -> usize {
        self.decimation << self.halfbands
    }

    /// CIC impulse-response length in input samples.
    pub fn impulse_len(&self) -> usize {
        self.stages * (self.decimation * self.differential_delay - 1) + 1
    }

    /// Register width needed for exact integer evaluation.
    pub fn register_bits(&self) -> u32 {
        let growth = (self.stages as f64 * ((self.decimation * self.differential_delay) as f64).log2()).ceil();
        self.word_bits + growth as u32
    }

    /// Impulse response of the CIC section, normalized to unity DC gain.
    pub fn impulse_response(&self) -> Vec<f64> {
        let rm = self.decimation * self.differential_delay;
        let mut h = vec![1.0];
        for _ in 0..self.stages {
            let mut next = vec![0.0; h.len() + rm - 1];
            for (i, &v) in h.iter().enumerate() {
                for t in &mut next[i..i + rm] {
                    *t += v;
                }
            }
            h = next;
        }
        let g = (rm as f64).powi(self.stages as i32);
        h.iter().map(|v| v / g).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.decimation == 0 || self.stages == 0 || self.differential_delay == 0 {
            return Err(Error::param("CIC decimation, stages and delay must be positive"));
        }
        if self.halfbands > HALFBAND_LENGTHS.len() {
            return Err(Error::param(format!(
                "at most {} half-band stages",
                HALFBAND_LENGTHS.len()
            )));
        }
        if !(8..=32).contains(&self.word_bits) {
            return Err(Error::param(format!(
                "word width must lie in [8, 32], got {}",
                self.word_bits
            )));
        }
        if let Some(b) = self.output_bits {
            if !(2..=self.word_bits).contains(&b) {
                return Err(Error::param(format!(
                    "output width {b} must lie in [2, {}]",
                    self.word_bits
                )));
            }
        }
        Ok(())
    }
}

/// Half-band low-pass: every other tap away from the centre is exactly zero.
fn halfband_taps(len: usize) -> Vec<f64> {
    let w = kaiser_window(len, HALFBAND_BETA);
    let mid = (len / 2) as i64;
    let mut h: Vec<f64> = (0..len as i64)
        .map(|i| {
            let k = i - mid;
            if k == 0 {
                0.5
            } else if k % 2 == 0 {
                0.0
            } else {
                let x = std::f64::consts::PI * k as f64 / 2.0;
                x.sin() / (2.0 * x)
            }
        })
        .zip(&w)
        .map(|(s, w)| s * w)
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Decimate a complex stream through the CIC chain.
///
/// In fixed mode, inputs (nominally within ±1) become two's-complement words
/// of `word_bits`; the integrators wrap modulo 2^64, which leaves the comb
/// outputs exact whenever [`CicSpec::register_bits`] ≤ 64. Wider
/// configurations are pre-shifted when `allow_scaling` is set and refused
/// otherwise. Output timestamps sit at the centre of each input window.
pub fn cic_decimate(input: &ComplexBaseband, spec: &CicSpec) -> Result<ComplexBaseband> {
    spec.validate()?;
    let taps: Vec<Vec<f64>> = HALFBAND_LENGTHS[..spec.halfbands]
        .iter()
        .map(|&l| halfband_taps(l))
        .collect();
    let mut needed = spec.impulse_len();
    let mut scale = spec.decimation;
    for h in &taps {
        needed += (h.len() - 1) * scale;
        scale *= 2;
    }
    if input.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: input.len(),
        });
    }
    let fs = input.sample_rate_hz;
    let cic_rate = fs / spec.decimation as f64;
    let cic_start = input.start_time_s + (spec.impulse_len() - 1) as f64 / 2.0 / fs;

    match spec.arithmetic {
        CicArithmetic::Float => {
            let y = cic_float(&input.iq, spec);
            if taps.is_empty() {
                return ComplexBaseband::new(cic_rate, cic_start, y);
            }
            let stages = taps
                .iter()
                .map(|h| FirStage::new(h.clone(), 2))
                .collect::<Result<Vec<_>>>()?;
            let hb = DecimatorSpec::new(stages)?;
            let mut dec = StreamingDecimator::new(&hb, cic_rate, cic_start);
            let mut out = Vec::new();
            dec.push(&y, &mut out);
            ComplexBaseband::new(dec.output_rate_hz(), dec.first_output_time_s(), out)
        }
        CicArithmetic::Fixed => {
            let one = (1_i64 << (spec.word_bits - 1)) as f64;
            let (lo, hi) = (-(1_i64 << (spec.word_bits - 1)), (1_i64 << (spec.word_bits - 1)) - 1);
            let word = |v: f64| ((v * one).round() as i64).clamp(lo, hi);
            let words: Vec<(i64, i64)> = input.iq.iter().map(|z| (word(z.re), word(z.im))).collect();
            let mut y = cic_fixed(&words, spec)?;
            let mut rate = cic_rate;
            let mut start = cic_start;
            for h in &taps {
                let c: Vec<i64> = h
                    .iter()
                    .map(|v| (v * (1_i64 << COEFF_FRAC_BITS) as f64).round() as i64)
                    .collect();
                start += (h.len() - 1) as f64 / 2.0 / rate;
                y = halfband_fixed(&y, &c, lo, hi);
                rate /= 2.0;
            }
            let (y, out_one) = match spec.output_bits {
                Some(b) => {
                    let shift = spec.word_bits - b;
                    let (olo, ohi) = (-(1_i64 << (b - 1)), (1_i64 << (b - 1)) - 1);
                    let q = |v: i64| round_shift(v as i128, shift).clamp(olo as i128, ohi as i128) as i64;
                    (
                        y.iter().map(|&(r, i)| (q(r), q(i))).collect(),
                        (1_i64 << (b - 1)) as f64,
                    )
                }
                None => (y, one),
            };
            let iq = y
                .into_iter()
                .map(|(r, i)| Complex64::new(r as f64 / out_one, i as f64 / out_one))
                .collect();
            ComplexBaseband::new(rate, start, iq)
        }
    }
}

/// Round-half-away-from-zero division by 2^shift.
fn round_shift(v: i128, shift: u32) -> i128 {
    if shift == 0 {
        return v;
    }
    let half = 1_i128 << (shift - 1);
    if v >= 0 {
        (v + half) >> shift
    } else {
        -((-v + half) >> shift)
    }
}

fn round_div(v: i128, d: i128) -> i128 {
    if v >= 0 {
        (v + d / 2) / d
    } else {
        -((-v + d / 2) / d)
    }
}

fn cic_fixed(words: &[(i64, i64)], spec: &CicSpec) -> Result<Vec<(i64, i64)>> {
    let reg = spec.register_bits();
    let pre_shift = if reg > 64 {
        if !spec.allow_scaling {
            return Err(Error::Overflow(format!(
                "CIC registers need {reg} bits, more than the 64 available; enable scaling"
            )));
        }
        reg - 64
    } else {
        0
    };
    let r = spec.decimation;
    let m = spec.differential_delay;
    let n = spec.stages;
    let k = spec.impulse_len();
    let gain = ((r * m) as i128).pow(n as u32);
    let phase = (k - 1) % r;
    let mut integ = vec![[0_i64; 2]; n];
    let mut combs = vec![vec![[0_i64; 2]; m]; n];
    let mut comb_pos = 0;
    let mut out = Vec::with_capacity(words.len() / r + 1);
    for (i, &(re, im)) in words.iter().enumerate() {
        let mut v = [
            round_shift(re as i128, pre_shift) as i64,
            round_shift(im as i128, pre_shift) as i64,
        ];
        for s in integ.iter_mut() {
            s[0] = s[0].wrapping_add(v[0]);
            s[1] = s[1].wrapping_add(v[1]);
            v = *s;
        }
        if i % r != phase {
            continue;
        }
        for hist in combs.iter_mut() {
            let old = hist[comb_pos];
            hist[comb_pos] = v;
            v = [v[0].wrapping_sub(old[0]), v[1].wrapping_sub(old[1])];
        }
        comb_pos = (comb_pos + 1) % m;
        if i + 1 >= k {
            let norm = |x: i64| round_div((x as i128) << pre_shift, gain) as i64;
            out.push((norm(v[0]), norm(v[1])));
        }
    }
    Ok(out)
}

fn halfband_fixed(x: &[(i64, i64)], c: &[i64], lo: i64, hi: i64) -> Vec<(i64, i64)> {
    let l = c.len();
    let mut out = Vec::with_capacity(x.len() / 2 + 1);
    let mut j = 0;
    while j + l <= x.len() {
        let (mut re, mut im) = (0_i128, 0_i128);
        for (k, &ck) in c.iter().enumerate() {
            if ck != 0 {
                re += ck as i128 * x[j + k].0 as i128;
                im += ck as i128 * x[j + k].1 as i128;
            }
        }
        let q = |v: i128| round_shift(v, COEFF_FRAC_BITS).clamp(lo as i128, hi as i128) as i64;
        out.push((q(re), q(im)));
        j += 2;
    }
    out
}

/// CIC as `stages` cascaded moving sums, normalized, keeping valid outputs only.
fn cic_float(x: &[Complex64], spec: &CicSpec) -> Vec<Complex64> {
    let rm = spec.decimation * spec.differential_delay;
    let mut y = x.to_vec();
    for _ in 0..spec.stages {
        if rm == 1 {
            break;
        }
        let mut acc = Complex64::default();
        let mut next = Vec::with_capacity(y.len().saturating_sub(rm - 1));
        for (i, &v) in y.iter().enumerate() {
            acc += v;
            if i >= rm {
                acc -= y[i - rm];
            }
            if i + 1 >= rm {
                next.push(acc);
            }
        }
        y = next;
    }
    let g = (rm as f64).powi(spec.stages as i32);
    y.iter().step_by(spec.decimation).map(|v| v / g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(iq: Vec<Complex64>) -> ComplexBaseband {
        ComplexBaseband::new(1.0, 0.0, iq).unwrap()
    }

    fn ramp(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new((i as f64 * 0.013).sin() * 0.7, (i as f64 * 0.029).cos() * 0.4))
            .collect()
    }

    #[test]
    fn unit_cic_is_identity() {
        let x = ramp(100);
        let spec = CicSpec {
            stages: 1,
            ..CicSpec::new(1)
        }
        .with_halfbands(0)
        .with_arithmetic(CicArithmetic::Float);
        let y = cic_decimate(&bb(x.clone()), &spec).unwrap();
        assert_eq!(y.iq, x);
    }

    #[test]
    fn impulse_response_is_convolved_boxcars() {
        let spec = CicSpec {
            stages: 2,
            ..CicSpec::new(3)
        };
        let h = spec.impulse_response();
        let want = [1.0, 2.0, 3.0, 2.0, 1.0].map(|v| v / 9.0);
        assert_eq!(h.len(), 5);
        for (a, b) in h.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_matches_float_within_word_resolution() {
        let x = ramp(4000);
        let spec = CicSpec::new(5);
        let fixed = cic_decimate(
            &bb(x.clone()),
            &CicSpec {
                output_bits: None,
                ..spec
            },
        )
        .unwrap();
        let float = cic_decimate(&bb(x), &spec.with_arithmetic(CicArithmetic::Float)).unwrap();
        assert_eq!(fixed.len(), float.len());
        assert_eq!(fixed.start_time_s, float.start_time_s);
        for (a, b) in fixed.iq.iter().zip(&float.iq) {
            assert!((a - b).norm() < 1e-5, "{a} {b}");
        }
    }

    #[test]
    fn wide_registers_need_scaling() {
        // 24 + ceil(4 * log2(2^12)) = 72 bits.
        let spec = CicSpec {
            allow_scaling: false,
            ..CicSpec::new(4096)
        }
        .with_halfbands(0);
        assert_eq!(spec.register_bits(), 72);
        let x = bb(vec![Complex64::new(0.5, -0.5); 20_000]);
        assert!(matches!(cic_decimate(&x, &spec), Err(Error::Overflow(_))));
        let scaled = cic_decimate(
            &x,
            &CicSpec {
                allow_scaling: true,
                output_bits: None,
                ..spec
            },
        )
        .unwrap();
        for z in &scaled.iq {
            assert!((z - Complex64::new(0.5, -0.5)).norm() < 1e-6);
        }
    }

    #[test]
    fn full_scale_dc_does_not_wrap() {
        // Integrators overflow many times over 100k samples; the combs recover.
        let x = bb(vec![Complex64::new(0.999, -1.0); 100_000]);
        let y = cic_decimate(
            &x,
            &CicSpec {
                output_bits: None,
                ..CicSpec::new(25)
            }
            .with_halfbands(0),
        )
        .unwrap();
        for z in &y.iq {
            assert!((z - Complex64::new(0.999, -1.0)).norm() < 1e-6, "{z}");
        }
    }

    #[test]
    fn halfband_has_zero_odd_taps() {
        let h = halfband_taps(31);
        for (i, v) in h.iter().enumerate() {
            let k = i as i64 - 15;
            if k != 0 && k % 2 == 0 {
                assert_eq!(*v, 0.0);
            }
        }
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn total_decimation_split() {
        let s = CicSpec::for_total_decimation(100).unwrap();
        assert_eq!(s.decimation, 25);
        assert_eq!(s.total_decimation(), 100);
        assert!(CicSpec::for_total_decimation(30).is_err());
    }
}
