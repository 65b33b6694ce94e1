use std::f64::consts::PI;

use num_complex::Complex64;

use super::DdcConfig;
use crate::error::Result;

const RESYNC: usize = 256;
const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Numerically controlled oscillator with a 64-bit phase accumulator.
///
/// The accumulator wraps modulo one cycle on every step, so the phase never
/// loses precision; the tuning word resolves frequency to `f_s / 2^64`.
#[derive(Debug, Clone)]
pub struct Nco {
    acc: u64,
    step: u64,
}

impl Nco {
    pub fn new(freq_hz: f64, sample_rate_hz: f64, phase_rad: f64) -> Self {
        Self {
            acc: to_word(phase_rad / (2.0 * PI)),
            step: to_word(freq_hz / sample_rate_hz),
        }
    }

    /// Current phase in (−π, π].
    pub fn phase(&self) -> f64 {
        let p = self.acc as i64 as f64 * (PI / 9_223_372_036_854_775_808.0);
        if p == -PI {
            PI
        } else {
            p
        }
    }

    /// Mixer factors for the next `out.len()` samples. The phasor is rotated
    /// sample to sample and re-derived from the accumulator every `RESYNC`
    /// samples, so rounding cannot build up.
    pub fn fill_conj(&mut self, out: &mut [Complex64]) {
        let step = self.step_phasor();
        for block in out.chunks_mut(RESYNC) {
            let (s, c) = self.phase().sin_cos();
            let mut p = Complex64::new(c, -s);
            for y in block.iter_mut() {
                *y = p;
                p *= step;
            }
            self.acc = self.acc.wrapping_add(self.step.wrapping_mul(block.len() as u64));
        }
    }

    fn step_phasor(&self) -> Complex64 {
        let p = self.step as i64 as f64 * (PI / 9_223_372_036_854_775_808.0);
        Complex64::from_polar(1.0, -p)
    }

    /// Mixer factor `e^{−jφ}` for the current sample, then advance one sample.
    #[inline]
    pub fn next_conj(&mut self) -> Complex64 {
        let (s, c) = self.phase().sin_cos();
        self.acc = self.acc.wrapping_add(self.step);
        Complex64::new(c, -s)
    }
}

/// Fraction of a cycle as an accumulator word; negative values wrap.
fn to_word(cycles: f64) -> u64 {
    let f = cycles - cycles.floor();
    let w = (f * TWO_POW_64).round();
    if w >= TWO_POW_64 {
        0
    } else {
        w as u64
    }
}

/// Multiply real samples by the NCO output `e^{−j(2π f_t n / f_s + φ₀)}`.
pub fn nco_mix(samples: &[f64], cfg: &DdcConfig) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let mut lo = vec![Complex64::default(); samples.len()];
    cfg.nco().fill_conj(&mut lo);
    Ok(samples.iter().zip(&lo).map(|(&x, l)| x * l).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_cycle_after_five_steps() {
        // f_t / f_s = 1/10: five steps reach π and the mixer factor is −1.
        let mut nco = Nco::new(10e6, 100e6, 0.0);
        let factors: Vec<Complex64> = (0..6).map(|_| nco.next_conj()).collect();
        assert!((factors[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((factors[5] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phase_matches_closed_form_after_many_steps() {
        let fs = 25e6;
        let ft = 10e6 + 0.125;
        let mut nco = Nco::new(ft, fs, 0.3);
        let n: u64 = 3_000_000;
        // Jump the accumulator rather than stepping three million times.
        nco.acc = nco.acc.wrapping_add(nco.step.wrapping_mul(n));
        let expected = 0.3 + 2.0 * PI * ft * n as f64 / fs;
        let diff = (nco.phase() - expected).rem_euclid(2.0 * PI);
        let diff = diff.min(2.0 * PI - diff);
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn block_fill_matches_per_sample() {
        let mut a = Nco::new(10e6 + 3.7, 25e6, 1.1);
        let mut b = a.clone();
        let mut block = vec![Complex64::default(); 5000];
        a.fill_conj(&mut block[..1234]);
        a.fill_conj(&mut block[1234..]);
        for z in &block {
            assert!((z - b.next_conj()).norm() < 1e-13);
        }
        assert_eq!(a.acc, b.acc);
    }

    #[test]
    fn phase_is_wrapped() {
        let mut nco = Nco::new(3.3e6, 10e6, -2.0);
        for _ in 0..1000 {
            let p = nco.phase();
            assert!(p > -PI && p <= PI);
            nco.next_conj();
        }
    }
}
