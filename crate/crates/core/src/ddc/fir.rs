use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Upper bound on taps per stage for automatic designs.
pub const DEFAULT_MAX_TAPS: usize = 16_385;

/// Grid points per stopband lobe when verifying a design.
const GRID_PER_LOBE: f64 = 32.0;

/// Parameters a stage was designed from, as fractions of its output Nyquist rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowpassDesign {
    pub cutoff: f64,
    pub transition: f64,
    pub atten_db: f64,
}

/// One FIR stage: taps applied at the input rate, followed by keeping every
/// `decimation`-th output.
#[derive(Debug, Clone, PartialEq)]
pub struct FirStage {
    taps: Vec<f64>,
    decimation: usize,
    symmetric: bool,
    design: Option<LowpassDesign>,
}

impl FirStage {
    pub fn new(taps: Vec<f64>, decimation: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::param("FIR stage needs at least one tap"));
        }
        if decimation == 0 {
            return Err(Error::param("decimation must be at least 1"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("FIR taps must be finite"));
        }
        let symmetric = taps.iter().eq(taps.iter().rev());
        Ok(Self {
            taps,
            decimation,
            symmetric,
            design: None,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn decimation(&self) -> usize {
        self.decimation
    }

    pub fn design(&self) -> Option<LowpassDesign> {
        self.design
    }

    /// Delay from the first input sample in a window to the output instant, in input samples.
    pub fn group_delay(&self) -> f64 {
        (self.taps.len() - 1) as f64 / 2.0
    }

    /// Complex frequency response at `f` cycles per input sample.
    pub fn response(&self, f: f64) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &h)| h * Complex64::from_polar(1.0, -2.0 * PI * f * n as f64))
            .sum()
    }

    /// Magnitude response at `f` cycles per input sample. Uses the cosine form
    /// for symmetric odd-length filters.
    pub fn magnitude(&self, f: f64) -> f64 {
        if self.symmetric && self.taps.len() % 2 == 1 {
            amplitude_type1(&self.taps, 2.0 * PI * f).abs()
        } else {
            self.response(f).norm()
        }
    }

    /// Dot product of the taps with `x[0..len]`.
    #[inline]
    pub(crate) fn apply(&self, x: &[Complex64]) -> Complex64 {
        let h = &self.taps;
        let l = h.len();
        debug_assert!(x.len() >= l);
        let (mut re, mut im) = (0.0, 0.0);
        if self.symmetric {
            let half = l / 2;
            for k in 0..half {
                let s = x[k] + x[l - 1 - k];
                re += h[k] * s.re;
                im += h[k] * s.im;
            }
            if l % 2 == 1 {
                re += h[half] * x[half].re;
                im += h[half] * x[half].im;
            }
        } else {
            for k in 0..l {
                re += h[k] * x[k].re;
                im += h[k] * x[k].im;
            }
        }
        Complex64::new(re, im)
    }
}

/// Zero-phase amplitude of a symmetric odd-length filter at `w` rad/sample.
fn amplitude_type1(h: &[f64], w: f64) -> f64 {
    let m = h.len() / 2;
    let mut a = h[m];
    for k in 1..=m {
        a += 2.0 * h[m - k] * (k as f64 * w).cos();
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Kaiser shape parameter for a stopband attenuation in dB.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Kaiser window of length `n`.
pub fn kaiser_window(n: usize, beta: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let r = 2.0 * i as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Windowed-sinc low-pass with cutoff `wc` rad/sample, unity DC gain, exactly symmetric.
pub(crate) fn windowed_sinc(len: usize, wc: f64, beta: f64) -> Vec<f64> {
    let w = kaiser_window(len, beta);
    let mid = (len - 1) as f64 / 2.0;
    let mut h = vec![0.0; len];
    for i in 0..len.div_ceil(2) {
        let x = i as f64 - mid;
        let s = if x == 0.0 { wc / PI } else { (wc * x).sin() / (PI * x) };
        h[i] = s * w[i];
        h[len - 1 - i] = h[i];
    }
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Estimated Kaiser length for attenuation `a` dB and transition width `dw` rad/sample.
fn kaiser_length(a: f64, dw: f64) -> usize {
    let n = ((a - 7.95) / (2.285 * dw)).ceil().max(1.0) as usize + 1;
    n | 1
}

/// Largest stopband magnitude from `ws` to π, sampled densely relative to the lobe width.
pub(crate) fn stopband_peak(h: &[f64], ws: f64) -> f64 {
    let points = ((PI - ws) / (2.0 * PI / h.len() as f64) * GRID_PER_LOBE)
        .ceil()
        .max(2.0) as usize;
    (0..=points)
        .map(|i| amplitude_type1(h, ws + (PI - ws) * i as f64 / points as f64).abs())
        .fold(0.0, f64::max)
}

/// Low-pass design at the filter's own rate; `cutoff_norm` and
/// `transition_norm` are fractions of Nyquist.
pub fn design_fir_lowpass(cutoff_norm: f64, stopband_atten_db: f64, transition_norm: f64) -> Result<FirStage> {
    design_decimating_lowpass(1, cutoff_norm, transition_norm, stopband_atten_db, DEFAULT_MAX_TAPS)
}

/// Low-pass for a stage that decimates by `decimation`.
///
/// `cutoff` is the passband edge and `cutoff + transition` the stopband edge,
/// both as fractions of the *output* Nyquist rate (the stopband may extend past
/// the output Nyquist rate, up to the input Nyquist rate). The length starts at
/// the Kaiser estimate and grows until the stopband is verified on a dense grid.
pub fn design_decimating_lowpass(
    decimation: usize,
    cutoff: f64,
    transition: f64,
    atten_db: f64,
    max_taps: usize,
) -> Result<FirStage> {
    if decimation == 0 {
        return Err(Error::param("decimation must be at least 1"));
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::param(format!("cutoff must lie in (0, 1), got {cutoff}")));
    }
    if !(transition > 0.0 && cutoff + transition <= decimation as f64) {
        return Err(Error::param(format!(
            "transition {transition} must be positive and keep the stopband edge below the input Nyquist rate"
        )));
    }
    if !(40.0..=160.0).contains(&atten_db) {
        return Err(Error::param(format!(
            "attenuation must lie in [40, 160] dB, got {atten_db}"
        )));
    }
    let d = decimation as f64;
    let dw = PI * transition / d;
    let wc = PI * (cutoff + transition / 2.0) / d;
    let ws = PI * (cutoff + transition) / d;
    let beta = kaiser_beta(atten_db);
    let limit = 10f64.powf(-atten_db / 20.0);

    let mut len = kaiser_length(atten_db, dw);
    if len > max_taps {
        return Err(Error::Infeasible {
            required_taps: len,
            max_taps,
        });
    }
    loop {
        let h = windowed_sinc(len, wc, beta);
        if ws >= PI || stopband_peak(&h, ws) <= limit {
            let mut stage = FirStage::new(h, decimation)?;
            stage.design = Some(LowpassDesign {
                cutoff,
                transition,
                atten_db,
            });
            return Ok(stage);
        }
        len += 2;
        if len > max_taps {
            return Err(Error::Infeasible {
                required_taps: len,
                max_taps,
            });
        }
    }
}

/// A cascade of decimating FIR stages.
#[derive(Debug, Clone, PartialEq)]
pub struct DecimatorSpec {
    stages: Vec<FirStage>,
}

impl DecimatorSpec {
    pub fn new(stages: Vec<FirStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::param("decimator needs at least one stage"));
        }
        Ok(Self { stages })
    }

    /// Design a cascade with the given per-stage factors (first stage first).
    ///
    /// The last stage has passband edge `final_cutoff` and stopband edge
    /// `final_cutoff + final_transition` of the output Nyquist rate. Earlier
    /// stages keep the same absolute passband and place their stopband edge at
    /// their own output rate minus the final stopband edge, so everything that
    /// would fold into the final band is attenuated by at least one stage.
    pub fn design(factors: &[usize], atten_db: f64, final_cutoff: f64, final_transition: f64) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(Error::param("decimation factors must be non-empty and positive"));
        }
        if !(final_cutoff > 0.0 && final_transition > 0.0 && final_cutoff + final_transition <= 1.0) {
            return Err(Error::param(format!(
                "final band edges must satisfy 0 < cutoff < cutoff + transition <= 1, got {final_cutoff} + {final_transition}"
            )));
        }
        let final_stop = final_cutoff + final_transition;
        let mut stages = Vec::with_capacity(factors.len());
        for (k, &d) in factors.iter().enumerate() {
            // Output rate of stage k relative to the final output rate.
            let r: f64 = factors[k + 1..].iter().map(|&f| f as f64).product();
            let cutoff = final_cutoff / r;
            let stop = if k + 1 == factors.len() {
                final_stop
            } else {
                2.0 - final_stop / r
            };
            stages.push(design_decimating_lowpass(
                d,
                cutoff,
                stop - cutoff,
                atten_db,
                DEFAULT_MAX_TAPS,
            )?);
        }
        Self::new(stages)
    }

    /// Three decimate-by-10 stages (25 MS/s to 25 kS/s) with 120 dB alias rejection
    /// and a 3 dB bandwidth near 80% of the output Nyquist rate.
    pub fn default_chain() -> Self {
        Self::design(&[10, 10, 10], 120.0, 0.65, 0.35).expect("default chain is feasible")
    }

    pub fn stages(&self) -> &[FirStage] {
        &self.stages
    }

    pub fn total_decimation(&self) -> usize {
        self.stages.iter().map(FirStage::decimation).product()
    }

    /// Input samples consumed before the first output.
    pub fn warmup(&self) -> usize {
        let mut scale = 1;
        let mut w = 0;
        for s in &self.stages {
            w += (s.len() - 1) * scale;
            scale *= s.decimation();
        }
        w
    }

    /// Delay from the first input sample to the first output instant, in input samples.
    pub fn delay_samples(&self) -> f64 {
        let mut scale = 1.0;
        let mut d = 0.0;
        for s in &self.stages {
            d += s.group_delay() * scale;
            scale *= s.decimation() as f64;
        }
        d
    }

    /// Cascade magnitude at `f` cycles per input sample.
    pub fn magnitude(&self, f: f64) -> f64 {
        let mut scale = 1.0;
        let mut m = 1.0;
        for s in &self.stages {
            m *= s.magnitude(f * scale);
            scale *= s.decimation() as f64;
        }
        m
    }

    /// Worst cascade magnitude (dB) over every input frequency that folds onto
    /// the output band, i.e. from half the output rate up to the input Nyquist rate.
    pub fn alias_rejection_db(&self, points_per_output_band: usize) -> f64 {
        let d = self.total_decimation() as f64;
        let f_lo = 0.5 / d;
        let n = ((0.5 - f_lo) * d * points_per_output_band as f64).ceil() as usize;
        let peak = (0..=n)
            .map(|i| self.magnitude(f_lo + (0.5 - f_lo) * i as f64 / n as f64))
            .fold(0.0, f64::max);
        20.0 * peak.log10()
    }

    /// Frequency (cycles per output sample) where the cascade falls 3 dB below DC.
    pub fn bandwidth_3db(&self) -> f64 {
        let d = self.total_decimation() as f64;
        let target = 0.5f64.sqrt();
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.magnitude(mid / d) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Split `total` into stage factors no larger than `max_factor`, largest first.
/// Factors of ten are preferred; remaining primes are packed first-fit.
pub fn plan_stages(total: u64, max_factor: u64) -> Result<Vec<usize>> {
    if total == 0 || max_factor < 2 {
        return Err(Error::param("decimation must be positive and stage factors at least 2"));
    }
    let mut primes = Vec::new();
    let mut n = total;
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    if let Some(&big) = primes.iter().find(|&&p| p > max_factor) {
        return Err(Error::param(format!(
            "decimation {total} has prime factor {big} above the stage limit {max_factor}; prime factorization {primes:?}"
        )));
    }
    let mut stages: Vec<u64> = Vec::new();
    if max_factor >= 10 {
        loop {
            let i2 = primes.iter().position(|&p| p == 2);
            let i5 = primes.iter().position(|&p| p == 5);
            match (i2, i5) {
                (Some(a), Some(b)) => {
                    primes.remove(a.max(b));
                    primes.remove(a.min(b));
                    stages.push(10);
                }
                _ => break,
            }
        }
    }
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let mut rest: Vec<u64> = Vec::new();
    for p in primes {
        match rest.iter_mut().find(|s| **s * p <= max_factor) {
            Some(s) => *s *= p,
            None => rest.push(p),
        }
    }
    stages.extend(rest);
    stages.sort_unstable_by(|a, b| b.cmp(a));
    Ok(stages.into_iter().map(|s| s as usize).collect())
}

struct StageState {
    stage: FirStage,
    buf: Vec<Complex64>,
}

/// Push-based multistage decimator. Feed input in arbitrary chunks; outputs
/// appear once each stage has a full window ("valid" convolution, no zero padding).
pub struct StreamingDecimator {
    states: Vec<StageState>,
    input_rate_hz: f64,
    first_output_time_s: f64,
    produced: u64,
}

impl StreamingDecimator {
    pub fn new(spec: &DecimatorSpec, input_rate_hz: f64, input_start_time_s: f64) -> Self {
        Self {
            states: spec
                .stages()
                .iter()
                .map(|s| StageState {
                    stage: s.clone(),
                    buf: Vec::new(),
                })
                .collect(),
            input_rate_hz,
            first_output_time_s: input_start_time_s + spec.delay_samples() / input_rate_hz,
            produced: 0,
        }
    }

    pub fn output_rate_hz(&self) -> f64 {
        self.input_rate_hz / self.states.iter().map(|s| s.stage.decimation()).product::<usize>() as f64
    }

    /// Timestamp of the first output sample.
    pub fn first_output_time_s(&self) -> f64 {
        self.first_output_time_s
    }

    /// Number of outputs produced so far.
    pub fn produced(&self) -> u64 {
        self.produced
    }

    /// Feed input samples; appends any completed outputs to `out`.
    pub fn push(&mut self, input: &[Complex64], out: &mut Vec<Complex64>) {
        let mut carry: Vec<Complex64> = input.to_vec();
        let last = self.states.len() - 1;
        for (i, st) in self.states.iter_mut().enumerate() {
            st.buf.extend_from_slice(&carry);
            carry.clear();
            let l = st.stage.len();
            let d = st.stage.decimation();
            let mut pos = 0;
            let target = if i == last { &mut *out } else { &mut carry };
            let before = target.len();
            while pos + l <= st.buf.len() {
                target.push(st.stage.apply(&st.buf[pos..pos + l]));
                pos += d;
            }
            if i == last {
                self.produced += (target.len() - before) as u64;
            }
            st.buf.drain(..pos.min(st.buf.len()));
        }
    }
}
