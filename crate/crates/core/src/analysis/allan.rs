use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllanPoint {
    pub tau_s: f64,
    pub adev: f64,
    /// Second differences averaged at this τ.
    pub n_terms: usize,
}

/// Allan deviation against averaging time, plus the requested τ values that
/// could not be evaluated and why.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AllanCurve {
    pub points: Vec<AllanPoint>,
    pub omitted: Vec<(f64, String)>,
}

/// Roughly ten averaging factors per decade, 1 ≤ m < n/2, as times.
pub fn default_taus(n: usize, tau0_s: f64) -> Vec<f64> {
    let mut ms: Vec<usize> = Vec::new();
    let mut k = 0;
    loop {
        let m = 10f64.powf(k as f64 / 10.0).round() as usize;
        if 2 * m >= n {
            break;
        }
        if ms.last() != Some(&m) {
            ms.push(m);
        }
        k += 1;
    }
    ms.into_iter().map(|m| m as f64 * tau0_s).collect()
}

/// Overlapping Allan deviation from time-error samples `x` spaced `tau0_s`:
///
/// σ²(τ) = Σ (x[i+2m] − 2x[i+m] + x[i])² / (2 τ² (N − 2m)), τ = m τ₀.
///
/// τ values that are not integer multiples of τ₀, or that leave no second
/// difference, are reported in `omitted`.
pub fn allan_deviation(x: &[f64], tau0_s: f64, taus_s: &[f64]) -> Result<AllanCurve> {
    if !(tau0_s.is_finite() && tau0_s > 0.0) {
        return Err(Error::param(format!("base interval must be positive, got {tau0_s}")));
    }
    let n = x.len();
    let mut curve = AllanCurve::default();
    for &tau in taus_s {
        let mf = (tau / tau0_s).round();
        if !(mf >= 1.0) || ((mf * tau0_s - tau).abs() > 1e-9 * tau) {
            curve
                .omitted
                .push((tau, format!("not a positive integer multiple of {tau0_s} s")));
            continue;
        }
        let m = mf as usize;
        if 2 * m >= n {
            curve
                .omitted
                .push((tau, format!("needs more than {} samples, have {n}", 2 * m)));
            continue;
        }
        let terms = n - 2 * m;
        let ss: f64 = (0..terms)
            .map(|i| {
                let d = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
                d * d
            })
            .sum();
        let t = m as f64 * tau0_s;
        curve.points.push(AllanPoint {
            tau_s: t,
            adev: (ss / (2.0 * t * t * terms as f64)).sqrt(),
            n_terms: terms,
        });
    }
    Ok(curve)
}
