use super::{SourceKind, TimeErrorSeries};
use crate::edgefind::EdgeEventSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    /// `t_a − t_b` for each pair, stamped at `t_a`.
    pub series: TimeErrorSeries,
    pub unmatched_a: usize,
    pub unmatched_b: usize,
}

fn median_spacing(t: &[f64]) -> Option<f64> {
    let mut d: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    if d.is_empty() {
        return None;
    }
    d.sort_unstable_by(f64::total_cmp);
    Some(d[d.len() / 2])
}

/// Pair each edge of `a` with the nearest unused edge of `b` within
/// `max_offset_s` (default: half the typical spacing of `a`), in time order.
pub fn pair_edge_times(a: &EdgeEventSeries, b: &EdgeEventSeries, max_offset_s: Option<f64>) -> Result<PairResult> {
    let ta = a.times();
    let tb = b.times();
    let spacing = median_spacing(&ta).or_else(|| median_spacing(&tb));
    let max_offset = match (max_offset_s, spacing) {
        (Some(m), _) if m > 0.0 => m,
        (Some(m), _) => return Err(Error::param(format!("pairing window must be positive, got {m}"))),
        (None, Some(s)) if s > 0.0 => s / 2.0,
        _ => return Err(Error::param("cannot infer a pairing window from fewer than two edges")),
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut j = 0;
    let mut unmatched_b = 0;
    for &t in &ta {
        // Edges of b too early for this (and every later) edge of a are lost.
        while j < tb.len() && tb[j] < t - max_offset {
            unmatched_b += 1;
            j += 1;
        }
        let mut best: Option<usize> = None;
        let mut k = j;
        while k < tb.len() && tb[k] <= t + max_offset {
            if best.is_none_or(|i| (tb[k] - t).abs() < (tb[i] - t).abs()) {
                best = Some(k);
            }
            k += 1;
        }
        if let Some(i) = best {
            unmatched_b += i - j;
            times.push(t);
            values.push(t - tb[i]);
            j = i + 1;
        }
    }
    unmatched_b += tb.len() - j;
    let unmatched_a = ta.len() - values.len();
    let rate = spacing.filter(|s| *s > 0.0).map_or(1.0, |s| 1.0 / s);
    Ok(PairResult {
        series: TimeErrorSeries::new(SourceKind::Pulse, rate, times, values)?,
        unmatched_a,
        unmatched_b,
    })
}
