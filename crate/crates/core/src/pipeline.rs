//! End-to-end helpers that stream synthetic references through the
//! down-converter without holding the full-rate record in memory.

use std::sync::mpsc::sync_channel;
use std::thread;

use crate::ddc::{ComplexBaseband, DdcBank, DdcConfig, DecimatorSpec};
use crate::error::{Error, Result};
use crate::io::{GapFiller, GapReport, StreamFrame};
use crate::sigmodel::{SineModel, SineSource};

/// Full-rate samples generated per step.
const CHUNK: usize = 1 << 16;

/// Synthesize each model for `duration_s` at `cfg.sample_rate_hz`, mix all
/// channels against one shared NCO and decimate them. Memory use is bounded
/// by the decimated output.
pub fn downconvert_synthetic(
    models: &[SineModel],
    duration_s: f64,
    cfg: &DdcConfig,
    spec: &DecimatorSpec,
) -> Result<Vec<ComplexBaseband>> {
    if models.is_empty() {
        return Err(Error::param("need at least one channel"));
    }
    let fs = cfg.sample_rate_hz;
    let total = (duration_s * fs).round();
    if !(total >= 1.0) {
        return Err(Error::param(format!(
            "duration {duration_s} s is shorter than one sample"
        )));
    }
    let total = total as u64;
    let mut sources = models
        .iter()
        .map(|m| SineSource::new(m, fs))
        .collect::<Result<Vec<_>>>()?;
    let mut bank = DdcBank::new(cfg, spec, models.len(), 0.0)?;
    let expected = (total as usize).saturating_sub(spec.warmup()) / spec.total_decimation() + 1;
    let mut out: Vec<Vec<_>> = (0..models.len()).map(|_| Vec::with_capacity(expected)).collect();
    let mut bufs = vec![vec![0.0; CHUNK]; models.len()];
    let mut done = 0u64;
    while done < total {
        let n = CHUNK.min((total - done) as usize);
        for (src, buf) in sources.iter_mut().zip(bufs.iter_mut()) {
            src.fill(&mut buf[..n]);
        }
        let chunks: Vec<&[f64]> = bufs.iter().map(|b| &b[..n]).collect();
        bank.push(&chunks, &mut out)?;
        done += n as u64;
    }
    if out[0].is_empty() {
        return Err(Error::TooShort {
            needed: spec.warmup() + 1,
            got: total as usize,
        });
    }
    let rate = bank.output_rate_hz();
    let start = bank.first_output_time_s();
    out.into_iter()
        .map(|iq| ComplexBaseband::new(rate, start, iq))
        .collect()
}

/// Live-mode processing of a framed capture: a producer thread repairs gaps
/// and hands per-channel blocks through a bounded, order-preserving queue of
/// `capacity` blocks to the down-converter running on the calling thread.
/// A slow consumer back-pressures the producer instead of dropping data.
pub fn live_downconvert<I>(
    frames: I,
    channels: usize,
    cfg: &DdcConfig,
    spec: &DecimatorSpec,
    capacity: usize,
) -> Result<(Vec<ComplexBaseband>, GapReport)>
where
    I: IntoIterator<Item = StreamFrame>,
    I::IntoIter: Send,
{
    if capacity == 0 {
        return Err(Error::param("queue capacity must be at least one block"));
    }
    let mut bank = DdcBank::new(cfg, spec, channels, 0.0)?;
    let mut filler = GapFiller::new(channels)?;
    let frames = frames.into_iter();
    let (tx, rx) = sync_channel::<Result<Vec<Vec<f64>>>>(capacity);

    let (report, mut out, total) = thread::scope(|scope| {
        let producer = scope.spawn(move || {
            let mut interleaved = Vec::new();
            for frame in frames {
                interleaved.clear();
                let block = filler.push(&frame, &mut interleaved).map(|()| {
                    (0..channels)
                        .map(|c| interleaved.iter().skip(c).step_by(channels).copied().collect())
                        .collect()
                });
                let failed = block.is_err();
                if tx.send(block).is_err() || failed {
                    break;
                }
            }
            filler.into_report()
        });

        let mut out: Vec<Vec<_>> = vec![Vec::new(); channels];
        let mut total = 0usize;
        let mut result = Ok(());
        for block in rx {
            match block.and_then(|b: Vec<Vec<f64>>| {
                total += b[0].len();
                let chunks: Vec<&[f64]> = b.iter().map(Vec::as_slice).collect();
                bank.push(&chunks, &mut out)
            }) {
                Ok(()) => {}
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        // Dropping the receiver (by leaving the loop) unblocks the producer.
        let report = producer.join().expect("producer thread panicked");
        result.map(|()| (report, out, total))
    })?;

    if out[0].is_empty() {
        return Err(Error::TooShort {
            needed: spec.warmup() + 1,
            got: total,
        });
    }
    let rate = bank.output_rate_hz();
    let start = bank.first_output_time_s();
    Ok((
        out.iter_mut()
            .map(|iq| ComplexBaseband::new(rate, start, std::mem::take(iq)))
            .collect::<Result<Vec<_>>>()?,
        report,
    ))
}
