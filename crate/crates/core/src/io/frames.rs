use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sigmodel::{RealSampleStream, SampleFormat};

/// One transport frame: a sequence number and interleaved 16-bit samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamFrame {
    pub sequence: u64,
    /// Samples per channel.
    pub payload_samples: u32,
    pub payload: Vec<i16>,
}

impl StreamFrame {
    pub fn new(sequence: u64, channels: usize, payload: Vec<i16>) -> Result<Self> {
        if channels == 0 || !payload.len().is_multiple_of(channels) {
            return Err(Error::param(format!(
                "{} payload values do not divide into {channels} channels",
                payload.len()
            )));
        }
        let payload_samples = u32::try_from(payload.len() / channels).map_err(|_| Error::param("frame too large"))?;
        Ok(Self {
            sequence,
            payload_samples,
            payload,
        })
    }
}

/// Encode as sequence (u64 LE), samples per channel (u32 LE), payload (i16 LE).
pub fn write_frame<W: Write>(frame: &StreamFrame, mut w: W) -> Result<()> {
    w.write_all(&frame.sequence.to_le_bytes())?;
    w.write_all(&frame.payload_samples.to_le_bytes())?;
    for v in &frame.payload {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Decode consecutive frames until end of input.
pub fn read_frames<R: Read>(mut r: R, channels: usize) -> Result<Vec<StreamFrame>> {
    if channels == 0 {
        return Err(Error::param("channel count must be positive"));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut frames = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        if bytes.len() - pos < 12 {
            return Err(Error::format(pos as u64, "truncated frame header"));
        }
        let sequence = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
        let payload_samples = u32::from_le_bytes(bytes[pos + 8..pos + 12].try_into().unwrap());
        pos += 12;
        let n = payload_samples as usize * channels;
        if bytes.len() - pos < 2 * n {
            return Err(Error::format(
                pos as u64,
                format!("frame {sequence} payload is truncated"),
            ));
        }
        let payload = bytes[pos..pos + 2 * n]
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]))
            .collect();
        pos += 2 * n;
        frames.push(StreamFrame {
            sequence,
            payload_samples,
            payload,
        });
    }
    Ok(frames)
}

/// A run of lost frames replaced by zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub first_sequence: u64,
    pub frames: u64,
    /// Per-channel sample index where the padding starts.
    pub start_sample: u64,
    /// Per-channel samples of padding.
    pub samples: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
    /// Total per-channel samples inserted.
    pub padded_samples: u64,
}

impl GapReport {
    /// Padded per-channel sample ranges.
    pub fn spans(&self) -> Vec<std::ops::Range<usize>> {
        self.gaps
            .iter()
            .map(|g| g.start_sample as usize..(g.start_sample + g.samples) as usize)
            .collect()
    }

    /// Whether per-channel sample `index` lies inside inserted padding.
    pub fn is_padded(&self, index: u64) -> bool {
        self.gaps
            .iter()
            .any(|g| index >= g.start_sample && index < g.start_sample + g.samples)
    }
}

/// Incremental loss repair. Frames must arrive in increasing sequence order;
/// a jump in sequence number is filled with zeros sized like the frame before
/// the gap (or after it, when the stream starts mid-gap).
#[derive(Debug, Clone)]
pub struct GapFiller {
    channels: usize,
    next_sequence: Option<u64>,
    last_payload: Option<u32>,
    emitted: u64,
    report: GapReport,
}

impl GapFiller {
    pub fn new(channels: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::param("channel count must be positive"));
        }
        Ok(Self {
            channels,
            next_sequence: None,
            last_payload: None,
            emitted: 0,
            report: GapReport::default(),
        })
    }

    /// Append the frame's samples (and any padding before it) to `out`.
    pub fn push(&mut self, frame: &StreamFrame, out: &mut Vec<f64>) -> Result<()> {
        if frame.payload.len() != frame.payload_samples as usize * self.channels {
            return Err(Error::Stream(format!(
                "frame {} declares {} samples per channel but carries {} values for {} channels",
                frame.sequence,
                frame.payload_samples,
                frame.payload.len(),
                self.channels
            )));
        }
        if let Some(expected) = self.next_sequence {
            if frame.sequence < expected {
                return Err(Error::Stream(format!(
                    "frame {} arrived after frame {} (duplicate or out of order)",
                    frame.sequence,
                    expected - 1
                )));
            }
            let missing = frame.sequence - expected;
            if missing > 0 {
                let per = self.last_payload.unwrap_or(frame.payload_samples) as u64;
                let samples = missing * per;
                out.resize(out.len() + (samples as usize) * self.channels, 0.0);
                self.report.gaps.push(Gap {
                    first_sequence: expected,
                    frames: missing,
                    start_sample: self.emitted,
                    samples,
                });
                self.report.padded_samples += samples;
                self.emitted += samples;
            }
        }
        out.extend(frame.payload.iter().map(|&v| v as f64));
        self.emitted += frame.payload_samples as u64;
        self.next_sequence = Some(frame.sequence + 1);
        self.last_payload = Some(frame.payload_samples);
        Ok(())
    }

    pub fn report(&self) -> &GapReport {
        &self.report
    }

    pub fn into_report(self) -> GapReport {
        self.report
    }
}

/// Reassemble frames into one integer stream, zero-filling lost frames.
pub fn ingest_framed_stream<'a, I>(
    frames: I,
    channels: usize,
    sample_rate_hz: f64,
    start_time_s: f64,
) -> Result<(RealSampleStream, GapReport)>
where
    I: IntoIterator<Item = &'a StreamFrame>,
{
    let mut filler = GapFiller::new(channels)?;
    let mut samples = Vec::new();
    for f in frames {
        filler.push(f, &mut samples)?;
    }
    let stream = RealSampleStream::new(sample_rate_hz, channels, SampleFormat::Int16, start_time_s, samples)?;
    Ok((stream, filler.into_report()))
}
