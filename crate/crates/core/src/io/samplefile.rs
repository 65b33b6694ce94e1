use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sigmodel::{RealSampleStream, SampleFormat};

pub const MAGIC: [u8; 4] = *b"RSG1";
pub const VERSION: u16 = 1;
/// magic, version u16, channels u16, format u32, rate f64, count u64, start f64.
pub const HEADER_LEN: u64 = 36;

const FORMAT_INT16: u32 = 0;
const FORMAT_F64: u32 = 1;

/// Write a stream as header plus interleaved little-endian payload.
/// Returns the number of bytes written.
pub fn write_samples<W: Write>(stream: &RealSampleStream, mut w: W) -> Result<u64> {
    let channels =
        u16::try_from(stream.channels()).map_err(|_| Error::param("too many channels for the file format"))?;
    let code = match stream.format() {
        SampleFormat::Int16 => FORMAT_INT16,
        SampleFormat::Float64 => FORMAT_F64,
    };
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&channels.to_le_bytes())?;
    w.write_all(&code.to_le_bytes())?;
    w.write_all(&stream.sample_rate_hz().to_le_bytes())?;
    w.write_all(&(stream.len() as u64).to_le_bytes())?;
    w.write_all(&stream.start_time_s().to_le_bytes())?;
    let mut bytes = HEADER_LEN;
    match stream.format() {
        SampleFormat::Int16 => {
            for &v in stream.samples() {
                w.write_all(&(v as i16).to_le_bytes())?;
            }
            bytes += 2 * stream.samples().len() as u64;
        }
        SampleFormat::Float64 => {
            for &v in stream.samples() {
                w.write_all(&v.to_le_bytes())?;
            }
            bytes += 8 * stream.samples().len() as u64;
        }
    }
    w.flush()?;
    Ok(bytes)
}

struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        let mut got = 0;
        while got < N {
            match self.inner.read(&mut buf[got..]) {
                Ok(0) => {
                    return Err(Error::format(
                        self.offset + got as u64,
                        format!("unexpected end of file reading {what}"),
                    ))
                }
                Ok(n) => got += n,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += N as u64;
        Ok(buf)
    }
}

/// Parse a sample file, validating the header and the payload length.
pub fn read_samples<R: Read>(r: R) -> Result<RealSampleStream> {
    let mut c = Cursor { inner: r, offset: 0 };
    let magic = c.take::<4>("magic")?;
    if magic != MAGIC {
        return Err(Error::format(0, format!("bad magic {magic:?}, expected \"RSG1\"")));
    }
    let version = u16::from_le_bytes(c.take("version")?);
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let channels = u16::from_le_bytes(c.take("channel count")?);
    if channels == 0 {
        return Err(Error::format(6, "channel count is zero"));
    }
    let code = u32::from_le_bytes(c.take("format code")?);
    let format = match code {
        FORMAT_INT16 => SampleFormat::Int16,
        FORMAT_F64 => SampleFormat::Float64,
        other => return Err(Error::format(8, format!("unknown sample format code {other}"))),
    };
    let rate = f64::from_le_bytes(c.take("sample rate")?);
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::format(12, format!("invalid sample rate {rate}")));
    }
    let count = u64::from_le_bytes(c.take("sample count")?);
    let start = f64::from_le_bytes(c.take("start time")?);
    if !start.is_finite() {
        return Err(Error::format(28, "start time is not finite"));
    }
    let total = count
        .checked_mul(channels as u64)
        .filter(|t| *t <= usize::MAX as u64 / 8)
        .ok_or_else(|| Error::format(20, format!("sample count {count} is implausibly large")))?;
    let mut samples = Vec::with_capacity(total.min(1 << 24) as usize);
    for _ in 0..total {
        samples.push(match format {
            SampleFormat::Int16 => i16::from_le_bytes(c.take("payload")?) as f64,
            SampleFormat::Float64 => f64::from_le_bytes(c.take("payload")?),
        });
    }
    let mut extra = [0u8; 1];
    if c.inner.read(&mut extra)? != 0 {
        return Err(Error::format(
            c.offset,
            "payload is longer than the declared sample count",
        ));
    }
    RealSampleStream::new(rate, channels as usize, format, start, samples)
        .map_err(|e| Error::format(HEADER_LEN, e.to_string()))
}

pub fn write_sample_file(path: impl AsRef<Path>, stream: &RealSampleStream) -> Result<u64> {
    write_samples(stream, BufWriter::new(File::create(path)?))
}

pub fn read_sample_file(path: impl AsRef<Path>) -> Result<RealSampleStream> {
    read_samples(BufReader::new(File::open(path)?))
}
