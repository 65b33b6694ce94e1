use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::analysis::{AllanCurve, DriftFit, SourceKind, SummaryStats, TimeErrorSeries};
use crate::ddc::{CicFirRow, ComplexBaseband, FirStage};
use crate::edgefind::{EdgeEvent, EdgeEventSeries};
use crate::error::{Error, Result};

/// A result that can be written as a CSV table. Numbers are printed in their
/// shortest round-trip form, so reading them back gives identical values.
pub trait CsvTable {
    /// Column names with unit suffixes.
    fn header(&self) -> &'static str;
    fn rows(&self) -> usize;
    fn row(&self, i: usize) -> Vec<String>;
}

/// Uniformly spaced values without a time-error meaning (e.g. a smoothed
/// derivative), stamped with their centre times.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSeries {
    pub times_s: Vec<f64>,
    pub values: Vec<f64>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

impl CsvTable for TimeErrorSeries {
    fn header(&self) -> &'static str {
        "t_s,dt_s"
    }
    fn rows(&self) -> usize {
        self.len()
    }
    fn row(&self, i: usize) -> Vec<String> {
        vec![num(self.times_s[i]), num(self.values_s[i])]
    }
}

impl CsvTable for ValueSeries {
    fn header(&self) -> &'static str {
        "t_s,value"
    }
    fn rows(&self) -> usize {
        self.values.len()
    }
    fn row(&self, i: usize) -> Vec<String> {
        vec![num(self.times_s[i]), num(self.values[i])]
    }
}

impl CsvTable for AllanCurve {
    fn header(&self) -> &'static str {
        "tau_s,adev,n_terms"
    }
    fn rows(&self) -> usize {
        self.points.len()
    }
    fn row(&self, i: usize) -> Vec<String> {
        let p = &self.points[i];
        vec![num(p.tau_s), num(p.adev), p.n_terms.to_string()]
    }
}

impl CsvTable for EdgeEventSeries {
    fn header(&self) -> &'static str {
        "event,coarse_index,fractional_index,time_s"
    }
    fn rows(&self) -> usize {
        self.events.len()
    }
    fn row(&self, i: usize) -> Vec<String> {
        let e = &self.events[i];
        vec![
            i.to_string(),
            e.coarse_index.to_string(),
            num(e.fractional_index),
            num(e.time_s),
        ]
    }
}

impl CsvTable for ComplexBaseband {
    fn header(&self) -> &'static str {
        "t_s,i,q"
    }
    fn rows(&self) -> usize {
        self.iq.len()
    }
    fn row(&self, i: usize) -> Vec<String> {
        vec![num(self.time_of(i)), num(self.iq[i].re), num(self.iq[i].im)]
    }
}

impl CsvTable for FirStage {
    fn header(&self) -> &'static str {
        "index,tap"
    }
    fn rows(&self) -> usize {
        self.len()
    }
    fn row(&self, i: usize) -> Vec<String> {
        vec![i.to_string(), num(self.taps()[i])]
    }
}

impl CsvTable for [CicFirRow] {
    fn header(&self) -> &'static str {
        "decimation,snr_fir_db,snr_cic_db,delta_db"
    }
    fn rows(&self) -> usize {
        self.len()
    }
    fn row(&self, i: usize) -> Vec<String> {
        let r = &self[i];
        vec![
            r.decimation.to_string(),
            num(r.snr_fir_db),
            num(r.snr_cic_db),
            num(r.delta_db),
        ]
    }
}

impl CsvTable for DriftFit {
    fn header(&self) -> &'static str {
        "slope,intercept_s,residual_rms_s"
    }
    fn rows(&self) -> usize {
        1
    }
    fn row(&self, _: usize) -> Vec<String> {
        vec![num(self.slope), num(self.intercept_s), num(self.residual_rms_s)]
    }
}

impl CsvTable for SummaryStats {
    fn header(&self) -> &'static str {
        "mean_s,sigma_s,linear_drift"
    }
    fn rows(&self) -> usize {
        1
    }
    fn row(&self, _: usize) -> Vec<String> {
        vec![
            num(self.mean_s),
            num(self.sigma_s),
            self.linear_drift.map_or_else(String::new, num),
        ]
    }
}

/// Write `table` with a header line and `\n` line endings.
pub fn export_csv<T: CsvTable + ?Sized, W: Write>(table: &T, w: W) -> Result<()> {
    if table.rows() == 0 {
        return Err(Error::Empty("nothing to export".into()));
    }
    let mut wtr = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(table.header().split(',')).map_err(csv_err)?;
    for i in 0..table.rows() {
        wtr.write_record(table.row(i)).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// As [`export_csv`], creating `path` only when there is something to write.
pub fn export_csv_file<T: CsvTable + ?Sized>(table: &T, path: impl AsRef<Path>) -> Result<()> {
    if table.rows() == 0 {
        return Err(Error::Empty("nothing to export".into()));
    }
    export_csv(table, BufWriter::new(File::create(path)?))
}

fn csv_err(e: ::csv::Error) -> Error {
    let offset = e.position().map_or(0, |p| p.byte());
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::format(offset, format!("{other:?}")),
    }
}

/// Read a CSV with the expected header and return its numeric columns.
fn read_columns<R: Read>(r: R, header: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = ::csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let got: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let want: Vec<&str> = header.split(',').collect();
    if got != want {
        return Err(Error::format(
            0,
            format!("expected columns {header}, found {}", got.join(",")),
        ));
    }
    let mut cols = vec![Vec::new(); want.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let offset = rec.position().map_or(0, |p| p.byte());
        for (c, field) in cols.iter_mut().zip(rec.iter()) {
            c.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::format(offset, format!("bad number {field:?}: {e}")))?,
            );
        }
    }
    if cols[0].is_empty() {
        return Err(Error::Empty("CSV has no data rows".into()));
    }
    Ok(cols)
}

fn spacing_rate(t: &[f64]) -> f64 {
    let mut d: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    if d.is_empty() {
        return 1.0;
    }
    d.sort_unstable_by(f64::total_cmp);
    let rate = 1.0 / d[d.len() / 2];
    // Decimal time stamps rarely invert to an exact rate; snap near-integers.
    if (rate - rate.round()).abs() <= 1e-9 * rate {
        rate.round()
    } else {
        rate
    }
}

/// Read `t_s,dt_s`; the nominal rate is the inverse of the median spacing.
pub fn read_time_error_csv<R: Read>(r: R, kind: SourceKind) -> Result<TimeErrorSeries> {
    let mut cols = read_columns(r, "t_s,dt_s")?;
    let values = cols.pop().unwrap();
    let times = cols.pop().unwrap();
    TimeErrorSeries::new(kind, spacing_rate(&times), times, values)
}

/// Read `t_s,i,q`, which must be uniformly spaced.
pub fn read_baseband_csv<R: Read>(r: R) -> Result<ComplexBaseband> {
    let cols = read_columns(r, "t_s,i,q")?;
    let t = &cols[0];
    let rate = spacing_rate(t);
    let iq = cols[1]
        .iter()
        .zip(&cols[2])
        .map(|(&i, &q)| Complex64::new(i, q))
        .collect();
    ComplexBaseband::new(rate, t[0], iq)
}

/// Read an edge table written by [`export_csv`].
pub fn read_edges_csv<R: Read>(r: R, sample_rate_hz: f64) -> Result<EdgeEventSeries> {
    let cols = read_columns(r, "event,coarse_index,fractional_index,time_s")?;
    let events: Vec<EdgeEvent> = (0..cols[0].len())
        .map(|i| EdgeEvent {
            coarse_index: cols[1][i] as usize,
            fractional_index: cols[2][i],
            time_s: cols[3][i],
        })
        .collect();
    let start_time_s = events
        .first()
        .map_or(0.0, |e| e.time_s - e.fractional_index / sample_rate_hz);
    Ok(EdgeEventSeries {
        sample_rate_hz,
        start_time_s,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_error_round_trip_is_exact() {
        let s = TimeErrorSeries::new(
            SourceKind::Sine,
            2.0,
            vec![0.0, 0.5, 1.0],
            vec![3.59e-13, -1.0 / 3.0 * 1e-12, 5e-324],
        )
        .unwrap();
        let mut buf = Vec::new();
        export_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t_s,dt_s\n"));
        assert!(!text.contains('\r'));
        let back = read_time_error_csv(&buf[..], SourceKind::Sine).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn empty_export_creates_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let s = TimeErrorSeries::new(SourceKind::Sine, 1.0, vec![], vec![]).unwrap();
        assert!(matches!(export_csv_file(&s, &path), Err(Error::Empty(_))));
        assert!(!path.exists());
    }

    #[test]
    fn wrong_header_is_a_format_error() {
        let text = "t,dt\n0,1\n";
        assert!(matches!(
            read_time_error_csv(text.as_bytes(), SourceKind::Sine),
            Err(Error::Format { .. })
        ));
        let text = "t_s,dt_s\n0,abc\n";
        assert!(matches!(
            read_time_error_csv(text.as_bytes(), SourceKind::Sine),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn baseband_round_trip() {
        let bb = ComplexBaseband::new(4.0, 0.25, vec![Complex64::new(0.1, -0.2), Complex64::new(1e-17, 3.0)]).unwrap();
        let mut buf = Vec::new();
        export_csv(&bb, &mut buf).unwrap();
        assert_eq!(read_baseband_csv(&buf[..]).unwrap(), bb);
    }
}
