//! Recording formats and exports: a small binary sample-file format, a framed
//! stream with loss repair, and CSV tables for every result type.

mod csv;
mod frames;
mod samplefile;

pub use self::csv::{
    export_csv, export_csv_file, read_baseband_csv, read_edges_csv, read_time_error_csv, CsvTable, ValueSeries,
};
pub use frames::{ingest_framed_stream, read_frames, write_frame, Gap, GapFiller, GapReport, StreamFrame};
pub use samplefile::{read_sample_file, read_samples, write_sample_file, write_samples, HEADER_LEN, MAGIC, VERSION};
