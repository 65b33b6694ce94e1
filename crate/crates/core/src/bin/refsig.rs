//! Command-line front end. Sample data travels as RSG1 files; everything
//! derived from it (baseband, edges, time errors, statistics) as CSV.
//!
//! Exit codes: 0 success, 1 usage, 2 data/format, 3 numeric/feasibility.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use refsig::analysis::{
    allan_deviation, decimate_to_1hz, default_taus, fit_linear_drift, pair_edge_times, savgol, sine_time_error,
    summary_stats, SavGolSpec, SourceKind, TimeErrorSeries,
};
use refsig::baseline::{dmtd_measure, DmtdConfig, TicSpec};
use refsig::ddc::{compare_cic_fir, downconvert, CompareOptions, DdcConfig, DecimatorSpec};
use refsig::edgefind::{detect_edges, Polarity, RefineLevel, TriggerSpec};
use refsig::io::{
    export_csv, export_csv_file, ingest_framed_stream, read_baseband_csv, read_edges_csv, read_frames,
    read_sample_file, read_time_error_csv, write_sample_file, CsvTable, ValueSeries,
};
use refsig::sigmodel::{
    quantize, synth_pulse, synth_sine, AdcSpec, PhaseErrorModel, PulseModel, RealSampleStream, SineModel,
};
use refsig::{Error, Result};

#[derive(Parser)]
#[command(
    name = "refsig",
    version,
    about = "Software-defined time and frequency comparison toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a reference signal into an RSG1 sample file.
    #[command(subcommand)]
    Synth(Synth),
    /// Mix a sample file to baseband and decimate it; writes `t_s,i,q` CSV.
    Ddc(DdcArgs),
    /// Detect and refine pulse edges; writes an edge CSV.
    Edges(EdgesArgs),
    /// Turn a pair of channels into a time-error series.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Allan deviation of a time-error CSV.
    Adev(AdevArgs),
    /// Linear drift fit of a time-error CSV.
    Drift(DriftArgs),
    /// Savitzky-Golay smoothing or differentiation of a time-error CSV.
    Savgol(SavgolArgs),
    /// Method comparisons.
    #[command(subcommand)]
    Compare(Compare),
    /// Classical dual-mixer time-difference measurement of two sample files.
    Dmtd(DmtdArgs),
    /// Rebuild a gap-free sample file from a framed stream capture.
    Ingest(IngestArgs),
}

#[derive(Subcommand)]
enum Synth {
    Sine(SineArgs),
    Pulse(PulseArgs),
}

#[derive(Args)]
struct OutputFormat {
    /// Quantize to a signed ADC of this many bits and store 16-bit codes
    /// (default: store float64).
    #[arg(long)]
    bits: Option<u32>,
    /// ADC drive level as a fraction of full scale (with --bits).
    #[arg(long, default_value_t = 0.5)]
    input_level: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SineArgs {
    #[arg(long, default_value_t = 25e6)]
    fs: f64,
    #[arg(long, default_value_t = 10e6)]
    fr: f64,
    #[arg(long)]
    duration: f64,
    #[arg(long, default_value_t = 0.5)]
    amplitude: f64,
    /// Signal-to-noise ratio in dB; omit for a clean signal.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// none | const:RAD | drift:S_PER_S | linear:RAD:RAD_PER_S | sin:RAD:HZ | white:RAD[:SEED]
    #[arg(long, default_value = "none")]
    phase_error: String,
    #[command(flatten)]
    output: OutputFormat,
}

#[derive(Args)]
struct PulseArgs {
    #[arg(long, default_value_t = 25e6)]
    fs: f64,
    #[arg(long)]
    duration: f64,
    #[arg(long, default_value_t = 1.0)]
    period: f64,
    #[arg(long, default_value_t = 0.1)]
    thigh: f64,
    /// Natural frequency of the shaping filter, rad/s.
    #[arg(long, default_value_t = std::f64::consts::TAU * 5e6)]
    omega0: f64,
    #[arg(long, default_value_t = 0.6)]
    zeta: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-pulse timing errors in seconds, one per line.
    #[arg(long)]
    te_file: Option<PathBuf>,
    #[command(flatten)]
    output: OutputFormat,
}

#[derive(Args)]
struct DdcArgs {
    /// Reference frequency of the signal in the file.
    #[arg(long, default_value_t = 10e6)]
    fr: f64,
    /// NCO (transfer oscillator) frequency; defaults to --fr.
    #[arg(long)]
    ft: Option<f64>,
    /// Decimation factor of each FIR stage.
    #[arg(long, default_value = "10,10,10", value_delimiter = ',')]
    stages: Vec<usize>,
    #[arg(long, default_value_t = 120.0)]
    atten_db: f64,
    #[arg(long, default_value_t = 0)]
    channel: usize,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EdgesArgs {
    /// Schmitt arm threshold, in sample units.
    #[arg(long)]
    low: f64,
    /// Schmitt fire threshold, in sample units.
    #[arg(long)]
    high: f64,
    #[arg(long, default_value_t = 20)]
    interp: usize,
    /// Samples kept on each side of the coarse edge.
    #[arg(long, default_value_t = 8)]
    window: usize,
    #[arg(long)]
    falling: bool,
    /// Refinement level: "fixed" (the firing threshold) or a fraction of
    /// each edge's local step, e.g. 0.5.
    #[arg(long, default_value = "fixed")]
    level: String,
    #[arg(long, default_value_t = 0)]
    channel: usize,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Analyze {
    /// Phase difference of two baseband CSVs (A relative to B).
    Sine(AnalyzeSineArgs),
    /// Pairwise difference of two edge CSVs (A minus B).
    Pulse(AnalyzePulseArgs),
}

#[derive(Args)]
struct AnalyzeSineArgs {
    #[arg(long)]
    in_a: PathBuf,
    #[arg(long)]
    in_b: PathBuf,
    #[arg(long, default_value_t = 10e6)]
    fr: f64,
    /// Decimate the basebands to 1 S/s before comparing.
    #[arg(long)]
    to_1hz: bool,
    /// Writes PREFIX_dt.csv and PREFIX_summary.csv; prints to stdout if absent.
    #[arg(long)]
    out_prefix: Option<String>,
}

#[derive(Args)]
struct AnalyzePulseArgs {
    #[arg(long)]
    in_a: PathBuf,
    #[arg(long)]
    in_b: PathBuf,
    /// Largest |t_a − t_b| accepted as a pair, seconds.
    #[arg(long)]
    max_offset: Option<f64>,
    /// Sample rate the edge tables were taken at.
    #[arg(long, default_value_t = 25e6)]
    fs: f64,
    #[arg(long)]
    out_prefix: Option<String>,
}

#[derive(Args)]
struct AdevArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Averaging times in seconds; defaults to ten per decade.
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DriftArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct SavgolArgs {
    /// Window length in samples (odd); 7200 is two hours at 1 S/s, rounded up to odd.
    #[arg(long, default_value_t = 7201)]
    window: usize,
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value_t = 0)]
    deriv: usize,
    /// Sample spacing; defaults to the spacing of the input.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Compare {
    /// Residual SNR of the fixed-point CIC chain against the FIR cascade.
    CicFir(CicFirArgs),
}

#[derive(Args)]
struct CicFirArgs {
    #[arg(long, default_value = "20,40,80,100,200,400,500", value_delimiter = ',')]
    decims: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DmtdArgs {
    #[arg(long, default_value_t = 10e6)]
    fr: f64,
    /// Transfer oscillator frequency.
    #[arg(long)]
    ft: f64,
    /// Time-interval counter clock.
    #[arg(long, default_value_t = 250e6)]
    ftic: f64,
    #[arg(long)]
    in_a: PathBuf,
    #[arg(long)]
    in_b: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    channels: usize,
    #[arg(long, default_value_t = 25e6)]
    fs: f64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn parse_phase_error(s: &str) -> Result<PhaseErrorModel> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts[1..]
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| usage(format!("--phase-error {s:?}: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    let model = match (parts[0], nums.as_slice()) {
        ("none", []) => PhaseErrorModel::Zero,
        ("const", [p]) => PhaseErrorModel::Constant { phase_rad: *p },
        ("linear", [o, r]) => PhaseErrorModel::Linear {
            offset_rad: *o,
            rate_rad_per_s: *r,
        },
        ("sin", [a, f]) => PhaseErrorModel::Sinusoidal {
            amplitude_rad: *a,
            freq_hz: *f,
        },
        ("white", [r]) => PhaseErrorModel::White { rms_rad: *r, seed: 0 },
        ("white", [r, seed]) => PhaseErrorModel::White {
            rms_rad: *r,
            seed: *seed as u64,
        },
        // Needs the carrier; resolved by the caller.
        ("drift", [_]) => PhaseErrorModel::Zero,
        _ => return Err(usage(format!("unrecognised --phase-error {s:?}"))),
    };
    Ok(model)
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut offset = 0u64;
    let mut out = Vec::new();
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push(t.parse::<f64>().map_err(|e| Error::Format {
                offset,
                message: format!("bad number {t:?}: {e}"),
            })?);
        }
        offset += line.len() as u64;
    }
    Ok(out)
}

fn store(stream: RealSampleStream, fmt: &OutputFormat) -> Result<()> {
    let stream = match fmt.bits {
        Some(bits) => {
            let (codes, clips) = quantize(&stream, &AdcSpec::new(bits).with_input_level(fmt.input_level))?;
            if clips.total() > 0 {
                eprintln!("warning: {} samples clipped", clips.total());
            }
            codes
        }
        None => stream,
    };
    write_sample_file(&fmt.out, &stream)?;
    Ok(())
}

/// Write a table to `out`, or to stdout when no path is given.
fn emit<T: CsvTable + ?Sized>(table: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => export_csv_file(table, p),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            export_csv(table, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn channel_of(path: &Path, channel: usize) -> Result<(RealSampleStream, Vec<f64>)> {
    let stream = read_sample_file(path)?;
    if channel >= stream.channels() {
        return Err(usage(format!(
            "channel {channel} requested but {} has {} channel(s)",
            path.display(),
            stream.channels()
        )));
    }
    let x = stream.channel(channel)?;
    Ok((stream, x))
}

fn write_series_outputs(series: &TimeErrorSeries, prefix: Option<&str>) -> Result<()> {
    let stats = summary_stats(series)?;
    match prefix {
        Some(p) => {
            export_csv_file(series, format!("{p}_dt.csv"))?;
            export_csv_file(&stats, format!("{p}_summary.csv"))?;
            eprintln!(
                "{} samples; mean {:e} s; sigma {:e} s",
                series.len(),
                stats.mean_s,
                stats.sigma_s
            );
            Ok(())
        }
        None => emit(series, None),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(Synth::Sine(a)) => {
            let phase = match a.phase_error.strip_prefix("drift:") {
                Some(d) => {
                    PhaseErrorModel::drift(a.fr, d.parse().map_err(|e| usage(format!("--phase-error drift: {e}")))?)
                }
                None => parse_phase_error(&a.phase_error)?,
            };
            let mut model = SineModel::new(a.fr).with_amplitude(a.amplitude).with_phase_error(phase);
            if let Some(snr) = a.snr {
                model = model.with_noise(snr, a.seed);
            }
            store(synth_sine(&model, a.fs, a.duration)?, &a.output)
        }
        Command::Synth(Synth::Pulse(a)) => {
            let mut model = PulseModel::new(a.period, a.thigh, a.omega0, a.zeta).with_amplitude(a.amplitude);
            if let Some(p) = &a.te_file {
                model = model.with_time_errors(read_numbers(p)?);
            }
            if let Some(snr) = a.snr {
                model = model.with_noise(snr, a.seed);
            }
            store(synth_pulse(&model, a.fs, a.duration)?, &a.output)
        }
        Command::Ddc(a) => {
            let (stream, x) = channel_of(&a.input, a.channel)?;
            let cfg = DdcConfig::new(stream.sample_rate_hz(), a.fr).with_nco_freq(a.ft.unwrap_or(a.fr));
            let spec = DecimatorSpec::design(&a.stages, a.atten_db, 0.65, 0.35)?;
            let bb = downconvert(&x, stream.start_time_s(), &cfg, &spec)?;
            emit(&bb, a.out.as_deref())
        }
        Command::Edges(a) => {
            let (stream, x) = channel_of(&a.input, a.channel)?;
            let level = if a.level == "fixed" {
                RefineLevel::Fixed
            } else {
                RefineLevel::PerEvent {
                    fraction: a
                        .level
                        .parse()
                        .map_err(|e| usage(format!("--level {:?}: {e}", a.level)))?,
                }
            };
            let spec = TriggerSpec {
                low_threshold: a.low,
                high_threshold: a.high,
                polarity: if a.falling { Polarity::Falling } else { Polarity::Rising },
                window_before: a.window,
                window_after: a.window,
                interp_factor: a.interp,
                level,
            };
            let det = detect_edges(&x, stream.sample_rate_hz(), stream.start_time_s(), &spec)?;
            if let Some(d) = &det.diagnostic {
                eprintln!("warning: {d}");
            }
            if det.dropped_at_bounds + det.unrefined > 0 {
                eprintln!(
                    "{} edges too close to the record ends, {} not refined",
                    det.dropped_at_bounds, det.unrefined
                );
            }
            emit(&det.series, a.out.as_deref())
        }
        Command::Analyze(Analyze::Sine(a)) => {
            let mut ba = read_baseband_csv(open(&a.in_a)?)?;
            let mut bb = read_baseband_csv(open(&a.in_b)?)?;
            if a.to_1hz {
                ba = decimate_to_1hz(&ba)?;
                bb = decimate_to_1hz(&bb)?;
            }
            let series = sine_time_error(&ba, &bb, a.fr)?;
            write_series_outputs(&series, a.out_prefix.as_deref())
        }
        Command::Analyze(Analyze::Pulse(a)) => {
            let ea = read_edges_csv(open(&a.in_a)?, a.fs)?;
            let eb = read_edges_csv(open(&a.in_b)?, a.fs)?;
            let pairs = pair_edge_times(&ea, &eb, a.max_offset)?;
            if pairs.unmatched_a + pairs.unmatched_b > 0 {
                eprintln!(
                    "unmatched edges: {} in A, {} in B",
                    pairs.unmatched_a, pairs.unmatched_b
                );
            }
            write_series_outputs(&pairs.series, a.out_prefix.as_deref())
        }
        Command::Adev(a) => {
            let series = read_time_error_csv(open(&a.input)?, SourceKind::Sine)?;
            let tau0 = 1.0 / series.rate_hz;
            let taus = a.taus.unwrap_or_else(|| default_taus(series.len(), tau0));
            let curve = allan_deviation(&series.values_s, tau0, &taus)?;
            for (tau, why) in &curve.omitted {
                eprintln!("tau {tau} s omitted: {why}");
            }
            emit(&curve, a.out.as_deref())
        }
        Command::Drift(a) => {
            let series = read_time_error_csv(open(&a.input)?, SourceKind::Sine)?;
            emit(&fit_linear_drift(&series)?, None)
        }
        Command::Savgol(a) => {
            let series = read_time_error_csv(open(&a.input)?, SourceKind::Sine)?;
            let dt = a.dt.unwrap_or(1.0 / series.rate_hz);
            let spec = SavGolSpec::new(a.window, a.order).derivative(a.deriv);
            let values = savgol(&series.values_s, &spec, dt)?;
            let half = a.window / 2;
            let times_s = series.times_s[half..half + values.len()].to_vec();
            emit(&ValueSeries { times_s, values }, a.out.as_deref())
        }
        Command::Compare(Compare::CicFir(a)) => {
            let opts = CompareOptions {
                seed: a.seed,
                ..CompareOptions::default()
            };
            let rows = compare_cic_fir(&a.decims, &opts)?;
            emit(rows.as_slice(), a.out.as_deref())
        }
        Command::Dmtd(a) => {
            let (sa, xa) = channel_of(&a.in_a, 0)?;
            let (sb, xb) = channel_of(&a.in_b, 0)?;
            if sa.sample_rate_hz() != sb.sample_rate_hz() || xa.len() != xb.len() {
                return Err(Error::Format {
                    offset: 0,
                    message: "the two sample files differ in rate or length".into(),
                });
            }
            let cfg = DmtdConfig::new(sa.sample_rate_hz(), a.fr, a.ft)?;
            let series = dmtd_measure(&xa, &xb, sa.start_time_s(), &cfg, &TicSpec { clock_hz: a.ftic })?;
            emit(&series, a.out.as_deref())
        }
        Command::Ingest(a) => {
            let frames = read_frames(open(&a.input)?, a.channels)?;
            let (stream, report) = ingest_framed_stream(&frames, a.channels, a.fs, 0.0)?;
            for g in &report.gaps {
                eprintln!("gap: {} frame(s) from sequence {}", g.frames, g.first_sequence);
            }
            eprintln!(
                "{} frames, {} padded samples per channel",
                frames.len(),
                report.padded_samples
            );
            let mut w = BufWriter::new(File::create(&a.out)?);
            refsig::io::write_samples(&stream, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A downstream reader (e.g. `head`) closing the pipe is not a failure.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
