//! Measure one constant phase offset with the classical dual-mixer method
//! and with the software down-converter, and compare both with the truth.
//!
//! `cargo run --release --example dmtd_vs_sdr`

use std::f64::consts::TAU;

use refsig::analysis::{sine_time_error, summary_stats};
use refsig::baseline::{dmtd_measure, DmtdConfig, TicSpec};
use refsig::ddc::{DdcConfig, DecimatorSpec};
use refsig::pipeline::downconvert_synthetic;
use refsig::sigmodel::{synth_sine, PhaseErrorModel, SineModel};

fn main() -> refsig::Result<()> {
    let (fs, fr, fb, f_tic, dphi, seconds) = (25e6, 10e6, 10e3, 250e6, 0.3, 0.02);
    let a = SineModel::new(fr)
        .with_phase_error(PhaseErrorModel::Constant { phase_rad: dphi })
        .with_noise(60.0, 1);
    let b = SineModel::new(fr).with_noise(60.0, 2);

    let bb = downconvert_synthetic(
        &[a.clone(), b.clone()],
        seconds,
        &DdcConfig::new(fs, fr),
        &DecimatorSpec::default_chain(),
    )?;
    let sdr = summary_stats(&sine_time_error(&bb[0], &bb[1], fr)?)?;

    let xa = synth_sine(&a, fs, seconds)?;
    let xb = synth_sine(&b, fs, seconds)?;
    let cfg = DmtdConfig::new(fs, fr, fr - fb)?;
    let dmtd = summary_stats(&dmtd_measure(
        xa.samples(),
        xb.samples(),
        0.0,
        &cfg,
        &TicSpec { clock_hz: f_tic },
    )?)?;

    let truth = dphi / (TAU * fr);
    let quantum = fb / (f_tic * fr);
    println!("truth           {:10.4} ps", truth * 1e12);
    println!(
        "SDR   mean      {:10.4} ps  (sigma {:.4} ps)",
        sdr.mean_s * 1e12,
        sdr.sigma_s * 1e12
    );
    println!(
        "DMTD  mean      {:10.4} ps  (sigma {:.4} ps)",
        dmtd.mean_s * 1e12,
        dmtd.sigma_s * 1e12
    );
    println!("TIC quantum in time-error units: {:.1} ps", quantum * 1e12);
    Ok(())
}
