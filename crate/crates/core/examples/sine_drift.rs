//! Two synthetic 10 MHz references, one drifting by a fixed fractional
//! frequency offset, recovered through the down-converter.
//!
//! `cargo run --release --example sine_drift -- [seconds]`

use refsig::analysis::{fit_linear_drift, sine_time_error, summary_stats};
use refsig::ddc::{DdcConfig, DecimatorSpec};
use refsig::pipeline::downconvert_synthetic;
use refsig::sigmodel::{PhaseErrorModel, SineModel};

fn main() -> refsig::Result<()> {
    let seconds: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let (fs, fr, drift) = (25e6, 10e6, 1e-12);
    let a = SineModel::new(fr)
        .with_phase_error(PhaseErrorModel::drift(fr, drift))
        .with_noise(60.0, 1);
    let b = SineModel::new(fr).with_noise(60.0, 2);
    let t0 = std::time::Instant::now();
    let bb = downconvert_synthetic(
        &[a, b],
        seconds,
        &DdcConfig::new(fs, fr),
        &DecimatorSpec::default_chain(),
    )?;
    let dt = sine_time_error(&bb[0], &bb[1], fr)?;
    let fit = fit_linear_drift(&dt)?;
    let stats = summary_stats(&dt)?;
    println!("processed {seconds} s in {:.1} s", t0.elapsed().as_secs_f64());
    println!("{} samples at {} S/s", dt.len(), dt.rate_hz);
    println!("injected drift  {drift:e} s/s");
    println!(
        "recovered drift {:e} s/s (relative error {:.2e})",
        fit.slope,
        (fit.slope - drift).abs() / drift
    );
    println!(
        "residual rms    {:e} s, sigma {:e} s",
        fit.residual_rms_s, stats.sigma_s
    );
    Ok(())
}
