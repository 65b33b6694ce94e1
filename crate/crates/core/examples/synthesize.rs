//! Synthesize a phase-modulated sine and a pulse train, quantize them with a
//! 14-bit converter and store both channels in one sample file.
//!
//! `cargo run --release --example synthesize -- [out.rsg]`

use std::f64::consts::TAU;

use refsig::io::{read_sample_file, write_sample_file};
use refsig::sigmodel::{
    quantize, synth_pulse, synth_sine, AdcSpec, PhaseErrorModel, PulseModel, RealSampleStream, SampleFormat, SineModel,
};

fn main() -> refsig::Result<()> {
    let (fs, seconds) = (25e6, 1e-3);
    let sine = SineModel::new(10e6)
        .with_phase_error(PhaseErrorModel::Sinusoidal {
            amplitude_rad: 0.01,
            freq_hz: 1e3,
        })
        .with_noise(60.0, 1);
    let pulse = PulseModel::new(100e-6, 10e-6, TAU * 5e6, 0.6)
        .with_amplitude(0.5)
        .with_time_errors(vec![0.0, 1e-9, -2e-9])
        .with_noise(60.0, 2);
    println!(
        "sine noise sigma {:.3e}, pulse noise sigma {:.3e}",
        sine.noise_sigma(),
        pulse.noise_sigma()
    );

    let a = synth_sine(&sine, fs, seconds)?;
    let b = synth_pulse(&pulse, fs, seconds)?;
    let both = RealSampleStream::from_channels(fs, SampleFormat::Float64, 0.0, &[a.into_samples(), b.into_samples()])?;
    let (codes, clips) = quantize(&both, &AdcSpec::new(14).with_input_level(1.0))?;
    println!("{} samples per channel, {} clipped", codes.len(), clips.total());

    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("refsig_demo.rsg").display().to_string());
    let bytes = write_sample_file(&path, &codes)?;
    let back = read_sample_file(&path)?;
    println!("wrote {bytes} bytes to {path}; read back identical: {}", back == codes);
    Ok(())
}
