//! Recover per-pulse timing errors of a band-limited pulse train and show how
//! spectral interpolation sharpens the estimate.
//!
//! `cargo run --release --example pulse_timing`

use std::f64::consts::TAU;

use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use refsig::edgefind::{detect_edges, TriggerSpec};
use refsig::sigmodel::{lp2_step_response, synth_pulse, PulseModel};

fn main() -> refsig::Result<()> {
    let (fs, period, high, w0, zeta) = (25e6, 4e-6, 2e-6, TAU * 5e6, 0.6);
    let pulses = 500;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    let te: Vec<f64> = (0..pulses).map(|_| rng.random_range(-20e-9..20e-9)).collect();
    let model = PulseModel::new(period, high, w0, zeta)
        .with_time_errors(te.clone())
        .with_noise(60.0, 8);
    let x = synth_pulse(&model, fs, pulses as f64 * period)?;

    // Delay from pulse start to the 70 % point of the step response.
    let (mut lo, mut hi) = (0.0, 1.0 / (w0 / TAU));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if lp2_step_response(mid, w0, zeta)? < 0.7 {
            lo = mid
        } else {
            hi = mid
        }
    }
    let latency = 0.5 * (lo + hi);
    println!("70 % crossing latency {:.3} ns", latency * 1e9);

    for factor in [1, 4, 20] {
        let spec = TriggerSpec {
            interp_factor: factor,
            ..TriggerSpec::default()
        };
        let det = detect_edges(x.samples(), fs, 0.0, &spec)?;
        let errs: Vec<f64> = det
            .series
            .events
            .iter()
            .map(|e| {
                let n = ((e.time_s - latency) / period).round() as usize;
                e.time_s - latency - n as f64 * period - te[n]
            })
            .collect();
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let sd = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / errs.len() as f64).sqrt();
        println!(
            "interpolation x{factor:>2}: {} edges, bias {:+7.1} ps, spread {:6.1} ps",
            errs.len(),
            mean * 1e12,
            sd * 1e12
        );
    }
    Ok(())
}
