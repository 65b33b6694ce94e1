//! Simulate a lossy framed sample transport, rebuild a gap-free stream and
//! time pulse edges while ignoring windows that touch the padding.
//!
//! `cargo run --release --example gap_repair`

use std::f64::consts::TAU;

use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use refsig::edgefind::{detect_edges, detect_edges_masked, TriggerSpec};
use refsig::io::{read_frames, write_frame, GapFiller, StreamFrame};
use refsig::sigmodel::{quantize, synth_pulse, AdcSpec, PulseModel};

fn main() -> refsig::Result<()> {
    let (fs, per_frame) = (25e6, 500);
    let model = PulseModel::new(10e-6, 4e-6, TAU * 5e6, 0.6).with_noise(60.0, 3);
    let (codes, _) = quantize(&synth_pulse(&model, fs, 0.01)?, &AdcSpec::new(14))?;
    let samples = codes.samples();

    // Sender: frame, drop ~5 % at random, serialize.
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
    let mut wire = Vec::new();
    let frames = samples.len() / per_frame;
    for seq in 0..frames {
        if seq > 0 && rng.random_bool(0.05) {
            continue;
        }
        let payload = samples[seq * per_frame..(seq + 1) * per_frame]
            .iter()
            .map(|&v| v as i16)
            .collect();
        write_frame(&StreamFrame::new(seq as u64, 1, payload)?, &mut wire)?;
    }

    // Receiver: parse and repair incrementally, as a live reader would.
    let mut filler = GapFiller::new(1)?;
    let mut stream = Vec::new();
    for f in read_frames(wire.as_slice(), 1)? {
        filler.push(&f, &mut stream)?;
    }
    let report = filler.into_report();
    println!(
        "received {} samples, {} gaps, {} padded",
        stream.len(),
        report.gaps.len(),
        report.padded_samples
    );

    let spec = TriggerSpec::default().scaled(0.5 * 8191.0);
    let all = detect_edges(&stream, fs, 0.0, &spec)?;
    let clean = detect_edges_masked(&stream, fs, 0.0, &spec, &report.spans())?;
    let inside = all
        .series
        .events
        .iter()
        .filter(|e| report.is_padded(e.coarse_index as u64))
        .count();
    println!(
        "edges: {} unmasked ({} inside padding), {} after masking",
        all.series.len(),
        inside,
        clean.series.len()
    );
    Ok(())
}
