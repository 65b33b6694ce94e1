//! Design the default three-stage decimator, report its tap counts and
//! alias rejection, and export the taps of the last stage as CSV.
//!
//! `cargo run --release --example filter_design -- [taps.csv]`

use refsig::ddc::{design_fir_lowpass, DecimatorSpec};
use refsig::io::export_csv_file;

fn main() -> refsig::Result<()> {
    let chain = DecimatorSpec::default_chain();
    println!("default chain: total decimation {}", chain.total_decimation());
    for (i, s) in chain.stages().iter().enumerate() {
        println!("  stage {i}: /{} with {} taps", s.decimation(), s.len());
    }
    let fs = 25e6;
    let out_rate = fs / chain.total_decimation() as f64;
    println!(
        "output rate {out_rate} S/s, -3 dB bandwidth {:.1} Hz",
        chain.bandwidth_3db() * out_rate
    );
    println!("worst alias rejection {:.1} dB", chain.alias_rejection_db(16));
    println!("group delay {:.1} input samples", chain.delay_samples());

    // A standalone low-pass: cutoff and transition are fractions of Nyquist.
    let lp = design_fir_lowpass(0.1, 80.0, 0.05)?;
    println!(
        "80 dB low-pass, passband to 0.1, stopband from 0.15 (x Nyquist): {} taps",
        lp.len()
    );
    for f in [0.0, 0.05, 0.1, 0.15, 0.2] {
        // `magnitude` takes cycles per sample: half the Nyquist fraction.
        println!(
            "  |H({f:.2} Nyquist)| = {:8.2} dB",
            20.0 * lp.magnitude(f / 2.0).log10()
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        export_csv_file(chain.stages().last().unwrap(), &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
