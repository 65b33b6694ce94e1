//! Residual SNR of the FIR cascade against a fixed-point CIC chain across
//! decimation factors. Positive Δ means the FIR chain is cleaner.

use refsig::ddc::{compare_cic_fir, CompareOptions};

fn main() -> refsig::Result<()> {
    let decims = [20, 40, 80, 100, 200, 400, 500];
    let rows = compare_cic_fir(&decims, &CompareOptions::default())?;
    println!("{:>6} {:>10} {:>10} {:>8}", "n", "FIR dB", "CIC dB", "Δ dB");
    for r in rows {
        println!(
            "{:>6} {:>10.2} {:>10.2} {:>8.2}",
            r.decimation, r.snr_fir_db, r.snr_cic_db, r.delta_db
        );
    }
    Ok(())
}
