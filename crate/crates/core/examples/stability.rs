//! Allan deviation of synthetic white-PM and white-FM time-error records,
//! plus Savitzky-Golay estimation of a frequency offset.
//!
//! `cargo run --release --example stability -- [adev.csv]`

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use refsig::analysis::{allan_deviation, default_taus, savgol, AllanCurve, SavGolSpec};
use refsig::io::export_csv_file;

fn slope(c: &AllanCurve) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = c.points.iter().map(|p| (p.tau_s.ln(), p.adev.ln())).unzip();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    sxy / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

fn main() -> refsig::Result<()> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let n = 20_000;
    // 1 ps white phase noise at 1 S/s.
    let white_pm: Vec<f64> = (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            1e-12 * g
        })
        .collect();
    // Integrated white frequency noise of 1e-12 per sample.
    let mut acc = 0.0;
    let white_fm: Vec<f64> = (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            acc += 1e-12 * g;
            acc
        })
        .collect();
    let taus = default_taus(n, 1.0);
    let pm = allan_deviation(&white_pm, 1.0, &taus)?;
    let fm = allan_deviation(&white_fm, 1.0, &taus)?;
    println!("{:>8} {:>12} {:>12}", "tau s", "white PM", "white FM");
    for (p, f) in pm.points.iter().zip(&fm.points).step_by(5) {
        println!("{:>8} {:>12.3e} {:>12.3e}", p.tau_s, p.adev, f.adev);
    }
    println!("log-log slopes: white PM {:.3}, white FM {:.3}", slope(&pm), slope(&fm));

    // Constant 2e-11 fractional offset under white PM: the smoothed first
    // derivative recovers it.
    let drifting: Vec<f64> = white_pm.iter().enumerate().map(|(i, x)| x + 2e-11 * i as f64).collect();
    let rate = savgol(&drifting, &SavGolSpec::new(301, 1).derivative(1), 1.0)?;
    let mean = rate.iter().sum::<f64>() / rate.len() as f64;
    println!("Savitzky-Golay frequency estimate {mean:.4e} (true 2e-11)");

    if let Some(path) = std::env::args().nth(1) {
        export_csv_file(&pm, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
