use num_complex::Complex64;

use super::{
    cic_decimate, fir_decimate, plan_stages, snr_of_residual, CicSpec, ComplexBaseband, DdcConfig, DecimatorSpec,
};
use crate::error::{Error, Result};
use crate::sigmodel::{quantize, AdcSpec, RealSampleStream, SampleFormat, SineModel, SineSource};

/// Settings for the CIC-versus-FIR comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub sample_rate_hz: f64,
    pub carrier_hz: f64,
    /// Per-channel SNR at the converter input, dB.
    pub snr_db: f64,
    pub adc: AdcSpec,
    /// Decimated samples used for each SNR estimate.
    pub output_samples: usize,
    pub fir_atten_db: f64,
    pub max_stage_factor: u64,
    pub seed: u64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            sample_rate_hz: 25e6,
            carrier_hz: 10e6,
            snr_db: 60.0,
            adc: AdcSpec::new(14),
            output_samples: 4000,
            fir_atten_db: 120.0,
            max_stage_factor: 10,
            seed: 1,
        }
    }
}

/// Residual SNR of both chains at one decimation; `delta_db` is FIR minus CIC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CicFirRow {
    pub decimation: usize,
    pub snr_fir_db: f64,
    pub snr_cic_db: f64,
    pub delta_db: f64,
}

/// Feed the same pair of noisy, quantized references through the FIR cascade
/// and through the fixed-point CIC chain, and compare the SNR of `zA / zB`.
pub fn compare_cic_fir(decimations: &[usize], opts: &CompareOptions) -> Result<Vec<CicFirRow>> {
    if decimations.is_empty() {
        return Err(Error::param("no decimation factors given"));
    }
    decimations.iter().map(|&d| compare_one(d, opts)).collect()
}

fn compare_one(decimation: usize, opts: &CompareOptions) -> Result<CicFirRow> {
    let cic = CicSpec::for_total_decimation(decimation)?;
    let factors = plan_stages(decimation as u64, opts.max_stage_factor)?;
    let fir = DecimatorSpec::design(&factors, opts.fir_atten_db, 0.65, 0.35)?;
    let cic_warmup = cic.impulse_len() + (31 - 1) * cic.decimation + (63 - 1) * cic.decimation * 2;
    let n = opts.output_samples * decimation + fir.warmup().max(cic_warmup) + decimation;

    let mixed: Vec<ComplexBaseband> = (0..2)
        .map(|ch| {
            let model = SineModel::new(opts.carrier_hz)
                .with_amplitude(1.0)
                .with_noise(opts.snr_db, opts.seed.wrapping_mul(2).wrapping_add(ch));
            let mut x = vec![0.0; n];
            SineSource::new(&model, opts.sample_rate_hz)?.fill(&mut x);
            let stream = RealSampleStream::new(opts.sample_rate_hz, 1, SampleFormat::Float64, 0.0, x)?;
            let (codes, _) = quantize(&stream, &opts.adc)?;
            let full = (1_i64 << (opts.adc.bits - 1)) as f64;
            let norm: Vec<f64> = codes.samples().iter().map(|c| c / full).collect();
            let z: Vec<Complex64> = super::nco_mix(&norm, &DdcConfig::new(opts.sample_rate_hz, opts.carrier_hz))?;
            ComplexBaseband::new(opts.sample_rate_hz, 0.0, z)
        })
        .collect::<Result<_>>()?;

    let snr = |a: &ComplexBaseband, b: &ComplexBaseband| {
        let len = a.len().min(b.len()).min(opts.output_samples);
        snr_of_residual(&a.iq[..len], &b.iq[..len])
    };
    let fa = fir_decimate(&mixed[0], &fir)?;
    let fb = fir_decimate(&mixed[1], &fir)?;
    let ca = cic_decimate(&mixed[0], &cic)?;
    let cb = cic_decimate(&mixed[1], &cic)?;
    let snr_fir_db = snr(&fa, &fb)?;
    let snr_cic_db = snr(&ca, &cb)?;
    Ok(CicFirRow {
        decimation,
        snr_fir_db,
        snr_cic_db,
        delta_db: snr_fir_db - snr_cic_db,
    })
}
