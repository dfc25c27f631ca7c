use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Reported level for bins with no power, dBc/Hz.
pub const L_FLOOR_DBCHZ: f64 = -400.0;

/// Segments handled per parallel task; fixed so sums are reproducible.
const SEGMENTS_PER_TASK: usize = 8;

/// Averaged one-sided phase-noise estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Bin centres from DC to Nyquist, Hz.
    pub freqs: Vec<f64>,
    /// `10·log10(S_φ/2)` per bin, dBc/Hz.
    pub l_dbchz: Vec<f64>,
    /// Bin spacing `fs/segment_len`, Hz.
    pub resolution_bw: f64,
    pub n_averages: usize,
}

impl SpectrumEstimate {
    /// `L` in linear units (1/Hz) for bin `i`.
    pub fn l_linear(&self, i: usize) -> f64 {
        10f64.powf(self.l_dbchz[i] / 10.0)
    }

    /// One-sided phase PSD `S_φ = 2·L`, rad²/Hz.
    pub fn s_phi(&self, i: usize) -> f64 {
        2.0 * self.l_linear(i)
    }

    /// Index of the bin nearest to `f`.
    pub fn bin_of(&self, f: f64) -> usize {
        ((f / self.resolution_bw).round().max(0.0) as usize).min(self.freqs.len() - 1)
    }
}

pub(crate) fn hann(n: usize) -> Vec<f64> {
    // periodic Hann
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

pub(crate) fn check_segmentation(n_samples: usize, segment_len: usize, overlap: f64) -> Result<usize> {
    if segment_len < 2 || !segment_len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "segment length must be a power of two >= 2, got {segment_len}"
        )));
    }
    if !(0.0..=0.9).contains(&overlap) {
        return Err(Error::InvalidArgument(format!("overlap must be in [0, 0.9], got {overlap}")));
    }
    if n_samples < segment_len {
        return Err(Error::Insufficient(format!(
            "{n_samples} samples given, a segment of {segment_len} needs at least {segment_len}"
        )));
    }
    let step = ((segment_len as f64 * (1.0 - overlap)).round() as usize).max(1);
    Ok(step)
}

/// Segment start offsets for a Welch average.
pub(crate) fn segment_starts(n_samples: usize, segment_len: usize, step: usize) -> Vec<usize> {
    (0..=(n_samples - segment_len) / step).map(|k| k * step).collect()
}

/// Welch estimate of the excess-phase PSD with a Hann window and per-segment
/// mean removal. A phase tone of amplitude `a` integrates to `a²/2` rad² in
/// `S_φ`, i.e. `a²/4` in `L`.
pub fn estimate_psd(phase: &[f64], fs: f64, segment_len: usize, overlap: f64) -> Result<SpectrumEstimate> {
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::InvalidArgument(format!("sample rate must be > 0, got {fs}")));
    }
    let step = check_segmentation(phase.len(), segment_len, overlap)?;
    let starts = segment_starts(phase.len(), segment_len, step);
    let window = hann(segment_len);
    let w_energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_len);
    let half = segment_len / 2;

    let partials: Vec<Vec<f64>> = starts
        .par_chunks(SEGMENTS_PER_TASK)
        .map(|chunk| {
            let mut acc = vec![0.0; half + 1];
            let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for &s in chunk {
                let seg = &phase[s..s + segment_len];
                let mean = seg.iter().sum::<f64>() / segment_len as f64;
                for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
                    *b = Complex64::new((x - mean) * w, 0.0);
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for (a, x) in acc.iter_mut().zip(&buf[..=half]) {
                    *a += x.norm_sqr();
                }
            }
            acc
        })
        .collect();

    let mut power = vec![0.0; half + 1];
    for p in &partials {
        for (a, x) in power.iter_mut().zip(p) {
            *a += x;
        }
    }
    let n_avg = starts.len();
    let scale = 1.0 / (fs * w_energy * n_avg as f64);
    let l_dbchz = power
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let one_sided = if i == 0 || i == half { 1.0 } else { 2.0 };
            let s_phi = one_sided * p * scale;
            to_db(s_phi / 2.0)
        })
        .collect();
    let df = fs / segment_len as f64;
    Ok(SpectrumEstimate {
        freqs: (0..=half).map(|i| i as f64 * df).collect(),
        l_dbchz,
        resolution_bw: df,
        n_averages: n_avg,
    })
}

pub(crate) fn to_db(x: f64) -> f64 {
    if x > 0.0 && x.is_finite() {
        (10.0 * x.log10()).max(L_FLOOR_DBCHZ)
    } else if x.is_infinite() {
        f64::INFINITY
    } else {
        L_FLOOR_DBCHZ
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn white_phase_noise_level() {
        let fs = 1e6f64;
        let s_phi = 1e-10f64;
        // white noise of one-sided density s_phi has variance s_phi·fs/2
        let normal = Normal::new(0.0, (s_phi * fs / 2.0).sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..1 << 20).map(|_| normal.sample(&mut rng)).collect();
        let est = estimate_psd(&x, fs, 1 << 12, 0.5).unwrap();
        let inner = &est.l_dbchz[4..est.l_dbchz.len() - 4];
        let mean_lin = inner.iter().map(|l| 10f64.powf(l / 10.0)).sum::<f64>() / inner.len() as f64;
        let expected = 10.0 * 5e-11f64.log10();
        assert!((10.0 * mean_lin.log10() - expected).abs() < 0.5, "{}", 10.0 * mean_lin.log10());
        assert!((expected + 103.0).abs() < 0.02);
        assert_eq!(est.n_averages, 511);
    }

    #[test]
    fn tone_power_parseval() {
        let fs = 200e6;
        let a = 1e-3;
        let f0 = 25.3e6;
        let x: Vec<f64> = (0..1 << 16).map(|i| a * (2.0 * PI * f0 * i as f64 / fs).sin()).collect();
        let est = estimate_psd(&x, fs, 1 << 13, 0.5).unwrap();
        let k = est.bin_of(f0);
        let tone: f64 = (k - 3..=k + 3).map(|i| est.s_phi(i) * est.resolution_bw).sum();
        assert!((tone / (a * a / 2.0) - 1.0).abs() < 0.05, "{tone:e}");
    }

    #[test]
    fn zero_input_hits_the_floor() {
        let est = estimate_psd(&vec![0.0; 256], 1.0, 64, 0.0).unwrap();
        assert!(est.l_dbchz.iter().all(|&l| l == L_FLOOR_DBCHZ));
        assert!(est.freqs.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(est.n_averages, 4);
    }

    #[test]
    fn argument_errors() {
        let x = vec![0.0; 100];
        let e = estimate_psd(&x, 1.0, 128, 0.5).unwrap_err();
        assert!(e.to_string().contains("at least 128"), "{e}");
        assert!(estimate_psd(&x, 1.0, 48, 0.5).is_err());
        assert!(estimate_psd(&x, 1.0, 64, 0.95).is_err());
        assert!(estimate_psd(&x, 0.0, 64, 0.5).is_err());
    }

    #[test]
    fn parseval_against_time_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let normal = Normal::new(0.0, 1.0).unwrap();
        // mildly coloured noise: running average of white samples
        let mut prev = 0.0;
        let x: Vec<f64> = (0..1 << 18)
            .map(|_| {
                prev = 0.7 * prev + normal.sample(&mut rng);
                prev
            })
            .collect();
        let fs = 1e3;
        let est = estimate_psd(&x, fs, 1 << 12, 0.0).unwrap();
        let total: f64 = (0..est.freqs.len()).map(|i| est.s_phi(i) * est.resolution_bw).sum();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        assert!((total / var - 1.0).abs() < 0.02, "{total} vs {var}");
    }

    #[test]
    fn parallel_reduction_is_reproducible() {
        let x: Vec<f64> = (0..1 << 15).map(|i| ((i * 7919) % 1013) as f64).collect();
        assert_eq!(estimate_psd(&x, 1.0, 256, 0.5).unwrap(), estimate_psd(&x, 1.0, 256, 0.5).unwrap());
    }
}
