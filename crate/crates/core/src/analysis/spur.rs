use num_complex::Complex64;
use rustfft::FftPlanner;

use super::psd::{check_segmentation, hann, segment_starts, to_db, SpectrumEstimate};
use crate::{Error, Result};

/// Bins summed on each side of a tone's peak.
pub const SPUR_HALF_WIDTH_BINS: usize = 2;

/// Reference-spur level and where it was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpurMeasurement {
    /// Worse sideband, dBc.
    pub level_dbc: f64,
    pub lower_dbc: f64,
    pub upper_dbc: f64,
    /// Absolute frequency of the worse sideband, Hz.
    pub freq_hz: f64,
}

impl SpurMeasurement {
    fn from_sidebands(lower_dbc: f64, upper_dbc: f64, f_out: f64, f_offset: f64) -> Self {
        let (level_dbc, freq_hz) = if upper_dbc >= lower_dbc {
            (upper_dbc, f_out + f_offset)
        } else {
            (lower_dbc, f_out - f_offset)
        };
        Self {
            level_dbc,
            lower_dbc,
            upper_dbc,
            freq_hz,
        }
    }
}

fn check_resolution(resolution_bw: f64, f_offset: f64, fs: Option<f64>) -> Result<()> {
    if !(f_offset > 0.0) {
        return Err(Error::InvalidArgument(format!("spur offset must be > 0, got {f_offset}")));
    }
    if resolution_bw >= f_offset / 10.0 {
        return Err(Error::Insufficient(format!(
            "resolution {resolution_bw:e} Hz cannot resolve a tone at {f_offset:e} Hz; \
             segments must last at least {:e} s",
            10.0 / f_offset
        )));
    }
    if let Some(fs) = fs {
        if f_offset + SPUR_HALF_WIDTH_BINS as f64 * resolution_bw >= fs / 2.0 {
            return Err(Error::OutOfRange {
                what: "spur offset",
                value: f_offset,
                range: format!("below fs/2 = {:e} Hz", fs / 2.0),
            });
        }
    }
    Ok(())
}

/// Sum over ±[`SPUR_HALF_WIDTH_BINS`] around the largest bin near `centre`.
fn tone_power(power: impl Fn(isize) -> f64, centre: isize, search: isize) -> f64 {
    let peak = (centre - search..=centre + search)
        .max_by(|&a, &b| power(a).total_cmp(&power(b)))
        .unwrap_or(centre);
    let h = SPUR_HALF_WIDTH_BINS as isize;
    (peak - h..=peak + h).map(power).sum()
}

/// Spur level from an excess-phase spectrum: the sideband power of a small
/// phase tone equals `L` integrated over the tone, `P_φ/2`. Both sidebands
/// are equal in this route.
pub fn spur_level(spec: &SpectrumEstimate, f_out: f64, f_offset: f64) -> Result<SpurMeasurement> {
    check_resolution(spec.resolution_bw, f_offset, None)?;
    let n = spec.freqs.len() as isize;
    if f_offset + SPUR_HALF_WIDTH_BINS as f64 * spec.resolution_bw > *spec.freqs.last().unwrap_or(&0.0) {
        return Err(Error::OutOfRange {
            what: "spur offset",
            value: f_offset,
            range: format!("within the spectrum span {:e} Hz", spec.freqs.last().unwrap_or(&0.0)),
        });
    }
    let centre = spec.bin_of(f_offset) as isize;
    let l = |i: isize| {
        if (0..n).contains(&i) {
            spec.l_linear(i as usize) * spec.resolution_bw
        } else {
            0.0
        }
    };
    let level = to_db(tone_power(l, centre, SPUR_HALF_WIDTH_BINS as isize));
    Ok(SpurMeasurement::from_sidebands(level, level, f_out, f_offset))
}

/// Spur level from raw excess-phase samples via the complex envelope
/// `exp(jφ)`: sideband power at `±f_offset` against carrier power at DC,
/// each summed over ±2 bins of a Hann-windowed Welch average.
pub fn spur_level_raw(phase: &[f64], fs: f64, segment_len: usize, f_out: f64, f_offset: f64) -> Result<SpurMeasurement> {
    let step = check_segmentation(phase.len(), segment_len, 0.5)?;
    let df = fs / segment_len as f64;
    check_resolution(df, f_offset, Some(fs))?;
    let window = hann(segment_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_len);
    let mut power = vec![0.0; segment_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    for s in segment_starts(phase.len(), segment_len, step) {
        let seg = &phase[s..s + segment_len];
        let mean = seg.iter().sum::<f64>() / segment_len as f64;
        for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::from_polar(*w, x - mean);
        }
        fft.process(&mut buf);
        for (p, x) in power.iter_mut().zip(&buf) {
            *p += x.norm_sqr();
        }
    }
    let n = segment_len as isize;
    let p = |i: isize| power[i.rem_euclid(n) as usize];
    let centre = (f_offset / df).round() as isize;
    let search = SPUR_HALF_WIDTH_BINS as isize;
    let carrier = tone_power(p, 0, 0);
    let upper = tone_power(p, centre, search);
    let lower = tone_power(p, -centre, search);
    Ok(SpurMeasurement::from_sidebands(
        to_db(lower / carrier),
        to_db(upper / carrier),
        f_out,
        f_offset,
    ))
}
