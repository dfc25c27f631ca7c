use std::f64::consts::PI;

use super::psd::SpectrumEstimate;
use crate::{Error, Result};

/// RMS timing jitter from `L(f)` over `[f1, f2]`:
/// `σ_t = sqrt(2·∫L df)/(2π·f_out)`.
///
/// Trapezoidal in linear `L`; the band edges are linearly interpolated
/// between bins so the result does not jump as `f1`, `f2` cross bin centres.
pub fn integrate_jitter(spec: &SpectrumEstimate, f1: f64, f2: f64, f_out: f64) -> Result<f64> {
    let (lo, hi) = match (spec.freqs.first(), spec.freqs.last()) {
        (Some(&lo), Some(&hi)) if spec.freqs.len() >= 2 => (lo, hi),
        _ => return Err(Error::Insufficient("spectrum needs at least two bins".into())),
    };
    if !(f1 <= f2) {
        return Err(Error::InvalidArgument(format!("band [{f1:e}, {f2:e}] Hz is reversed")));
    }
    if f1 < lo || f2 > hi {
        return Err(Error::OutOfRange {
            what: "jitter band",
            value: if f1 < lo { f1 } else { f2 },
            range: format!("[{lo:e}, {hi:e}] Hz"),
        });
    }
    if !(f_out > 0.0) {
        return Err(Error::InvalidArgument(format!("f_out must be > 0, got {f_out}")));
    }
    if f1 == f2 {
        return Ok(0.0);
    }

    let lin: Vec<f64> = (0..spec.freqs.len()).map(|i| spec.l_linear(i)).collect();
    let at = |f: f64| {
        let i = spec.freqs.partition_point(|&x| x <= f).clamp(1, spec.freqs.len() - 1);
        let (fa, fb) = (spec.freqs[i - 1], spec.freqs[i]);
        let t = (f - fa) / (fb - fa);
        lin[i - 1] + t * (lin[i] - lin[i - 1])
    };

    let mut pts: Vec<(f64, f64)> = vec![(f1, at(f1))];
    pts.extend(
        spec.freqs
            .iter()
            .zip(&lin)
            .filter(|(&f, _)| f > f1 && f < f2)
            .map(|(&f, &l)| (f, l)),
    );
    pts.push((f2, at(f2)));
    let area: f64 = pts.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    Ok((2.0 * area).sqrt() / (2.0 * PI * f_out))
}
