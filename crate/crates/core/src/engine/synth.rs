use std::f64::consts::TAU;

use crate::model::{CycleRecord, SimConfig};
use crate::oscillator::ripple_phase;
use crate::{Error, Result};

/// Excess phase `φ(t) − 2π·f_target·t` over the whole trace at `fs ≥ 4·f_out`.
pub fn synthesize_phase_samples(trace: &[CycleRecord], cfg: &SimConfig, fs: f64) -> Result<Vec<f64>> {
    let (t0, t1) = span(trace, cfg)?;
    let n = ((t1 - t0) * fs).floor() as usize;
    synthesize_phase_window(trace, cfg, fs, t0, n)
}

/// `n` samples of the excess phase from `t_start` at `fs ≥ 4·f_out`.
pub fn synthesize_phase_window(trace: &[CycleRecord], cfg: &SimConfig, fs: f64, t_start: f64, n: usize) -> Result<Vec<f64>> {
    if !(fs >= 4.0 * cfg.f_out()) {
        return Err(Error::InvalidArgument(format!(
            "sample rate {fs:e} Hz is below 4·f_out = {:e} Hz",
            4.0 * cfg.f_out()
        )));
    }
    excess_phase_uniform(trace, cfg, fs, t_start, n)
}

fn span(trace: &[CycleRecord], cfg: &SimConfig) -> Result<(f64, f64)> {
    match (trace.first(), trace.last()) {
        (Some(a), Some(b)) => Ok((a.t, b.t + cfg.t_ref())),
        _ => Err(Error::Insufficient("empty trace".into())),
    }
}

/// Excess phase sampled uniformly at any rate. Frequency is constant within
/// each reference interval, apart from the injected ripple whose intra-cycle
/// phase is added exactly.
pub fn excess_phase_uniform(trace: &[CycleRecord], cfg: &SimConfig, fs: f64, t_start: f64, n: usize) -> Result<Vec<f64>> {
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::InvalidArgument(format!("sample rate must be > 0, got {fs}")));
    }
    let (t0, t1) = span(trace, cfg)?;
    let t_last = t_start + n.saturating_sub(1) as f64 / fs;
    if t_start < t0 || t_last >= t1 {
        let needed = (t_last - t0).max(0.0) + cfg.t_ref();
        return Err(Error::Insufficient(format!(
            "trace covers [{t0:e}, {t1:e}) s but samples up to {t_last:e} s were requested; \
             run for at least {needed:e} s"
        )));
    }

    let f_target = cfg.mult_m as f64 * cfg.f_ref_final();
    let (amp, f_r) = (cfg.inject.ripple_amp, cfg.inject.ripple_frequency(cfg.f_ref));
    let ripple = |t: f64| ripple_phase(cfg.k_vco, amp, f_r, t);
    let edge_end = |k: usize| trace.get(k + 1).map_or(t1, |c| c.t);

    let mut out = Vec::with_capacity(n);
    let mut k = 0usize;
    let mut phi_k = 0.0;
    for i in 0..n {
        let t = t_start + i as f64 / fs;
        while t >= edge_end(k) {
            let period = edge_end(k) - trace[k].t;
            phi_k += TAU * (trace[k].f_inst - f_target) * period;
            k += 1;
        }
        let c = &trace[k];
        let (ta, tb) = (c.t, edge_end(k));
        let dt = t - ta;
        let mut phi = phi_k + TAU * (c.f_inst - f_target) * dt;
        if amp > 0.0 {
            let (ra, rb) = (ripple(ta), ripple(tb));
            phi += ripple(t) - (ra + (rb - ra) * dt / (tb - ta));
        }
        out.push(phi);
    }
    Ok(out)
}
