use crate::model::{CycleRecord, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockReport {
    pub locked: bool,
    /// Start of the first qualifying window, seconds; NaN when not locked.
    pub lock_time: f64,
    /// Mean relative frequency error over the last `window` records, ppm.
    pub f_error_ppm: f64,
    /// Largest `|delta_v_pd|` over the last `window` records, volts.
    pub residual_dv: f64,
}

/// Locked iff `window_cycles` consecutive records with the FLL disengaged
/// all lie within `tol_ppm` of `f_target`.
pub fn detect_lock(trace: &[CycleRecord], f_target: f64, tol_ppm: f64, window_cycles: usize) -> LockReport {
    debug_assert!(window_cycles >= 2);
    let tol = tol_ppm * 1e-6;
    let mut run = 0usize;
    let mut lock_time = f64::NAN;
    for (i, c) in trace.iter().enumerate() {
        let ok = !c.fll_engaged && ((c.f_inst - f_target) / f_target).abs() <= tol;
        run = if ok { run + 1 } else { 0 };
        if run == window_cycles {
            lock_time = trace[i + 1 - window_cycles].t;
            break;
        }
    }
    let tail = &trace[trace.len().saturating_sub(window_cycles)..];
    let (f_error_ppm, residual_dv) = if tail.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let mean = tail.iter().map(|c| c.f_inst).sum::<f64>() / tail.len() as f64;
        (
            (mean / f_target - 1.0) * 1e6,
            tail.iter().map(|c| c.delta_v_pd.abs()).fold(0.0, f64::max),
        )
    };
    LockReport {
        locked: lock_time.is_finite(),
        lock_time,
        f_error_ppm,
        residual_dv,
    }
}

/// [`detect_lock`] against the configured target. With a reference frequency
/// step the target is `M·f_ref_final` and only records from the step on count.
pub fn lock_report(cfg: &SimConfig, trace: &[CycleRecord]) -> LockReport {
    let from = if cfg.inject.ref_step_ppm != 0.0 {
        trace.partition_point(|c| c.t < cfg.inject.ref_step_time)
    } else {
        0
    };
    let target = cfg.mult_m as f64 * cfg.f_ref_final();
    detect_lock(&trace[from..], target, cfg.lock_tol_ppm, cfg.lock_window as usize)
}
