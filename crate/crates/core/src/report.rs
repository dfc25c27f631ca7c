//! Run summaries, the design report and noise calibration.

use std::fmt::Write as _;

use crate::analysis::{estimate_psd, fom_ja, integrate_jitter, spur_level_raw, FomInputs, SpectrumEstimate};
use crate::detector::pd_gain;
use crate::engine::{excess_phase_uniform, lock_report, run_transient, synthesize_phase_window, LockReport};
use crate::fll::thresholds;
use crate::linear::{build_loop_model, stability};
use crate::model::{CycleRecord, NoiseSpec, SimConfig};
use crate::{Error, Result};

/// Samples and segment of the spur measurement at `4·f_out`.
pub const SPUR_SAMPLES: usize = 1 << 16;
pub const SPUR_SEGMENT: usize = 1 << 14;
const PSD_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub locked: bool,
    /// NaN when not locked.
    pub lock_time_s: f64,
    pub f_error_ppm: f64,
    pub residual_dv: f64,
    /// Integrated jitter over `[jitter_f1, jitter_f2]`, seconds.
    pub sigma_s: f64,
    pub jitter_f1: f64,
    pub jitter_f2: f64,
    pub spur_dbc: f64,
    pub spur_freq_hz: f64,
    pub fom_ja_db: f64,
    pub fom_db: f64,
}

impl Summary {
    pub const KEYS: [&'static str; 11] = [
        "locked",
        "lock_time_s",
        "f_error_ppm",
        "residual_dv_V",
        "sigma_s",
        "jitter_f1_hz",
        "jitter_f2_hz",
        "spur_dbc",
        "spur_freq_hz",
        "fom_ja_db",
        "fom_db",
    ];

    pub fn values(&self) -> [String; 11] {
        [
            self.locked.to_string(),
            self.lock_time_s.to_string(),
            self.f_error_ppm.to_string(),
            self.residual_dv.to_string(),
            self.sigma_s.to_string(),
            self.jitter_f1.to_string(),
            self.jitter_f2.to_string(),
            self.spur_dbc.to_string(),
            self.spur_freq_hz.to_string(),
            self.fom_ja_db.to_string(),
            self.fom_db.to_string(),
        ]
    }

    /// `key=value` lines in [`Summary::KEYS`] order.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in Self::KEYS.iter().zip(self.values()) {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_key_values(text)?;
        let get = |key: &str| -> Result<&str> {
            pairs
                .iter()
                .find(|(k, _, _)| k == key)
                .map(|(_, v, _)| v.as_str())
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("missing key `{key}`"),
                })
        };
        let real = |key: &str| -> Result<f64> {
            let v = get(key)?;
            v.parse().map_err(|_| Error::Parse {
                line: pairs.iter().find(|(k, _, _)| k == key).map_or(0, |p| p.2),
                message: format!("`{key}`: expected a number, got `{v}`"),
            })
        };
        Ok(Self {
            locked: get("locked")? == "true",
            lock_time_s: real("lock_time_s")?,
            f_error_ppm: real("f_error_ppm")?,
            residual_dv: real("residual_dv_V")?,
            sigma_s: real("sigma_s")?,
            jitter_f1: real("jitter_f1_hz")?,
            jitter_f2: real("jitter_f2_hz")?,
            spur_dbc: real("spur_dbc")?,
            spur_freq_hz: real("spur_freq_hz")?,
            fom_ja_db: real("fom_ja_db")?,
            fom_db: real("fom_db")?,
        })
    }
}

/// `key=value` lines with their line numbers; blank lines and `#` comments skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

/// Everything the post-processing produced for one trace.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub summary: Summary,
    pub lock: LockReport,
    /// Jitter spectrum; `None` when the settled part of the trace is too short.
    pub spectrum: Option<SpectrumEstimate>,
}

/// Index of the first record used for spectral analysis: the lock point,
/// but never earlier than two lock windows past the FLL disengaging.
pub fn analysis_start(cfg: &SimConfig, trace: &[CycleRecord], lock: &LockReport) -> usize {
    let disengage = trace.iter().position(|c| !c.fll_engaged).unwrap_or(0);
    let settled = (disengage + 2 * cfg.lock_window as usize).min(trace.len());
    if lock.locked {
        settled.max(trace.partition_point(|c| c.t < lock.lock_time))
    } else {
        settled
    }
}

fn largest_segment(n: usize, preferred: usize) -> Option<usize> {
    if n >= preferred {
        Some(preferred)
    } else if n >= 16 {
        Some(1 << (usize::BITS - 1 - n.leading_zeros()))
    } else {
        None
    }
}

/// Lock report, integrated jitter, spur and FOM for a trace of `cfg`.
pub fn summarize(cfg: &SimConfig, trace: &[CycleRecord]) -> Result<Analysis> {
    if trace.is_empty() {
        return Err(Error::Insufficient("empty trace".into()));
    }
    let lock = lock_report(cfg, trace);
    let start = analysis_start(cfg, trace, &lock);
    let a = &cfg.analysis;
    let f_out = cfg.mult_m as f64 * cfg.f_ref_final();

    let mut spectrum = None;
    let mut sigma = f64::NAN;
    let n = trace.len().saturating_sub(start + 1);
    if let Some(seg) = largest_segment(n, a.psd_segment) {
        let t0 = trace[start].t;
        let phase = excess_phase_uniform(trace, cfg, cfg.f_ref, t0, n)?;
        let spec = estimate_psd(&phase, cfg.f_ref, seg, PSD_OVERLAP)?;
        sigma = match integrate_jitter(&spec, a.jitter_f1, a.jitter_f2, f_out) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("jitter not integrated: {e}");
                f64::NAN
            }
        };
        spectrum = Some(spec);
    } else {
        log::warn!("only {n} settled cycles; jitter not estimated");
    }

    let f_offset = if cfg.inject.ripple_amp > 0.0 {
        cfg.inject.ripple_frequency(cfg.f_ref)
    } else {
        cfg.f_ref
    };
    let fs = 4.0 * cfg.f_out();
    let spur = synthesize_phase_window(trace, cfg, fs, trace[start.min(trace.len() - 1)].t, SPUR_SAMPLES)
        .and_then(|x| spur_level_raw(&x, fs, SPUR_SEGMENT, f_out, f_offset));
    let (spur_dbc, spur_freq_hz) = match spur {
        Ok(m) => (m.level_dbc, m.freq_hz),
        Err(e) => {
            log::warn!("spur not measured: {e}");
            (f64::NAN, f64::NAN)
        }
    };

    let (fom_ja_db, fom_db) = match fom_ja(FomInputs {
        sigma_j: sigma,
        power: a.fom_power,
        area: a.fom_area,
    }) {
        Ok(r) => (r.fom_ja, r.fom),
        Err(_) => (f64::NAN, f64::NAN),
    };

    Ok(Analysis {
        summary: Summary {
            locked: lock.locked,
            lock_time_s: lock.lock_time,
            f_error_ppm: lock.f_error_ppm,
            residual_dv: lock.residual_dv,
            sigma_s: sigma,
            jitter_f1: a.jitter_f1,
            jitter_f2: a.jitter_f2,
            spur_dbc,
            spur_freq_hz,
            fom_ja_db,
            fom_db,
        },
        lock,
        spectrum,
    })
}

/// Small-signal design summary of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignReport {
    pub k_pd_i: f64,
    pub pd_gain: f64,
    pub ugb_hz: f64,
    pub pm_deg: f64,
    pub zero_hz: f64,
    pub pole_hz: f64,
    pub natural_hz: f64,
    pub damping: f64,
    pub stable: bool,
    pub within_sampling_limit: bool,
    pub count_lo: i64,
    pub count_hi: i64,
}

impl DesignReport {
    pub fn render(&self) -> String {
        let rows: [(&str, String); 12] = [
            ("k_pd_i_A_per_rad", self.k_pd_i.to_string()),
            ("pd_gain_V_per_s", self.pd_gain.to_string()),
            ("ugb_hz", self.ugb_hz.to_string()),
            ("pm_deg", self.pm_deg.to_string()),
            ("zero_hz", self.zero_hz.to_string()),
            ("pole_hz", self.pole_hz.to_string()),
            ("natural_hz", self.natural_hz.to_string()),
            ("damping", self.damping.to_string()),
            ("stable", self.stable.to_string()),
            ("ugb_below_f_ref_over_10", self.within_sampling_limit.to_string()),
            ("fll_count_lo", self.count_lo.to_string()),
            ("fll_count_hi", self.count_hi.to_string()),
        ];
        rows.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

pub fn design(cfg: &SimConfig) -> Result<DesignReport> {
    let v = cfg.validate();
    if !v.is_empty() {
        return Err(Error::InvalidConfig(v));
    }
    let m = build_loop_model(cfg);
    let s = stability(&m);
    let (count_lo, count_hi) = thresholds(cfg)?;
    Ok(DesignReport {
        k_pd_i: m.k_pd_i,
        pd_gain: pd_gain(cfg),
        ugb_hz: s.unity_gain_bw,
        pm_deg: s.phase_margin,
        zero_hz: m.zero_hz(),
        pole_hz: m.pole_hz(),
        natural_hz: m.natural_frequency() / (2.0 * std::f64::consts::PI),
        damping: m.damping(),
        stable: s.is_stable(),
        within_sampling_limit: s.within_sampling_limit,
        count_lo,
        count_hi,
    })
}

/// Result of [`calibrate_noise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Factor applied with [`NoiseSpec::scaled`].
    pub scale: f64,
    pub noise: NoiseSpec,
    /// Jitter measured with the calibrated noise and the configured seed.
    pub sigma_s: f64,
    pub iterations: usize,
}

fn measured_sigma(cfg: &SimConfig) -> Result<f64> {
    let run = run_transient(cfg)?;
    let s = summarize(cfg, &run.trace)?.summary.sigma_s;
    if s.is_finite() && s > 0.0 {
        Ok(s)
    } else {
        Err(Error::Insufficient(format!("jitter could not be measured (got {s})")))
    }
}

/// Scales every noise source of `cfg` so the integrated jitter of a run
/// with the configured seed equals `target` to within `rel_tol`.
pub fn calibrate_noise(cfg: &SimConfig, target: f64, rel_tol: f64, max_iter: usize) -> Result<Calibration> {
    if !cfg.noise.enabled {
        return Err(Error::InvalidArgument("noise must be enabled to calibrate it".into()));
    }
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("target jitter must be > 0, got {target}")));
    }
    let base = cfg.noise;
    let with_scale = |s: f64| SimConfig {
        noise: base.scaled(s),
        ..cfg.clone()
    };
    let mut s0 = 1.0;
    let mut e0 = measured_sigma(&with_scale(s0))? - target;
    // jitter is close to proportional to the scale: start from that guess
    let mut s1 = s0 * target / (e0 + target);
    for it in 1..=max_iter {
        let c = with_scale(s1);
        let sigma = measured_sigma(&c)?;
        let e1 = sigma - target;
        if (e1 / target).abs() <= rel_tol {
            return Ok(Calibration {
                scale: s1,
                noise: c.noise,
                sigma_s: sigma,
                iterations: it,
            });
        }
        let next = if e1 != e0 { s1 - e1 * (s1 - s0) / (e1 - e0) } else { s1 * target / sigma };
        s0 = s1;
        e0 = e1;
        s1 = if next > 0.0 { next } else { s1 * target / sigma };
    }
    Err(Error::Numeric {
        cycle: 0,
        message: format!("noise calibration did not reach {target:e} s within {max_iter} iterations"),
    })
}
