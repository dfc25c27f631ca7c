//! Shared configuration, trace records and validation.
//!
//! Every quantity is SI and double precision: seconds, hertz, volts, amperes,
//! farads, ohms, watts. Phases are radians and stored unwrapped. Areas are
//! the one exception and are given in square millimetres.

use std::fmt;

use crate::fll;

/// Usable control-voltage excursion around `v_ctr`, in volts.
pub const V_SWING: f64 = 0.4;

/// Upper bound on the reference jitter as a fraction of the reference period.
/// Beyond this the jittered edge sequence is no longer guaranteed monotone.
pub const MAX_REF_JITTER_FRACTION: f64 = 0.1;

/// Noise sources of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// White per-edge reference timing jitter, seconds rms.
    pub ref_jitter_rms: f64,
    /// One-sided white frequency-noise density of the VCO, Hz²/Hz.
    pub vco_white_fm: f64,
    /// Frequency at which flicker FM equals the white FM floor, Hz. Zero disables flicker.
    pub vco_flicker_corner: f64,
    pub enabled: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            ref_jitter_rms: 10.5e-12,
            vco_white_fm: 200.0,
            vco_flicker_corner: 0.0,
            enabled: false,
        }
    }
}

impl NoiseSpec {
    /// Scales every source so that its timing/phase contribution scales by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ref_jitter_rms: self.ref_jitter_rms * factor,
            vco_white_fm: self.vco_white_fm * factor * factor,
            ..*self
        }
    }
}

/// Deterministic disturbances applied during a run (test stimuli).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Injection {
    /// Sinusoidal ripple added to the control voltage, volts peak.
    pub ripple_amp: f64,
    /// Ripple frequency, Hz. Zero means `f_ref`.
    pub ripple_freq: f64,
    /// Relative reference-frequency step, ppm.
    pub ref_step_ppm: f64,
    /// Time at which the frequency step takes effect, seconds.
    pub ref_step_time: f64,
    /// Reference phase step, radians of the reference clock. Positive advances the edges.
    pub ref_phase_step: f64,
    pub ref_phase_step_time: f64,
}

impl Injection {
    pub fn ripple_frequency(&self, f_ref: f64) -> f64 {
        if self.ripple_freq > 0.0 {
            self.ripple_freq
        } else {
            f_ref
        }
    }
}

/// Post-processing settings used by [`crate::report::summarize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    pub jitter_f1: f64,
    pub jitter_f2: f64,
    /// Welch segment length for the jitter spectrum, samples (power of two).
    pub psd_segment: usize,
    /// Power entering the figure of merit, watts.
    pub fom_power: f64,
    /// Area entering the figure of merit, mm².
    pub fom_area: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            jitter_f1: 1e3,
            jitter_f2: 100e3,
            psd_segment: 1 << 16,
            fom_power: 131.8e-6,
            fom_area: 0.034,
        }
    }
}

/// Every physical and loop parameter of one ISSPLL instance plus run controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub f_ref: f64,
    pub mult_m: u32,
    pub t_pul: f64,
    /// Net capacitor charging current while switched (the detector's 2Δi).
    pub i_chg: f64,
    pub i_bias: f64,
    pub c_s: f64,
    pub r1: f64,
    pub c1: f64,
    /// Switching smoothing time constant of the detector; zero is hard switching.
    pub pd_soft_tau: f64,
    /// Constant offset current during the pulse (Φ1/Φ2 current mismatch).
    pub i_offset: f64,

    pub k_vco: f64,
    pub v_ctr: f64,
    pub f_base_min: f64,
    pub f_base_step: f64,

    pub dac_bits: u32,
    pub fll_window_n: u32,
    pub fll_band_lo: f64,
    pub fll_band_hi: f64,
    /// Initial DAC code. `None` starts from the top code.
    pub fll_start_code: Option<u32>,

    pub noise: NoiseSpec,

    pub duration: f64,
    pub seed: u64,
    pub lock_tol_ppm: f64,
    pub lock_window: u32,
    pub inject: Injection,
    pub analysis: AnalysisSettings,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            f_ref: 25e6,
            mult_m: 10,
            t_pul: 2e-9,
            i_chg: 10e-6,
            i_bias: 10e-6,
            c_s: 1e-12,
            r1: 27e3,
            c1: 30e-12,
            pd_soft_tau: 0.0,
            i_offset: 0.0,
            k_vco: 175e6,
            v_ctr: 0.6,
            f_base_min: 200e6,
            f_base_step: 1e6,
            dac_bits: 6,
            fll_window_n: 4,
            fll_band_lo: 0.90,
            fll_band_hi: 0.95,
            fll_start_code: None,
            noise: NoiseSpec::default(),
            duration: 10e-3,
            seed: 1,
            lock_tol_ppm: 10.0,
            lock_window: 1000,
            inject: Injection::default(),
            analysis: AnalysisSettings::default(),
        }
    }
}

impl SimConfig {
    pub fn t_ref(&self) -> f64 {
        1.0 / self.f_ref
    }

    /// Target carrier `f_c = mult_M · f_ref`.
    pub fn f_out(&self) -> f64 {
        self.mult_m as f64 * self.f_ref
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.dac_bits.min(31)) - 1
    }

    pub fn start_code(&self) -> u32 {
        self.fll_start_code.unwrap_or_else(|| self.max_code())
    }

    /// Free-running frequency at `v_ctr` for a DAC code.
    pub fn f_base(&self, code: u32) -> f64 {
        self.f_base_min + code as f64 * self.f_base_step
    }

    /// Number of reference cycles in the run.
    pub fn n_cycles(&self) -> u64 {
        (self.duration * self.f_ref + 1e-9).floor() as u64
    }

    /// Reference frequency after any configured step.
    pub fn f_ref_final(&self) -> f64 {
        self.f_ref * (1.0 + self.inject.ref_step_ppm * 1e-6)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        use Value::*;
        Some(match key {
            "f_ref" => Real(self.f_ref),
            "mult_M" => Int(self.mult_m as i64),
            "t_pul" => Real(self.t_pul),
            "i_chg" => Real(self.i_chg),
            "i_bias" => Real(self.i_bias),
            "c_s" => Real(self.c_s),
            "r1" => Real(self.r1),
            "c1" => Real(self.c1),
            "pd_soft_tau" => Real(self.pd_soft_tau),
            "i_offset" => Real(self.i_offset),
            "k_vco" => Real(self.k_vco),
            "v_ctr" => Real(self.v_ctr),
            "f_base_min" => Real(self.f_base_min),
            "f_base_step" => Real(self.f_base_step),
            "dac_bits" => Int(self.dac_bits as i64),
            "fll_window_N" => Int(self.fll_window_n as i64),
            "fll_band_lo" => Real(self.fll_band_lo),
            "fll_band_hi" => Real(self.fll_band_hi),
            "fll_start_code" => Int(self.start_code() as i64),
            "ref_jitter_rms" => Real(self.noise.ref_jitter_rms),
            "vco_white_fm" => Real(self.noise.vco_white_fm),
            "vco_flicker_corner" => Real(self.noise.vco_flicker_corner),
            "enabled" => Bool(self.noise.enabled),
            "duration" => Real(self.duration),
            "seed" => Int(self.seed as i64),
            "lock_tol_ppm" => Real(self.lock_tol_ppm),
            "lock_window" => Int(self.lock_window as i64),
            "ripple_amp" => Real(self.inject.ripple_amp),
            "ripple_freq" => Real(self.inject.ripple_freq),
            "ref_step_ppm" => Real(self.inject.ref_step_ppm),
            "ref_step_time" => Real(self.inject.ref_step_time),
            "ref_phase_step" => Real(self.inject.ref_phase_step),
            "ref_phase_step_time" => Real(self.inject.ref_phase_step_time),
            "jitter_f1" => Real(self.analysis.jitter_f1),
            "jitter_f2" => Real(self.analysis.jitter_f2),
            "psd_segment" => Int(self.analysis.psd_segment as i64),
            "fom_power" => Real(self.analysis.fom_power),
            "fom_area" => Real(self.analysis.fom_area),
            _ => return None,
        })
    }

    /// Sets a field by its configuration key. The value kind must match the field.
    pub fn set(&mut self, key: &str, value: Value) -> Result<(), String> {
        let field = field_info(key).ok_or_else(|| format!("unknown key `{key}`"))?;
        match (field.kind, value) {
            (FieldKind::Real, Value::Real(v)) => {
                let slot = match key {
                    "f_ref" => &mut self.f_ref,
                    "t_pul" => &mut self.t_pul,
                    "i_chg" => &mut self.i_chg,
                    "i_bias" => &mut self.i_bias,
                    "c_s" => &mut self.c_s,
                    "r1" => &mut self.r1,
                    "c1" => &mut self.c1,
                    "pd_soft_tau" => &mut self.pd_soft_tau,
                    "i_offset" => &mut self.i_offset,
                    "k_vco" => &mut self.k_vco,
                    "v_ctr" => &mut self.v_ctr,
                    "f_base_min" => &mut self.f_base_min,
                    "f_base_step" => &mut self.f_base_step,
                    "fll_band_lo" => &mut self.fll_band_lo,
                    "fll_band_hi" => &mut self.fll_band_hi,
                    "ref_jitter_rms" => &mut self.noise.ref_jitter_rms,
                    "vco_white_fm" => &mut self.noise.vco_white_fm,
                    "vco_flicker_corner" => &mut self.noise.vco_flicker_corner,
                    "duration" => &mut self.duration,
                    "lock_tol_ppm" => &mut self.lock_tol_ppm,
                    "ripple_amp" => &mut self.inject.ripple_amp,
                    "ripple_freq" => &mut self.inject.ripple_freq,
                    "ref_step_ppm" => &mut self.inject.ref_step_ppm,
                    "ref_step_time" => &mut self.inject.ref_step_time,
                    "ref_phase_step" => &mut self.inject.ref_phase_step,
                    "ref_phase_step_time" => &mut self.inject.ref_phase_step_time,
                    "jitter_f1" => &mut self.analysis.jitter_f1,
                    "jitter_f2" => &mut self.analysis.jitter_f2,
                    "fom_power" => &mut self.analysis.fom_power,
                    "fom_area" => &mut self.analysis.fom_area,
                    _ => unreachable!("real field table out of sync: {key}"),
                };
                *slot = v;
            }
            (FieldKind::Integer, Value::Int(v)) => {
                if v < 0 {
                    return Err(format!("`{key}` must be a non-negative integer, got {v}"));
                }
                let small = || u32::try_from(v).map_err(|_| format!("`{key}` = {v} is too large"));
                match key {
                    "mult_M" => self.mult_m = small()?,
                    "dac_bits" => self.dac_bits = small()?,
                    "fll_window_N" => self.fll_window_n = small()?,
                    "fll_start_code" => self.fll_start_code = Some(small()?),
                    "lock_window" => self.lock_window = small()?,
                    "seed" => self.seed = v as u64,
                    "psd_segment" => self.analysis.psd_segment = v as usize,
                    _ => unreachable!("integer field table out of sync: {key}"),
                }
            }
            (FieldKind::Bool, Value::Bool(b)) => match key {
                "enabled" => self.noise.enabled = b,
                _ => unreachable!("bool field table out of sync: {key}"),
            },
            (kind, value) => {
                return Err(format!("`{key}` expects {kind}, got {value}"));
            }
        }
        Ok(())
    }

    /// Sets a numeric field from a real value, rounding for integer fields.
    /// Used by parameter sweeps.
    pub fn set_numeric(&mut self, key: &str, v: f64) -> Result<(), String> {
        let field = field_info(key).ok_or_else(|| format!("unknown key `{key}`"))?;
        match field.kind {
            FieldKind::Real => self.set(key, Value::Real(v)),
            FieldKind::Integer => self.set(key, Value::Int(v.round() as i64)),
            FieldKind::Bool => Err(format!("`{key}` is not numeric")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(v) => write!(f, "{v:e}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Real,
    Integer,
    Bool,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Real => "a real number",
            FieldKind::Integer => "an integer",
            FieldKind::Bool => "a boolean",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FieldInfo {
    pub section: &'static str,
    pub key: &'static str,
    pub kind: FieldKind,
    pub unit: &'static str,
    pub help: &'static str,
}

macro_rules! fields {
    ($($section:literal $key:literal $kind:ident $unit:literal $help:literal;)*) => {
        pub const FIELDS: &[FieldInfo] = &[
            $(FieldInfo { section: $section, key: $key, kind: FieldKind::$kind, unit: $unit, help: $help },)*
        ];
    };
}

fields! {
    "loop" "f_ref" Real "Hz" "reference frequency";
    "loop" "mult_M" Integer "-" "frequency multiplication factor (f_c = mult_M * f_ref)";
    "loop" "t_pul" Real "s" "sampling pulse width";
    "loop" "i_chg" Real "A" "net capacitor charging current while switched";
    "loop" "i_bias" Real "A" "detector bias current";
    "loop" "c_s" Real "F" "detector integration capacitor";
    "loop" "r1" Real "ohm" "loop filter series resistance";
    "loop" "c1" Real "F" "loop filter series capacitance";
    "loop" "pd_soft_tau" Real "s" "detector switching smoothing time (0 = hard switching)";
    "loop" "i_offset" Real "A" "constant offset current during the pulse";
    "vco" "k_vco" Real "Hz/V" "VCO gain";
    "vco" "v_ctr" Real "V" "control-voltage centre";
    "vco" "f_base_min" Real "Hz" "free-running frequency at DAC code 0";
    "vco" "f_base_step" Real "Hz" "frequency step per DAC code";
    "fll" "dac_bits" Integer "-" "coarse DAC resolution";
    "fll" "fll_window_N" Integer "-" "reference periods per cycle count";
    "fll" "fll_band_lo" Real "-" "lower edge of the FLL band, fraction of f_c";
    "fll" "fll_band_hi" Real "-" "upper edge of the FLL band, fraction of f_c";
    "fll" "fll_start_code" Integer "-" "initial DAC code (default: top code)";
    "noise" "ref_jitter_rms" Real "s" "white per-edge reference jitter";
    "noise" "vco_white_fm" Real "Hz^2/Hz" "one-sided VCO white frequency-noise density";
    "noise" "vco_flicker_corner" Real "Hz" "VCO flicker FM corner (0 disables)";
    "noise" "enabled" Bool "-" "enable noise sources";
    "run" "duration" Real "s" "simulated time";
    "run" "seed" Integer "-" "random seed";
    "run" "lock_tol_ppm" Real "ppm" "lock frequency tolerance";
    "run" "lock_window" Integer "cycles" "consecutive in-tolerance cycles required for lock";
    "run" "ripple_amp" Real "V" "injected control-voltage ripple amplitude";
    "run" "ripple_freq" Real "Hz" "ripple frequency (0 = f_ref)";
    "run" "ref_step_ppm" Real "ppm" "reference frequency step";
    "run" "ref_step_time" Real "s" "time of the reference frequency step";
    "run" "ref_phase_step" Real "rad" "reference phase step (reference-clock radians)";
    "run" "ref_phase_step_time" Real "s" "time of the reference phase step";
    "run" "jitter_f1" Real "Hz" "lower jitter integration limit";
    "run" "jitter_f2" Real "Hz" "upper jitter integration limit";
    "run" "psd_segment" Integer "samples" "Welch segment length (power of two)";
    "run" "fom_power" Real "W" "power entering the figure of merit";
    "run" "fom_area" Real "mm^2" "area entering the figure of merit";
}

pub fn field_info(key: &str) -> Option<&'static FieldInfo> {
    FIELDS.iter().find(|f| f.key == key)
}

/// One reference cycle of a transient run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub cycle_index: u64,
    /// Reference edge opening the cycle, seconds.
    pub t: f64,
    /// Mean control voltage over the cycle.
    pub v_c: f64,
    /// Mean VCO frequency over the cycle: phase advance / (2π · cycle length).
    pub f_inst: f64,
    pub fll_code: u32,
    pub fll_engaged: bool,
    pub delta_v_pd: f64,
    /// First transition offset from the pulse start; NaN when the window saw none.
    pub t_x_offset: f64,
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// The configuration key most responsible, when there is one.
    pub key: Option<&'static str>,
    pub message: String,
}

impl Violation {
    fn new(key: &'static str, message: impl Into<String>) -> Self {
        Self {
            key: Some(key),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.key {
            Some(k) => write!(f, "{k}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Returns every violated invariant of `cfg`. An empty list means valid.
pub fn validate(cfg: &SimConfig) -> Vec<Violation> {
    let mut out = Vec::new();

    let positive: [(&'static str, f64); 11] = [
        ("f_ref", cfg.f_ref),
        ("t_pul", cfg.t_pul),
        ("i_chg", cfg.i_chg),
        ("i_bias", cfg.i_bias),
        ("c_s", cfg.c_s),
        ("r1", cfg.r1),
        ("c1", cfg.c1),
        ("k_vco", cfg.k_vco),
        ("f_base_min", cfg.f_base_min),
        ("f_base_step", cfg.f_base_step),
        ("duration", cfg.duration),
    ];
    for (key, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            out.push(Violation::new(key, format!("must be finite and > 0, got {v:e}")));
        }
    }
    let non_negative: [(&'static str, f64); 8] = [
        ("pd_soft_tau", cfg.pd_soft_tau),
        ("ref_jitter_rms", cfg.noise.ref_jitter_rms),
        ("vco_white_fm", cfg.noise.vco_white_fm),
        ("vco_flicker_corner", cfg.noise.vco_flicker_corner),
        ("ripple_amp", cfg.inject.ripple_amp),
        ("ripple_freq", cfg.inject.ripple_freq),
        ("ref_step_time", cfg.inject.ref_step_time),
        ("ref_phase_step_time", cfg.inject.ref_phase_step_time),
    ];
    for (key, v) in non_negative {
        if !(v.is_finite() && v >= 0.0) {
            out.push(Violation::new(key, format!("must be finite and >= 0, got {v:e}")));
        }
    }
    for (key, v) in [
        ("v_ctr", cfg.v_ctr),
        ("i_offset", cfg.i_offset),
        ("ref_step_ppm", cfg.inject.ref_step_ppm),
        ("ref_phase_step", cfg.inject.ref_phase_step),
    ] {
        if !v.is_finite() {
            out.push(Violation::new(key, "must be finite"));
        }
    }
    if cfg.mult_m == 0 {
        out.push(Violation::new("mult_M", "must be >= 1"));
    }
    if cfg.fll_window_n == 0 {
        out.push(Violation::new("fll_window_N", "must be >= 1"));
    }
    if cfg.dac_bits == 0 || cfg.dac_bits > 16 {
        out.push(Violation::new("dac_bits", format!("must be in [1, 16], got {}", cfg.dac_bits)));
    }

    if cfg.t_pul.is_finite() && cfg.f_ref > 0.0 && cfg.t_pul >= cfg.t_ref() {
        out.push(Violation::new(
            "t_pul",
            format!(
                "t_pul < 1/f_ref violated: t_pul = {:e} s, 1/f_ref = {:e} s",
                cfg.t_pul,
                cfg.t_ref()
            ),
        ));
    }

    let band_ok = cfg.fll_band_lo > 0.0 && cfg.fll_band_lo < cfg.fll_band_hi && cfg.fll_band_hi < 1.0;
    if !band_ok {
        out.push(Violation::new(
            "fll_band_lo",
            format!(
                "0 < fll_band_lo < fll_band_hi < 1 violated: fll_band_lo = {}, fll_band_hi = {}",
                cfg.fll_band_lo, cfg.fll_band_hi
            ),
        ));
    }

    if cfg.noise.ref_jitter_rms.is_finite()
        && cfg.f_ref > 0.0
        && cfg.noise.ref_jitter_rms >= MAX_REF_JITTER_FRACTION * cfg.t_ref()
    {
        out.push(Violation::new(
            "ref_jitter_rms",
            format!(
                "ref_jitter_rms < T_REF/10 violated: {:e} s >= {:e} s",
                cfg.noise.ref_jitter_rms,
                MAX_REF_JITTER_FRACTION * cfg.t_ref()
            ),
        ));
    }

    if cfg.lock_window < 2 {
        out.push(Violation::new("lock_window", "must be >= 2"));
    }
    if !(cfg.lock_tol_ppm.is_finite() && cfg.lock_tol_ppm > 0.0) {
        out.push(Violation::new("lock_tol_ppm", "must be finite and > 0"));
    }

    let a = &cfg.analysis;
    if !(a.jitter_f1.is_finite() && a.jitter_f2.is_finite() && 0.0 <= a.jitter_f1 && a.jitter_f1 <= a.jitter_f2) {
        out.push(Violation::new("jitter_f1", "0 <= jitter_f1 <= jitter_f2 violated"));
    }
    if a.psd_segment < 16 || !a.psd_segment.is_power_of_two() {
        out.push(Violation::new("psd_segment", "must be a power of two >= 16"));
    }
    if !(a.fom_power > 0.0 && a.fom_power.is_finite()) {
        out.push(Violation::new("fom_power", "must be finite and > 0"));
    }
    if !(a.fom_area > 0.0 && a.fom_area.is_finite()) {
        out.push(Violation::new("fom_area", "must be finite and > 0"));
    }

    // The remaining checks combine several fields and only make sense once
    // the basic ones hold.
    if !out.is_empty() {
        return out;
    }

    let f_c = cfg.f_out();
    let span = cfg.k_vco * V_SWING;
    let lo = cfg.f_base_min - span;
    let hi = cfg.f_base(cfg.max_code()) + span;
    if !(lo <= f_c && f_c <= hi) {
        out.push(Violation::new(
            "mult_M",
            format!("mult_M*f_ref = {f_c:e} Hz is outside the VCO reachable range [{lo:e}, {hi:e}] Hz"),
        ));
    }

    if let Some(code) = cfg.fll_start_code {
        if code > cfg.max_code() {
            out.push(Violation::new(
                "fll_start_code",
                format!("must be <= {} for dac_bits = {}", cfg.max_code(), cfg.dac_bits),
            ));
        }
    }

    match fll::thresholds(cfg) {
        Err(e) => out.push(Violation::new("fll_window_N", e.to_string())),
        Ok((count_lo, count_hi)) => {
            let n = cfg.fll_window_n as f64;
            let step_counts = cfg.f_base_step * n / cfg.f_ref;
            if step_counts > (count_hi - count_lo) as f64 {
                out.push(Violation::new(
                    "f_base_step",
                    format!(
                        "f_base_step*fll_window_N/f_ref = {step_counts} exceeds the dead zone width {} counts; \
                         the FLL could step over the band",
                        count_hi - count_lo
                    ),
                ));
            }
            // Some code must land in the dead zone: the DAC range has to
            // straddle the frequencies whose counts fall in [count_lo, count_hi].
            let dz_lo = count_lo as f64 * cfg.f_ref / n;
            let dz_hi = (count_hi + 1) as f64 * cfg.f_ref / n;
            if cfg.f_base_min >= dz_hi || cfg.f_base(cfg.max_code()) < dz_lo {
                out.push(Violation::new(
                    "f_base_min",
                    format!(
                        "DAC range [{:e}, {:e}] Hz does not cover the FLL dead zone [{dz_lo:e}, {dz_hi:e}) Hz",
                        cfg.f_base_min,
                        cfg.f_base(cfg.max_code())
                    ),
                ));
            }
        }
    }

    out
}
