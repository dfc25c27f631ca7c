//! Continuous-time small-signal model of the loop.
//!
//! The sampled detector is replaced by its average current per radian of
//! VCO phase error, `k_pd_i = 2·i_chg·f_ref/(2π·f_out)`. The merged
//! `C_S ∥ (R1 + C1)` network has the transimpedance
//!
//! ```text
//! z(s) = (1 + s·r1·c1) / (s·(c_s + c1)·(1 + s·r1·c_p)),   c_p = c_s·c1/(c_s + c1)
//! ```
//!
//! and the open-loop gain is `G(s) = k_pd_i·z(s)·2π·k_vco/s`. The model is
//! only meaningful well below `f_ref`; [`stability`] flags bandwidths above
//! `f_ref/10`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::SimConfig;

/// Lowest magnitude reported by [`noise_transfer`], dB.
pub const NTF_FLOOR_DB: f64 = -200.0;

/// Lower end of the unity-gain search, Hz.
pub const UGB_SEARCH_MIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopModel {
    /// Average detector current per radian of VCO phase error, A/rad.
    pub k_pd_i: f64,
    /// VCO gain, rad/s per volt.
    pub k_vco_rad: f64,
    pub r1: f64,
    pub c1: f64,
    pub c_s: f64,
    pub mult_m: u32,
    pub f_ref: f64,
}

pub fn build_loop_model(cfg: &SimConfig) -> LoopModel {
    LoopModel {
        k_pd_i: 2.0 * cfg.i_chg * cfg.f_ref / (2.0 * PI * cfg.f_out()),
        k_vco_rad: 2.0 * PI * cfg.k_vco,
        r1: cfg.r1,
        c1: cfg.c1,
        c_s: cfg.c_s,
        mult_m: cfg.mult_m,
        f_ref: cfg.f_ref,
    }
}

impl LoopModel {
    pub fn c_total(&self) -> f64 {
        self.c_s + self.c1
    }

    pub fn c_p(&self) -> f64 {
        self.c_s * self.c1 / (self.c_s + self.c1)
    }

    /// Stabilising zero, Hz.
    pub fn zero_hz(&self) -> f64 {
        1.0 / (2.0 * PI * self.r1 * self.c1)
    }

    /// High-frequency pole of the filter, Hz.
    pub fn pole_hz(&self) -> f64 {
        1.0 / (2.0 * PI * self.r1 * self.c_p())
    }

    /// Filter transimpedance at complex frequency `s`, ohms.
    pub fn z_filter(&self, s: Complex64) -> Complex64 {
        (1.0 + s * self.r1 * self.c1) / (s * self.c_total() * (1.0 + s * self.r1 * self.c_p()))
    }

    /// `G(j2πf)`.
    pub fn open_loop(&self, f: f64) -> Complex64 {
        let s = Complex64::new(0.0, 2.0 * PI * f);
        self.k_pd_i * self.z_filter(s) * self.k_vco_rad / s
    }

    /// Phase of `G(j2πf)` in degrees, unwrapped (two integrators at −180°).
    pub fn open_loop_phase_deg(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f;
        (-PI + (w * self.r1 * self.c1).atan() - (w * self.r1 * self.c_p()).atan()).to_degrees()
    }

    /// Loop constant `K = k_pd_i·k_vco_rad`, A·rad/(s·V·rad) so `G ≈ K·z/s`.
    pub fn loop_constant(&self) -> f64 {
        self.k_pd_i * self.k_vco_rad
    }

    /// Natural frequency of the second-order approximation (c_p neglected), rad/s.
    pub fn natural_frequency(&self) -> f64 {
        (self.loop_constant() / self.c_total()).sqrt()
    }

    pub fn damping(&self) -> f64 {
        0.5 * self.r1 * self.c1 * self.natural_frequency()
    }

    /// Dominant settling time constant `1/(ζ·ω_n)`, seconds.
    pub fn settling_tau(&self) -> f64 {
        1.0 / (self.damping() * self.natural_frequency())
    }

    /// The same loop with the detector gain scaled by `factor`.
    pub fn with_gain_scaled(&self, factor: f64) -> Self {
        Self {
            k_pd_i: self.k_pd_i * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    /// No unity-gain crossing inside the search range.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// NaN when no crossing was found.
    pub unity_gain_bw: f64,
    /// Degrees; NaN when no crossing was found.
    pub phase_margin: f64,
    pub verdict: Verdict,
    /// `unity_gain_bw < f_ref/10`, where the continuous-time model holds.
    pub within_sampling_limit: bool,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.verdict == Verdict::Stable
    }
}

/// Unity-gain frequency by bisection in log frequency over `[1 Hz, f_ref/2]`,
/// then `PM = 180° + ∠G`.
pub fn stability(model: &LoopModel) -> StabilityReport {
    let hi_limit = model.f_ref / 2.0;
    let mag = |f: f64| model.open_loop(f).norm();
    if !(mag(UGB_SEARCH_MIN) > 1.0 && mag(hi_limit) < 1.0) {
        return StabilityReport {
            unity_gain_bw: f64::NAN,
            phase_margin: f64::NAN,
            verdict: Verdict::Indeterminate,
            within_sampling_limit: false,
        };
    }
    let (mut lo, mut hi) = (UGB_SEARCH_MIN.ln(), hi_limit.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mag(mid.exp()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let ugb = (0.5 * (lo + hi)).exp();
    let pm = 180.0 + model.open_loop_phase_deg(ugb);
    StabilityReport {
        unity_gain_bw: ugb,
        phase_margin: pm,
        verdict: if pm > 0.0 { Verdict::Stable } else { Verdict::Unstable },
        within_sampling_limit: ugb < model.f_ref / 10.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSource {
    Reference,
    Vco,
}

/// Complex noise transfer: `M·G/(1+G)` for the reference, `1/(1+G)` for the VCO.
pub fn noise_transfer_complex(model: &LoopModel, source: NoiseSource, f: f64) -> Complex64 {
    let g = model.open_loop(f);
    match source {
        NoiseSource::Reference => model.mult_m as f64 * g / (1.0 + g),
        NoiseSource::Vco => 1.0 / (1.0 + g),
    }
}

/// `|NTF|` in dB, floored at [`NTF_FLOOR_DB`].
pub fn noise_transfer(model: &LoopModel, source: NoiseSource, f: f64) -> f64 {
    let m = noise_transfer_complex(model, source, f).norm();
    if m > 0.0 {
        (20.0 * m.log10()).max(NTF_FLOOR_DB)
    } else {
        NTF_FLOOR_DB
    }
}

/// Control-voltage response to an output-phase step, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResponse {
    pub dt: f64,
    /// `v_cs` deviation at `k·dt`, volts.
    pub dv: Vec<f64>,
}

impl StepResponse {
    /// Value at `t`, linearly interpolated; zero before the step.
    pub fn at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t / self.dt;
        let i = x.floor() as usize;
        if i + 1 >= self.dv.len() {
            return *self.dv.last().unwrap_or(&0.0);
        }
        let a = x - i as f64;
        self.dv[i] * (1.0 - a) + self.dv[i + 1] * a
    }

    /// Mean over `[t0, t1]` by the trapezoid rule on the response grid.
    pub fn mean_over(&self, t0: f64, t1: f64) -> f64 {
        debug_assert!(t1 > t0);
        let n = (((t1 - t0) / self.dt).ceil() as usize).max(1);
        let h = (t1 - t0) / n as f64;
        let mut acc = 0.5 * (self.at(t0) + self.at(t1));
        for k in 1..n {
            acc += self.at(t0 + k as f64 * h);
        }
        acc * h / (t1 - t0)
    }
}

/// Integrates the three-state loop (`v_cs`, `v_c1`, output phase) with RK4
/// after the target output phase steps by `phase_step` radians at `t = 0`.
pub fn step_response(model: &LoopModel, phase_step: f64, t_end: f64, dt: f64) -> StepResponse {
    let n = (t_end / dt).ceil() as usize;
    let deriv = |x: [f64; 3]| -> [f64; 3] {
        let [v_cs, v_c1, theta] = x;
        let i_pd = model.k_pd_i * (phase_step - theta);
        let i_r = (v_cs - v_c1) / model.r1;
        [(i_pd - i_r) / model.c_s, i_r / model.c1, model.k_vco_rad * v_cs]
    };
    let mut x = [0.0; 3];
    let mut dv = Vec::with_capacity(n + 1);
    dv.push(0.0);
    let axpy = |x: [f64; 3], k: [f64; 3], h: f64| [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]];
    for _ in 0..n {
        let k1 = deriv(x);
        let k2 = deriv(axpy(x, k1, dt / 2.0));
        let k3 = deriv(axpy(x, k2, dt / 2.0));
        let k4 = deriv(axpy(x, k3, dt));
        for i in 0..3 {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        dv.push(x[0]);
    }
    StepResponse { dt, dv }
}

/// Phase contributed by the filter zero and pole at `f`, degrees; the margin
/// of a loop with both integrators.
pub fn filter_phase_boost_deg(model: &LoopModel, f: f64) -> f64 {
    model.open_loop_phase_deg(f) + 180.0
}

/// Frequency of maximum phase boost, `1/(2π·r1·sqrt(c1·c_p))`.
pub fn peak_boost_hz(model: &LoopModel) -> f64 {
    1.0 / (2.0 * PI * model.r1 * (model.c1 * model.c_p()).sqrt())
}
