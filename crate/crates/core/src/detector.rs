//! Integrating sub-sampling phase detector merged with the loop filter.
//!
//! During a pulse the detector steers `+i_chg` onto `C_S` while tap 0 is high
//! and `−i_chg` while it is low. Between pulses `C_S` shares charge with `C1`
//! through `R1`. The network is solved exactly: an impulsive deposit at the
//! pulse, then an exponential relaxation until the next edge.
//!
//! For a single rising transition at offset `Δt` into a pulse of width
//! `t_pul` the net charge is `i_chg·(t_pul − 2Δt)`. It is zero at mid-pulse,
//! positive when the rise is early and negative when it is late. A falling
//! transition mirrors this. With a positive VCO gain the falling crossing is
//! the stable lock point of the loop.

use crate::model::SimConfig;
use crate::oscillator::{Direction, Polarity, Transition};
use crate::stimulus::PulseWindow;

/// Detector switching model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdModel {
    pub i_chg: f64,
    /// tanh smoothing time constant of each current flip; zero is a hard switch.
    pub soft_tau: f64,
    /// Constant current added for the whole pulse.
    pub i_offset: f64,
}

impl PdModel {
    pub fn hard(i_chg: f64) -> Self {
        Self {
            i_chg,
            soft_tau: 0.0,
            i_offset: 0.0,
        }
    }

    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            i_chg: cfg.i_chg,
            soft_tau: cfg.pd_soft_tau,
            i_offset: cfg.i_offset,
        }
    }

    /// Net charge deposited during `window`.
    pub fn integrate(&self, window: &PulseWindow, transitions: &[Transition], polarity_at_start: Polarity) -> f64 {
        let hard = if self.soft_tau > 0.0 {
            soft_integrate(window, transitions, polarity_at_start, self.i_chg, self.soft_tau)
        } else {
            pd_integrate(window, transitions, polarity_at_start, self.i_chg)
        };
        hard + self.i_offset * window.width
    }
}

/// Piecewise-constant current integration over one pulse window, hard switching.
pub fn pd_integrate(window: &PulseWindow, transitions: &[Transition], polarity_at_start: Polarity, i_chg: f64) -> f64 {
    let mut q = 0.0;
    let mut t0 = window.t_start;
    let mut level = polarity_at_start;
    for tr in transitions {
        let t = tr.time.clamp(window.t_start, window.t_end);
        q += level.sign() * i_chg * (t - t0);
        t0 = t;
        level = Polarity::after(tr.direction);
    }
    q + level.sign() * i_chg * (window.t_end - t0)
}

/// Each flip follows `(1 + tanh((t − t_x)/τ))/2`, integrated in closed form.
fn soft_integrate(window: &PulseWindow, transitions: &[Transition], polarity_at_start: Polarity, i_chg: f64, tau: f64) -> f64 {
    // ∫ (1 + tanh(u/τ))/2 du = (u + τ·ln cosh(u/τ))/2
    let prim = |u: f64| 0.5 * (u + tau * ln_cosh(u / tau));
    let mut q = polarity_at_start.sign() * window.width;
    let mut level = polarity_at_start;
    for tr in transitions {
        let next = Polarity::after(tr.direction);
        let jump = next.sign() - level.sign();
        if jump != 0.0 {
            q += jump * (prim(window.t_end - tr.time) - prim(window.t_start - tr.time));
        }
        level = next;
    }
    i_chg * q
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Closed-form single-rising-transition characteristic:
/// `ΔV(Δt) = (i_chg/c_s)·(t_pul − 2Δt)`, saturating outside `[0, t_pul]`.
pub fn pd_characteristic(delta_t: f64, cfg: &SimConfig) -> f64 {
    let dt = delta_t.clamp(0.0, cfg.t_pul);
    cfg.i_chg / cfg.c_s * (cfg.t_pul - 2.0 * dt)
}

/// Slope magnitude of the characteristic in its linear region, V/s.
pub fn pd_gain(cfg: &SimConfig) -> f64 {
    2.0 * cfg.i_chg / cfg.c_s
}

/// Outcome of one pulse window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdResult {
    pub delta_q: f64,
    pub delta_v: f64,
    /// Offset of the first transition from the window start, NaN if none.
    pub t_x_offset: f64,
}

impl PdResult {
    pub fn new(window: &PulseWindow, transitions: &[Transition], delta_q: f64, c_s: f64) -> Self {
        Self {
            delta_q,
            delta_v: delta_q / c_s,
            t_x_offset: transitions.first().map_or(f64::NAN, |t| t.time - window.t_start),
        }
    }

    pub fn first_direction(transitions: &[Transition]) -> Option<Direction> {
        transitions.first().map(|t| t.direction)
    }
}

/// Voltages of the PD/filter network. `v_cs` is the control voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub v_cs: f64,
    pub v_c1: f64,
}

impl FilterState {
    pub fn at(v: f64) -> Self {
        Self { v_cs: v, v_c1: v }
    }

    pub fn total_charge(&self, c_s: f64, c1: f64) -> f64 {
        c_s * self.v_cs + c1 * self.v_c1
    }

    pub fn is_finite(&self) -> bool {
        self.v_cs.is_finite() && self.v_c1.is_finite()
    }
}

/// Result of [`filter_step`]: the state at the end of the hold and the mean
/// control voltage over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterStep {
    pub state: FilterState,
    pub mean_v_cs: f64,
}

/// Relaxation time constant `r1·c_s·c1/(c_s + c1)`.
pub fn relaxation_tau(cfg: &SimConfig) -> f64 {
    cfg.r1 * cfg.c_s * cfg.c1 / (cfg.c_s + cfg.c1)
}

/// Deposit `delta_q` on `C_S`, then relax for `hold_time`.
pub fn filter_apply(state: FilterState, delta_q: f64, hold_time: f64, cfg: &SimConfig) -> FilterState {
    filter_step(state, delta_q, hold_time, cfg).state
}

/// [`filter_apply`] that also returns the mean of `v_cs` over the hold.
pub fn filter_step(state: FilterState, delta_q: f64, hold_time: f64, cfg: &SimConfig) -> FilterStep {
    debug_assert!(hold_time >= 0.0);
    let v0 = state.v_cs + delta_q / cfg.c_s;
    let c_tot = cfg.c_s + cfg.c1;
    // work with the difference across R1 so equal voltages stay exactly equal
    let d = v0 - state.v_c1;
    let v_inf = state.v_c1 + d * (cfg.c_s / c_tot);
    let tau = relaxation_tau(cfg);
    if hold_time == 0.0 {
        return FilterStep {
            state: FilterState {
                v_cs: v0,
                v_c1: state.v_c1,
            },
            mean_v_cs: v0,
        };
    }
    let x = hold_time / tau;
    let decay = (-x).exp();
    // 1 − e^{−x} without cancellation
    let settled = -(-x).exp_m1();
    let d_cs = d * (cfg.c1 / c_tot);
    let d_c1 = -d * (cfg.c_s / c_tot);
    FilterStep {
        state: FilterState {
            v_cs: v_inf + d_cs * decay,
            v_c1: v_inf + d_c1 * decay,
        },
        mean_v_cs: v_inf + d_cs * settled / x,
    }
}
