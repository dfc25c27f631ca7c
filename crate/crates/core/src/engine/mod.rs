//! Event-paced transient simulation at the reference rate.
//!
//! Each reference interval `[t_k, t_{k+1})` is solved analytically. While the
//! FLL is engaged the control voltage is pinned at `v_ctr` and the FLL counts
//! whole VCO periods. Afterwards every edge opens a pulse window. The charge
//! the detector integrates depends on where the VCO crosses inside that
//! window, and the crossing times depend on the frequency, which in turn
//! follows the control voltage over the interval. The interval frequency is
//! therefore found by a short fixed-point iteration: guess `f`, locate the
//! crossings, integrate the charge, deposit and relax the filter, and take
//! `f = inst_freq(code, mean v_cs)`. The loop gain per iteration is tiny, so
//! it converges in a few passes.

mod lock;
mod synth;

pub use lock::{detect_lock, lock_report, LockReport};
pub use synth::{excess_phase_uniform, synthesize_phase_samples, synthesize_phase_window};

use std::f64::consts::TAU;

use crate::detector::{filter_step, FilterState, PdModel, PdResult};
use crate::fll::{fll_step, FllState};
use crate::model::{CycleRecord, SimConfig};
use crate::oscillator::{inst_freq, polarity_at, ripple_phase, transitions_in, PhaseNoise, VcoState};
use crate::stimulus::{stream_rng, window_for_edge, RefClock, VCO_STREAM};
use crate::{Error, Result};

const MAX_FIXED_POINT_ITERS: usize = 40;
const FIXED_POINT_TOL: f64 = 1e-14;

/// Everything needed to continue a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineState {
    /// VCO phase at the next reference edge.
    pub vco: VcoState,
    pub filter: FilterState,
    pub fll: FllState,
    /// Index of the next reference edge.
    pub next_cycle: u64,
    /// Mean VCO frequency over the last interval.
    pub f_last: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: Vec<CycleRecord>,
    pub lock: LockReport,
    pub final_state: EngineState,
}

#[derive(Debug, Clone)]
pub struct Engine {
    cfg: SimConfig,
    pd: PdModel,
    clock: RefClock,
    noise: Option<PhaseNoise>,
    vco: VcoState,
    filter: FilterState,
    fll: FllState,
    /// Edge opening the next interval.
    edge: (u64, f64),
    f_last: f64,
    ripple: (f64, f64),
}

fn ensure_valid(cfg: &SimConfig) -> Result<()> {
    let v = cfg.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(v))
    }
}

impl Engine {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        ensure_valid(cfg)?;
        let fll = FllState::new(cfg)?;
        let mut clock = RefClock::new(cfg);
        let edge = clock.next_edge();
        let noise = cfg
            .noise
            .enabled
            .then(|| PhaseNoise::new(&cfg.noise, cfg.f_ref, cfg.seed));
        let f0 = inst_freq(fll.code, cfg.v_ctr, cfg);
        Ok(Self {
            cfg: cfg.clone(),
            pd: PdModel::from_config(cfg),
            clock,
            noise,
            vco: VcoState::new(edge.1, 0.0, fll.code, cfg.v_ctr),
            filter: FilterState::at(cfg.v_ctr),
            fll,
            edge,
            f_last: f0,
            ripple: (cfg.inject.ripple_amp, cfg.inject.ripple_frequency(cfg.f_ref)),
        })
    }

    /// Continues from `state` under `cfg`, which may differ from the
    /// configuration that produced the state (a warm start). Noise, if
    /// enabled, is drawn from streams distinct from a fresh run's.
    pub fn resume(cfg: &SimConfig, state: EngineState) -> Result<Self> {
        ensure_valid(cfg)?;
        let (count_lo, count_hi) = crate::fll::thresholds(cfg)?;
        let fll = FllState {
            count_lo,
            count_hi,
            max_code: cfg.max_code(),
            window_n: cfg.fll_window_n,
            code: state.fll.code.min(cfg.max_code()),
            ..state.fll
        };
        let mut clock = RefClock::starting_at(cfg, state.next_cycle);
        let edge = clock.next_edge();
        let mut vco = state.vco;
        let gap = edge.1 - vco.t_last;
        if gap < -1e-15 {
            return Err(Error::InvalidArgument(format!(
                "resumed clock edge at {:e} s precedes the saved VCO time {:e} s",
                edge.1, vco.t_last
            )));
        }
        if gap > 0.0 {
            vco = vco.advance(gap, state.f_last);
        }
        vco.t_last = edge.1;
        let noise = cfg.noise.enabled.then(|| {
            let rng = stream_rng(cfg.seed, VCO_STREAM + (state.next_cycle << 8));
            PhaseNoise::with_rng(&cfg.noise, cfg.f_ref, rng)
        });
        Ok(Self {
            cfg: cfg.clone(),
            pd: PdModel::from_config(cfg),
            clock,
            noise,
            vco,
            filter: state.filter,
            fll,
            edge,
            f_last: state.f_last,
            ripple: (cfg.inject.ripple_amp, cfg.inject.ripple_frequency(cfg.f_ref)),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn state(&self) -> EngineState {
        EngineState {
            vco: self.vco,
            filter: self.filter,
            fll: self.fll,
            next_cycle: self.edge.0,
            f_last: self.f_last,
        }
    }

    /// Simulates one reference interval.
    pub fn step(&mut self) -> Result<CycleRecord> {
        let (k, t_k) = self.edge;
        let next = self.clock.next_edge();
        let period = next.1 - t_k;
        if !(period > 0.0) {
            return Err(Error::Numeric {
                cycle: k,
                message: format!("reference edges not increasing: {t_k:e} then {:e}", next.1),
            });
        }

        let mut extra = match &mut self.noise {
            Some(n) => n.increment(period),
            None => 0.0,
        };
        let (amp, f_r) = self.ripple;
        if amp > 0.0 {
            extra += ripple_phase(self.cfg.k_vco, amp, f_r, next.1) - ripple_phase(self.cfg.k_vco, amp, f_r, t_k);
        }
        let extra_f = extra / TAU / period;

        let engaged = self.fll.engaged;
        let code = self.fll.code;
        let (f, v_mean, pd) = if engaged {
            self.filter = FilterState::at(self.cfg.v_ctr);
            (inst_freq(code, self.cfg.v_ctr, &self.cfg), self.cfg.v_ctr, None)
        } else {
            let (f, mean, state, pd) = self.fine_interval(k, t_k, period, extra_f)?;
            self.filter = state;
            (f, mean, Some(pd))
        };

        let d_turns = f * period + extra / TAU;
        let before = self.vco;
        let mut after = self.vco.advance_turns(period, d_turns);
        after.t_last = next.1;
        after.v_c = self.filter.v_cs;
        let vco_periods = after.whole_turns() - before.whole_turns();
        if let Some(count) = self.fll.accumulate(vco_periods) {
            // only acted on while engaged; the counter keeps running afterwards
            self.fll = fll_step(self.fll, count);
        }
        after.coarse_code = self.fll.code;
        self.vco = after;
        self.edge = next;

        let f_inst = d_turns / period;
        self.f_last = f_inst;
        if !(f_inst.is_finite() && self.filter.is_finite()) {
            return Err(Error::Numeric {
                cycle: k,
                message: format!("non-finite state: f = {f_inst}, v_cs = {}, v_c1 = {}", self.filter.v_cs, self.filter.v_c1),
            });
        }
        Ok(CycleRecord {
            cycle_index: k,
            t: t_k,
            v_c: v_mean,
            f_inst,
            fll_code: code,
            fll_engaged: engaged,
            delta_v_pd: pd.map_or(0.0, |p| p.delta_v),
            t_x_offset: pd.map_or(f64::NAN, |p| p.t_x_offset),
        })
    }

    /// Fine-loop interval: returns the deterministic VCO frequency, the mean
    /// control voltage, the filter state at the next edge and the detector result.
    fn fine_interval(&self, k: u64, t_k: f64, period: f64, extra_f: f64) -> Result<(f64, f64, FilterState, PdResult)> {
        let window = window_for_edge(t_k, self.cfg.t_pul);
        let code = self.fll.code;
        let mut f = self.f_last - extra_f;
        let mut out = None;
        for _ in 0..MAX_FIXED_POINT_ITERS {
            let f_tot = (f + extra_f).max(crate::oscillator::MIN_FREQUENCY);
            let tr = transitions_in(&self.vco, &window, f_tot);
            let pol = polarity_at(&self.vco, window.t_start, f_tot);
            let q = self.pd.integrate(&window, &tr, pol);
            let step = filter_step(self.filter, q, period, &self.cfg);
            let f_new = inst_freq(code, step.mean_v_cs, &self.cfg);
            let converged = (f_new - f).abs() <= FIXED_POINT_TOL * f.abs();
            out = Some((f_new, step, PdResult::new(&window, &tr, q, self.cfg.c_s)));
            if converged {
                break;
            }
            f = f_new;
        }
        let (f, step, pd) = out.expect("at least one iteration");
        if !f.is_finite() {
            return Err(Error::Numeric {
                cycle: k,
                message: format!("VCO frequency diverged (v_cs = {})", step.mean_v_cs),
            });
        }
        Ok((f, step.mean_v_cs, step.state, pd))
    }

    /// Runs `n` intervals, appending the records to `trace`.
    pub fn run_into(&mut self, n: u64, trace: &mut Vec<CycleRecord>) -> Result<()> {
        trace.reserve(n as usize);
        for _ in 0..n {
            trace.push(self.step()?);
        }
        Ok(())
    }
}

/// Runs `cfg` for `floor(duration·f_ref)` reference cycles.
pub fn run_transient(cfg: &SimConfig) -> Result<RunResult> {
    let mut engine = Engine::new(cfg)?;
    let mut trace = Vec::new();
    engine.run_into(cfg.n_cycles(), &mut trace)?;
    let lock = lock_report(cfg, &trace);
    Ok(RunResult {
        trace,
        lock,
        final_state: engine.state(),
    })
}

/// Continues a saved state under `cfg` for `floor(duration·f_ref)` cycles.
pub fn run_from(cfg: &SimConfig, state: EngineState) -> Result<RunResult> {
    let mut engine = Engine::resume(cfg, state)?;
    let mut trace = Vec::new();
    engine.run_into(cfg.n_cycles(), &mut trace)?;
    let lock = lock_report(cfg, &trace);
    Ok(RunResult {
        trace,
        lock,
        final_state: engine.state(),
    })
}
