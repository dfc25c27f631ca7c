//! Behavioral 32-phase ring-oscillator VCO.
//!
//! The phase of tap 0 is kept as whole turns plus a fractional turn so long
//! runs do not lose sub-picosecond resolution. Tap 0's differential output is
//! high for a fractional phase in `[0, 0.5)`: it rises on every whole turn and
//! falls half a turn later.

use std::f64::consts::{LN_10, TAU};

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{NoiseSpec, SimConfig};
use crate::stimulus::{stream_rng, PulseWindow, VCO_STREAM};
use crate::{Error, Result};

pub const N_TAPS: usize = 32;

/// Lowest frequency `inst_freq` returns.
pub const MIN_FREQUENCY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rise,
    Fall,
}

/// Level of tap 0's differential output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    High,
    Low,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::High => 1.0,
            Polarity::Low => -1.0,
        }
    }

    pub fn after(direction: Direction) -> Self {
        match direction {
            Direction::Rise => Polarity::High,
            Direction::Fall => Polarity::Low,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub time: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VcoState {
    turns: i64,
    frac: f64,
    /// Time at which `phase` is valid.
    pub t_last: f64,
    pub coarse_code: u32,
    pub v_c: f64,
}

impl VcoState {
    pub fn new(t: f64, phase: f64, coarse_code: u32, v_c: f64) -> Self {
        let turns = phase / TAU;
        let whole = turns.floor();
        Self {
            turns: whole as i64,
            frac: turns - whole,
            t_last: t,
            coarse_code,
            v_c,
        }
    }

    /// Unwrapped tap-0 phase in radians.
    pub fn phase(&self) -> f64 {
        TAU * (self.turns as f64 + self.frac)
    }

    pub fn whole_turns(&self) -> i64 {
        self.turns
    }

    /// Fractional turn in `[0, 1)`.
    pub fn frac_turn(&self) -> f64 {
        self.frac
    }

    pub fn polarity(&self) -> Polarity {
        polarity_of(self.frac)
    }

    /// Level of tap `k` (taps are spaced by 2π/32).
    pub fn tap_level(&self, k: usize) -> Result<bool> {
        let off = tap_phase_offset(k)? / TAU;
        let f = (self.frac - off).rem_euclid(1.0);
        Ok(polarity_of(f) == Polarity::High)
    }

    /// Advances by `dt` at constant frequency `f` with no noise.
    pub fn advance(&self, dt: f64, f: f64) -> VcoState {
        self.advance_turns(dt, f * dt)
    }

    /// Advances by `dt` at frequency `f` plus the noise process' increment.
    pub fn advance_noisy(&self, dt: f64, f: f64, noise: &mut PhaseNoise) -> VcoState {
        let extra = noise.increment(dt) / TAU;
        self.advance_turns(dt, f * dt + extra)
    }

    /// Advances time by `dt` and phase by `d_turns` full turns.
    pub fn advance_turns(&self, dt: f64, d_turns: f64) -> VcoState {
        debug_assert!(dt >= 0.0);
        if dt == 0.0 && d_turns == 0.0 {
            return *self;
        }
        let total = self.frac + d_turns;
        let whole = total.floor();
        let mut frac = total - whole;
        let mut turns = self.turns + whole as i64;
        if frac >= 1.0 {
            frac -= 1.0;
            turns += 1;
        }
        VcoState {
            turns,
            frac,
            t_last: self.t_last + dt,
            ..*self
        }
    }

    /// Phase advance in turns between `self` and a later state.
    pub fn turns_since(&self, earlier: &VcoState) -> f64 {
        (self.turns - earlier.turns) as f64 + (self.frac - earlier.frac)
    }
}

fn polarity_of(frac: f64) -> Polarity {
    if frac < 0.5 {
        Polarity::High
    } else {
        Polarity::Low
    }
}

/// `f = f_base_min + code·f_base_step + k_vco·(v_c − v_ctr)`, floored at [`MIN_FREQUENCY`].
pub fn inst_freq(coarse_code: u32, v_c: f64, cfg: &SimConfig) -> f64 {
    let f = cfg.f_base(coarse_code) + cfg.k_vco * (v_c - cfg.v_ctr);
    if f < MIN_FREQUENCY {
        log::warn!("VCO frequency {f:e} Hz clamped to {MIN_FREQUENCY} Hz (code {coarse_code}, v_c {v_c} V)");
        MIN_FREQUENCY
    } else {
        f
    }
}

/// All tap-0 crossings inside `window`, assuming frequency `f` from `state.t_last` on.
///
/// A crossing exactly at the window start counts as already happened and is
/// reflected in [`polarity_at`] instead.
pub fn transitions_in(state: &VcoState, window: &PulseWindow, f: f64) -> Vec<Transition> {
    let mut out = Vec::new();
    let a = state.frac + f * (window.t_start - state.t_last);
    let b = state.frac + f * (window.t_end - state.t_last);
    let mut m = (2.0 * a).floor() as i64 + 1;
    while m as f64 * 0.5 <= b {
        let time = state.t_last + (m as f64 * 0.5 - state.frac) / f;
        let direction = if m.rem_euclid(2) == 0 {
            Direction::Rise
        } else {
            Direction::Fall
        };
        out.push(Transition {
            time: time.clamp(window.t_start, window.t_end),
            direction,
        });
        m += 1;
    }
    out
}

/// Tap-0 polarity at time `t`, assuming frequency `f` from `state.t_last` on.
pub fn polarity_at(state: &VcoState, t: f64, f: f64) -> Polarity {
    let x = state.frac + f * (t - state.t_last);
    polarity_of(x.rem_euclid(1.0))
}

/// Phase offset of tap `k`: `2πk/32`.
pub fn tap_phase_offset(k: usize) -> Result<f64> {
    if k >= N_TAPS {
        return Err(Error::OutOfRange {
            what: "tap index",
            value: k as f64,
            range: format!("[0, {N_TAPS})"),
        });
    }
    Ok(TAU * k as f64 / N_TAPS as f64)
}

/// Flicker shaping: a bank of first-order relaxation processes whose corner
/// frequencies are spaced [`FLICKER_POLES_PER_DECADE`] per decade. Equal
/// variance per pole sums to a 1/f density between the outer corners.
pub const FLICKER_POLES_PER_DECADE: f64 = 2.0;
pub const FLICKER_LOWEST_POLE: f64 = 1.0;

#[derive(Debug, Clone)]
struct RelaxationPole {
    tau: f64,
    sigma: f64,
    x: f64,
}

/// VCO phase-noise generator: white FM plus optional flicker FM.
#[derive(Debug, Clone)]
pub struct PhaseNoise {
    /// Variance of the phase increment per second of white FM, rad²/s.
    white_rate: f64,
    poles: Vec<RelaxationPole>,
    rng: ChaCha8Rng,
}

impl PhaseNoise {
    /// `max_rate` bounds the highest flicker pole; pass the update rate.
    pub fn new(spec: &NoiseSpec, max_rate: f64, seed: u64) -> Self {
        Self::with_rng(spec, max_rate, stream_rng(seed, VCO_STREAM))
    }

    pub(crate) fn with_rng(spec: &NoiseSpec, max_rate: f64, mut rng: ChaCha8Rng) -> Self {
        let white_rate = TAU * TAU * spec.vco_white_fm / 2.0;
        let mut poles = Vec::new();
        if spec.vco_flicker_corner > 0.0 && spec.vco_white_fm > 0.0 {
            let level = spec.vco_white_fm * spec.vco_flicker_corner;
            let ratio_ln = LN_10 / FLICKER_POLES_PER_DECADE;
            let sigma = (level * ratio_ln).sqrt();
            let hi = (10.0 * spec.vco_flicker_corner).min(max_rate / 4.0);
            let mut fp = FLICKER_LOWEST_POLE;
            while fp <= hi {
                let z: f64 = StandardNormal.sample(&mut rng);
                poles.push(RelaxationPole {
                    tau: 1.0 / (TAU * fp),
                    sigma,
                    x: sigma * z,
                });
                fp *= ratio_ln.exp();
            }
        }
        Self { white_rate, poles, rng }
    }

    /// Phase increment in radians accumulated over `dt`.
    pub fn increment(&mut self, dt: f64) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        let mut dphi = 0.0;
        if self.white_rate > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            dphi += (self.white_rate * dt).sqrt() * z;
        }
        for p in &mut self.poles {
            let a = (-dt / p.tau).exp();
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let next = a * p.x + (1.0 - a * a).sqrt() * p.sigma * z;
            dphi += TAU * 0.5 * (p.x + next) * dt;
            p.x = next;
        }
        dphi
    }

    pub fn flicker_poles(&self) -> usize {
        self.poles.len()
    }
}

/// Phase of the control-voltage ripple's FM integral, radians.
///
/// A ripple `A·sin(2πf_r t)` on the control voltage contributes
/// `−(k_vco·A/f_r)·cos(2πf_r t)` to the VCO phase.
pub fn ripple_phase(k_vco: f64, amp: f64, f_r: f64, t: f64) -> f64 {
    if amp == 0.0 || f_r <= 0.0 {
        0.0
    } else {
        -(k_vco * amp / f_r) * (TAU * f_r * t).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::analysis::estimate_psd;
    use crate::stimulus::window_for_edge;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn frequency_law() {
        let cfg = SimConfig::default();
        assert_eq!(inst_freq(0, cfg.v_ctr, &cfg), cfg.f_base_min);
        let df = inst_freq(0, cfg.v_ctr + 0.1, &cfg) - cfg.f_base_min;
        assert!((df - 17.5e6).abs() < 1e-6);
        // 237.5 MHz base needs 12.5 MHz of fine tuning
        let dv = (250e6 - 237.5e6) / cfg.k_vco;
        assert!((dv - 71.43e-3).abs() < 1e-5);
        let cfg2 = SimConfig {
            f_base_min: 237.5e6,
            ..Default::default()
        };
        assert!((inst_freq(0, cfg2.v_ctr + dv, &cfg2) - 250e6).abs() < 1e-6);
        assert_eq!(inst_freq(0, -1e3, &cfg), MIN_FREQUENCY);
    }

    #[test]
    fn one_period_is_one_turn() {
        let s = VcoState::new(0.0, 0.0, 0, 0.0);
        let n = s.advance(4e-9, 250e6);
        assert!((n.phase() - TAU).abs() < 1e-12);
        assert_eq!(s.advance(0.0, 250e6), s);
    }

    #[test]
    fn single_transition_mid_window() {
        // rise at window start + 1 ns
        let f = 250e6;
        let s = VcoState::new(0.0, -TAU * f * 1e-9, 0, 0.0);
        let w = window_for_edge(0.0, 2e-9);
        let tr = transitions_in(&s, &w, f);
        assert_eq!(tr.len(), 1);
        assert_eq!(tr[0].direction, Direction::Rise);
        assert!((tr[0].time - 1e-9).abs() < 1e-18);
    }

    #[test]
    fn wide_window_sees_both_edges() {
        let s = VcoState::new(0.0, 0.3, 0, 0.0);
        let tr = transitions_in(&s, &window_for_edge(0.0, 5e-9), 250e6);
        assert!(tr.len() >= 2);
        assert!(tr.iter().any(|t| t.direction == Direction::Rise));
        assert!(tr.iter().any(|t| t.direction == Direction::Fall));
    }

    #[test]
    fn window_between_transitions_is_empty() {
        // high from 0 to 2 ns; window [0.5, 1.5] ns
        let s = VcoState::new(0.0, 0.0, 0, 0.0);
        let w = PulseWindow {
            t_start: 0.5e-9,
            t_end: 1.5e-9,
            width: 1e-9,
        };
        assert!(transitions_in(&s, &w, 250e6).is_empty());
        assert_eq!(polarity_at(&s, 0.5e-9, 250e6), Polarity::High);
    }

    #[test]
    fn tap_offsets() {
        assert_eq!(tap_phase_offset(0).unwrap(), 0.0);
        assert!((tap_phase_offset(16).unwrap() - PI).abs() < 1e-15);
        assert!((tap_phase_offset(8).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(tap_phase_offset(32).is_err());
        let s = VcoState::new(0.0, 0.1, 0, 0.0);
        assert_ne!(s.tap_level(0).unwrap(), s.tap_level(16).unwrap());
    }

    /// 1 ps sign-change scan of the tap-0 square wave.
    fn brute_force_transitions(s: &VcoState, w: &PulseWindow, f: f64) -> Vec<(f64, Direction)> {
        let dt = 1e-12;
        let n = (w.width / dt).ceil() as usize;
        let level = |t: f64| polarity_at(s, t, f);
        let mut prev = level(w.t_start);
        let mut out = Vec::new();
        for i in 1..=n {
            let t = (w.t_start + i as f64 * dt).min(w.t_end);
            let cur = level(t);
            if cur != prev {
                let d = if cur == Polarity::High {
                    Direction::Rise
                } else {
                    Direction::Fall
                };
                out.push((t - 0.5 * dt, d));
                prev = cur;
            }
        }
        out
    }

    #[test]
    fn transitions_match_fine_grid_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let f = rng.random_range(100e6..400e6);
            let phase = rng.random_range(0.0..1000.0);
            let t0 = rng.random_range(0.0..1e-6);
            let s = VcoState::new(t0, phase, 0, 0.0);
            let w = window_for_edge(t0 + rng.random_range(0.0..40e-9), rng.random_range(1e-9..5e-9));
            let exact = transitions_in(&s, &w, f);
            let scan = brute_force_transitions(&s, &w, f);
            assert_eq!(exact.len(), scan.len(), "f = {f}, phase = {phase}");
            for (e, (t, d)) in exact.iter().zip(&scan) {
                assert_eq!(e.direction, *d);
                assert!((e.time - t).abs() <= 1e-12, "{} vs {t}", e.time);
            }
        }
    }

    #[test]
    fn white_fm_density() {
        let h = 1e4;
        let spec = NoiseSpec {
            vco_white_fm: h,
            enabled: true,
            ..Default::default()
        };
        let dt = 40e-9;
        let mut noise = PhaseNoise::new(&spec, 1.0 / dt, 5);
        let s = VcoState::new(0.0, 0.0, 0, 0.0);
        let mut state = s;
        let mut freq = Vec::with_capacity(1_000_000);
        for _ in 0..1_000_000 {
            let next = state.advance_noisy(dt, 0.0, &mut noise);
            freq.push(next.turns_since(&state) / dt);
            state = next;
        }
        let spec_est = estimate_psd(&freq, 1.0 / dt, 1 << 12, 0.5).unwrap();
        // l_dbchz is 10log10(S/2); undo it for the frequency-sample density
        let mean: f64 = spec_est.l_dbchz[1..]
            .iter()
            .map(|l| 2.0 * 10f64.powf(l / 10.0))
            .sum::<f64>()
            / (spec_est.l_dbchz.len() - 1) as f64;
        assert!((mean / h - 1.0).abs() < 0.10, "estimated {mean}");
    }

    #[test]
    fn flicker_bank_slope() {
        let spec = NoiseSpec {
            vco_white_fm: 1.0,
            vco_flicker_corner: 1e5,
            enabled: true,
            ..Default::default()
        };
        let dt = 1e-6;
        let mut noise = PhaseNoise::new(&spec, 1.0 / dt, 2);
        assert!(noise.flicker_poles() > 8);
        let mut freq = Vec::with_capacity(1 << 20);
        for _ in 0..(1 << 20) {
            freq.push(noise.increment(dt) / TAU / dt);
        }
        let est = estimate_psd(&freq, 1.0 / dt, 1 << 14, 0.5).unwrap();
        let level_at = |f: f64| {
            let i = est.freqs.iter().position(|&x| x >= f).unwrap();
            let band = &est.l_dbchz[i - 3..i + 4];
            band.iter().map(|l| 2.0 * 10f64.powf(l / 10.0)).sum::<f64>() / band.len() as f64
        };
        // S(f) ≈ h·(1 + fc/f): expect roughly 10x per decade below the corner
        let ratio = level_at(500.0) / level_at(5000.0);
        assert!(ratio > 5.0 && ratio < 15.0, "ratio {ratio}");
        let expected = spec.vco_white_fm * spec.vco_flicker_corner / 2000.0;
        let got = level_at(2000.0);
        assert!((got / expected).log10().abs() < 0.15, "got {got}, expected {expected}");
    }

    proptest! {
        #[test]
        fn frequency_is_linear_in_control(code in 0u32..64, v1 in 0.2f64..1.0, v2 in 0.2f64..1.0) {
            let cfg = SimConfig::default();
            let d = inst_freq(code, v1, &cfg) - inst_freq(code, v2, &cfg);
            prop_assert!((d - cfg.k_vco * (v1 - v2)).abs() <= 1e-7);
        }

        #[test]
        fn split_advance_matches_single_step(n in 1usize..200, dt in 1e-10f64..1e-7, f in 1e8f64..4e8) {
            let s = VcoState::new(0.0, 1.0, 0, 0.0);
            let mut stepped = s;
            for _ in 0..n {
                stepped = stepped.advance(dt, f);
            }
            let once = s.advance(dt * n as f64, f);
            prop_assert!((stepped.phase() - once.phase()).abs() < 1e-9);
            prop_assert!((stepped.t_last - once.t_last).abs() < 1e-18 * n as f64);
        }

        #[test]
        fn phase_never_decreases(f in 1e8f64..4e8, dts in proptest::collection::vec(0.0f64..1e-7, 1..50)) {
            let mut s = VcoState::new(0.0, 0.0, 0, 0.0);
            for dt in dts {
                let n = s.advance(dt, f);
                prop_assert!(n.phase() >= s.phase());
                s = n;
            }
        }
    }
}
