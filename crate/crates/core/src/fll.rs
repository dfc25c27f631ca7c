//! Coarse frequency-locked loop.
//!
//! Counts whole VCO periods over `fll_window_N` reference periods, compares
//! the count against two thresholds and walks the DAC code one step at a
//! time. Inside the dead zone `[count_lo, count_hi]` it disengages for good.

use crate::model::SimConfig;
use crate::{Error, Result};

/// Relative slack for the threshold rounding, so `0.9·40` lands on 36.
const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FllState {
    pub code: u32,
    pub engaged: bool,
    pub count_lo: i64,
    pub count_hi: i64,
    pub max_code: u32,
    pub window_n: u32,
    /// Reference periods accumulated in the current window.
    pub periods_elapsed: u32,
    /// VCO periods counted in the current window.
    pub cycle_count: i64,
}

impl FllState {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let (count_lo, count_hi) = thresholds(cfg)?;
        Ok(Self {
            code: cfg.start_code().min(cfg.max_code()),
            engaged: true,
            count_lo,
            count_hi,
            max_code: cfg.max_code(),
            window_n: cfg.fll_window_n,
            periods_elapsed: 0,
            cycle_count: 0,
        })
    }

    /// Adds one reference period carrying `vco_periods` counted VCO periods.
    /// Returns the window count when the window closes.
    pub fn accumulate(&mut self, vco_periods: i64) -> Option<i64> {
        self.cycle_count += vco_periods;
        self.periods_elapsed += 1;
        if self.periods_elapsed < self.window_n {
            return None;
        }
        let count = self.cycle_count;
        self.periods_elapsed = 0;
        self.cycle_count = 0;
        Some(count)
    }

    pub fn in_dead_zone(&self, count: i64) -> bool {
        self.count_lo <= count && count <= self.count_hi
    }
}

fn rounded_thresholds(cfg: &SimConfig, n: u32) -> (i64, i64) {
    let scale = cfg.mult_m as f64 * n as f64;
    let lo = cfg.fll_band_lo * scale;
    let hi = cfg.fll_band_hi * scale;
    (
        (lo * (1.0 - ROUNDING_SLACK)).ceil() as i64,
        (hi * (1.0 + ROUNDING_SLACK)).floor() as i64,
    )
}

/// `(ceil(lo·M·N), floor(hi·M·N))`; errors when the window cannot resolve the band.
pub fn thresholds(cfg: &SimConfig) -> Result<(i64, i64)> {
    let n = cfg.fll_window_n;
    let (count_lo, count_hi) = rounded_thresholds(cfg, n);
    if count_lo < count_hi && n > 0 {
        return Ok((count_lo, count_hi));
    }
    let min_window = (1..=1_000_000u32)
        .find(|&m| {
            let (lo, hi) = rounded_thresholds(cfg, m);
            lo < hi
        })
        .unwrap_or(u32::MAX);
    Err(Error::UnresolvableBand {
        window: n,
        count_lo,
        count_hi,
        min_window,
    })
}

/// Whole VCO periods in `n` reference periods: `floor(n·f_vco/f_ref)`.
pub fn count_cycles(f_vco: f64, f_ref: f64, n: u32) -> i64 {
    debug_assert!(f_vco > 0.0 && f_ref > 0.0);
    (n as f64 * f_vco / f_ref * (1.0 + ROUNDING_SLACK)).floor() as i64
}

/// One comparator decision. A disengaged state is returned unchanged.
pub fn fll_step(state: FllState, count: i64) -> FllState {
    if !state.engaged {
        return state;
    }
    let mut next = state;
    if count < state.count_lo {
        if state.code == state.max_code {
            log::warn!("FLL code saturated at {} with count {count} < {}", state.max_code, state.count_lo);
        } else {
            next.code += 1;
        }
    } else if count > state.count_hi {
        if state.code == 0 {
            log::warn!("FLL code saturated at 0 with count {count} > {}", state.count_hi);
        } else {
            next.code -= 1;
        }
    } else {
        next.engaged = false;
    }
    next
}

/// Outcome of an FLL acquisition driven by analytic counts at `v_ctr`.
#[derive(Debug, Clone, PartialEq)]
pub struct Acquisition {
    /// Code before each comparator decision, then the final code.
    pub codes: Vec<u32>,
    pub disengaged: bool,
}

impl Acquisition {
    pub fn final_code(&self) -> u32 {
        *self.codes.last().expect("at least the start code")
    }

    pub fn steps(&self) -> usize {
        self.codes.len() - 1
    }
}

/// Runs the FLL from `start_code` with counts `floor(N·f_base(code)/f_ref)`
/// until it disengages or `max_decisions` comparator decisions have elapsed.
pub fn acquire_analytic(cfg: &SimConfig, start_code: u32, max_decisions: usize) -> Result<Acquisition> {
    let mut state = FllState {
        code: start_code,
        ..FllState::new(cfg)?
    };
    let mut codes = vec![state.code];
    for _ in 0..max_decisions {
        let count = count_cycles(cfg.f_base(state.code), cfg.f_ref, cfg.fll_window_n);
        let next = fll_step(state, count);
        if !next.engaged {
            return Ok(Acquisition { codes, disengaged: true });
        }
        state = next;
        codes.push(state.code);
    }
    Ok(Acquisition {
        codes,
        disengaged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(lo: i64, hi: i64, code: u32) -> FllState {
        FllState {
            code,
            engaged: true,
            count_lo: lo,
            count_hi: hi,
            max_code: 63,
            window_n: 4,
            periods_elapsed: 0,
            cycle_count: 0,
        }
    }

    #[test]
    fn default_thresholds() {
        assert_eq!(thresholds(&SimConfig::default()).unwrap(), (36, 38));
        let cfg = SimConfig {
            fll_window_n: 20,
            ..Default::default()
        };
        assert_eq!(thresholds(&cfg).unwrap(), (180, 190));
    }

    #[test]
    fn single_period_window_is_unresolvable() {
        let cfg = SimConfig {
            fll_window_n: 1,
            ..Default::default()
        };
        match thresholds(&cfg) {
            Err(Error::UnresolvableBand {
                count_lo: 9,
                count_hi: 9,
                min_window: 2,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        let msg = thresholds(&cfg).unwrap_err().to_string();
        assert!(msg.contains("fll_window_N = 2"), "{msg}");
    }

    #[test]
    fn counts() {
        assert_eq!(count_cycles(230e6, 25e6, 4), 36);
        assert_eq!(count_cycles(250e6, 25e6, 4), 40);
        assert_eq!(count_cycles(100e6, 25e6, 1), 4);
    }

    #[test]
    fn comparator_decisions() {
        let s = state(36, 38, 10);
        assert_eq!(fll_step(s, 35).code, 11);
        assert!(fll_step(s, 35).engaged);
        let dz = fll_step(s, 37);
        assert!(!dz.engaged);
        assert_eq!(dz.code, 10);
        assert_eq!(fll_step(s, 39).code, 9);
        assert!(!fll_step(s, 36).engaged && !fll_step(s, 38).engaged);
    }

    #[test]
    fn saturation_and_freeze() {
        assert_eq!(fll_step(state(36, 38, 63), 0).code, 63);
        assert_eq!(fll_step(state(36, 38, 0), 99).code, 0);
        let frozen = fll_step(state(36, 38, 20), 37);
        for count in [0, 37, 100] {
            assert_eq!(fll_step(frozen, count), frozen);
        }
    }

    #[test]
    fn accumulate_closes_every_window() {
        let mut s = state(36, 38, 5);
        assert_eq!(s.accumulate(10), None);
        assert_eq!(s.accumulate(10), None);
        assert_eq!(s.accumulate(9), None);
        assert_eq!(s.accumulate(8), Some(37));
        assert_eq!((s.periods_elapsed, s.cycle_count), (0, 0));
    }

    #[test]
    fn analytic_acquisition_from_top() {
        let cfg = SimConfig::default();
        let acq = acquire_analytic(&cfg, cfg.max_code(), 64).unwrap();
        assert!(acq.disengaged);
        assert_eq!(acq.final_code(), 43);
        assert!(acq.codes.windows(2).all(|w| w[1] + 1 == w[0]));
        let f = cfg.f_base(acq.final_code());
        assert!((0.9 * 250e6..0.95 * 250e6 + 25e6 / 4.0).contains(&f));
    }
}
