//! Reference-clock edges and the sampling pulse windows hung off them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::SimConfig;
use crate::{Error, Result};

pub const MIN_PULSE_WIDTH: f64 = 1e-9;
pub const MAX_PULSE_WIDTH: f64 = 5e-9;

/// RNG stream of the reference jitter.
pub(crate) const REF_STREAM: u64 = 1;
/// RNG stream of the VCO phase noise.
pub(crate) const VCO_STREAM: u64 = 2;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The sampling pulse `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub width: f64,
}

impl PulseWindow {
    pub fn contains(&self, t: f64) -> bool {
        self.t_start <= t && t <= self.t_end
    }

    pub fn overlaps(&self, other: &PulseWindow) -> bool {
        self.t_start < other.t_end && other.t_start < self.t_end
    }
}

/// Capacitor-bank setting of the pulse generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PulseWidthCode(u8);

impl PulseWidthCode {
    pub const MAX: u8 = 15;

    pub fn new(code: u8) -> Result<Self> {
        if code > Self::MAX {
            return Err(Error::OutOfRange {
                what: "pulse width code",
                value: code as f64,
                range: format!("[0, {}]", Self::MAX),
            });
        }
        Ok(Self(code))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// Linear map from code 0 (1 ns) to code 15 (5 ns).
pub fn width_from_code(code: PulseWidthCode) -> f64 {
    let step = (MAX_PULSE_WIDTH - MIN_PULSE_WIDTH) / PulseWidthCode::MAX as f64;
    MIN_PULSE_WIDTH + code.0 as f64 * step
}

/// The pulse opens on the reference edge.
pub fn window_for_edge(edge_time: f64, width: f64) -> PulseWindow {
    debug_assert!(width > 0.0);
    PulseWindow {
        t_start: edge_time,
        t_end: edge_time + width,
        width,
    }
}

/// `n` reference edges at `k/f_ref` with independent Gaussian timing jitter.
pub fn ref_edges(f_ref: f64, n: usize, jitter: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, REF_STREAM);
    (0..n)
        .map(|k| {
            let nominal = k as f64 / f_ref;
            if jitter > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                nominal + jitter * z
            } else {
                nominal
            }
        })
        .collect()
}

/// Edge generator used by the engine: jitter plus the configured frequency
/// and phase steps.
#[derive(Debug, Clone)]
pub struct RefClock {
    f_ref: f64,
    jitter: f64,
    rng: ChaCha8Rng,
    /// First edge index that runs at `f_step` and the frequency after the step.
    freq_step: Option<(u64, f64)>,
    /// Phase shift in seconds applied from the given time on.
    phase_step: Option<(f64, f64)>,
    next: u64,
}

impl RefClock {
    pub fn new(cfg: &SimConfig) -> Self {
        Self::starting_at(cfg, 0)
    }

    /// A clock whose next edge is `first`. The jitter sequence of a resumed
    /// clock is drawn afresh, so it differs from an uninterrupted run.
    pub fn starting_at(cfg: &SimConfig, first: u64) -> Self {
        let jitter = if cfg.noise.enabled {
            cfg.noise.ref_jitter_rms
        } else {
            0.0
        };
        let inj = &cfg.inject;
        let freq_step = (inj.ref_step_ppm != 0.0).then(|| {
            let k = (inj.ref_step_time * cfg.f_ref - 1e-9).ceil().max(0.0) as u64;
            (k, cfg.f_ref_final())
        });
        let phase_step = (inj.ref_phase_step != 0.0).then(|| {
            (
                inj.ref_phase_step_time,
                -inj.ref_phase_step / (2.0 * std::f64::consts::PI * cfg.f_ref),
            )
        });
        let stream = if first == 0 { REF_STREAM } else { REF_STREAM + (first << 8) };
        Self {
            f_ref: cfg.f_ref,
            jitter,
            rng: stream_rng(cfg.seed, stream),
            freq_step,
            phase_step,
            next: first,
        }
    }

    /// Edge time without jitter.
    pub fn nominal(&self, k: u64) -> f64 {
        let t = match self.freq_step {
            Some((ks, f_new)) if k >= ks => ks as f64 / self.f_ref + (k - ks) as f64 / f_new,
            _ => k as f64 / self.f_ref,
        };
        match self.phase_step {
            Some((tp, dt)) if t >= tp => t + dt,
            _ => t,
        }
    }

    /// Reference frequency in effect at edge `k`.
    pub fn frequency_at(&self, k: u64) -> f64 {
        match self.freq_step {
            Some((ks, f_new)) if k >= ks => f_new,
            _ => self.f_ref,
        }
    }

    pub fn next_index(&self) -> u64 {
        self.next
    }

    /// Index and time of the next edge.
    pub fn next_edge(&mut self) -> (u64, f64) {
        let k = self.next;
        self.next += 1;
        let mut t = self.nominal(k);
        if self.jitter > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            t += self.jitter * z;
        }
        (k, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseSpec;

    #[test]
    fn zero_jitter_edges_are_periodic() {
        let e = ref_edges(25e6, 3, 0.0, 7);
        assert_eq!(e, vec![0.0, 40e-9, 80e-9]);
    }

    #[test]
    fn jitter_statistics() {
        let sigma = 10.5e-12;
        let n = 100_000;
        let e = ref_edges(25e6, n, sigma, 42);
        let dev: Vec<f64> = e.iter().enumerate().map(|(k, t)| t - k as f64 / 25e6).collect();
        let mean = dev.iter().sum::<f64>() / n as f64;
        let var = dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!((std / sigma - 1.0).abs() < 0.03, "std = {std:e}");
    }

    #[test]
    fn same_seed_same_edges() {
        assert_eq!(ref_edges(25e6, 100, 1e-11, 3), ref_edges(25e6, 100, 1e-11, 3));
        assert_ne!(ref_edges(25e6, 100, 1e-11, 3), ref_edges(25e6, 100, 1e-11, 4));
    }

    #[test]
    fn width_codes() {
        assert_eq!(width_from_code(PulseWidthCode::new(0).unwrap()), 1e-9);
        assert!((width_from_code(PulseWidthCode::new(15).unwrap()) - 5e-9).abs() < 1e-24);
        let w7 = width_from_code(PulseWidthCode::new(7).unwrap());
        assert!((w7 - (1e-9 + 7.0 * 4e-9 / 15.0)).abs() < 1e-24);
        assert!((w7 - 2.8667e-9).abs() < 1e-13);
        assert!(PulseWidthCode::new(16).is_err());
        let widths: Vec<f64> = (0..=15).map(|c| width_from_code(PulseWidthCode::new(c).unwrap())).collect();
        assert!(widths.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn windows() {
        let w = window_for_edge(40e-9, 2e-9);
        assert_eq!((w.t_start, w.t_end), (40e-9, 42e-9));
        let w0 = window_for_edge(0.0, 5e-9);
        assert_eq!((w0.t_start, w0.t_end, w0.width), (0.0, 5e-9, 5e-9));
        let edges = ref_edges(25e6, 50, 0.0, 0);
        for pair in edges.windows(2) {
            let a = window_for_edge(pair[0], 5e-9);
            let b = window_for_edge(pair[1], 5e-9);
            assert!(!a.overlaps(&b));
        }
    }

    #[test]
    fn clock_matches_ref_edges() {
        let cfg = SimConfig {
            noise: NoiseSpec {
                enabled: true,
                ref_jitter_rms: 1e-11,
                ..Default::default()
            },
            seed: 9,
            ..Default::default()
        };
        let mut clk = RefClock::new(&cfg);
        let from_clock: Vec<f64> = (0..64).map(|_| clk.next_edge().1).collect();
        assert_eq!(from_clock, ref_edges(cfg.f_ref, 64, 1e-11, 9));
    }

    #[test]
    fn frequency_step_changes_period() {
        let mut cfg = SimConfig::default();
        cfg.inject.ref_step_ppm = 100.0;
        cfg.inject.ref_step_time = 400e-9; // edge 10
        let clk = RefClock::new(&cfg);
        let t_ref = 1.0 / 25e6;
        assert!((clk.nominal(10) - clk.nominal(9) - t_ref).abs() < 1e-21);
        let p = clk.nominal(11) - clk.nominal(10);
        assert!((p - t_ref / (1.0 + 1e-4)).abs() < 1e-21);
        assert_eq!(clk.frequency_at(9), 25e6);
    }

    #[test]
    fn phase_step_advances_edges() {
        let mut cfg = SimConfig::default();
        cfg.inject.ref_phase_step = 0.01;
        cfg.inject.ref_phase_step_time = 1e-6;
        let clk = RefClock::new(&cfg);
        let shift = clk.nominal(25) - 25.0 / 25e6;
        assert!((shift + 0.01 / (2.0 * std::f64::consts::PI * 25e6)).abs() < 1e-20);
        assert_eq!(clk.nominal(24), 24.0 / 25e6);
    }
}
