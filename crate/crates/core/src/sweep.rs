//! Parameter sweeps over one numeric configuration key.
//!
//! Points run in parallel; rows come back ordered by parameter value.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::engine::run_transient;
use crate::linear::{build_loop_model, stability};
use crate::model::{field_info, FieldKind, SimConfig};
use crate::report::{summarize, Summary};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub summary: Summary,
    pub k_pd_i: f64,
    pub ugb_hz: f64,
    pub pm_deg: f64,
}

/// `steps` equally spaced values from `from` to `to` inclusive.
pub fn sweep_points(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// The configuration of one sweep point; errors if `key` is not numeric or
/// the resulting configuration is invalid.
pub fn point_config(base: &SimConfig, key: &str, value: f64) -> Result<SimConfig> {
    match field_info(key) {
        None => return Err(Error::InvalidArgument(format!("unknown configuration key `{key}`"))),
        Some(f) if f.kind == FieldKind::Bool => {
            return Err(Error::InvalidArgument(format!("`{key}` is not numeric")));
        }
        Some(_) => {}
    }
    let mut cfg = base.clone();
    cfg.set_numeric(key, value).map_err(Error::InvalidArgument)?;
    let v = cfg.validate();
    if !v.is_empty() {
        return Err(Error::InvalidConfig(v));
    }
    Ok(cfg)
}

pub fn sweep(base: &SimConfig, key: &str, from: f64, to: f64, steps: usize) -> Result<Vec<SweepRow>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    let configs = sweep_points(from, to, steps)
        .into_iter()
        .map(|v| point_config(base, key, v).map(|c| (v, c)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = configs
        .par_iter()
        .map(|(value, cfg)| {
            let run = run_transient(cfg)?;
            let summary = summarize(cfg, &run.trace)?.summary;
            let model = build_loop_model(cfg);
            let st = stability(&model);
            Ok(SweepRow {
                value: *value,
                summary,
                k_pd_i: model.k_pd_i,
                ugb_hz: st.unity_gain_bw,
                pm_deg: st.phase_margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

pub fn render_csv(key: &str, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{key},{},k_pd_i_A_per_rad,ugb_hz,pm_deg", Summary::KEYS.join(","));
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.value,
            r.summary.values().join(","),
            r.k_pd_i,
            r.ugb_hz,
            r.pm_deg
        );
    }
    s
}
