use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomInputs {
    /// Integrated rms jitter, seconds.
    pub sigma_j: f64,
    /// Watts.
    pub power: f64,
    /// Square millimetres.
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomResult {
    /// Area-normalised jitter-power figure of merit, dB.
    pub fom_ja: f64,
    /// Jitter-power figure of merit without the area term, dB.
    pub fom: f64,
}

/// `20·log10(σ/1 s) + 10·log10(P/1 mW) + 10·log10(A/1 mm²)`.
pub fn fom_ja(inputs: FomInputs) -> Result<FomResult> {
    for (name, v) in [("sigma", inputs.sigma_j), ("power", inputs.power), ("area", inputs.area)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    let fom = 20.0 * inputs.sigma_j.log10() + 10.0 * (inputs.power / 1e-3).log10();
    Ok(FomResult {
        fom_ja: fom + 10.0 * inputs.area.log10(),
        fom,
    })
}
