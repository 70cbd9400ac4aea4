use crate::error::Result;
use crate::lindblad::{hop_process, optimize_stirap, HopOptions, PhysicalParams, PulseSchedule, StirapPulse};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirapGain {
    /// Entanglement fidelity with the optimized STIRAP pulse pair.
    pub f_with: f64,
    /// Entanglement fidelity with a constant coupling switched off at the peak.
    pub f_without: f64,
    /// Share of the STIRAP fidelity gained: `(F_with - F_without) / F_with · 100`.
    pub percent_gain: f64,
    /// `(F_with - F_without) / F_without · 100`.
    pub relative_increase: f64,
    pub pulse: StirapPulse,
}

pub fn stirap_gain(params: &PhysicalParams, opts: &HopOptions) -> Result<StirapGain> {
    let opt = optimize_stirap(params, None)?;
    let base = HopOptions { model: None, ..opts.clone() };
    let (_, with) = hop_process(params, &PulseSchedule::GaussianStirap(opt.pulse), &base)?;
    let (_, without) = hop_process(params, &PulseSchedule::constant(params.g0), &base)?;
    let (fw, fc) = (with.fidelity, without.fidelity);
    Ok(StirapGain {
        f_with: fw,
        f_without: fc,
        percent_gain: (fw - fc) / fw * 100.0,
        relative_increase: (fw - fc) / fc * 100.0,
        pulse: opt.pulse,
    })
}
