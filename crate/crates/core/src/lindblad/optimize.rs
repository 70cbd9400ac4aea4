use crate::error::{Error, Result};
use crate::lindblad::reduced::{entanglement_fidelity_from_amplitude, transfer_amplitude};
use crate::lindblad::{PhysicalParams, PulseSchedule, QubitModel, StirapPulse};

const OMEGA_GRID: [f64; 5] = [0.1, 0.2, 0.3, 0.45, 0.7];
const WIDTH_GRID: [f64; 8] = [5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0];
const DELAY_GRID: [f64; 4] = [0.4, 0.8, 1.2, 1.6];

const SEARCH_DT: f64 = 0.05;
const FINAL_DT: f64 = 0.01;
const MAX_EVALS: usize = 400;
/// Weight of `ln(T·g0)` subtracted from the amplitude, breaking the near-flat
/// optimum in favour of shorter pulses.
const LENGTH_PENALTY: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirapOptimum {
    pub pulse: StirapPulse,
    /// Predicted entanglement fidelity of the hop.
    pub fidelity: f64,
    pub evaluations: usize,
}

/// Shape `(Ω/g0, T·g0, delay/T)` of a pulse pair.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Shape {
    omega: f64,
    width: f64,
    delay: f64,
}

impl Shape {
    fn clamp(self) -> Self {
        Shape {
            omega: self.omega.clamp(0.02, 3.0),
            width: self.width.clamp(1.0, 5000.0),
            delay: self.delay.clamp(0.2, 2.5),
        }
    }
}

struct Objective<'a> {
    params: &'a PhysicalParams,
    max_duration: Option<f64>,
    evals: usize,
}

impl Objective<'_> {
    fn pulse(&self, s: Shape) -> StirapPulse {
        StirapPulse::from_shape(self.params.g0, s.omega, s.width, s.delay)
    }

    fn amplitude(&mut self, s: Shape, dt_factor: f64) -> Result<f64> {
        let pulse = self.pulse(s);
        if let Some(max) = self.max_duration {
            if pulse.total_time > max {
                return Ok(f64::NEG_INFINITY);
            }
        }
        self.evals += 1;
        let p = self.params;
        let scale = (s.omega * p.g0 + p.g0 + 0.5 * p.gamma0).max(2.0 * p.g0 + 0.5 * p.kappa);
        let dt = (dt_factor / scale).min(pulse.total_time / 1000.0);
        let sched = PulseSchedule::GaussianStirap(pulse);
        Ok(transfer_amplitude(p, QubitModel::Lambda, &sched, pulse.total_time, dt)?.0)
    }

    fn score(&mut self, s: Shape) -> Result<f64> {
        Ok(self.amplitude(s, SEARCH_DT)? - LENGTH_PENALTY * s.width.ln())
    }
}

/// Deterministic pulse-shape search for Λ-qubit STIRAP: a coarse grid followed
/// by a compass search in `(ln Ω, ln T, delay/T)`. `max_duration` bounds the
/// hop window.
pub fn optimize_stirap(params: &PhysicalParams, max_duration: Option<f64>) -> Result<StirapOptimum> {
    params.validate()?;
    if !(params.g0 > 0.0) {
        return Err(Error::arg("STIRAP optimization needs g0 > 0"));
    }
    let mut obj = Objective { params, max_duration, evals: 0 };
    let mut best = (f64::NEG_INFINITY, Shape { omega: 0.3, width: 40.0, delay: 1.2 });
    for &omega in &OMEGA_GRID {
        for &width in &WIDTH_GRID {
            for &delay in &DELAY_GRID {
                let s = Shape { omega, width, delay };
                let a = obj.score(s)?;
                if a > best.0 {
                    best = (a, s);
                }
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::arg(format!("no STIRAP shape fits within {:?} us", max_duration)));
    }

    let mut step = [0.4f64, 0.4, 0.25];
    let min_step = [0.01, 0.01, 0.005];
    while obj.evals < MAX_EVALS && step.iter().zip(&min_step).any(|(s, m)| s > m) {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let c = best.1;
                let d = sign * step[axis];
                let cand = match axis {
                    0 => Shape { omega: c.omega * d.exp(), ..c },
                    1 => Shape { width: c.width * d.exp(), ..c },
                    _ => Shape { delay: c.delay + d, ..c },
                }
                .clamp();
                if cand == c {
                    continue;
                }
                let a = obj.score(cand)?;
                if a > best.0 + 1e-9 {
                    best = (a, cand);
                    improved = true;
                }
            }
        }
        if !improved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }

    let a = obj.amplitude(best.1, FINAL_DT)?;
    Ok(StirapOptimum {
        pulse: obj.pulse(best.1),
        fidelity: entanglement_fidelity_from_amplitude(a.max(0.0)),
        evaluations: obj.evals,
    })
}
