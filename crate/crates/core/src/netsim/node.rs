use crate::channels::DecoherenceModel;
use crate::error::{Error, Result};
use crate::quantum::{amplitude_damping_kraus, apply_channel, phase_damping_kraus, DensityMatrix, KrausChannel};

/// A stored state. The data qubit is always the last subsystem.
#[derive(Clone, Debug)]
pub struct Memory {
    pub state: DensityMatrix,
    pub last_touched_ns: f64,
}

#[derive(Clone, Debug)]
pub struct NetworkNode {
    pub id: usize,
    pub decoherence: DecoherenceModel,
    pub t1_us: f64,
    pub t2_us: f64,
    memory: Option<Memory>,
}

/// Amplitude damping with `1 - relaxation` followed by phase damping by the
/// dephasing factor, for an idle interval of `elapsed_us`.
pub fn memory_noise_channel(model: &DecoherenceModel, t1_us: f64, t2_us: f64, elapsed_us: f64) -> Result<KrausChannel> {
    let ad = amplitude_damping_kraus(1.0 - model.relaxation(t1_us, elapsed_us)?)?;
    let pd = phase_damping_kraus(model.dephasing(t2_us, elapsed_us)?)?;
    ad.then(&pd)
}

impl NetworkNode {
    pub fn new(id: usize, decoherence: DecoherenceModel, t1_us: f64, t2_us: f64) -> Self {
        Self { id, decoherence, t1_us, t2_us, memory: None }
    }

    pub fn memory(&self) -> Option<&Memory> {
        self.memory.as_ref()
    }

    pub fn is_occupied(&self) -> bool {
        self.memory.is_some()
    }

    pub fn store(&mut self, state: DensityMatrix, at_ns: f64) -> Result<()> {
        if self.memory.is_some() {
            return Err(Error::Protocol(format!("node {} memory is already occupied", self.id)));
        }
        self.memory = Some(Memory { state, last_touched_ns: at_ns });
        Ok(())
    }

    pub fn take(&mut self) -> Result<Memory> {
        self.memory.take().ok_or_else(|| Error::Protocol(format!("node {} holds no state", self.id)))
    }

    /// Decoheres the stored state for `elapsed_ns` and advances `last_touched`.
    pub fn apply_memory_noise(&mut self, elapsed_ns: f64) -> Result<()> {
        let (model, t1, t2) = (self.decoherence, self.t1_us, self.t2_us);
        let mem = self.memory.as_mut().ok_or_else(|| Error::Protocol(format!("node {} holds no state", self.id)))?;
        if elapsed_ns.is_nan() || elapsed_ns < 0.0 {
            return Err(Error::arg(format!("elapsed time must be ≥ 0, got {elapsed_ns}")));
        }
        if elapsed_ns > 0.0 {
            let ch = memory_noise_channel(&model, t1, t2, elapsed_ns * 1e-3)?;
            let last = mem.state.layout().len() - 1;
            mem.state = apply_channel(&mem.state, &ch, last)?;
        }
        mem.last_touched_ns += elapsed_ns;
        Ok(())
    }
}
