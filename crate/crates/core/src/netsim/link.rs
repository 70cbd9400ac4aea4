use crate::channels::{ChannelModel, LatencyModel};
use crate::error::{Error, Result};
use crate::lindblad::PhysicalParams;
use crate::quantum::{amplitude_damping_kraus, apply_channel, DensityMatrix, KrausChannel};

/// Cavity link between adjacent nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityLink {
    pub from: usize,
    pub to: usize,
    pub params: PhysicalParams,
    pub channel: ChannelModel,
    pub latency: LatencyModel,
}

impl CavityLink {
    pub fn new(
        from: usize,
        to: usize,
        params: PhysicalParams,
        channel: ChannelModel,
        latency: LatencyModel,
    ) -> Result<Self> {
        if from == to {
            return Err(Error::arg(format!("link endpoints must differ (both {from})")));
        }
        params.validate()?;
        channel.validate()?;
        Ok(Self { from, to, params, channel, latency })
    }

    pub fn gamma(&self) -> Result<f64> {
        self.channel.gamma_cavity(self.params.kappa_hz(), self.params.g_hz())
    }

    pub fn latency_ns(&self) -> Result<f64> {
        self.latency.latency_ns(self.params.g_hz(), self.params.length_um)
    }

    pub fn kraus(&self) -> Result<KrausChannel> {
        amplitude_damping_kraus(self.gamma()?)
    }

    /// Damps the last subsystem of `state` and returns it with its arrival time.
    pub fn transmit(&self, state: &DensityMatrix, send_ns: f64) -> Result<(DensityMatrix, f64)> {
        let last = state.layout().len() - 1;
        if state.layout().dims()[last] != 2 {
            return Err(Error::arg("transmitted subsystem must be a qubit"));
        }
        let out = apply_channel(state, &self.kraus()?, last)?;
        Ok((out, send_ns + self.latency_ns()?))
    }
}
