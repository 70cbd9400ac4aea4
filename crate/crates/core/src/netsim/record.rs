use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const HEADER: [&str; 14] = [
    "run_id",
    "node",
    "arrival_ns",
    "fidelity",
    "g_hz",
    "kappa_hz",
    "t1_us",
    "t2_us",
    "length_um",
    "model",
    "sigma",
    "delta",
    "epsilon",
    "seed",
];

/// One node's fidelity observation. `node` is 1-based along the route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub run_id: u64,
    pub node: usize,
    pub arrival_ns: f64,
    pub fidelity: f64,
    pub g_hz: f64,
    pub kappa_hz: f64,
    pub t1_us: f64,
    pub t2_us: f64,
    pub length_um: f64,
    pub model: String,
    pub sigma: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: u64,
}

pub fn write_records<W: Write>(out: W, records: &[SimRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<SimRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(Error::arg(format!("unexpected record header: {}", header.join(","))));
    }
    let mut out = vec![];
    for row in rd.deserialize() {
        let r: SimRecord = row?;
        if !(0.0..=1.0).contains(&r.fidelity) {
            return Err(Error::arg(format!("fidelity {} outside [0,1]", r.fidelity)));
        }
        out.push(r);
    }
    Ok(out)
}

/// Per-node mean fidelity, ordered by node. Metadata comes from the first
/// record seen for each node; `run_id` of the result is 0.
pub fn average_by_node(records: &[SimRecord]) -> Vec<SimRecord> {
    let mut groups: std::collections::BTreeMap<usize, (SimRecord, f64, usize)> = Default::default();
    for r in records {
        let e = groups.entry(r.node).or_insert_with(|| (r.clone(), 0.0, 0));
        e.1 += r.fidelity;
        e.2 += 1;
    }
    groups
        .into_values()
        .map(|(mut r, sum, n)| {
            r.run_id = 0;
            r.fidelity = (sum / n as f64).clamp(0.0, 1.0);
            r
        })
        .collect()
}
