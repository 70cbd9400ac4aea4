use super::{BenchmarkCurve, CompareReport, FitReport};
use crate::error::{Error, Result};
use crate::netsim::SimRecord;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

fn node_columns(nodes: &[usize]) -> impl Iterator<Item = String> + '_ {
    nodes.iter().map(|n| format!("node_{n}"))
}

/// One row per sweep point, one column per node.
pub fn write_curve_csv<W: Write>(out: W, curve: &BenchmarkCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once(curve.variable.clone()).chain(node_columns(&curve.nodes)))?;
    for (i, x) in curve.x.iter().enumerate() {
        w.write_record(std::iter::once(x.to_string()).chain(curve.values.iter().map(|v| v[i].to_string())))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fit_csv<W: Write>(out: W, report: &FitReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(
        std::iter::once(report.parameter.clone())
            .chain(node_columns(&report.nodes).map(|c| format!("rmse_{c}")))
            .chain(["mean_rmse".to_owned(), "selected".to_owned()]),
    )?;
    for (i, c) in report.candidates.iter().enumerate() {
        w.write_record(
            std::iter::once(c.to_string())
                .chain(report.node_rmse[i].iter().map(f64::to_string))
                .chain([report.mean_rmse[i].to_string(), (i == report.selected_index).to_string()]),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare_csv<W: Write>(out: W, report: &CompareReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "rmse", "max_error", &format!("divergence_{}", report.variable)])?;
    for (k, n) in report.nodes.iter().enumerate() {
        let div = report.node_divergence[k].map(|x| x.to_string()).unwrap_or_default();
        w.write_record([n.to_string(), report.node_rmse[k].to_string(), report.max_error[k].to_string(), div])?;
    }
    w.flush()?;
    Ok(())
}

pub fn fit_summary(report: &FitReport) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:>10}", report.parameter);
    for n in &report.nodes {
        let _ = write!(s, "  node {n:<4}");
    }
    let _ = writeln!(s, "  mean");
    for (i, c) in report.candidates.iter().enumerate() {
        let mark = if i == report.selected_index { " *" } else { "" };
        let _ = write!(s, "{c:>10}");
        for r in &report.node_rmse[i] {
            let _ = write!(s, "  {r:<9.5}");
        }
        let _ = writeln!(s, "  {:.5}{mark}", report.mean_rmse[i]);
    }
    let _ = writeln!(s, "selected {} = {}", report.parameter, report.selected);
    s
}

pub fn compare_summary(report: &CompareReport) -> String {
    let mut s = String::new();
    for (k, n) in report.nodes.iter().enumerate() {
        let _ = write!(s, "node {n}: rmse {:.5}, max error {:.5}", report.node_rmse[k], report.max_error[k]);
        if let Some(x) = report.node_divergence[k] {
            let _ = write!(s, ", diverges at {} = {x}", report.variable);
        }
        s.push('\n');
    }
    match report.divergence {
        Some(x) => {
            let _ = writeln!(s, "model diverges from {} = {x}", report.variable);
        }
        None => s.push_str("no divergence\n"),
    }
    s
}

fn field(r: &SimRecord, variable: &str) -> Result<f64> {
    Ok(match variable {
        "g_hz" => r.g_hz,
        "kappa_hz" => r.kappa_hz,
        "t1_us" => r.t1_us,
        "t2_us" => r.t2_us,
        "length_um" => r.length_um,
        other => return Err(Error::arg(format!("cannot sweep over record field `{other}`"))),
    })
}

/// Groups records by `variable` and node (nodes ≥ 2), averaging repeated runs.
pub fn curve_from_records(records: &[SimRecord], variable: &str) -> Result<BenchmarkCurve> {
    let mut cells: BTreeMap<(u64, usize), (f64, f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.node >= 2) {
        let x = field(r, variable)?;
        let key = (x.to_bits(), r.node);
        let e = cells.entry(key).or_insert((x, 0.0, 0));
        e.1 += r.fidelity;
        e.2 += 1;
    }
    let mut xs: Vec<f64> = cells.values().map(|c| c.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut nodes: Vec<usize> = cells.keys().map(|k| k.1).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let mut values = vec![];
    for &n in &nodes {
        let row = xs
            .iter()
            .map(|x| {
                cells
                    .get(&(x.to_bits(), n))
                    .map(|c| c.1 / c.2 as f64)
                    .ok_or_else(|| Error::arg(format!("no record for node {n} at {variable} = {x}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    BenchmarkCurve::new(variable, xs, nodes, values)
}
