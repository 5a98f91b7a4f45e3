//! CSV and JSON emitters. Numbers use 17 significant digits so repeated runs
//! are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use talbot::bands::{BandDiagram, SingularityReport};
use talbot::grid::to_samples;
use talbot::propagation::PropagationTrace;
use talbot::{Grid, Result};

use crate::error::{CliError, CliResult};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_csv(trace: &PropagationTrace) -> String {
    let mut s = String::from("z,delta,delta_half,norm\n");
    for r in &trace.records {
        let _ = writeln!(s, "{},{},{},{}", num(r.z), num(r.delta), num(r.delta_half), num(r.norm));
    }
    s
}

/// Samples every kept snapshot on a common grid of at least `points`
/// samples per field period.
pub fn snapshots_csv(trace: &PropagationTrace, points: usize) -> Result<String> {
    let widest = trace.snapshots().map(|(_, f)| f.max_index()).max().unwrap_or(0);
    let needed = (2 * (widest as usize + 1)).next_power_of_two();
    let grid = Grid::new(trace.field_period, points.max(needed).max(64).next_power_of_two())?;
    let mut s = String::from("z,x,re_psi,im_psi\n");
    for (z, field) in trace.snapshots() {
        let samples = to_samples(field, &grid)?;
        for (j, v) in samples.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", num(z), num(grid.x(j)), num(v.re), num(v.im));
        }
    }
    Ok(s)
}

pub fn bands_csv(diagram: &BandDiagram) -> String {
    let mut s = String::from("q,alpha,re_E,im_E,beta\n");
    for (q, row) in diagram.q.iter().zip(&diagram.energies) {
        for (alpha, (e, beta)) in row.iter().zip(&diagram.folding).enumerate() {
            let _ = writeln!(s, "{},{alpha},{},{},{beta}", num(*q), num(e.re), num(e.im));
        }
    }
    s
}

pub fn singularities_csv(report: &SingularityReport) -> String {
    let mut s = String::from("n,E,q_loc,defective,angle\n");
    for r in &report.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.n,
            num(r.energy),
            num(r.q_loc),
            r.defective,
            num(r.coalescence_angle)
        );
    }
    s
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes already-computed files, creating `dir` first.
pub fn write_all(dir: &Path, files: &[(&str, String)]) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
