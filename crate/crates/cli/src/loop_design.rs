//! The `fiber` subcommand.

use std::path::Path;

use serde::Serialize;
use talbot::fiber::{
    design, drive_profiles, reference_check, FiberDesign, FiberParams, ReferenceCheck, Verdict, PS_PER_NM_KM,
};

use crate::error::CliResult;
use crate::output;
use crate::scenario::PotentialSpec;

#[derive(Debug, Clone, Serialize)]
pub struct DriveTable {
    pub target: PotentialSpec,
    /// `[n, re, im]` Fourier coefficients of the phase drive.
    pub pm: Vec<(i64, f64, f64)>,
    /// `[n, re, im]` Fourier coefficients of the amplitude drive.
    pub am: Vec<(i64, f64, f64)>,
    pub pm_peak_to_peak: f64,
    pub am_peak_to_peak: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Capacity {
    pub pulse_count: Option<u32>,
    pub pulse_capacity: u64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub inputs: FiberParams,
    /// Same dispersion as `inputs.dispersion`, in ps/(nm km).
    pub dispersion_ps_nm_km: f64,
    pub design: FiberDesign,
    /// Absent when the target needs harmonics beyond the modulator
    /// bandwidth; `drive_error` then says which.
    pub drives: Option<DriveTable>,
    pub drive_error: Option<String>,
    pub capacity: Capacity,
    /// Published figures matching these inputs, with verdicts.
    pub annotations: Vec<ReferenceCheck>,
    /// Full published parameter set; present with `--paper-check`.
    pub reference_check: Option<Vec<ReferenceCheck>>,
}

fn same(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * y.abs()
}

/// Published figures that refer to exactly these loop parameters.
fn annotations(params: &FiberParams, checks: &[ReferenceCheck]) -> Vec<ReferenceCheck> {
    let r = FiberParams::reference();
    let fiber = same(params.wavelength, r.wavelength)
        && same(params.dispersion, r.dispersion)
        && same(params.loop_length, r.loop_length);
    if !fiber {
        return Vec::new();
    }
    let fast = same(params.modulation_frequency, 6e9) && params.n == 1;
    let base = same(params.modulation_frequency, 3e9) && params.n == 3 && params.m == 2;
    checks
        .iter()
        .filter(|c| if c.quantity.contains("6 GHz") { fast } else { base })
        .cloned()
        .collect()
}

pub fn fiber(params: &FiberParams, target: &PotentialSpec, with_reference: bool, out: &Path) -> CliResult<DesignReport> {
    let d = design(params)?;
    let (drives, drive_error) = match drive_profiles(params, &target.build()?) {
        Ok(d) => (Some(d), None),
        Err(e @ talbot::Error::BandwidthExceeded { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let checks = reference_check()?;
    let triples = |c: &[(i64, talbot::C64)]| c.iter().map(|(n, v)| (*n, v.re, v.im)).collect();
    let report = DesignReport {
        inputs: *params,
        dispersion_ps_nm_km: params.dispersion / PS_PER_NM_KM,
        capacity: Capacity {
            pulse_count: params.pulse_count,
            pulse_capacity: d.pulse_capacity,
            ok: params.pulse_count.is_none_or(|p| p as u64 <= d.pulse_capacity),
        },
        design: d,
        drives: drives.map(|d| DriveTable {
            target: target.clone(),
            pm: triples(&d.pm),
            am: triples(&d.am),
            pm_peak_to_peak: d.pm_peak_to_peak,
            am_peak_to_peak: d.am_peak_to_peak,
        }),
        drive_error,
        annotations: annotations(params, &checks),
        reference_check: with_reference.then_some(checks),
    };
    output::write_all(out, &[("design_report.json", output::json(&report))])?;
    Ok(report)
}

pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Agree => "AGREE",
        Verdict::OrderOfMagnitude => "ORDER_OF_MAGNITUDE",
        Verdict::Discrepancy => "DISCREPANCY",
    }
}
