//! The `bands` subcommand.

use std::path::Path;

use serde::Serialize;
use talbot::bands::{band_diagram, detect_singularities};

use crate::error::CliResult;
use crate::output;
use crate::scenario::PotentialSpec;

#[derive(Debug, Clone, Serialize)]
pub struct BandsSummary {
    pub potential: PotentialSpec,
    pub q_count: usize,
    pub bands: usize,
    pub max_parabola_deviation: f64,
    pub gapless: bool,
    pub defective_energies: Vec<u32>,
}

pub fn bands(spec: &PotentialSpec, q_count: usize, bands: usize, n_energy_max: u32, out: &Path) -> CliResult<BandsSummary> {
    if bands == 0 {
        return Err(crate::error::CliError::Validation("at least one band is needed".into()));
    }
    let pot = spec.build()?;
    let diagram = band_diagram(&pot, q_count, bands - 1)?;
    let report = detect_singularities(&pot, n_energy_max);
    let summary = BandsSummary {
        potential: spec.clone(),
        q_count,
        bands,
        max_parabola_deviation: diagram.max_parabola_deviation(),
        gapless: diagram.is_gapless(),
        defective_energies: report.defective(),
    };
    output::write_all(
        out,
        &[
            ("bands.csv", output::bands_csv(&diagram)),
            ("singularities.csv", output::singularities_csv(&report)),
        ],
    )?;
    Ok(summary)
}
