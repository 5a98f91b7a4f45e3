//! The `run` and `reproduce` subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;
use talbot::bands::{band_diagram, detect_singularities, theorem1_applicable, Theorem1Verdict};
use talbot::propagation::{
    propagate, recurrence_search, Profile, ZSampling, NON_REVIVAL_THRESHOLD, NORM_TOLERANCE, REVIVAL_TOLERANCE,
};
use talbot::Tilt;

use crate::error::{CliError, CliResult};
use crate::output;
use crate::scenario::ScenarioFile;

/// Band diagram resolution written to bands.csv.
pub const Q_COUNT: usize = 64;
pub const ALPHA_MAX: usize = 6;
/// Degenerate energies `E_1..E_6` are classified.
pub const N_ENERGY_MAX: u32 = 6;
/// Approximate-recurrence threshold for Hermitian potentials.
pub const RECURRENCE_EPSILON: f64 = 0.05;
const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// Exact self-imaging at every multiple of `z_T`.
    Revival,
    /// A singularity is sampled: `Delta` stays away from zero.
    NoRevival,
    /// No exact statement applies (gapped crystal or non-Gaussian input).
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub revival: f64,
    pub non_revival: f64,
    pub recurrence: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RevivalCheck {
    pub z: f64,
    pub delta: f64,
    pub delta_half: f64,
    pub norm: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: ScenarioFile,
    pub lattice_period: f64,
    pub input_period: f64,
    pub field_period: f64,
    pub revival_period: f64,
    pub n_trunc: usize,
    pub gapless: bool,
    pub max_parabola_deviation: f64,
    pub defective_energies: Vec<u32>,
    /// Present for untilted inputs.
    pub theorem: Option<Theorem1Verdict>,
    pub expectation: Expectation,
    pub tolerances: Tolerances,
    pub revivals: Vec<RevivalCheck>,
    pub min_delta_after_departure: Option<f64>,
    pub hermitian: bool,
    pub max_norm_drift: f64,
    /// First return below `tolerances.recurrence`; Hermitian potentials only.
    pub recurrence: Option<f64>,
    pub pass: bool,
}

pub struct RunOutput {
    pub files: Vec<(&'static str, String)>,
    pub summary: Summary,
}

/// Computes every output in memory; nothing touches the disk.
pub fn execute(file: &ScenarioFile) -> CliResult<RunOutput> {
    let scenario = file.build()?;
    let pot = &scenario.potential;
    let trace = propagate(&scenario)?;
    let z_t = scenario.revival_period()?;

    let diagram = band_diagram(pot, Q_COUNT, ALPHA_MAX)?;
    let report = detect_singularities(pot, N_ENERGY_MAX);
    let gapless = diagram.is_gapless();
    let untilted = scenario.tilt == Tilt::from_integer(0);
    let theorem = untilted.then(|| theorem1_applicable(&report, scenario.commensurability.n()));
    let gaussian = matches!(scenario.profile, Profile::GaussianTrain { .. });
    let expectation = match (&theorem, gapless && gaussian) {
        (_, false) => Expectation::None,
        (Some(t), true) if !t.applicable => Expectation::NoRevival,
        _ => Expectation::Revival,
    };

    let z_max = trace.records.last().map_or(0.0, |r| r.z);
    let count = ((z_max / z_t + 1e-9).floor() as usize).max(1);
    let zs: Vec<f64> = (1..=count).map(|k| k as f64 * z_t).collect();
    let at_revivals = propagate(&talbot::propagation::Scenario {
        z: ZSampling::List(zs),
        snapshots: 0,
        ..scenario.clone()
    })?;
    let revivals: Vec<RevivalCheck> = at_revivals.records[1..]
        .iter()
        .map(|r| RevivalCheck {
            z: r.z,
            delta: r.delta,
            delta_half: r.delta_half,
            norm: r.norm,
            pass: match expectation {
                Expectation::Revival => r.delta < REVIVAL_TOLERANCE,
                Expectation::NoRevival => r.delta > NON_REVIVAL_THRESHOLD,
                Expectation::None => true,
            },
        })
        .collect();
    let min_after = trace.min_after_departure(NON_REVIVAL_THRESHOLD);

    let hermitian = pot.is_hermitian(HERMITIAN_TOLERANCE);
    let max_norm_drift = trace.records.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max);
    let recurrence = if hermitian {
        recurrence_search(&trace, RECURRENCE_EPSILON)?
    } else {
        None
    };

    let mut pass = revivals.iter().all(|r| r.pass);
    if expectation == Expectation::NoRevival {
        pass &= min_after.is_none_or(|m| m > NON_REVIVAL_THRESHOLD);
    }
    if hermitian {
        pass &= max_norm_drift <= NORM_TOLERANCE;
    }

    let summary = Summary {
        scenario: file.clone(),
        lattice_period: scenario.lattice_period(),
        input_period: scenario.input_period(),
        field_period: scenario.field_period(),
        revival_period: z_t,
        n_trunc: trace.n_trunc,
        gapless,
        max_parabola_deviation: diagram.max_parabola_deviation(),
        defective_energies: report.defective(),
        theorem,
        expectation,
        tolerances: Tolerances {
            revival: REVIVAL_TOLERANCE,
            non_revival: NON_REVIVAL_THRESHOLD,
            recurrence: RECURRENCE_EPSILON,
            norm: NORM_TOLERANCE,
        },
        revivals,
        min_delta_after_departure: min_after,
        hermitian,
        max_norm_drift,
        recurrence,
        pass,
    };
    let files = vec![
        ("trace.csv", output::trace_csv(&trace)),
        ("snapshots.csv", output::snapshots_csv(&trace, file.outputs.points)?),
        ("bands.csv", output::bands_csv(&diagram)),
        ("singularities.csv", output::singularities_csv(&report)),
        ("summary.json", output::json(&summary)),
    ];
    Ok(RunOutput { files, summary })
}

/// Runs a scenario and writes its outputs to `dir`. Tolerance failures are
/// reported after the files are written.
pub fn run_to(file: &ScenarioFile, dir: &Path) -> CliResult<Summary> {
    let out = execute(file)?;
    output::write_all(dir, &out.files)?;
    Ok(out.summary)
}

pub fn run(path: &Path, out: Option<&Path>) -> CliResult<Summary> {
    let file = ScenarioFile::load(path)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| file.outputs.dir.clone());
    let summary = run_to(&file, &dir)?;
    check(&summary, &dir)?;
    Ok(summary)
}

pub fn check(summary: &Summary, dir: &Path) -> CliResult<()> {
    if summary.pass {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "expected {:?} outcome not met; see {}",
            summary.expectation,
            dir.join("summary.json").display()
        )))
    }
}

/// Scenarios behind each reproducible figure.
pub fn bundled(figure: &str) -> Option<Vec<(&'static str, &'static str)>> {
    Some(match figure {
        "fig2" => vec![
            ("v0_0", include_str!("../scenarios/fig2_v0_0.json")),
            ("v0_1", include_str!("../scenarios/fig2_v0_1.json")),
            ("v0_2", include_str!("../scenarios/fig2_v0_2.json")),
        ],
        "fig3" => vec![
            ("d_n3_m2", include_str!("../scenarios/fig3d.json")),
            ("e_n2_m1", include_str!("../scenarios/fig3e.json")),
            ("f_n2_m1_tilted", include_str!("../scenarios/fig3f.json")),
        ],
        "fig4" => vec![("d_n3_m2", include_str!("../scenarios/fig4.json"))],
        _ => return None,
    })
}

pub const FIGURES: [&str; 3] = ["fig2", "fig3", "fig4"];

/// Runs every scenario of `figure` into `out/<figure>/<name>`.
pub fn reproduce(figure: &str, out: &Path) -> CliResult<Vec<(PathBuf, Summary)>> {
    let scenarios = bundled(figure).ok_or_else(|| {
        CliError::Validation(format!("unknown figure `{figure}`; expected one of {FIGURES:?}"))
    })?;
    let files = scenarios
        .iter()
        .map(|(name, text)| Ok((*name, ScenarioFile::parse(text)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut outputs = Vec::new();
    for (name, file) in &files {
        outputs.push((out.join(figure).join(name), execute(file)?));
    }
    for (dir, o) in &outputs {
        output::write_all(dir, &o.files)?;
    }
    Ok(outputs.into_iter().map(|(dir, o)| (dir, o.summary)).collect())
}
