use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use talbot::fiber::{dispersion_from_ps_nm_km, FiberParams, DEFAULT_BANDWIDTH, DEFAULT_GROUP_INDEX};
use talbot_cli::error::{CliError, CliResult, EXIT_VALIDATION};
use talbot_cli::loop_design::{fiber, verdict_label};
use talbot_cli::run::{reproduce, run};
use talbot_cli::scenario::{Family, PotentialSpec};
use talbot_cli::spectrum::bands;

#[derive(Parser)]
#[command(name = "talbot", version, about = "Talbot self-imaging in PT-symmetric complex crystals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PotentialArgs {
    /// FREE, EXP, ONE_SS, TWO_SS or MATHIEU.
    #[arg(long, default_value = "ONE_SS", value_parser = parse_family)]
    family: Family,
    /// Lattice period.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    a: f64,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "V0")]
    v0: Option<f64>,
    /// Keep only the real part of the potential.
    #[arg(long)]
    real_part_only: bool,
}

impl PotentialArgs {
    fn spec(&self) -> PotentialSpec {
        // families that need a parameter default it to 1
        let (rho, v0) = match self.family {
            Family::OneSs | Family::TwoSs => (self.rho.or(Some(1.0)), self.v0),
            Family::Exp | Family::Mathieu => (self.rho, self.v0.or(Some(1.0))),
            _ => (self.rho, self.v0),
        };
        PotentialSpec {
            rho,
            v0,
            real_part_only: self.real_part_only,
            ..PotentialSpec::family(self.family, self.a)
        }
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    serde_json::from_value(serde_json::Value::String(s.to_uppercase())).map_err(|_| format!("unknown family `{s}`"))
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario file.
    Run {
        scenario: PathBuf,
        /// Output directory, overriding `outputs.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the traces behind a figure (fig2, fig3 or fig4).
    Reproduce {
        figure: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Band diagram and singularity census of a potential.
    Bands {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, default_value_t = 64)]
        q_count: usize,
        #[arg(long, default_value_t = 7)]
        bands: usize,
        /// Classify degeneracies `E_1..E_n`.
        #[arg(long, default_value_t = 6)]
        levels: u32,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fiber-loop budget and modulator drives.
    Fiber(FiberArgs),
}

#[derive(clap::Args)]
struct FiberArgs {
    /// Wavelength, m.
    #[arg(long, default_value_t = 1560e-9)]
    wavelength: f64,
    /// Fiber dispersion, ps/(nm km).
    #[arg(long = "D-f", default_value_t = 50.0)]
    dispersion: f64,
    /// Loop length, m.
    #[arg(long = "L-f", default_value_t = 100.0)]
    loop_length: f64,
    /// Modulation frequency, Hz.
    #[arg(long = "nu-m", default_value_t = 3e9)]
    modulation_frequency: f64,
    /// Gain per round trip.
    #[arg(long, default_value_t = 0.0)]
    gain: f64,
    /// Loss per round trip.
    #[arg(long, default_value_t = 0.0)]
    loss: f64,
    #[arg(long = "N", default_value_t = 3)]
    n: u32,
    #[arg(long = "M", default_value_t = 2)]
    m: u32,
    #[arg(long)]
    pulse_count: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_GROUP_INDEX)]
    group_index: f64,
    /// Modulator bandwidth, Hz.
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
    bandwidth: f64,
    /// Potential realized by the drives.
    #[command(flatten)]
    target: PotentialArgs,
    /// Also evaluate the published parameter set and print verdicts.
    #[arg(long)]
    paper_check: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl FiberArgs {
    fn params(&self) -> FiberParams {
        FiberParams {
            wavelength: self.wavelength,
            dispersion: dispersion_from_ps_nm_km(self.dispersion),
            loop_length: self.loop_length,
            modulation_frequency: self.modulation_frequency,
            gain: self.gain,
            loss: self.loss,
            n: self.n,
            m: self.m,
            pulse_count: self.pulse_count,
            group_index: self.group_index,
            bandwidth: self.bandwidth,
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("TALBOT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| CliError::Validation(format!("TALBOT_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot size the thread pool: {e}")))
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run { scenario, out } => {
            let s = run(&scenario, out.as_deref())?;
            println!(
                "z_T = {:.6}, expectation {:?}, pass {}",
                s.revival_period, s.expectation, s.pass
            );
            for r in &s.revivals {
                println!("  Delta({:.6}) = {:.3e}", r.z, r.delta);
            }
        }
        Command::Reproduce { figure, out } => {
            let results = reproduce(&figure, &out)?;
            let mut failed = Vec::new();
            for (dir, s) in &results {
                let worst = s.revivals.iter().map(|r| r.delta).fold(0.0, f64::max);
                println!(
                    "{}: z_T = {:.6}, expectation {:?}, max Delta at revivals {worst:.3e}, pass {}",
                    dir.display(),
                    s.revival_period,
                    s.expectation,
                    s.pass
                );
                if !s.pass {
                    failed.push(dir.display().to_string());
                }
            }
            if !failed.is_empty() {
                return Err(CliError::Numerical(format!("tolerances not met in {failed:?}")));
            }
        }
        Command::Bands {
            potential,
            q_count,
            bands: count,
            levels,
            out,
        } => {
            let s = bands(&potential.spec(), q_count, count, levels, &out)?;
            println!(
                "max parabola deviation {:.3e}, gapless {}, defective energies {:?}",
                s.max_parabola_deviation, s.gapless, s.defective_energies
            );
        }
        Command::Fiber(args) => {
            let r = fiber(&args.params(), &args.target.spec(), args.paper_check, &args.out)?;
            let d = &r.design;
            println!("total dispersion {:.4e} s^2", d.total_dispersion);
            println!("round trips to revival {:.4e} (z_T = {:.6})", d.round_trips, d.revival_period);
            println!("pulse spacing {:.4e} s, capacity {} pulses", d.pulse_spacing, d.pulse_capacity);
            println!("modulation depth scale {:.4e}", d.depth_scale);
            match (&r.drives, &r.drive_error) {
                (Some(t), _) => println!(
                    "drive depths peak to peak: PM {:.4e}, AM {:.4e}",
                    t.pm_peak_to_peak, t.am_peak_to_peak
                ),
                (None, Some(e)) => println!("no drive table: {e}"),
                (None, None) => {}
            }
            let checks = r.reference_check.as_ref().unwrap_or(&r.annotations);
            for c in checks {
                println!(
                    "{} {}: computed {:.4e}, published {:.4e} ({})",
                    verdict_label(c.verdict),
                    c.quantity,
                    c.computed,
                    c.reference,
                    c.note
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match configure_threads().and_then(|()| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
