//! JSON scenario files.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use talbot::propagation::{Commensurability, Profile, Scenario, ZSampling};
use talbot::{ComplexPotential, Tilt, C64};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Free,
    Exp,
    OneSs,
    TwoSs,
    Mathieu,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub family: Family,
    #[serde(default = "two_pi")]
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, rename = "V0", skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    /// `[n, re, im]` triples for `CUSTOM`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<(i64, f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Keep only the Hermitian (real) part of `V(x)`.
    #[serde(default)]
    pub real_part_only: bool,
}

fn two_pi() -> f64 {
    2.0 * PI
}

impl PotentialSpec {
    pub fn family(family: Family, a: f64) -> Self {
        Self {
            family,
            a,
            rho: None,
            v0: None,
            coeffs: None,
            n_max: None,
            real_part_only: false,
        }
    }

    pub fn build(&self) -> CliResult<ComplexPotential> {
        let need = |value: Option<f64>, name: &str| {
            value.ok_or_else(|| CliError::Validation(format!("potential family {:?} needs `{name}`", self.family)))
        };
        let unexpected = |present: bool, name: &str| {
            if present {
                Err(CliError::Validation(format!(
                    "potential family {:?} does not take `{name}`",
                    self.family
                )))
            } else {
                Ok(())
            }
        };
        let a = self.a;
        let pot = match self.family {
            Family::Free => {
                unexpected(self.rho.is_some(), "rho")?;
                unexpected(self.v0.is_some(), "V0")?;
                ComplexPotential::free(a)?
            }
            Family::Exp | Family::Mathieu => {
                unexpected(self.rho.is_some(), "rho")?;
                let v0 = need(self.v0, "V0")?;
                if self.family == Family::Exp {
                    ComplexPotential::exp(a, v0)?
                } else {
                    ComplexPotential::mathieu(a, v0)?
                }
            }
            Family::OneSs | Family::TwoSs => {
                unexpected(self.v0.is_some(), "V0")?;
                let rho = need(self.rho, "rho")?;
                match (self.family, self.n_max) {
                    (Family::OneSs, None) => ComplexPotential::one_ss(a, rho)?,
                    (Family::OneSs, Some(n)) => ComplexPotential::one_ss_with(a, rho, n)?,
                    (_, None) => ComplexPotential::two_ss(a, rho)?,
                    (_, Some(n)) => ComplexPotential::two_ss_with(a, rho, n)?,
                }
            }
            Family::Custom => {
                unexpected(self.rho.is_some(), "rho")?;
                unexpected(self.v0.is_some(), "V0")?;
                let coeffs = self
                    .coeffs
                    .as_ref()
                    .ok_or_else(|| CliError::Validation("potential family CUSTOM needs `coeffs`".into()))?;
                ComplexPotential::custom(a, coeffs.iter().map(|(n, re, im)| (*n, C64::new(*re, *im))))?
            }
        };
        if self.family != Family::Custom {
            unexpected(self.coeffs.is_some(), "coeffs")?;
        }
        Ok(if self.real_part_only { pot.real_part() } else { pot })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommensurabilitySpec {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltSpec {
    pub p_num: i64,
    pub p_den: i64,
}

impl Default for TiltSpec {
    fn default() -> Self {
        Self { p_num: 0, p_den: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    GaussianTrain,
    JordanV,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    /// Gaussian width as a fraction of the input period ℒ.
    #[serde(default, rename = "width_over_L", skip_serializing_if = "Option::is_none")]
    pub width_over_l: Option<f64>,
    /// Degenerate level `E_n` whose Jordan vector is launched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevivalParams {
    pub periods: f64,
    #[serde(default = "default_per_period")]
    pub samples_per_period: usize,
}

fn default_per_period() -> usize {
    talbot::propagation::SAMPLES_PER_REVIVAL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceParams {
    pub step: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListParams {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZSpec {
    Revivals(RevivalParams),
    Trace(TraceParams),
    List(ListParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    /// Samples per field period in snapshots.csv (raised when the field
    /// needs more).
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_snapshots() -> usize {
    65
}

fn default_points() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub potential: PotentialSpec,
    pub commensurability: CommensurabilitySpec,
    #[serde(default)]
    pub tilt: TiltSpec,
    pub profile: ProfileSpec,
    pub z: ZSpec,
    pub outputs: OutputSpec,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn tilt(&self) -> CliResult<Tilt> {
        if self.tilt.p_den <= 0 {
            return Err(CliError::Validation(format!(
                "tilt denominator must be positive, got {}",
                self.tilt.p_den
            )));
        }
        Ok(Tilt::new(self.tilt.p_num, self.tilt.p_den))
    }

    /// Library scenario with every parameter checked.
    pub fn build(&self) -> CliResult<Scenario> {
        let potential = self.potential.build()?;
        let c = Commensurability::new(self.commensurability.n, self.commensurability.m)?;
        let tilt = self.tilt()?;
        let profile = match self.profile.kind {
            ProfileKind::GaussianTrain => {
                if self.profile.level.is_some() {
                    return Err(CliError::Validation("gaussian_train does not take `level`".into()));
                }
                let width = self.profile.width_over_l.map(|f| f * c.input_period(potential.period()));
                Profile::GaussianTrain { width }
            }
            ProfileKind::JordanV => {
                if self.profile.width_over_l.is_some() {
                    return Err(CliError::Validation("jordan_v does not take `width_over_L`".into()));
                }
                Profile::JordanV {
                    n: self.profile.level.unwrap_or(1),
                }
            }
        };
        let z = match &self.z {
            ZSpec::Revivals(p) => {
                let z_t = talbot::propagation::predict_revival(c.n(), c.m(), potential.period(), tilt)?;
                if !(p.periods > 0.0 && p.periods.is_finite()) || p.samples_per_period == 0 {
                    return Err(CliError::Validation(
                        "revivals mode needs periods > 0 and samples_per_period > 0".into(),
                    ));
                }
                ZSampling::per_revival(z_t, p.periods, p.samples_per_period)
            }
            ZSpec::Trace(p) => ZSampling::Uniform {
                step: p.step,
                count: p.count,
            },
            ZSpec::List(p) => ZSampling::List(p.values.clone()),
        };
        Ok(Scenario::new(potential, c, tilt, profile, z)?.with_snapshots(self.outputs.snapshots))
    }
}
