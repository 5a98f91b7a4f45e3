//! Recirculating dispersive fiber loop as a temporal complex crystal.
//!
//! With `x = Omega_m tau` and `z = n * Omega_m^2 D_tot` (round trip `n`),
//! the loop master equation
//!
//! ```text
//! i d(psi)/dn = -D_tot d^2(psi)/dtau^2 + [d_PM(tau) + i d_AM(tau)] psi + i (g - l) psi
//! ```
//!
//! becomes the normalized Schrödinger equation with lattice period `2 pi` and
//!
//! ```text
//! V(x) = [d_PM(x) + i d_AM(x) + i (g - l)] / (D_tot Omega_m^2)
//! ```

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, C64, I};
use crate::potential::{potential_samples, ComplexPotential};
use crate::propagation::predict_revival;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `1 ps / (nm km)` in `s / m^2`.
pub const PS_PER_NM_KM: f64 = 1e-12 / (1e-9 * 1e3);

/// Default modulator bandwidth, Hz.
pub const DEFAULT_BANDWIDTH: f64 = 40e9;

/// Default group index of silica fiber.
pub const DEFAULT_GROUP_INDEX: f64 = 1.45;

/// Drive harmonics below this fraction of the strongest are ignored by the
/// bandwidth check.
const BANDWIDTH_FLOOR: f64 = 1e-6;

/// Relative agreement required for an `Agree` verdict.
pub const AGREEMENT_TOLERANCE: f64 = 0.02;

/// Fiber dispersion given in `ps / (nm km)`, returned in `s / m^2`.
pub fn dispersion_from_ps_nm_km(d: f64) -> f64 {
    d * PS_PER_NM_KM
}

/// `D_tot = lambda^2 D L_f / (4 pi c)` in `s^2`.
pub fn total_dispersion(wavelength: f64, dispersion: f64, loop_length: f64) -> f64 {
    wavelength * wavelength * dispersion * loop_length / (4.0 * PI * SPEED_OF_LIGHT)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberParams {
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Fiber dispersion, s/m^2.
    pub dispersion: f64,
    /// Loop length, m.
    pub loop_length: f64,
    /// Modulation frequency `nu_m`, Hz.
    pub modulation_frequency: f64,
    /// Amplifier gain per round trip.
    pub gain: f64,
    /// Loss per round trip.
    pub loss: f64,
    pub n: u32,
    pub m: u32,
    /// Pulses injected; `None` skips the overlap check.
    pub pulse_count: Option<u32>,
    pub group_index: f64,
    /// Modulator bandwidth, Hz.
    pub bandwidth: f64,
}

impl FiberParams {
    /// 100 m loop at 1560 nm with 50 ps/(nm km) dispersion, modulated at
    /// 3 GHz, input commensurability 3/2.
    pub fn reference() -> Self {
        Self {
            wavelength: 1560e-9,
            dispersion: dispersion_from_ps_nm_km(50.0),
            loop_length: 100.0,
            modulation_frequency: 3e9,
            gain: 0.0,
            loss: 0.0,
            n: 3,
            m: 2,
            pulse_count: None,
            group_index: DEFAULT_GROUP_INDEX,
            bandwidth: DEFAULT_BANDWIDTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("dispersion", self.dispersion),
            ("loop length", self.loop_length),
            ("modulation frequency", self.modulation_frequency),
            ("group index", self.group_index),
            ("bandwidth", self.bandwidth),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        for (name, value) in [("gain", self.gain), ("loss", self.loss)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {value}")));
            }
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParameter(format!(
                "N and M must be positive, got N={}, M={}",
                self.n, self.m
            )));
        }
        if let Some(p) = self.pulse_count {
            let needed = p as f64 * self.pulse_spacing();
            if needed > self.round_trip_time() {
                return Err(Error::InvalidParameter(format!(
                    "{p} pulses need {needed:.4e} s but one round trip lasts {:.4e} s",
                    self.round_trip_time()
                )));
            }
        }
        Ok(())
    }

    pub fn total_dispersion(&self) -> f64 {
        total_dispersion(self.wavelength, self.dispersion, self.loop_length)
    }

    /// `T_m = 1 / nu_m`.
    pub fn modulation_period(&self) -> f64 {
        1.0 / self.modulation_frequency
    }

    /// `Omega_m = 2 pi nu_m`.
    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.modulation_frequency
    }

    /// `T_p = (N/M) T_m`.
    pub fn pulse_spacing(&self) -> f64 {
        self.n as f64 / self.m as f64 * self.modulation_period()
    }

    /// `L_f n_g / c`.
    pub fn round_trip_time(&self) -> f64 {
        self.loop_length * self.group_index / SPEED_OF_LIGHT
    }

    /// `1 / (D_tot Omega_m^2)`.
    pub fn potential_scale(&self) -> f64 {
        1.0 / (self.total_dispersion() * self.angular_frequency().powi(2))
    }

    /// `4 pi^2 D_tot / T_m^2`, the drive depth per unit of normalized
    /// potential.
    pub fn depth_scale(&self) -> f64 {
        4.0 * PI * PI * self.total_dispersion() / self.modulation_period().powi(2)
    }
}

/// `n_T = z_T T_m^2 / (4 pi^2 D_tot)`.
pub fn roundtrips_for_revival(z_t: f64, params: &FiberParams) -> f64 {
    z_t / params.depth_scale()
}

/// Inverse of [`roundtrips_for_revival`].
pub fn revival_for_roundtrips(n_t: f64, params: &FiberParams) -> f64 {
    n_t * params.depth_scale()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberDesign {
    pub params: FiberParams,
    /// s^2.
    pub total_dispersion: f64,
    pub potential_scale: f64,
    pub modulation_period: f64,
    pub pulse_spacing: f64,
    pub round_trip_time: f64,
    /// Pulses that fit in one round trip without overlap.
    pub pulse_capacity: u64,
    /// Normalized revival distance.
    pub revival_period: f64,
    pub round_trips: f64,
    pub depth_scale: f64,
}

/// Budget for an untilted input of the given commensurability.
pub fn design(params: &FiberParams) -> Result<FiberDesign> {
    params.validate()?;
    let z_t = predict_revival(params.n, params.m, 2.0 * PI, Default::default())?;
    Ok(FiberDesign {
        params: *params,
        total_dispersion: params.total_dispersion(),
        potential_scale: params.potential_scale(),
        modulation_period: params.modulation_period(),
        pulse_spacing: params.pulse_spacing(),
        round_trip_time: params.round_trip_time(),
        pulse_capacity: (params.round_trip_time() / params.pulse_spacing()).floor() as u64,
        revival_period: z_t,
        round_trips: roundtrips_for_revival(z_t, params),
        depth_scale: params.depth_scale(),
    })
}

fn check_bandwidth(harmonics: &[(i64, C64)], params: &FiberParams) -> Result<()> {
    let peak = harmonics.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let limit = params.bandwidth;
    let worst = harmonics
        .iter()
        .filter(|(_, c)| c.norm() > BANDWIDTH_FLOOR * peak)
        .map(|(n, _)| n.unsigned_abs())
        .max()
        .unwrap_or(0);
    let frequency = worst as f64 * params.modulation_frequency;
    if frequency > limit {
        return Err(Error::BandwidthExceeded {
            harmonic: worst as i64,
            frequency_hz: frequency,
            bandwidth_hz: limit,
        });
    }
    Ok(())
}

/// Normalized potential produced by the phase and amplitude drives, given as
/// Fourier coefficients over one modulation period.
pub fn normalized_potential(params: &FiberParams, pm: &[(i64, C64)], am: &[(i64, C64)]) -> Result<ComplexPotential> {
    params.validate()?;
    check_bandwidth(pm, params)?;
    check_bandwidth(am, params)?;
    let scale = params.potential_scale();
    let coeffs = pm
        .iter()
        .map(|(n, c)| (*n, c * scale))
        .chain(am.iter().map(|(n, c)| (*n, I * c * scale)))
        .chain(std::iter::once((0, I * (params.gain - params.loss) * scale)));
    ComplexPotential::custom(2.0 * PI, coeffs)
}

/// Modulator drives realizing a normalized potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveProfiles {
    /// Fourier coefficients of the phase drive.
    pub pm: Vec<(i64, C64)>,
    /// Fourier coefficients of the amplitude drive.
    pub am: Vec<(i64, C64)>,
    pub pm_peak_to_peak: f64,
    pub am_peak_to_peak: f64,
}

/// Real phase and amplitude drives `d_PM = D Omega^2 Re V` and
/// `d_AM = D Omega^2 Im V - (g - l)` for a lattice of period `2 pi`.
pub fn drive_profiles(params: &FiberParams, pot: &ComplexPotential) -> Result<DriveProfiles> {
    params.validate()?;
    if (pot.period() - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "a modulation period maps to a lattice period of 2 pi, got {}",
            pot.period()
        )));
    }
    let s = 1.0 / params.potential_scale();
    let reach = pot.n_max() as i64;
    let mut pm = Vec::new();
    let mut am = Vec::new();
    for n in -reach..=reach {
        let (v, w) = (pot.coeff(n), pot.coeff(-n).conj());
        let mut a = s * (v - w) / (2.0 * I);
        if n == 0 {
            a -= params.gain - params.loss;
        }
        pm.push((n, s * (v + w) / 2.0));
        am.push((n, a));
    }
    check_bandwidth(&pm, params)?;
    check_bandwidth(&am, params)?;

    let grid = Grid::new(2.0 * PI, 1024)?;
    let samples = potential_samples(pot, &grid)?;
    let spread = |f: &dyn Fn(&C64) -> f64| {
        let (lo, hi) = samples
            .iter()
            .map(f)
            .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
        s * (hi - lo)
    };
    Ok(DriveProfiles {
        pm,
        am,
        pm_peak_to_peak: spread(&|v| v.re),
        am_peak_to_peak: spread(&|v| v.im),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Agree,
    OrderOfMagnitude,
    Discrepancy,
}

/// A computed quantity next to a published figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceCheck {
    pub quantity: String,
    pub computed: f64,
    pub reference: f64,
    pub verdict: Verdict,
    pub note: String,
}

fn compare(quantity: &str, computed: f64, reference: f64, note: &str) -> ReferenceCheck {
    let ratio = computed / reference;
    let verdict = if (ratio - 1.0).abs() <= AGREEMENT_TOLERANCE {
        Verdict::Agree
    } else if ratio.log10().abs() < 0.5 {
        Verdict::OrderOfMagnitude
    } else {
        Verdict::Discrepancy
    };
    ReferenceCheck {
        quantity: quantity.into(),
        computed,
        reference,
        verdict,
        note: note.into(),
    }
}

/// Evaluates the published loop budget from the reference parameters.
pub fn reference_check() -> Result<Vec<ReferenceCheck>> {
    let base = FiberParams::reference();
    let d = design(&base)?;
    let fast = FiberParams {
        modulation_frequency: 6e9,
        n: 1,
        m: 1,
        ..base
    };
    let f = design(&fast)?;
    Ok(vec![
        compare(
            "round trips to revival (3 GHz, N/M = 3/2)",
            d.round_trips,
            4.9e4,
            "n_T = z_T T_m^2 / (4 pi^2 D) with z_T = 18 pi",
        ),
        compare(
            "modulation depth scale 4 pi^2 D / T_m^2",
            d.depth_scale,
            0.002,
            "published as an order-of-magnitude estimate",
        ),
        compare(
            "pulse spacing T_p = (3/2) T_m, s",
            d.pulse_spacing,
            3.14e-9,
            "(3/2) / 3 GHz = 0.5 ns; the published nanosecond value does not follow from T_p = (3/2) T_m",
        ),
        compare(
            "round trips to revival (6 GHz, N = 1)",
            f.round_trips,
            136.0,
            "same formula and fiber: scales by (1/3)^2 (1/2)^2 = 1/36 from the 3 GHz case",
        ),
        ReferenceCheck {
            quantity: "pulses per round trip".into(),
            computed: d.pulse_capacity as f64,
            reference: 100.0,
            verdict: if d.pulse_capacity > 100 {
                Verdict::Agree
            } else {
                Verdict::Discrepancy
            },
            note: format!("more than 100 expected; group index {}", base.group_index),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversion() {
        assert!((dispersion_from_ps_nm_km(50.0) - 5e-5).abs() < 1e-18);
    }

    #[test]
    fn dispersion_is_linear_in_length() {
        let d1 = total_dispersion(1560e-9, 5e-5, 100.0);
        assert!((total_dispersion(1560e-9, 5e-5, 200.0) / d1 - 2.0).abs() < 1e-15);
        assert_eq!(total_dispersion(1560e-9, 5e-5, 0.0), 0.0);
    }

    #[test]
    fn zero_length_is_rejected() {
        let p = FiberParams {
            loop_length: 0.0,
            ..FiberParams::reference()
        };
        assert!(matches!(design(&p), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn too_many_pulses_overlap() {
        let p = FiberParams {
            pulse_count: Some(2000),
            ..FiberParams::reference()
        };
        assert!(p.validate().is_err());
        let p = FiberParams {
            pulse_count: Some(500),
            ..FiberParams::reference()
        };
        assert!(p.validate().is_ok());
    }

    #[test]
    fn roundtrip_inversion() {
        let p = FiberParams::reference();
        for z in [0.0, 1.0, 18.0 * PI, 1e3] {
            let back = revival_for_roundtrips(roundtrips_for_revival(z, &p), &p);
            assert!((back - z).abs() <= 1e-15 * z.max(1.0));
        }
    }

    #[test]
    fn balanced_loop_without_drive_is_free() {
        let p = FiberParams {
            gain: 0.1,
            loss: 0.1,
            ..FiberParams::reference()
        };
        let v = normalized_potential(&p, &[], &[]).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn excessive_harmonics_are_rejected() {
        let p = FiberParams::reference();
        let err = normalized_potential(&p, &[(14, C64::from(1e-4))], &[]).unwrap_err();
        assert!(matches!(err, Error::BandwidthExceeded { harmonic: 14, .. }));
    }
}
