//! Periodic complex potentials held as truncated Fourier series.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{fourier_coefficients, fourier_synthesis, to_modes, to_samples, Grid, Wavefield, C64, I};

/// Truncation used for the quadrature families unless overridden.
pub const DEFAULT_N_MAX: usize = 48;

/// Coefficients at the truncation edge must fall below this fraction of the
/// largest one.
pub const DECAY_TOLERANCE: f64 = 1e-12;

/// Quadrature coefficients smaller than this fraction of the largest are
/// rounding noise and are set to zero.
const NOISE_FLOOR: f64 = 1e-15;

/// Closed-form family a potential was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family")]
pub enum PotentialForm {
    /// `V0 exp(2 pi i x / a)`.
    #[serde(rename = "EXP")]
    Exp { v0: f64 },
    /// Single Darboux partner of the free particle, one defective energy.
    #[serde(rename = "ONE_SS")]
    OneSs { rho: f64 },
    /// Two-step cascade, defective energies at the first and third band edges.
    #[serde(rename = "TWO_SS")]
    TwoSs { rho: f64 },
    /// `V0 sin(2 pi x / a)`.
    #[serde(rename = "MATHIEU")]
    Mathieu { v0: f64 },
    #[serde(rename = "CUSTOM")]
    Custom,
}

impl PotentialForm {
    /// Closed-form value at `x` for lattice period `a`.
    pub fn evaluate(&self, a: f64, x: f64) -> Option<C64> {
        let g = 2.0 * PI / a;
        match *self {
            PotentialForm::Exp { v0 } => Some(v0 * (I * g * x).exp()),
            PotentialForm::Mathieu { v0 } => Some(C64::from(v0 * (g * x).sin())),
            PotentialForm::OneSs { rho } => Some(one_ss_closed(g, rho, x)),
            PotentialForm::TwoSs { rho } => {
                let arg = C64::new(2.0 * g * x, 4.0 * rho);
                Some((2.0 * g).powi(2) / (1.0 - arg.cos()) + 2.0 * one_ss_closed(g, rho, x))
            }
            PotentialForm::Custom => None,
        }
    }
}

fn one_ss_closed(g: f64, rho: f64, x: f64) -> C64 {
    let arg = C64::new(g * x, 2.0 * rho);
    g * g / (1.0 + arg.cos())
}

/// A period-`a` potential `V(x) = sum_n V_n exp(2 pi i n x / a)` with
/// `|n| <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPotential {
    period: f64,
    n_max: usize,
    coeffs: Vec<C64>,
    form: PotentialForm,
}

impl ComplexPotential {
    fn check_period(a: f64) -> Result<()> {
        if a > 0.0 && a.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("lattice period must be positive, got {a}")))
        }
    }

    /// Builds a potential from explicit coefficients. Missing harmonics are
    /// zero.
    pub fn custom(a: f64, coeffs: impl IntoIterator<Item = (i64, C64)>) -> Result<Self> {
        Self::check_period(a)?;
        let pairs: Vec<(i64, C64)> = coeffs.into_iter().collect();
        let n_max = pairs.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut dense = vec![C64::default(); 2 * n_max + 1];
        for (n, c) in pairs {
            dense[(n + n_max as i64) as usize] += c;
        }
        Ok(Self {
            period: a,
            n_max,
            coeffs: dense,
            form: PotentialForm::Custom,
        })
    }

    pub fn free(a: f64) -> Result<Self> {
        Self::custom(a, [])
    }

    pub fn exp(a: f64, v0: f64) -> Result<Self> {
        let mut p = Self::custom(a, [(1, C64::from(v0))])?;
        p.form = PotentialForm::Exp { v0 };
        Ok(p)
    }

    pub fn mathieu(a: f64, v0: f64) -> Result<Self> {
        let half = C64::new(0.0, -0.5 * v0);
        let mut p = Self::custom(a, [(1, half), (-1, -half)])?;
        p.form = PotentialForm::Mathieu { v0 };
        Ok(p)
    }

    pub fn one_ss(a: f64, rho: f64) -> Result<Self> {
        Self::one_ss_with(a, rho, DEFAULT_N_MAX)
    }

    pub fn one_ss_with(a: f64, rho: f64, n_max: usize) -> Result<Self> {
        Self::from_closed_form(a, PotentialForm::OneSs { rho }, n_max)
    }

    pub fn two_ss(a: f64, rho: f64) -> Result<Self> {
        Self::two_ss_with(a, rho, DEFAULT_N_MAX)
    }

    pub fn two_ss_with(a: f64, rho: f64, n_max: usize) -> Result<Self> {
        Self::from_closed_form(a, PotentialForm::TwoSs { rho }, n_max)
    }

    fn from_closed_form(a: f64, form: PotentialForm, n_max: usize) -> Result<Self> {
        Self::check_period(a)?;
        if let PotentialForm::OneSs { rho } | PotentialForm::TwoSs { rho } = form {
            if rho == 0.0 || !rho.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "rho must be a nonzero real number, got {rho}"
                )));
            }
        }
        let points = quadrature_points(n_max);
        let samples: Vec<C64> = (0..points)
            .map(|j| form.evaluate(a, a * j as f64 / points as f64).expect("closed form"))
            .collect();
        let mut p = Self::from_period_samples(a, &samples, n_max)?;
        p.form = form;
        Ok(p)
    }

    /// Extracts `V_n`, `|n| <= n_max`, from samples over one lattice period by
    /// trapezoidal quadrature, and enforces the truncation-decay invariant.
    pub fn from_period_samples(a: f64, samples: &[C64], n_max: usize) -> Result<Self> {
        Self::check_period(a)?;
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::InvalidParameter("potential samples are not finite".into()));
        }
        let q = samples.len();
        if q < 2 * n_max + 2 {
            return Err(Error::InvalidParameter(format!(
                "{q} samples cannot resolve {n_max} harmonics"
            )));
        }
        let all = fourier_coefficients(samples);
        let mut coeffs: Vec<C64> = (-(n_max as i64)..=n_max as i64)
            .map(|n| all[n.rem_euclid(q as i64) as usize])
            .collect();
        let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for c in coeffs.iter_mut() {
            if c.norm() < NOISE_FLOOR * peak {
                *c = C64::default();
            }
        }
        let p = Self {
            period: a,
            n_max,
            coeffs,
            form: PotentialForm::Custom,
        };
        let ratio = p.decay_ratio();
        if ratio >= DECAY_TOLERANCE {
            return Err(Error::TruncationInadequate { ratio });
        }
        Ok(p)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn form(&self) -> PotentialForm {
        self.form
    }

    /// Coefficient `V_n` (zero outside the stored range).
    pub fn coeff(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.n_max {
            C64::default()
        } else {
            self.coeffs[(n + self.n_max as i64) as usize]
        }
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let n_max = self.n_max as i64;
        self.coeffs.iter().enumerate().map(move |(k, c)| (k as i64 - n_max, *c))
    }

    /// Largest `|n|` with `V_n != 0`. Coefficients below the quadrature
    /// noise floor are stored as exact zeros, so this is the true coupling
    /// range of the Bloch matrix.
    pub fn reach(&self) -> usize {
        self.coeffs()
            .filter(|(_, c)| *c != C64::default())
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max(|V_{-n_max}|, |V_{n_max}|) / max |V_n|`, or 0 for the zero potential.
    pub fn decay_ratio(&self) -> f64 {
        let peak = self.max_abs_coeff();
        if peak == 0.0 || self.n_max == 0 {
            return 0.0;
        }
        let n = self.n_max as i64;
        self.coeff(n).norm().max(self.coeff(-n).norm()) / peak
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C64::default())
    }

    /// `V(x)` real, i.e. `V_{-n} = conj(V_n)` within `tol` (relative).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        self.coeffs()
            .all(|(n, c)| (c - self.coeff(-n).conj()).norm() <= tol * scale)
    }

    /// All weight on positive harmonics (`V_n = 0` for `n <= 0`).
    pub fn is_one_sided(&self) -> bool {
        self.coeffs().all(|(n, c)| n > 0 || c == C64::default())
    }

    /// Fourier-series value at `x`.
    pub fn evaluate(&self, x: f64) -> C64 {
        let g = 2.0 * PI / self.period;
        self.coeffs()
            .filter(|(_, c)| *c != C64::default())
            .map(|(n, c)| c * (I * g * n as f64 * x).exp())
            .sum()
    }

    /// Closed-form value, when the potential carries a family tag.
    pub fn closed_form(&self, x: f64) -> Option<C64> {
        self.form.evaluate(self.period, x)
    }

    /// The Hermitian potential `Re V(x)`.
    pub fn real_part(&self) -> Self {
        let coeffs = (-(self.n_max as i64)..=self.n_max as i64)
            .map(|n| (self.coeff(n) + self.coeff(-n).conj()) * 0.5)
            .collect();
        Self {
            period: self.period,
            n_max: self.n_max,
            coeffs,
            form: PotentialForm::Custom,
        }
    }

    /// `s V(x)` for real `s`; keeps the family tag only for the linear families.
    pub fn scaled(&self, s: f64) -> Self {
        let form = match self.form {
            PotentialForm::Exp { v0 } => PotentialForm::Exp { v0: v0 * s },
            PotentialForm::Mathieu { v0 } => PotentialForm::Mathieu { v0: v0 * s },
            _ => PotentialForm::Custom,
        };
        Self {
            period: self.period,
            n_max: self.n_max,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            form,
        }
    }
}

pub(crate) fn quadrature_points(n_max: usize) -> usize {
    (16 * n_max).max(1024).next_power_of_two()
}

/// Samples `V(x_j)` on a grid whose length is a whole number of lattice
/// periods.
pub fn potential_samples(pot: &ComplexPotential, grid: &Grid) -> Result<Vec<C64>> {
    let cells = grid.multiple_of(pot.period()).ok_or(Error::IncommensurateGrid {
        grid_length: grid.length(),
        period: pot.period(),
    })?;
    let mut bins = vec![C64::default(); grid.points()];
    for (n, c) in pot.coeffs() {
        if c == C64::default() {
            continue;
        }
        let k = n * cells;
        if k.abs() > grid.max_mode() {
            return Err(Error::UnderResolved {
                points: grid.points(),
                mode: k,
            });
        }
        bins[grid.bin(k)] += c;
    }
    Ok(fourier_synthesis(&bins))
}

/// PT symmetry about `x = 0`: `V(-x) = conj(V(x))`, equivalently all Fourier
/// coefficients real.
pub fn check_pt_symmetry(pot: &ComplexPotential, tol: f64) -> bool {
    let peak = pot.max_abs_coeff();
    let worst = pot.coeffs().map(|(_, c)| c.im.abs()).fold(0.0, f64::max);
    worst <= tol * peak
}

/// `H psi = -psi'' + V psi`, with the derivative taken spectrally and the
/// product formed on `grid`.
pub fn apply_hamiltonian(field: &Wavefield, pot: &ComplexPotential, grid: &Grid) -> Result<Wavefield> {
    let kinetic = field.derivative().derivative().scaled(C64::from(-1.0));
    let psi = to_samples(field, grid)?;
    let v = potential_samples(pot, grid)?;
    let product: Vec<C64> = psi.iter().zip(&v).map(|(p, v)| p * v).collect();
    let vpsi = to_modes(&product, grid, field.lattice_period(), field.tilt())?;
    let modes = vpsi
        .modes()
        .iter()
        .map(|(n, c)| (*n, c + kinetic.mode(*n)))
        .chain(kinetic.modes().iter().filter(|(n, _)| !vpsi.modes().contains_key(n)).map(|(n, c)| (*n, *c)))
        .collect::<Vec<_>>();
    Wavefield::tilted(field.period(), field.lattice_period(), field.tilt(), modes)
}

/// `||(H - E) psi||` in the mean-square norm.
pub fn hamiltonian_residual(field: &Wavefield, pot: &ComplexPotential, energy: f64, grid: &Grid) -> Result<f64> {
    let h = apply_hamiltonian(field, pot, grid)?;
    let e_psi = field.clone().scaled(C64::from(energy));
    Ok(h.distance_sqr(&e_psi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 2.0 * PI;

    #[test]
    fn exp_family_samples_are_plane_wave() {
        let p = ComplexPotential::exp(A, 1.0).unwrap();
        let g = Grid::new(A, 64).unwrap();
        let s = potential_samples(&p, &g).unwrap();
        for (j, v) in s.iter().enumerate() {
            assert!((v - (I * g.x(j)).exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn closed_form_values_at_origin() {
        // 1/(1 + cosh 2) and 4/(1 - cosh 4) + 2/(1 + cosh 2)
        let one = ComplexPotential::one_ss(A, 1.0).unwrap();
        let two = ComplexPotential::two_ss(A, 1.0).unwrap();
        let g = Grid::new(A, 512).unwrap();
        let v1 = potential_samples(&one, &g).unwrap()[0];
        let v2 = potential_samples(&two, &g).unwrap()[0];
        assert!((v1 - C64::from(1.0 / (1.0 + 2f64.cosh()))).norm() < 1e-12, "{v1}");
        assert!((v2 - C64::from(0.267_931_575_990_836)).norm() < 1e-6, "{v2}");
        assert!((v2 - C64::from(4.0 / (1.0 - 4f64.cosh()) + 2.0 / (1.0 + 2f64.cosh()))).norm() < 1e-12);
    }

    #[test]
    fn incommensurate_grid_is_rejected() {
        let p = ComplexPotential::exp(A, 1.0).unwrap();
        let g = Grid::new(1.5 * A, 64).unwrap();
        assert!(matches!(potential_samples(&p, &g), Err(Error::IncommensurateGrid { .. })));
    }

    #[test]
    fn pt_predicate() {
        assert!(check_pt_symmetry(&ComplexPotential::exp(A, 1.0).unwrap(), 1e-12));
        assert!(check_pt_symmetry(&ComplexPotential::one_ss(A, 1.0).unwrap(), 1e-10));
        let bad = ComplexPotential::custom(A, [(1, I)]).unwrap();
        assert!(!check_pt_symmetry(&bad, 1e-10));
        // sin is odd and real: V(-x) = -V(x) != conj V(x)
        assert!(!check_pt_symmetry(&ComplexPotential::mathieu(A, 1.0).unwrap(), 1e-10));
    }

    #[test]
    fn rho_zero_and_short_truncation_are_rejected() {
        assert!(matches!(ComplexPotential::one_ss(A, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            ComplexPotential::one_ss_with(A, 1.0, 6),
            Err(Error::TruncationInadequate { .. })
        ));
        assert!(matches!(
            ComplexPotential::one_ss(A, 0.2),
            Err(Error::TruncationInadequate { .. })
        ));
    }

    #[test]
    fn real_part_is_hermitian() {
        let p = ComplexPotential::one_ss(A, 1.0).unwrap();
        assert!(!p.is_hermitian(1e-12));
        assert!(p.is_one_sided());
        let r = p.real_part();
        assert!(r.is_hermitian(0.0));
        let x = 0.7;
        assert!((r.evaluate(x).re - p.evaluate(x).re).abs() < 1e-14);
        assert!(r.evaluate(x).im.abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_on_plane_wave() {
        let free = ComplexPotential::free(A).unwrap();
        let f = Wavefield::new(A, [(2, C64::from(1.0))]).unwrap();
        let g = Grid::new(A, 64).unwrap();
        assert!(hamiltonian_residual(&f, &free, 4.0, &g).unwrap() < 1e-12);
    }
}
