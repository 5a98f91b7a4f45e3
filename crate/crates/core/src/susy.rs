//! Darboux (supersymmetric) synthesis of gapless complex crystals and Jordan
//! chains at their spectral singularities.
//!
//! Given a solution `phi` of `H_in phi = E phi` with `H_in = -d^2/dx^2 + V_in`,
//! the superpotential `W = phi' / phi` factorizes `H_in = B A + E` with
//! `A = -d/dx + W` and `B = d/dx + W`. The intertwined operator
//! `H_out = A B + E` has the potential
//!
//! ```text
//! V_out = -V_in + 2 E + 2 W^2
//! ```
//!
//! and `A` maps eigenfunctions of `H_in` with energy `E' != E` onto
//! eigenfunctions of `H_out` with the same energy.

use std::f64::consts::PI;

use num_complex::ComplexFloat;

use crate::bands::bloch_matrix;
use crate::error::{Error, Result};
use crate::grid::{to_modes, to_samples, Grid, SampledFunction, Tilt, Wavefield, C64, I};
use crate::linalg::{CVector, SvdParts};
use crate::potential::{potential_samples, quadrature_points, ComplexPotential, DEFAULT_N_MAX};

/// Relative residual a seed must satisfy.
pub const SEED_TOLERANCE: f64 = 1e-8;

/// `|phi| / max |phi|` below which a seed counts as vanishing.
pub const SEED_VANISHING: f64 = 1e-6;

/// Residual bound for the Jordan chain vectors.
pub const CHAIN_TOLERANCE: f64 = 1e-8;

/// Closed-form factorization solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed {
    /// `exp(i k0 x)`, a solution of the free Hamiltonian at `k0^2`.
    PlaneWave { k0: f64 },
    /// `cos(k0 x + i rho)`, free Hamiltonian at `k0^2`.
    Cosine { k0: f64, rho: f64 },
    /// `3 k0 sin(3 theta) - k0 tan(theta) cos(3 theta)` with
    /// `theta = k0 x + i rho`: the image of `cos(3 theta)` under the first
    /// step, a solution of the first partner at `9 k0^2`.
    CascadeSecond { k0: f64, rho: f64 },
}

impl Seed {
    fn theta(k0: f64, rho: f64, x: f64) -> C64 {
        C64::new(k0 * x, rho)
    }

    pub fn value(&self, x: f64) -> C64 {
        match *self {
            Seed::PlaneWave { k0 } => (I * k0 * x).exp(),
            Seed::Cosine { k0, rho } => Self::theta(k0, rho, x).cos(),
            Seed::CascadeSecond { k0, rho } => {
                let t = Self::theta(k0, rho, x);
                k0 * (3.0 * (3.0 * t).sin() - t.tan() * (3.0 * t).cos())
            }
        }
    }

    pub fn derivative(&self, x: f64) -> C64 {
        match *self {
            Seed::PlaneWave { k0 } => I * k0 * (I * k0 * x).exp(),
            Seed::Cosine { k0, rho } => -k0 * Self::theta(k0, rho, x).sin(),
            Seed::CascadeSecond { k0, rho } => {
                let t = Self::theta(k0, rho, x);
                let sec2 = 1.0 / t.cos().powi(2);
                let (s3, c3) = ((3.0 * t).sin(), (3.0 * t).cos());
                k0 * k0 * (9.0 * c3 - sec2 * c3 + 3.0 * t.tan() * s3)
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> C64 {
        match *self {
            Seed::PlaneWave { k0 } => -k0 * k0 * (I * k0 * x).exp(),
            Seed::Cosine { k0, rho } => -k0 * k0 * Self::theta(k0, rho, x).cos(),
            Seed::CascadeSecond { k0, rho } => {
                let t = Self::theta(k0, rho, x);
                let sec2 = 1.0 / t.cos().powi(2);
                let tan = t.tan();
                let (s3, c3) = ((3.0 * t).sin(), (3.0 * t).cos());
                k0.powi(3) * (-27.0 * s3 + 6.0 * sec2 * s3 - 2.0 * sec2 * tan * c3 + 9.0 * tan * c3)
            }
        }
    }

    /// `phi' / phi`.
    pub fn superpotential(&self, x: f64) -> C64 {
        self.derivative(x) / self.value(x)
    }

    /// Superpotential from its simplified closed form.
    pub fn closed_form_superpotential(&self, x: f64) -> C64 {
        match *self {
            Seed::PlaneWave { k0 } => I * k0,
            Seed::Cosine { k0, rho } => -k0 * Self::theta(k0, rho, x).tan(),
            Seed::CascadeSecond { k0, rho } => {
                let t = Self::theta(k0, rho, x);
                let c = t.cos();
                k0 * (3.0 * c * c - 2.0) / (t.sin() * c)
            }
        }
    }
}

/// One Darboux step.
#[derive(Debug, Clone)]
pub struct SusyStep {
    pub seed: Seed,
    pub seed_energy: f64,
    /// Construction grid: one lattice period.
    pub grid: Grid,
    /// `W` sampled on `grid`.
    pub superpotential: Vec<C64>,
    pub input: ComplexPotential,
    pub output: ComplexPotential,
    /// `-V_in + 2 E + 2 W^2` on `grid`, before re-extraction of coefficients.
    pub output_samples: Vec<C64>,
}

impl SusyStep {
    /// `W` on any grid spanning a whole number of lattice periods.
    pub fn superpotential_on(&self, grid: &Grid) -> Result<SampledFunction> {
        grid.multiple_of(self.input.period()).ok_or(Error::IncommensurateGrid {
            grid_length: grid.length(),
            period: self.input.period(),
        })?;
        Ok(SampledFunction {
            grid: *grid,
            values: grid.xs().iter().map(|x| self.seed.superpotential(*x)).collect(),
        })
    }
}

/// Partner potential `V_out = -V_in + 2 E_seed + 2 W^2` with `W = phi'/phi`.
pub fn darboux_partner(v_in: &ComplexPotential, seed: Seed, seed_energy: f64) -> Result<SusyStep> {
    let a = v_in.period();
    let n_out = v_in.n_max().max(DEFAULT_N_MAX);
    let grid = Grid::new(a, quadrature_points(n_out))?;
    let xs = grid.xs();
    let v = potential_samples(v_in, &grid)?;

    let phi: Vec<C64> = xs.iter().map(|x| seed.value(*x)).collect();
    let peak = phi.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if let Some(j) = phi.iter().position(|p| !(p.norm() >= SEED_VANISHING * peak)) {
        return Err(Error::SeedVanishes { x: xs[j] });
    }
    let residual = xs
        .iter()
        .zip(&phi)
        .zip(&v)
        .map(|((x, p), vj)| (-seed.second_derivative(*x) + vj * p - seed_energy * p).norm())
        .fold(0.0, f64::max)
        / peak;
    if !(residual <= SEED_TOLERANCE) {
        return Err(Error::SeedNotSolution { residual });
    }

    let w: Vec<C64> = xs.iter().zip(&phi).map(|(x, p)| seed.derivative(*x) / p).collect();
    let out: Vec<C64> = v
        .iter()
        .zip(&w)
        .map(|(vj, wj)| -vj + 2.0 * seed_energy + 2.0 * wj * wj)
        .collect();
    let output = ComplexPotential::from_period_samples(a, &out, n_out)?;
    Ok(SusyStep {
        seed,
        seed_energy,
        grid,
        superpotential: w,
        input: v_in.clone(),
        output,
        output_samples: out,
    })
}

/// `xi = -psi' + W psi`. The superpotential must be sampled on a grid
/// spanning exactly one period of `psi`.
pub fn susy_map_state(psi: &Wavefield, w: &SampledFunction) -> Result<Wavefield> {
    let grid = &w.grid;
    if (grid.length() - psi.period()).abs() > 1e-12 * psi.period().max(1.0) {
        return Err(Error::GridMismatch {
            field_period: psi.period(),
            grid_length: grid.length(),
        });
    }
    let dpsi = to_samples(&psi.derivative(), grid)?;
    let vals = to_samples(psi, grid)?;
    let xi: Vec<C64> = dpsi
        .iter()
        .zip(&vals)
        .zip(&w.values)
        .map(|((d, p), wj)| -d + wj * p)
        .collect();
    to_modes(&xi, grid, psi.lattice_period(), psi.tilt())
}

/// Both Darboux steps of the two-singularity cascade.
pub fn two_singularity_steps(a: f64, rho: f64) -> Result<(SusyStep, SusyStep)> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("lattice period must be positive, got {a}")));
    }
    let k0 = PI / a;
    let free = ComplexPotential::free(a)?;
    let first = darboux_partner(&free, Seed::Cosine { k0, rho }, k0 * k0)?;
    let second = darboux_partner(&first.output, Seed::CascadeSecond { k0, rho }, 9.0 * k0 * k0)?;
    Ok((first, second))
}

/// Gapless crystal with defective energies at `(pi/a)^2` and `(3 pi/a)^2`,
/// built by two cascaded Darboux steps from the free particle.
pub fn synthesize_two_singularities(a: f64, rho: f64) -> Result<ComplexPotential> {
    two_singularity_steps(a, rho).map(|(_, second)| second.output)
}

/// Eigenvector `u` and associated vector `v` at a defective Bloch energy.
#[derive(Debug, Clone)]
pub struct JordanChain {
    pub energy: f64,
    pub q: f64,
    /// `(H - E) u = 0`, unit norm.
    pub u: Wavefield,
    /// `(H - E) v = u`, orthogonal to `u`.
    pub v: Wavefield,
    /// `(||(H-E) u||, ||(H-E) v - u||)`.
    pub residuals: (f64, f64),
    pub n_trunc: usize,
}

/// Rational approximation with denominator at most 1000.
pub(crate) fn rational_tilt(p: f64) -> Option<Tilt> {
    (1..=1000i64).find_map(|d| {
        let n = (p * d as f64).round();
        ((p * d as f64 - n).abs() < 1e-9).then(|| Tilt::new(n as i64, d))
    })
}

pub fn jordan_chain(pot: &ComplexPotential, energy: f64, q: f64) -> Result<JordanChain> {
    let reach = (energy.max(0.0).sqrt() * pot.period() / (2.0 * PI)).ceil() as usize + 4;
    jordan_chain_with(pot, energy, q, (2 * pot.reach()).max(reach))
}

/// Jordan chain of the truncated Bloch matrix, gauge-fixed by `||u|| = 1`,
/// `<u, v> = 0` and a real positive largest component of `u`.
pub fn jordan_chain_with(pot: &ComplexPotential, energy: f64, q: f64, n_trunc: usize) -> Result<JordanChain> {
    let a = pot.period();
    let tilt = rational_tilt(q * a / (2.0 * PI))
        .ok_or_else(|| Error::InvalidParameter(format!("q = {q} is not a rational multiple of 2 pi / a")))?;
    let block = bloch_matrix(pot, q, n_trunc)?;
    let m = block.shifted(energy);
    let svd = SvdParts::new(&m);
    let kernel_dim = svd.kernel_dim();
    if kernel_dim != 1 {
        return Err(Error::NotDefective { energy, q, kernel_dim });
    }
    let mut u = svd.right_null(0);
    let lead = u.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or_default();
    let phase = lead.conj() / lead.norm();
    u *= phase / C64::from(u.norm());

    let mut v = svd.solve(&u);
    let overlap = u.dotc(&v);
    v -= &u * overlap;

    let r_u = (&m * &u).norm();
    let r_v = (&m * &v - &u).norm();
    let worst = r_u.max(r_v);
    if !(worst < CHAIN_TOLERANCE) {
        return Err(Error::ChainResidual { residual: worst });
    }
    let field = |x: &CVector| {
        Wavefield::tilted(a, a, tilt, x.iter().enumerate().map(|(i, c)| (block.harmonic(i), *c)))
    };
    Ok(JordanChain {
        energy,
        q,
        u: field(&u)?,
        v: field(&v)?,
        residuals: (r_u, r_v),
        n_trunc,
    })
}
