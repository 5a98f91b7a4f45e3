//! Periodic sample grids, Fourier-mode wavefields and the transforms between
//! them.
//!
//! A [`Wavefield`] of period `L` is stored as its mode amplitudes
//!
//! ```text
//! psi(x) = sum_n psi_n exp(2 pi i n x / L + 2 pi i p x / a)
//! ```
//!
//! where the optional Bloch tilt `p` is a rational number measured in units
//! of the lattice wave number `2 pi / a`. The mean-square power over one period
//! is `sum_n |psi_n|^2` (Parseval).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Rational Bloch offset in units of `2 pi / a`.
pub type Tilt = Rational64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn tilt_value(p: Tilt) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// Uniform samples `x_j = j L / points` on `[0, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    points: usize,
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if points < 64 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points must be a power of two >= 64, got {points}"
            )));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.length / self.points as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Largest |n| a mode may have and still be represented without aliasing.
    pub fn max_mode(&self) -> i64 {
        self.points as i64 / 2 - 1
    }

    pub(crate) fn bin(&self, n: i64) -> usize {
        n.rem_euclid(self.points as i64) as usize
    }

    pub(crate) fn mode_of_bin(&self, k: usize) -> i64 {
        let p = self.points as i64;
        let k = k as i64;
        if k >= p / 2 {
            k - p
        } else {
            k
        }
    }

    /// True when `length` is an integer multiple of `period`; returns the
    /// multiple.
    pub fn multiple_of(&self, period: f64) -> Option<i64> {
        let ratio = self.length / period;
        let r = ratio.round();
        ((ratio - r).abs() <= 1e-9 * ratio.max(1.0) && r >= 1.0).then_some(r as i64)
    }
}

/// Samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid,
    pub values: Vec<C64>,
}

/// `out_k = (1/P) sum_j s_j exp(-2 pi i j k / P)`.
pub(crate) fn fourier_coefficients(samples: &[C64]) -> Vec<C64> {
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let scale = 1.0 / samples.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// `out_j = sum_k c_k exp(2 pi i j k / P)`.
pub(crate) fn fourier_synthesis(bins: &[C64]) -> Vec<C64> {
    let mut buf = bins.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

/// A periodic complex field stored as Fourier mode amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefield {
    period: f64,
    lattice_period: f64,
    tilt: Tilt,
    modes: BTreeMap<i64, C64>,
}

impl Wavefield {
    /// Untilted field of period `period`.
    pub fn new(period: f64, modes: impl IntoIterator<Item = (i64, C64)>) -> Result<Self> {
        Self::tilted(period, period, Tilt::from_integer(0), modes)
    }

    /// Field `exp(2 pi i p x / a) sum_n psi_n exp(2 pi i n x / L)`.
    pub fn tilted(
        period: f64,
        lattice_period: f64,
        tilt: Tilt,
        modes: impl IntoIterator<Item = (i64, C64)>,
    ) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("field period must be positive, got {period}")));
        }
        if !(lattice_period > 0.0 && lattice_period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice period must be positive, got {lattice_period}"
            )));
        }
        let mut map = BTreeMap::new();
        for (n, c) in modes {
            *map.entry(n).or_insert(C64::new(0.0, 0.0)) += c;
        }
        Ok(Self {
            period,
            lattice_period,
            tilt,
            modes: map,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn lattice_period(&self) -> f64 {
        self.lattice_period
    }

    pub fn tilt(&self) -> Tilt {
        self.tilt
    }

    pub fn modes(&self) -> &BTreeMap<i64, C64> {
        &self.modes
    }

    pub fn mode(&self, n: i64) -> C64 {
        self.modes.get(&n).copied().unwrap_or_default()
    }

    /// Wave number carried by mode `n`, tilt included.
    pub fn wavenumber(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.period + self.tilt_wavenumber()
    }

    pub fn tilt_wavenumber(&self) -> f64 {
        2.0 * PI * tilt_value(self.tilt) / self.lattice_period
    }

    /// Mean-square power `(1/L) int |psi|^2 dx`.
    pub fn power(&self) -> f64 {
        self.modes.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.power().sqrt()
    }

    pub fn max_index(&self) -> i64 {
        self.modes.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    /// Same field rescaled to unit mean-square power.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("cannot normalize a zero field".into()));
        }
        self.modes.values_mut().for_each(|c| *c /= norm);
        Ok(self)
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        self.modes.values_mut().for_each(|c| *c *= factor);
        self
    }

    /// Mode-space inner product `sum_n conj(self_n) other_n`.
    pub fn inner(&self, other: &Wavefield) -> C64 {
        self.modes
            .iter()
            .map(|(n, c)| c.conj() * other.mode(*n))
            .sum()
    }

    /// `(1/L) int |self - other|^2 dx`, assuming both share period and tilt.
    pub fn distance_sqr(&self, other: &Wavefield) -> f64 {
        let mut keys: Vec<i64> = self.modes.keys().chain(other.modes.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|n| (self.mode(*n) - other.mode(*n)).norm_sqr())
            .sum()
    }

    /// Mode-wise sum of two fields with the same period and tilt.
    pub fn added(mut self, other: &Wavefield) -> Result<Self> {
        if (self.period - other.period).abs() > 1e-12 * self.period || self.tilt != other.tilt {
            return Err(Error::GridMismatch {
                field_period: other.period,
                grid_length: self.period,
            });
        }
        for (n, c) in &other.modes {
            *self.modes.entry(*n).or_default() += c;
        }
        Ok(self)
    }

    /// Spectral derivative `d psi / dx`.
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for (n, c) in out.modes.iter_mut() {
            *c *= I * self.wavenumber(*n);
        }
        out
    }

    /// Same field expressed on the period `new_period`, which must be an
    /// integer multiple of the current period. The tilt is folded into the
    /// modes when it becomes a harmonic of the new period.
    pub fn reperiodized(&self, new_period: f64) -> Result<Self> {
        let ratio = new_period / self.period;
        let r = ratio.round();
        if (ratio - r).abs() > 1e-9 * ratio.max(1.0) || r < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "period {new_period} is not a multiple of {}",
                self.period
            )));
        }
        let r = r as i64;
        // Tilt in units of 2 pi / new_period.
        let shift = tilt_value(self.tilt) * new_period / self.lattice_period;
        let whole = shift.round();
        if (shift - whole).abs() < 1e-9 {
            let whole = whole as i64;
            let modes = self.modes.iter().map(|(n, c)| (n * r + whole, *c));
            Wavefield::new(new_period, modes).map(|mut w| {
                w.lattice_period = self.lattice_period;
                w
            })
        } else {
            Wavefield::tilted(
                new_period,
                self.lattice_period,
                self.tilt,
                self.modes.iter().map(|(n, c)| (n * r, *c)),
            )
        }
    }
}

fn check_field_grid(field: &Wavefield, grid: &Grid) -> Result<()> {
    if (grid.length() - field.period()).abs() > 1e-12 * field.period().max(1.0) {
        return Err(Error::GridMismatch {
            field_period: field.period(),
            grid_length: grid.length(),
        });
    }
    Ok(())
}

/// Evaluates a field on a grid spanning exactly one field period.
pub fn to_samples(field: &Wavefield, grid: &Grid) -> Result<Vec<C64>> {
    check_field_grid(field, grid)?;
    let mut bins = vec![C64::default(); grid.points()];
    for (&n, &c) in field.modes() {
        if n.abs() > grid.max_mode() {
            if c == C64::default() {
                continue;
            }
            return Err(Error::UnderResolved {
                points: grid.points(),
                mode: n,
            });
        }
        bins[grid.bin(n)] += c;
    }
    let mut samples = fourier_synthesis(&bins);
    let kp = field.tilt_wavenumber();
    if kp != 0.0 {
        for (j, s) in samples.iter_mut().enumerate() {
            *s *= (I * kp * grid.x(j)).exp();
        }
    }
    Ok(samples)
}

/// Inverse of [`to_samples`]: recovers the modes of a field with the given
/// tilt from its samples. The Nyquist bin is discarded.
pub fn to_modes(samples: &[C64], grid: &Grid, lattice_period: f64, tilt: Tilt) -> Result<Wavefield> {
    if samples.len() != grid.points() {
        return Err(Error::InvalidParameter(format!(
            "{} samples for a {}-point grid",
            samples.len(),
            grid.points()
        )));
    }
    let kp = 2.0 * PI * tilt_value(tilt) / lattice_period;
    let untilted: Vec<C64> = if kp != 0.0 {
        samples
            .iter()
            .enumerate()
            .map(|(j, s)| s * (-I * kp * grid.x(j)).exp())
            .collect()
    } else {
        samples.to_vec()
    };
    let coeffs = fourier_coefficients(&untilted);
    let nyquist = grid.points() / 2;
    let modes = coeffs
        .into_iter()
        .enumerate()
        .filter(|(k, _)| *k != nyquist)
        .map(|(k, c)| (grid.mode_of_bin(k), c));
    Wavefield::tilted(grid.length(), lattice_period, tilt, modes)
}

/// Mean-square power computed from samples (rectangle rule, exact for
/// band-limited fields).
pub fn sample_power(samples: &[C64]) -> f64 {
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(1.0, 63).is_err());
        assert!(Grid::new(1.0, 100).is_err());
        assert!(Grid::new(0.0, 64).is_err());
        assert!(Grid::new(1.0, 64).is_ok());
    }

    #[test]
    fn constant_mode_gives_constant_samples() {
        let f = Wavefield::new(3.0, [(0, C64::new(1.0, 0.0))]).unwrap();
        let g = Grid::new(3.0, 64).unwrap();
        let s = to_samples(&f, &g).unwrap();
        assert!(s.iter().all(|v| close(*v, C64::new(1.0, 0.0), 1e-14)));
    }

    #[test]
    fn single_harmonic_is_plane_wave() {
        let f = Wavefield::new(2.0 * PI, [(1, C64::new(1.0, 0.0))]).unwrap();
        let g = Grid::new(2.0 * PI, 128).unwrap();
        let s = to_samples(&f, &g).unwrap();
        for (j, v) in s.iter().enumerate() {
            assert!(close(*v, (I * g.x(j)).exp(), 1e-13));
        }
    }

    #[test]
    fn tilt_multiplies_samples_by_phase() {
        let a = 2.0 * PI;
        let f = Wavefield::tilted(a, a, Tilt::new(1, 2), [(1, C64::new(1.0, 0.0))]).unwrap();
        let g = Grid::new(a, 64).unwrap();
        let s = to_samples(&f, &g).unwrap();
        for (j, v) in s.iter().enumerate() {
            assert!(close(*v, (I * 1.5 * g.x(j)).exp(), 1e-13));
        }
        let back = to_modes(&s, &g, a, Tilt::new(1, 2)).unwrap();
        assert!(back.distance_sqr(&f) < 1e-26);
    }

    #[test]
    fn under_resolved_field_is_rejected() {
        let f = Wavefield::new(1.0, [(40, C64::new(1.0, 0.0))]).unwrap();
        let g = Grid::new(1.0, 64).unwrap();
        assert!(matches!(to_samples(&f, &g), Err(Error::UnderResolved { mode: 40, .. })));
        let g = Grid::new(2.0, 128).unwrap();
        assert!(matches!(to_samples(&f, &g), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn reperiodize_folds_half_tilt() {
        let a = 2.0 * PI;
        let f = Wavefield::tilted(a, a, Tilt::new(-1, 2), [(0, C64::new(1.0, 0.0)), (1, C64::new(0.5, 0.0))])
            .unwrap();
        let g = f.reperiodized(2.0 * a).unwrap();
        assert_eq!(g.tilt(), Tilt::from_integer(0));
        assert_eq!(g.mode(-1), C64::new(1.0, 0.0));
        assert_eq!(g.mode(1), C64::new(0.5, 0.0));
        let ga = Grid::new(2.0 * a, 128).unwrap();
        let fa = Grid::new(a, 64).unwrap();
        let sg = to_samples(&g, &ga).unwrap();
        let sf = to_samples(&f, &fa).unwrap();
        for j in 0..64 {
            assert!(close(sg[j], sf[j], 1e-13));
        }
    }
}
