//! Bloch matrices, band diagrams and the census of spectral singularities.
//!
//! For Bloch wave number `q` the operator `-d^2/dx^2 + V(x)` acts on the
//! amplitudes `f_n` of `exp(i (q + 2 pi n / a) x)` through the matrix
//!
//! ```text
//! H_{n,l}(q) = (q + 2 pi n / a)^2 delta_{n,l} + V_{n-l},    |n|, |l| <= n_trunc.
//! ```
//!
//! A potential with only positive harmonics makes this matrix lower
//! triangular, so its spectrum is exactly the free-particle parabola folded
//! into the first Brillouin zone. Band touchings happen at
//! `E_n = (n pi / a)^2`, at `q = 0` for even `n` and at `q = -pi / a` for odd
//! `n`; a touching is a spectral singularity when `H(q) - E_n` has a
//! one-dimensional kernel (a Jordan block) rather than a two-dimensional one.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::C64;
use crate::linalg::{eigenvalues, CMatrix, CVector, SvdParts};
use crate::potential::ComplexPotential;

/// Eigenvalues with `|Im E|` above this put the potential in the broken phase.
pub const COMPLEX_SPECTRUM_TOL: f64 = 1e-8;

/// Half-width of the window around `E_n` in which a pair counts as degenerate.
pub const DEGENERACY_WINDOW: f64 = 1e-6;

/// Tolerance of the folded-parabola test.
pub const PARABOLA_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct BlochBlock {
    q: f64,
    n_trunc: usize,
    lattice_period: f64,
    matrix: CMatrix,
}

impl BlochBlock {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn lattice_period(&self) -> f64 {
        self.lattice_period
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Row of harmonic `n`.
    pub fn index_of(&self, n: i64) -> Option<usize> {
        let i = n + self.n_trunc as i64;
        (0..self.matrix.nrows() as i64).contains(&i).then_some(i as usize)
    }

    /// Harmonic carried by row `i`.
    pub fn harmonic(&self, i: usize) -> i64 {
        i as i64 - self.n_trunc as i64
    }

    pub fn entry(&self, n: i64, l: i64) -> Option<C64> {
        Some(self.matrix[(self.index_of(n)?, self.index_of(l)?)])
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        eigenvalues(&self.matrix)
    }

    /// `H(q) - E`.
    pub fn shifted(&self, energy: f64) -> CMatrix {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= energy;
        }
        m
    }
}

pub(crate) fn assemble(pot: &ComplexPotential, q: f64, n_trunc: usize) -> CMatrix {
    let dim = 2 * n_trunc + 1;
    let g = 2.0 * PI / pot.period();
    let reach = pot.n_max() as i64;
    CMatrix::from_fn(dim, dim, |i, j| {
        let d = i as i64 - j as i64;
        let mut e = if d.abs() <= reach { pot.coeff(d) } else { C64::default() };
        if i == j {
            let k = q + g * (i as i64 - n_trunc as i64) as f64;
            e += k * k;
        }
        e
    })
}

/// Truncated Bloch matrix at `q` over harmonics `-n_trunc..=n_trunc`.
pub fn bloch_matrix(pot: &ComplexPotential, q: f64, n_trunc: usize) -> Result<BlochBlock> {
    let edge = PI / pot.period();
    if q.abs() > edge * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "q = {q} lies outside the first Brillouin zone [-{edge}, {edge}]"
        )));
    }
    let required = 2 * pot.reach();
    if n_trunc < required {
        return Err(Error::TruncationTooSmall { n_trunc, required });
    }
    Ok(BlochBlock {
        q,
        n_trunc,
        lattice_period: pot.period(),
        matrix: assemble(pot, q, n_trunc),
    })
}

/// Branch index of band `alpha`: 0, 1, -1, 2, -2, ...
pub fn folding_index(alpha: usize) -> i64 {
    let k = alpha.div_ceil(2) as i64;
    if alpha % 2 == 1 {
        k
    } else {
        -k
    }
}

/// `(2 pi beta / a - |q|)^2`.
pub fn folded_parabola(beta: i64, q: f64, a: f64) -> f64 {
    let k = 2.0 * PI * beta as f64 / a - q.abs();
    k * k
}

#[derive(Debug, Clone, Serialize)]
pub struct BandDiagram {
    pub lattice_period: f64,
    pub q: Vec<f64>,
    /// `energies[k][alpha]` at `q[k]`, ascending by real part.
    pub energies: Vec<Vec<C64>>,
    pub folding: Vec<i64>,
}

impl BandDiagram {
    pub fn bands(&self) -> usize {
        self.folding.len()
    }

    /// Largest `|E_alpha(q) - (2 pi beta_alpha / a - |q|)^2|` over the diagram.
    pub fn max_parabola_deviation(&self) -> f64 {
        self.q
            .iter()
            .zip(&self.energies)
            .flat_map(|(q, row)| {
                row.iter()
                    .zip(&self.folding)
                    .map(move |(e, beta)| (e - folded_parabola(*beta, *q, self.lattice_period)).norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_gapless(&self) -> bool {
        self.max_parabola_deviation() < PARABOLA_TOL
    }
}

fn default_band_truncation(pot: &ComplexPotential, alpha_max: usize) -> usize {
    (2 * pot.reach()).max(alpha_max + 8)
}

/// Bands `0..=alpha_max` on `q_count` points uniformly covering
/// `[-pi/a, pi/a)`.
pub fn band_diagram(pot: &ComplexPotential, q_count: usize, alpha_max: usize) -> Result<BandDiagram> {
    if q_count == 0 {
        return Err(Error::InvalidParameter("q_count must be positive".into()));
    }
    let a = pot.period();
    let qs: Vec<f64> = (0..q_count)
        .map(|k| -PI / a + 2.0 * PI * k as f64 / (a * q_count as f64))
        .collect();
    band_diagram_at(pot, &qs, alpha_max)
}

/// Bands at caller-chosen wave numbers.
pub fn band_diagram_at(pot: &ComplexPotential, qs: &[f64], alpha_max: usize) -> Result<BandDiagram> {
    let n_trunc = default_band_truncation(pot, alpha_max);
    let rows: Vec<Result<Vec<C64>>> = qs
        .par_iter()
        .map(|&q| {
            let block = bloch_matrix(pot, q, n_trunc)?;
            let mut ev = block.eigenvalues();
            ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            ev.truncate(alpha_max + 1);
            if let Some(bad) = ev.iter().find(|e| e.im.abs() > COMPLEX_SPECTRUM_TOL) {
                return Err(Error::ComplexSpectrum { re: bad.re, im: bad.im });
            }
            Ok(ev)
        })
        .collect();
    let energies = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(BandDiagram {
        lattice_period: pot.period(),
        q: qs.to_vec(),
        energies,
        folding: (0..=alpha_max).map(folding_index).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityRecord {
    pub n: u32,
    pub energy: f64,
    pub q_loc: f64,
    pub defective: bool,
    pub kernel_dim: usize,
    /// Angle between the two eigenvectors of the pair; zero when they have
    /// coalesced.
    pub coalescence_angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityReport {
    pub lattice_period: f64,
    pub n_trunc: usize,
    pub n_energy_max: u32,
    pub records: Vec<SingularityRecord>,
}

impl SingularityReport {
    /// Indices `n` of the defective energies `E_n`.
    pub fn defective(&self) -> Vec<u32> {
        self.records.iter().filter(|r| r.defective).map(|r| r.n).collect()
    }

    pub fn record(&self, n: u32) -> Option<&SingularityRecord> {
        self.records.iter().find(|r| r.n == n)
    }
}

/// Energy `(n pi / a)^2` and its Brillouin-zone location.
pub fn degeneracy_point(n: u32, a: f64) -> (f64, f64) {
    let energy = (n as f64 * PI / a).powi(2);
    let q = if n.is_multiple_of(2) { 0.0 } else { -PI / a };
    (energy, q)
}

/// Classifies the band touchings `E_1..E_{n_energy_max}`.
pub fn detect_singularities(pot: &ComplexPotential, n_energy_max: u32) -> SingularityReport {
    let n_trunc = (2 * pot.reach()).max(n_energy_max as usize + 2);
    detect_singularities_with(pot, n_energy_max, n_trunc).expect("truncation chosen to be adequate")
}

pub fn detect_singularities_with(
    pot: &ComplexPotential,
    n_energy_max: u32,
    n_trunc: usize,
) -> Result<SingularityReport> {
    let a = pot.period();
    let mut records = Vec::new();
    for n in 1..=n_energy_max {
        let (energy, q) = degeneracy_point(n, a);
        let block = bloch_matrix(pot, q, n_trunc)?;
        let near = block
            .eigenvalues()
            .iter()
            .filter(|e| (*e - energy).norm() <= DEGENERACY_WINDOW)
            .count();
        if near < 2 {
            continue;
        }
        let svd = SvdParts::new(&block.shifted(energy));
        let kernel_dim = svd.kernel_dim();
        let coalescence_angle = match kernel_dim {
            1 => self_orthogonality_angle(&svd),
            2 => split_pair_angle(&block, &svd),
            _ => std::f64::consts::FRAC_PI_2,
        };
        records.push(SingularityRecord {
            n,
            energy,
            q_loc: q,
            defective: kernel_dim == 1,
            kernel_dim,
            coalescence_angle,
        });
    }
    Ok(SingularityReport {
        lattice_period: a,
        n_trunc,
        n_energy_max,
        records,
    })
}

/// With a single eigenvector `r` and its left partner `l`, the two members of
/// the pair split at first order by an angle `asin |<l, r>|`, which vanishes
/// exactly at a Jordan block.
fn self_orthogonality_angle(svd: &SvdParts) -> f64 {
    let r = svd.right_null(0);
    let l = svd.left_null(0);
    l.dotc(&r).norm().min(1.0).asin()
}

/// For a two-dimensional kernel, the eigenvectors selected by moving `q` off
/// the touching point solve the 2x2 pencil `(L^H dH/dq R) c = mu (L^H R) c`.
fn split_pair_angle(block: &BlochBlock, svd: &SvdParts) -> f64 {
    let r = [svd.right_null(0), svd.right_null(1)];
    let l = [svd.left_null(0), svd.left_null(1)];
    let g = 2.0 * PI / block.lattice_period();
    let dim = block.matrix().nrows();
    let dh = CVector::from_fn(dim, |i, _| C64::from(2.0 * (block.q() + g * block.harmonic(i) as f64)));
    let proj = |li: &CVector, rj: &CVector, weight: bool| -> C64 {
        if weight {
            li.dotc(&rj.component_mul(&dh))
        } else {
            li.dotc(rj)
        }
    };
    let a = Matrix2::new(
        proj(&l[0], &r[0], true),
        proj(&l[0], &r[1], true),
        proj(&l[1], &r[0], true),
        proj(&l[1], &r[1], true),
    );
    let b = Matrix2::new(
        proj(&l[0], &r[0], false),
        proj(&l[0], &r[1], false),
        proj(&l[1], &r[0], false),
        proj(&l[1], &r[1], false),
    );
    let Some(binv) = b.try_inverse() else {
        return std::f64::consts::FRAC_PI_2;
    };
    let c = binv * a;
    // eigenvectors of a 2x2 matrix in closed form
    let tr = c[(0, 0)] + c[(1, 1)];
    let det = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    if disc.norm() < 1e-12 * tr.norm().max(1.0) {
        return std::f64::consts::FRAC_PI_2;
    }
    let mus = [(tr + disc) * 0.5, (tr - disc) * 0.5];
    let vecs: Vec<CVector> = mus
        .iter()
        .map(|mu| {
            let first = (c[(0, 1)], mu - c[(0, 0)]);
            let second = (mu - c[(1, 1)], c[(1, 0)]);
            let size = |(x, y): (C64, C64)| x.norm_sqr() + y.norm_sqr();
            let (x, y) = if size(first) > size(second) { first } else { second };
            let v = &r[0] * x + &r[1] * y;
            let norm = v.norm();
            v / C64::from(norm)
        })
        .collect();
    vecs[0].dotc(&vecs[1]).norm().min(1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Verdict {
    pub applicable: bool,
    pub blocking: Option<SingularityRecord>,
    pub reason: String,
}

/// Whether commensurate inputs with `n_cells = N` revive exactly: odd `N`
/// only samples `q = 0` among the touching points, even `N` samples both.
pub fn theorem1_applicable(report: &SingularityReport, n_cells: u32) -> Theorem1Verdict {
    let odd = n_cells % 2 == 1;
    let blocking = report
        .records
        .iter()
        .find(|r| r.defective && (!odd || r.q_loc == 0.0))
        .cloned();
    let reason = match (&blocking, odd) {
        (None, true) => format!("N = {n_cells} is odd and no defective energy sits at q = 0"),
        (None, false) => format!("N = {n_cells} is even and the spectrum has no defective energy"),
        (Some(r), _) => format!(
            "defective energy E_{} = {} at q = {} is sampled by N = {n_cells}",
            r.n, r.energy, r.q_loc
        ),
    };
    Theorem1Verdict {
        applicable: blocking.is_none(),
        blocking,
        reason,
    }
}
