//! Exact mode-space propagation of periodic wavefields under
//!
//! ```text
//! i d(psi)/dz = -d^2(psi)/dx^2 + V(x) psi
//! ```
//!
//! A field of period `L = N a` with Bloch tilt `p` couples mode `k` only to
//! modes `k + N n`, so its amplitudes split into `N` independent residue
//! blocks. Each block is a truncated Bloch matrix `H(q)` and evolves as
//! `exp(-i H(q) z)`, which stays exact for defective (non-diagonalizable)
//! blocks.

use std::f64::consts::PI;
use std::sync::Arc;

use num_integer::Integer;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::bands::bloch_matrix;
use crate::error::{Error, Result};
use crate::grid::{tilt_value, Grid, Tilt, Wavefield, C64, I};
use crate::linalg::{expm, CMatrix, CVector};
use crate::potential::{potential_samples, ComplexPotential};
use crate::susy::{jordan_chain, JordanChain};

/// Upper bound on `Delta` at a predicted revival.
pub const REVIVAL_TOLERANCE: f64 = 1e-6;

/// Lower bound on `Delta` where no revival is expected.
pub const NON_REVIVAL_THRESHOLD: f64 = 1e-2;

/// Trace samples per revival period unless overridden.
pub const SAMPLES_PER_REVIVAL: usize = 512;

/// Relative power allowed in the outermost harmonics of a block.
pub const EDGE_TOLERANCE: f64 = 1e-12;

/// Number of harmonics at each end of a block watched for truncation leaks.
const EDGE_WIDTH: usize = 4;

/// Field modes below this fraction of the largest do not widen the block
/// truncation and are dropped when they fall outside it.
const NEGLIGIBLE: f64 = 1e-18;

/// Gaussian amplitudes below this fraction of the largest are dropped.
const GAUSSIAN_CUTOFF: f64 = 1e-17;

/// Norm drift tolerated by [`recurrence_search`].
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Relative change allowed when the oracle step is halved.
pub const STEP_TOLERANCE: f64 = 1e-8;

/// Relative error allowed against the closed-form secular law.
pub const SECULAR_TOLERANCE: f64 = 1e-6;

/// Input period `ℒ = (N/M) a` inside the common period `L = N a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Commensurability {
    n: u32,
    m: u32,
}

impl Commensurability {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!("N and M must be positive, got N={n}, M={m}")));
        }
        if n.gcd(&m) != 1 {
            return Err(Error::NotCoprime { n, m });
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `ℒ = (N/M) a`.
    pub fn input_period(&self, a: f64) -> f64 {
        self.n as f64 * a / self.m as f64
    }

    /// `L = N a`.
    pub fn field_period(&self, a: f64) -> f64 {
        self.n as f64 * a
    }
}

/// Checks the hypotheses of the tilted revival theorem: `1/p` is an integer
/// coprime to `N` and `2 N p` is not an integer.
pub fn check_tilt(n: u32, p: Tilt) -> Result<()> {
    if p == Tilt::from_integer(0) {
        return Ok(());
    }
    if p.numer().abs() != 1 {
        return Err(Error::TiltConditionsViolated(format!("1/p = {} is not an integer", p.recip())));
    }
    let inv = p.denom().abs();
    if inv.gcd(&(n as i64)) != 1 {
        return Err(Error::TiltConditionsViolated(format!("gcd(1/p = {inv}, N = {n}) != 1")));
    }
    if (p * Tilt::from_integer(2 * n as i64)).is_integer() {
        return Err(Error::TiltConditionsViolated(format!("2 N p = {} is an integer", p * 2 * n as i64)));
    }
    Ok(())
}

/// Revival period `N^2 a^2 / (2 pi)`, or `N^2 a^2 / (2 pi p^2)` for a tilted
/// input.
pub fn predict_revival(n: u32, m: u32, a: f64, p: Tilt) -> Result<f64> {
    Commensurability::new(n, m)?;
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("lattice period must be positive, got {a}")));
    }
    check_tilt(n, p)?;
    let base = (n as f64 * a).powi(2) / (2.0 * PI);
    Ok(if p == Tilt::from_integer(0) {
        base
    } else {
        base / tilt_value(p).powi(2)
    })
}

/// Periodized Gaussian `sum_j exp(-(x - j ℒ)^2 / w^2)` on `L = N a`,
/// normalized to unit mean-square power.
pub fn gaussian_train(n: u32, m: u32, a: f64, w: f64) -> Result<Wavefield> {
    let c = Commensurability::new(n, m)?;
    let cell = c.input_period(a);
    let limit = cell / 2.0;
    if !(w > 0.0 && w < limit) {
        return Err(Error::WidthTooLarge { width: w, limit });
    }
    let amp = |l: i64| (w * PI.sqrt() / cell) * (-(PI * l as f64 * w / cell).powi(2)).exp();
    let l_max = ((-GAUSSIAN_CUTOFF.ln()).sqrt() * cell / (PI * w)).ceil() as i64;
    let step = m as i64;
    let modes = (-l_max..=l_max).map(|l| (l * step, C64::from(amp(l))));
    Wavefield::tilted(c.field_period(a), a, Tilt::from_integer(0), modes)?.normalized()
}

/// Initial field of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Gaussian train of width `w`; `None` selects `ℒ / 10`.
    GaussianTrain { width: Option<f64> },
    /// Associated Jordan vector at the defective energy `(n pi / a)^2`.
    JordanV { n: u32 },
    /// Explicit modes on `L = N a` (tilt taken from the scenario).
    Custom(Vec<(i64, C64)>),
}

/// Propagation distances.
#[derive(Debug, Clone, PartialEq)]
pub enum ZSampling {
    /// `z_k = k step` for `k = 0..=count`.
    Uniform { step: f64, count: usize },
    /// Arbitrary nonnegative distances; `z = 0` is prepended when absent.
    List(Vec<f64>),
}

impl ZSampling {
    /// `per_period` samples per revival period over `periods` periods.
    pub fn per_revival(z_t: f64, periods: f64, per_period: usize) -> Self {
        let count = (periods * per_period as f64).round() as usize;
        ZSampling::Uniform {
            step: z_t / per_period as f64,
            count,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ZSampling::Uniform { step, count } => (0..=*count).map(|k| k as f64 * step).collect(),
            ZSampling::List(zs) => {
                let mut out = Vec::with_capacity(zs.len() + 1);
                if zs.first() != Some(&0.0) {
                    out.push(0.0);
                }
                out.extend_from_slice(zs);
                out
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ZSampling::Uniform { step, .. } if !(*step > 0.0 && step.is_finite()) => {
                Err(Error::InvalidParameter(format!("z step must be positive, got {step}")))
            }
            ZSampling::List(zs) if zs.iter().any(|z| !(*z >= 0.0 && z.is_finite())) => {
                Err(Error::InvalidParameter("z samples must be finite and nonnegative".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A complete propagation setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub potential: ComplexPotential,
    pub commensurability: Commensurability,
    pub tilt: Tilt,
    pub profile: Profile,
    pub z: ZSampling,
    /// Block truncation; `None` picks one from the field and potential extent.
    pub n_trunc: Option<usize>,
    /// Number of field snapshots kept in the trace (evenly spread over the
    /// samples, always including the first and last).
    pub snapshots: usize,
}

impl Scenario {
    pub fn new(
        potential: ComplexPotential,
        commensurability: Commensurability,
        tilt: Tilt,
        profile: Profile,
        z: ZSampling,
    ) -> Result<Self> {
        check_tilt(commensurability.n(), tilt)?;
        z.validate()?;
        if let Profile::GaussianTrain { width: Some(w) } = profile {
            let limit = commensurability.input_period(potential.period()) / 2.0;
            if !(w > 0.0 && w < limit) {
                return Err(Error::WidthTooLarge { width: w, limit });
            }
        }
        Ok(Self {
            potential,
            commensurability,
            tilt,
            profile,
            z,
            n_trunc: None,
            snapshots: 65,
        })
    }

    pub fn with_n_trunc(mut self, n_trunc: usize) -> Self {
        self.n_trunc = Some(n_trunc);
        self
    }

    pub fn with_snapshots(mut self, snapshots: usize) -> Self {
        self.snapshots = snapshots;
        self
    }

    pub fn lattice_period(&self) -> f64 {
        self.potential.period()
    }

    pub fn input_period(&self) -> f64 {
        self.commensurability.input_period(self.lattice_period())
    }

    pub fn field_period(&self) -> f64 {
        self.commensurability.field_period(self.lattice_period())
    }

    pub fn revival_period(&self) -> Result<f64> {
        predict_revival(
            self.commensurability.n(),
            self.commensurability.m(),
            self.lattice_period(),
            self.tilt,
        )
    }

    pub fn initial_field(&self) -> Result<Wavefield> {
        let a = self.lattice_period();
        let (n, m) = (self.commensurability.n(), self.commensurability.m());
        let big = self.field_period();
        match &self.profile {
            Profile::GaussianTrain { width } => {
                let w = width.unwrap_or(self.input_period() / 10.0);
                let base = gaussian_train(n, m, a, w)?;
                Wavefield::tilted(big, a, self.tilt, base.modes().iter().map(|(k, c)| (*k, *c)))
            }
            Profile::JordanV { n: level } => {
                let (energy, q) = crate::bands::degeneracy_point(*level, a);
                let chain = jordan_chain(&self.potential, energy, q)?;
                let v = chain.v.normalized()?.reperiodized(big)?;
                if v.tilt() != self.tilt {
                    return Err(Error::InvalidParameter(format!(
                        "the Jordan vector at q = {q} needs tilt {} on a period of {n} cells, scenario has {}",
                        v.tilt(),
                        self.tilt
                    )));
                }
                Ok(v)
            }
            Profile::Custom(modes) => Wavefield::tilted(big, a, self.tilt, modes.iter().copied())?.normalized(),
        }
    }
}

/// One sample of a propagation trace.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub z: f64,
    /// `(1/L) int |psi(x,z) - psi(x,0)|^2 dx`.
    pub delta: f64,
    /// `(1/L) int |psi(x,z) - psi(x + ℒ/2, 0)|^2 dx`.
    pub delta_half: f64,
    /// Mean-square norm `(1/L) int |psi(x,z)|^2 dx`.
    pub norm: f64,
    pub field: Option<Wavefield>,
}

#[derive(Debug, Clone)]
pub struct PropagationTrace {
    pub records: Vec<TraceRecord>,
    pub input_period: f64,
    pub field_period: f64,
    pub n_trunc: usize,
}

impl PropagationTrace {
    /// Record closest to `z`.
    pub fn nearest(&self, z: f64) -> Option<&TraceRecord> {
        self.records.iter().min_by(|x, y| (x.z - z).abs().total_cmp(&(y.z - z).abs()))
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (f64, &Wavefield)> {
        self.records.iter().filter_map(|r| r.field.as_ref().map(|f| (r.z, f)))
    }

    /// Smallest `Delta` over the samples taken after `Delta` first reached
    /// `threshold`; `None` if it never did.
    pub fn min_after_departure(&self, threshold: f64) -> Option<f64> {
        let start = self.records.iter().position(|r| r.delta >= threshold)?;
        self.records[start..].iter().map(|r| r.delta).reduce(f64::min)
    }
}

/// Residue block `r`: harmonic `n` of the Bloch matrix at `q` carries field
/// mode `k = r + N (n - shift)`.
#[derive(Debug, Clone, Copy)]
struct BlockLayout {
    residue: i64,
    shift: i64,
    q: f64,
}

impl BlockLayout {
    fn mode(&self, cells: i64, n: i64) -> i64 {
        self.residue + cells * (n - self.shift)
    }

    /// Inverse of [`Self::mode`] for modes of this residue.
    fn harmonic(&self, cells: i64, k: i64) -> i64 {
        (k - self.residue) / cells + self.shift
    }
}

fn layouts(cells: i64, a: f64, tilt: Tilt) -> Vec<BlockLayout> {
    (0..cells)
        .map(|r| {
            let f = Tilt::new(r, cells) + tilt;
            let shift = (f + Tilt::new(1, 2)).floor().to_integer();
            BlockLayout {
                residue: r,
                shift,
                q: 2.0 * PI / a * tilt_value(f - shift),
            }
        })
        .collect()
}

/// Field split into per-block amplitude vectors.
struct BlockedField {
    cells: i64,
    n_trunc: usize,
    blocks: Vec<(BlockLayout, CVector)>,
}

impl BlockedField {
    fn new(pot: &ComplexPotential, field: &Wavefield, n_trunc: Option<usize>) -> Result<Self> {
        let a = pot.period();
        if (field.lattice_period() - a).abs() > 1e-12 * a {
            return Err(Error::BlockMismatch(format!(
                "field lattice period {} differs from the potential period {a}",
                field.lattice_period()
            )));
        }
        let ratio = field.period() / a;
        let cells = ratio.round();
        if !(cells >= 1.0 && (ratio - cells).abs() <= 1e-9 * ratio) {
            return Err(Error::BlockMismatch(format!(
                "field period {} is not a multiple of the lattice period {a}",
                field.period()
            )));
        }
        let cells = cells as i64;
        let layouts = layouts(cells, a, field.tilt());
        let peak = field.modes().values().map(|c| c.norm()).fold(0.0, f64::max);
        let significant = |c: &C64| c.norm() > NEGLIGIBLE * peak;
        let extent = field
            .modes()
            .iter()
            .filter(|(_, c)| significant(c))
            .map(|(k, _)| layouts[k.rem_euclid(cells) as usize].harmonic(cells, *k).unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let reach = pot.reach();
        let required = extent.max(2 * reach);
        let n_trunc = match n_trunc {
            Some(t) if t < required => {
                return Err(Error::TruncationTooSmall { n_trunc: t, required });
            }
            Some(t) => t,
            None => (2 * reach).max(extent + reach + 8),
        };
        let dim = 2 * n_trunc + 1;
        let mut blocks: Vec<(BlockLayout, CVector)> =
            layouts.into_iter().map(|l| (l, CVector::zeros(dim))).collect();
        for (k, c) in field.modes() {
            let (layout, vec) = &mut blocks[k.rem_euclid(cells) as usize];
            let i = layout.harmonic(cells, *k) + n_trunc as i64;
            if (0..dim as i64).contains(&i) {
                vec[i as usize] = *c;
            }
        }
        Ok(Self { cells, n_trunc, blocks })
    }

    fn assemble(&self, period: f64, lattice_period: f64, tilt: Tilt, vectors: &[&CVector]) -> Result<Wavefield> {
        let modes = self.blocks.iter().zip(vectors).flat_map(|((layout, _), v)| {
            v.iter()
                .enumerate()
                .map(move |(i, c)| (layout.mode(self.cells, i as i64 - self.n_trunc as i64), *c))
        });
        Wavefield::tilted(period, lattice_period, tilt, modes)
    }
}

fn edge_power(v: &CVector) -> f64 {
    let n = v.len();
    let w = EDGE_WIDTH.min(n / 2);
    v.iter()
        .take(w)
        .chain(v.iter().skip(n - w))
        .map(|c| c.norm_sqr())
        .sum()
}

/// Evolves every block to every sample; `out[b][s]` is block `b` at `zs[s]`.
fn evolve_blocks(pot: &ComplexPotential, blocked: &BlockedField, z: &ZSampling) -> Result<Vec<Vec<CVector>>> {
    let zs = z.values();
    blocked
        .blocks
        .par_iter()
        .map(|(layout, x0)| {
            if x0.iter().all(|c| *c == C64::default()) {
                return Ok(vec![x0.clone(); zs.len()]);
            }
            let block = bloch_matrix(pot, layout.q, blocked.n_trunc)?;
            let h: &CMatrix = block.matrix();
            let generator = |dz: f64| expm(&(h * C64::new(0.0, -dz)));
            match z {
                ZSampling::Uniform { step, .. } => {
                    let p = generator(*step);
                    let mut out = Vec::with_capacity(zs.len());
                    out.push(x0.clone());
                    for _ in 1..zs.len() {
                        let next = &p * out.last().expect("nonempty");
                        out.push(next);
                    }
                    Ok(out)
                }
                ZSampling::List(_) => Ok(zs.iter().map(|z| generator(*z) * x0).collect()),
            }
        })
        .collect()
}

fn check_edges(blocks: &[Vec<CVector>], zs: &[f64]) -> Result<()> {
    for s in 0..zs.len() {
        let total: f64 = blocks.iter().map(|b| b[s].norm_squared()).sum();
        let edge: f64 = blocks.iter().map(|b| edge_power(&b[s])).sum();
        if total > 0.0 && edge > EDGE_TOLERANCE * total {
            return Err(Error::TruncationInadequate { ratio: edge / total });
        }
    }
    Ok(())
}

/// Evolves an arbitrary field whose period spans whole lattice cells.
pub fn evolve(pot: &ComplexPotential, field: &Wavefield, z: &ZSampling, n_trunc: Option<usize>) -> Result<Vec<Wavefield>> {
    z.validate()?;
    let blocked = BlockedField::new(pot, field, n_trunc)?;
    let blocks = evolve_blocks(pot, &blocked, z)?;
    let zs = z.values();
    check_edges(&blocks, &zs)?;
    (0..zs.len())
        .map(|s| {
            let vs: Vec<&CVector> = blocks.iter().map(|b| &b[s]).collect();
            blocked.assemble(field.period(), field.lattice_period(), field.tilt(), &vs)
        })
        .collect()
}

/// Evolves the scenario's initial field and evaluates the deviation
/// functionals at every sample.
pub fn propagate(scenario: &Scenario) -> Result<PropagationTrace> {
    let pot = &scenario.potential;
    let field = scenario.initial_field()?;
    let blocked = BlockedField::new(pot, &field, scenario.n_trunc)?;
    let blocks = evolve_blocks(pot, &blocked, &scenario.z)?;
    let zs = scenario.z.values();
    check_edges(&blocks, &zs)?;

    // psi(x + ℒ/2, 0) multiplies every mode by exp(i kappa ℒ / 2)
    let half = scenario.input_period() / 2.0;
    let shifted: Vec<CVector> = blocked
        .blocks
        .iter()
        .map(|(layout, x0)| {
            CVector::from_fn(x0.len(), |i, _| {
                let k = layout.mode(blocked.cells, i as i64 - blocked.n_trunc as i64);
                x0[i] * (I * field.wavenumber(k) * half).exp()
            })
        })
        .collect();

    let keep = snapshot_indices(zs.len(), scenario.snapshots);
    let records = zs
        .iter()
        .enumerate()
        .map(|(s, &z)| {
            let mut delta = 0.0;
            let mut delta_half = 0.0;
            let mut norm = 0.0;
            for ((b, (_, x0)), sh) in blocks.iter().zip(&blocked.blocks).zip(&shifted) {
                let x = &b[s];
                delta += (x - x0).norm_squared();
                delta_half += (x - sh).norm_squared();
                norm += x.norm_squared();
            }
            let field = if keep.contains(&s) {
                let vs: Vec<&CVector> = blocks.iter().map(|b| &b[s]).collect();
                Some(blocked.assemble(field.period(), field.lattice_period(), field.tilt(), &vs)?)
            } else {
                None
            };
            Ok(TraceRecord {
                z,
                delta,
                delta_half,
                norm,
                field,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropagationTrace {
        records,
        input_period: scenario.input_period(),
        field_period: scenario.field_period(),
        n_trunc: blocked.n_trunc,
    })
}

fn snapshot_indices(len: usize, count: usize) -> std::collections::BTreeSet<usize> {
    match count {
        0 => Default::default(),
        1 => [0].into(),
        c if c >= len => (0..len).collect(),
        c => (0..c).map(|i| i * (len - 1) / (c - 1)).collect(),
    }
}

/// Options for [`split_step_oracle_with`].
#[derive(Debug, Clone, Copy)]
pub struct SplitStepOptions {
    /// Grid points over one field period; `None` picks at least 512 and
    /// enough to hold the field with room for the potential.
    pub points: Option<usize>,
}

/// Independent integrator: fourth-order composition of symmetric
/// kinetic/potential splittings. The kinetic factor is exact in mode space,
/// the potential factor acts pointwise on samples. Runs at `dz` and `dz/2`
/// and fails when the two disagree by more than [`STEP_TOLERANCE`].
pub fn split_step_oracle(field: &Wavefield, pot: &ComplexPotential, z: f64, dz: f64) -> Result<Wavefield> {
    split_step_oracle_with(field, pot, z, dz, SplitStepOptions { points: None })
}

pub fn split_step_oracle_with(
    field: &Wavefield,
    pot: &ComplexPotential,
    z: f64,
    dz: f64,
    options: SplitStepOptions,
) -> Result<Wavefield> {
    if !(dz > 0.0 && z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(format!("need z >= 0 and dz > 0, got z={z}, dz={dz}")));
    }
    let need = (field.max_index() as usize + 4 * pot.reach() + 1).next_power_of_two() * 2;
    let points = options.points.unwrap_or(need.max(512));
    let grid = Grid::new(field.period(), points)?;
    if field.max_index() > grid.max_mode() {
        return Err(Error::UnderResolved {
            points,
            mode: field.max_index(),
        });
    }
    let (coarse, fine) = rayon::join(
        || SplitStepper::new(field, pot, &grid)?.run(field, z, dz),
        || SplitStepper::new(field, pot, &grid)?.run(field, z, dz / 2.0),
    );
    let (coarse, fine) = (coarse?, fine?);
    let change = coarse.distance_sqr(&fine).sqrt() / fine.norm().max(f64::MIN_POSITIVE);
    if !(change <= STEP_TOLERANCE) {
        return Err(Error::StepNotConverged { change });
    }
    Ok(fine)
}

struct SplitStepper {
    grid: Grid,
    kappa2: Vec<f64>,
    potential: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl SplitStepper {
    fn new(field: &Wavefield, pot: &ComplexPotential, grid: &Grid) -> Result<Self> {
        let kappa2 = (0..grid.points())
            .map(|b| field.wavenumber(grid.mode_of_bin(b)).powi(2))
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points());
        let inverse = planner.plan_fft_inverse(grid.points());
        let scratch = vec![C64::default(); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        Ok(Self {
            grid: *grid,
            kappa2,
            potential: potential_samples(pot, grid)?,
            forward,
            inverse,
            scratch,
        })
    }

    fn kinetic(&self, bins: &mut [C64], h: f64) {
        for (c, k2) in bins.iter_mut().zip(&self.kappa2) {
            *c *= (-I * k2 * h).exp();
        }
    }

    fn potential(&mut self, bins: &mut [C64], h: f64) {
        self.inverse.process_with_scratch(bins, &mut self.scratch);
        let scale = 1.0 / bins.len() as f64;
        for (s, v) in bins.iter_mut().zip(&self.potential) {
            *s *= (-I * v * h).exp() * scale;
        }
        self.forward.process_with_scratch(bins, &mut self.scratch);
    }

    fn strang(&mut self, bins: &mut [C64], h: f64) {
        self.kinetic(bins, h / 2.0);
        self.potential(bins, h);
        self.kinetic(bins, h / 2.0);
    }

    fn run(&mut self, field: &Wavefield, z: f64, dz: f64) -> Result<Wavefield> {
        let cbrt2 = 2f64.cbrt();
        let w1 = 1.0 / (2.0 - cbrt2);
        let w0 = -cbrt2 / (2.0 - cbrt2);
        let steps = (z / dz).ceil().max(1.0) as usize;
        let h = z / steps as f64;
        let mut bins = vec![C64::default(); self.grid.points()];
        for (k, c) in field.modes() {
            bins[self.grid.bin(*k)] += c;
        }
        if z > 0.0 {
            for _ in 0..steps {
                self.strang(&mut bins, w1 * h);
                self.strang(&mut bins, w0 * h);
                self.strang(&mut bins, w1 * h);
            }
        }
        let modes = bins.iter().enumerate().map(|(b, c)| (self.grid.mode_of_bin(b), *c));
        Wavefield::tilted(field.period(), field.lattice_period(), field.tilt(), modes)
    }
}

/// Evolves `v` of a Jordan chain, checks the exact law
/// `psi(z) = exp(-i E z) (v - i z u)` at ten samples on `[z_max/2, z_max]`
/// and returns the least-squares slope of `||psi(z)||` there.
pub fn secular_growth_test(pot: &ComplexPotential, chain: &JordanChain, z_max: f64) -> Result<f64> {
    if !(z_max > 0.0 && z_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("z_max must be positive, got {z_max}")));
    }
    let zs: Vec<f64> = (0..10).map(|j| z_max / 2.0 + j as f64 * z_max / 18.0).collect();
    let fields = evolve(pot, &chain.v, &ZSampling::List(zs.clone()), None)?;
    let mut norms = Vec::with_capacity(zs.len());
    for (z, psi) in zs.iter().zip(&fields[1..]) {
        let phase = (-I * chain.energy * z).exp();
        let expected = chain.v.clone().scaled(phase).added(&chain.u.clone().scaled(-I * z * phase))?;
        let err = psi.distance_sqr(&expected).sqrt() / expected.norm();
        if !(err <= SECULAR_TOLERANCE) {
            return Err(Error::NotSecular(format!(
                "relative deviation {err:.3e} from the secular law at z = {z}"
            )));
        }
        norms.push(psi.norm());
    }
    let mean_z = zs.iter().sum::<f64>() / zs.len() as f64;
    let mean_n = norms.iter().sum::<f64>() / norms.len() as f64;
    let (num, den) = zs.iter().zip(&norms).fold((0.0, 0.0), |(num, den), (z, n)| {
        (num + (z - mean_z) * (n - mean_n), den + (z - mean_z).powi(2))
    });
    Ok(num / den)
}

/// First sampled `z` at which `Delta < epsilon` after `Delta` has risen to
/// `epsilon` or above. Requires a norm-conserving trace.
pub fn recurrence_search(trace: &PropagationTrace, epsilon: f64) -> Result<Option<f64>> {
    if let Some(r) = trace.records.iter().find(|r| !((r.norm - 1.0).abs() <= NORM_TOLERANCE)) {
        return Err(Error::NormNotConserved { z: r.z, norm: r.norm });
    }
    let Some(start) = trace.records.iter().position(|r| r.delta >= epsilon) else {
        return Ok(None);
    };
    Ok(trace.records[start..].iter().find(|r| r.z > 0.0 && r.delta < epsilon).map(|r| r.z))
}
