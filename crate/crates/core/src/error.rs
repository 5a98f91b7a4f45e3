use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid with {points} points cannot represent mode index {mode}")]
    UnderResolved { points: usize, mode: i64 },
    #[error("grid length {grid_length} is not an integer multiple of the lattice period {period}")]
    IncommensurateGrid { grid_length: f64, period: f64 },
    #[error("field period {field_period} does not match grid length {grid_length}")]
    GridMismatch { field_period: f64, grid_length: f64 },
    #[error("Fourier coefficients have not decayed at the truncation edge: |V_nmax|/max|V_n| = {ratio:e}")]
    TruncationInadequate { ratio: f64 },
    #[error("Bloch truncation {n_trunc} is too small (need at least {required})")]
    TruncationTooSmall { n_trunc: usize, required: usize },
    #[error("seed does not solve the input Hamiltonian: relative residual {residual:e}")]
    SeedNotSolution { residual: f64 },
    #[error("seed vanishes at x = {x}: the partner potential diverges")]
    SeedVanishes { x: f64 },
    #[error("energy {energy} at q = {q} is not defective (kernel dimension {kernel_dim})")]
    NotDefective { energy: f64, q: f64, kernel_dim: usize },
    #[error("Jordan chain residual {residual:e} exceeds tolerance")]
    ChainResidual { residual: f64 },
    #[error("eigenvalue {re} + {im}i is not real: spectrum is in the broken phase")]
    ComplexSpectrum { re: f64, im: f64 },
    #[error("Gaussian width {width} must lie in (0, {limit})")]
    WidthTooLarge { width: f64, limit: f64 },
    #[error("N = {n} and M = {m} are not relatively prime")]
    NotCoprime { n: u32, m: u32 },
    #[error("tilt conditions violated: {0}")]
    TiltConditionsViolated(String),
    #[error("block decomposition inconsistency: {0}")]
    BlockMismatch(String),
    #[error("split-step result changed by {change:e} when halving the step")]
    StepNotConverged { change: f64 },
    #[error("evolution does not follow the secular law: {0}")]
    NotSecular(String),
    #[error("norm drifted to {norm} at z = {z}: the potential is not Hermitian")]
    NormNotConserved { z: f64, norm: f64 },
    #[error("harmonic {harmonic} at {frequency_hz:e} Hz exceeds the modulator bandwidth {bandwidth_hz:e} Hz")]
    BandwidthExceeded {
        harmonic: i64,
        frequency_hz: f64,
        bandwidth_hz: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
