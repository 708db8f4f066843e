use thiserror::Error;

/// Errors produced by the coherence toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("packet clipped: center {center} with width {sigma} needs a {margin}-sigma margin inside [{x_min}, {x_max}]")]
    PacketClipped {
        center: f64,
        sigma: f64,
        margin: f64,
        x_min: f64,
        x_max: f64,
    },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("weights must be nonnegative and sum to 1 (sum = {0})")]
    WeightSum(f64),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositiveScale { name: &'static str, value: f64 },

    #[error("pointer resolution exceeded: needs |z| up to {needed}, meter lattice covers {available}")]
    Resolution { needed: f64, available: f64 },

    #[error("kernel magnitude {min_abs:e} falls below the inversion floor {floor:e}")]
    SingularKernel { min_abs: f64, floor: f64 },

    #[error("shift of {steps} sites does not fit a grid of {n_points} points")]
    ShiftTooLarge { steps: isize, n_points: usize },

    #[error("interval [{lo}, {hi}] selects no lattice site")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("supports overlap (overlap = {0:e})")]
    Overlap(f64),

    #[error("{name} = {value} is not an integer multiple of the lattice spacing")]
    OffLattice { name: &'static str, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel is degenerate at this separation (|g| = 1)")]
    DegenerateKernel,

    #[error("kernel is not completely positive; use the step projector for masks")]
    NotCompletelyPositive,

    #[error("operation requires a single-lattice state, got {0} factors")]
    NotSingleLattice(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
