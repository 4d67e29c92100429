use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dim must be 1 or 2, got {0}")]
    BadDim(usize),
    #[error("grid spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("radius {radius} is not an integer multiple of h {h}")]
    NonIntegerNodeCount { radius: f64, h: f64 },
    #[error("axis {axis} out of range for dim {dim}")]
    BadAxis { axis: usize, dim: usize },
    #[error("plane offset {0} is not on the integer grid")]
    PlaneOffGrid(f64),
    #[error("field length {got} does not match grid node count {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("empty field")]
    EmptyField,
    #[error("center lies outside the lattice")]
    CenterOutsideLattice,
}

#[derive(Debug, Error)]
pub enum KernelError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("fractional order s must lie in (0,1), got {0}")]
    BadOrder(f64),
    #[error("field and kernel live on different grids")]
    GridMismatch,
    #[error("ball B_delta(xbar) intersects the reflection plane")]
    BallMeetsPlane,
    #[error("offset mu={0} is not on the integer grid")]
    OffsetOffGrid(f64),
    #[error("offset mu={0} must be nonnegative")]
    NegativeOffset(f64),
    #[error("step evaluation point must be positive, got {0}")]
    BadStepPoint(f64),
    #[error("bump radius must be positive, got {0}")]
    BadBumpRadius(f64),
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("integration diverged: non-finite value at node {node}, t={t}")]
    Diverged { node: usize, t: f64 },
    #[error("time step {dt} exceeds the stability bound {max}")]
    UnstableStep { dt: f64, max: f64 },
    #[error("trajectory needs at least {need} snapshots, got {got}")]
    TooFewSnapshots { need: usize, got: usize },
    #[error("snapshot interval must be positive, got {0}")]
    BadSnapInterval(f64),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
}

#[derive(Debug, Error)]
pub enum DiagnosticError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error("empty plane-offset sweep")]
    EmptyLambdaList,
    #[error("empty limit-candidate set")]
    EmptyPhiSet,
    #[error("sign condition already fails at the outermost plane (no starting position)")]
    NoStartingPosition,
    #[error("region is empty")]
    EmptyRegion,
    #[error("barrier spec invalid: {0}")]
    BadBarrierSpec(String),
    #[error("zero normalizer: sup |zeta(., t_n)| over D vanishes")]
    ZeroNormalizer,
}
