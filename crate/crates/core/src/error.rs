use thiserror::Error;

/// Errors raised by grid construction, field algebra, solvers and harnesses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be a power of two with n >= 8, got {0}")]
    InvalidGridSize(usize),

    #[error("domain length must be positive and finite, got {0}")]
    InvalidLength(f64),

    #[error("sample count {got} does not match grid size {expected}")]
    SampleCount { expected: usize, got: usize },

    #[error("field contains a non-finite sample at node {0}")]
    NonFiniteSample(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("unsupported derivative order {0}; only 1 and 2 are implemented")]
    UnsupportedDerivativeOrder(u32),

    #[error("nonlinearity sign must be +1 or -1, got {0}")]
    InvalidSigma(i32),

    #[error("nonlinearity coefficient must satisfy lambda >= 1, got {0}")]
    InvalidLambda(f64),

    #[error("nonlinearity order must be an odd integer >= 3, got {0}")]
    InvalidNonlinearOrder(u32),

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("t_end must satisfy t_end >= dt, got t_end = {t_end}, dt = {dt}")]
    InvalidTimeSpan { t_end: f64, dt: f64 },

    #[error("record_every must be >= 1")]
    InvalidRecordCadence,

    #[error("rk4 stability guard violated: dt = {dt} exceeds 0.1*dx^2 = {limit}")]
    UnstableTimeStep { dt: f64, limit: f64 },

    #[error("wavenumber index {k_index} is not resolved on a grid of {n} nodes")]
    UnresolvedWavenumber { k_index: i64, n: usize },

    #[error("initial datum does not fit the box: boundary amplitude {margin:e} exceeds {limit:e}")]
    BoundaryMargin { margin: f64, limit: f64 },

    #[error("packet width {w} is below the resolvable minimum 4*dx = {min}")]
    UnderResolvedWidth { w: f64, min: f64 },

    #[error("field became non-finite; last good time t = {last_good_time}")]
    NonFiniteField { last_good_time: f64 },

    #[error("operation needs at least {needed} records, trajectory has {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("trajectory records are not uniformly spaced in time")]
    NonUniformRecords,

    #[error("degenerate fit: ||d/dx current||^2 = {0:e} is below 1e-14")]
    DegenerateFit(f64),

    #[error("mass {0:e} is below 1e-14; center of mass undefined")]
    VanishingMass(f64),

    #[error("perturbation size {0:e} outside the supported range [1e-8, 1e-2]")]
    EpsilonOutOfRange(f64),

    #[error("observation point {x0} lies outside the box [{lo}, {hi})")]
    ObservationOutsideBox { x0: f64, lo: f64, hi: f64 },

    #[error("ensemble produced no usable member (all degenerate)")]
    EmptyEnsemble,

    #[error("ensemble member {index} failed: {source}")]
    MemberFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}: malformed record: {msg}")]
    Malformed {
        path: String,
        line: usize,
        msg: String,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
