use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("grid size {0} is invalid: need an even number of points per axis, at least 8")]
    InvalidGridSize(usize),

    #[error("axis {0} is not a coordinate axis of the torus (expected 1 or 2)")]
    InvalidAxis(usize),

    #[error("band limit kmax={kmax} is too large for a grid with N={n} (need {bound})")]
    BandLimitTooLarge {
        kmax: usize,
        n: usize,
        bound: &'static str,
    },

    #[error("fields live on different grids (N={0} vs N={1})")]
    GridMismatch(usize, usize),

    #[error("volume density must be positive, found {value:e} at ({x:.4}, {y:.4})")]
    NonPositiveDensity { value: f64, x: f64, y: f64 },

    #[error("tensor is not positive definite at ({x:.4}, {y:.4}): g11={g11:e}, det={det:e}")]
    NotPositiveDefinite { x: f64, y: f64, g11: f64, det: f64 },

    #[error("metric is not compatible with the volume form: sup|sqrt(det g) - f| = {residual:e}")]
    Incompatible { residual: f64 },

    #[error("tensor is not trace-free with respect to the base metric: sup|tr| = {residual:e}")]
    NotTraceFree { residual: f64 },

    #[error("tangent vectors are based at different metrics")]
    BaseMismatch,

    #[error("metric path left the space of compatible metrics at t={t} near ({x:.4}, {y:.4})")]
    PathDegenerate { t: f64, x: f64, y: f64 },

    #[error("zero tangent vector has no nondegeneracy witness")]
    ZeroTangent,

    #[error("stream function must have zero mean, found mean {0:e}")]
    StreamNotZeroMean(f64),

    #[error("vector field and metric refer to different volume forms")]
    VolumeMismatch,

    #[error("flow step dt={0} exceeds the maximum of 1e-2")]
    StepTooLarge(f64),

    #[error("flow volume defect {defect:e} exceeds {limit:e}; reduce the step size")]
    VolumeDefect { defect: f64, limit: f64 },

    #[error("loop is not closed: endpoint displacement ({dx}, {dy}) is not an integer vector")]
    OpenLoop { dx: f64, dy: f64 },

    #[error("loop with winding ({0}, {1}) is not contractible")]
    NonContractible(i64, i64),

    #[error("circle bundle curvature integrates to {integral:e}, not a multiple of 2*pi")]
    Quantization { integral: f64 },

    #[error("numerical value is not finite in {0}")]
    NonFinite(&'static str),
}
