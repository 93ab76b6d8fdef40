use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulation primitives and the scenario layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid direction: expected a unit vector, got norm {norm}")]
    InvalidDirection { norm: f64 },

    #[error("plane-wave mode violates the dispersion relation: omega = {omega}, u|k| = {u_k}")]
    DispersionViolation { omega: f64, u_k: f64 },

    #[error("polarization state is not normalized: |alpha|^2 + |beta|^2 = {norm_sq}")]
    UnnormalizedPolarization { norm_sq: f64 },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("field grid mixes helicities; the free-space check needs a helicity-pure field")]
    MixedHelicity,

    #[error("negative time t = {t}; the solution is defined for forward evolution only")]
    NegativeTime { t: f64 },

    #[error("under-resolved bath: bandwidth {bandwidth} < 10 gamma = {min}")]
    UnderResolvedBath { bandwidth: f64, min: f64 },

    #[error("reservoir grid must have an odd mode count >= 101, got {j}")]
    BadReservoirCount { j: usize },

    #[error("t = {t} lies beyond the recurrence validity window [0, {window}]")]
    RecurrenceContamination { t: f64, window: f64 },

    #[error("Fock oracle dimension {dim} exceeds the resource guard of 100000")]
    ResourceLimit { dim: usize },

    #[error("fit window error: {0}")]
    FitWindow(String),

    #[error("temperature must be positive, got {t} K")]
    NonPositiveTemperature { t: f64 },

    #[error("far-field approximation violated: r = {r} < {min} (100 x source size)")]
    FarFieldViolation { r: f64, min: f64 },

    #[error("scattered frequency has positive imaginary part {im}; growing modes are rejected")]
    GrowingMode { im: f64 },

    #[error("singular pair constant: {0}")]
    SingularConstant(String),

    #[error("non-stationary evaluation: t = {t} but the closed form needs t > {min} (= 5/gamma + retardation)")]
    NonStationary { t: f64, min: f64 },

    #[error("thermal occupation N = {n_bar} exceeds 1e-2; the vacuum approximation does not apply")]
    ThermalOccupation { n_bar: f64 },

    #[error("analyzer is not transverse to its detection arm (|a.r| = {dot})")]
    AnalyzerGeometry { dot: f64 },

    #[error("spectrum grid too coarse: step {step} > gamma/4 = {max}")]
    SpectrumResolution { step: f64, max: f64 },

    #[error("delay grid exceeds the underflow horizon (gamma dt = {gamma_dt} > 600)")]
    DelayUnderflow { gamma_dt: f64 },

    #[error("all-zero rate map: cannot sample a degenerate distribution")]
    DegenerateDistribution,

    #[error("scan configuration error: {0}")]
    ScanConfig(String),

    #[error("scenario configuration error: {0}")]
    Config(String),

    #[error("scenario validation failed: {0}")]
    Validation(String),

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("scenario parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
