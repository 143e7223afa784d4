use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown lattice preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{name}` has no variant {variant} (valid: {min}..={max})")]
    VariantOutOfRange {
        name: String,
        variant: usize,
        min: usize,
        max: usize,
    },
    #[error("preset `{name}` has no operator placement `{placement}`")]
    UnknownPlacement { name: String, placement: String },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("site index {index} out of range for {site_count} sites")]
    SiteOutOfRange { index: usize, site_count: usize },
    #[error("operator sites must differ (got {0} twice)")]
    CoincidentSites(usize),

    #[error("empty sector: {bosons} bosons cannot fit in {sites} sites with cap {cap}")]
    EmptySector { sites: usize, bosons: usize, cap: usize },
    #[error("occupation {0:?} is not in the sector")]
    NotInSector(Vec<u8>),
    #[error("cannot annihilate a boson in the vacuum sector")]
    VacuumAnnihilation,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Krylov step failed to reach tolerance {tolerance:e} (estimate {estimate:e} at step {step:e})")]
    ToleranceNotMet {
        tolerance: f64,
        estimate: f64,
        step: f64,
    },
    #[error("invalid Krylov configuration: {0}")]
    InvalidKrylovConfig(String),
    #[error("unknown propagator `{0}`")]
    UnknownPropagator(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("OTOC needs at least 2 bosons, initial state has {0}")]
    TooFewBosons(usize),

    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("grid mismatch between series: {0}")]
    GridMismatch(String),

    #[error("unknown fit model `{0}`")]
    UnknownModel(String),
    #[error("invalid model parameters: {0}")]
    InvalidParameters(String),
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("oracle refuses dimension {dim} (cap {cap})")]
    OracleCapExceeded { dim: usize, cap: usize },

    #[error("config error at `{pointer}`: {message}")]
    Config { pointer: String, message: String },
    #[error("refusing heavy run: sector dimension {dim} exceeds budget {budget} (pass --allow-heavy)")]
    ResourceRefusal { dim: u64, budget: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
