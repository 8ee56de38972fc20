use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid growth model: {0}")]
    InvalidModel(String),
    #[error("invalid consumption weight: {0}")]
    InvalidWeight(String),
    #[error("invalid initial condition: {0}")]
    InvalidInitial(String),
    #[error("invalid environment schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid concavity constants: {0}")]
    InvalidConstants(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("unstable reaction step: dt*K0/eps = {ratio} must stay below 1")]
    Unstable { ratio: f64 },
    #[error("non-finite density after step ending at t = {t} (last good t = {last_good_t})")]
    NonFinite { t: f64, last_good_t: f64 },
    #[error("tridiagonal system lost strict diagonal dominance at node {node}, t = {t}")]
    DiagonalDominance { t: f64, node: usize },
    #[error("competition I = {value} exceeded the bound {bound} at t = {t}")]
    CompetitionBound { t: f64, value: f64, bound: f64 },
    #[error("switch time {switch} does not land on the time grid (error {error})")]
    SwitchTime { switch: f64, error: f64 },
}

impl SolverError {
    /// Last time at which the state was known to be good, when the error carries one.
    pub fn last_good_time(&self) -> Option<f64> {
        match self {
            SolverError::NonFinite { last_good_t, .. } => Some(*last_good_t),
            SolverError::DiagonalDominance { t, .. } | SolverError::CompetitionBound { t, .. } => Some(*t),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HjError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("constraint R(x, I) = 0 has no nonnegative root at x = {xbar} (R(x, 0) = {rate})")]
    NoViableLevel { xbar: f64, rate: f64 },
    #[error("curvature closure broke down: M = {m} at t = {t}")]
    CurvatureBreakdown { t: f64, m: f64 },
    #[error("initial trait {xbar} is already viable (R(x, 0) = {rate} > 0)")]
    AlreadyViable { xbar: f64, rate: f64 },
    #[error("gradient vanishes at x = {xbar}; the trait never leaves the non-viable region")]
    NoDrift { xbar: f64 },
    #[error("invalid HJ integration parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("sweep needs a periodic schedule")]
    NotPeriodic,
    #[error("invalid sweep period {0}")]
    InvalidPeriod(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
