use thiserror::Error;

use crate::types::AppId;

/// Errors shared by the solver modules.
///
/// Infeasibility (the instance admits no solution for the requested
/// operation) is kept distinct from structural errors (malformed inputs,
/// contract violations); [`Error::is_infeasibility`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("load must be non-negative")]
    NegativeLoad,

    #[error("application {0}: load must be positive")]
    NonPositiveLoad(AppId),

    #[error("application {0}: memory demand must be at least 1")]
    ZeroMemory(AppId),

    #[error("application {app}: memory demand {demand} exceeds machine capacity {capacity}")]
    MemoryDemandTooLarge {
        app: AppId,
        demand: u64,
        capacity: u64,
    },

    #[error("memory capacity must be at least 1")]
    ZeroMemoryCapacity,

    #[error("cpu capacity must be positive")]
    NonPositiveCpuCap,

    #[error("duplicate application id {0}")]
    DuplicateAppId(AppId),

    #[error("assignment references unknown application {0}")]
    UnknownApp(AppId),

    #[error("machine index {index} out of range for {machines} machines")]
    MachineIndexOutOfRange { index: usize, machines: usize },

    #[error("operation requires a machine cpu capacity")]
    MissingCpuCap,

    #[error("application {0}: load exceeds the per-machine cpu capacity")]
    LoadExceedsCpuCap(AppId),

    #[error("cpu capacity must be an exact multiple of the common load")]
    NotDivisible,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("instance too large for exhaustive search: {apps} apps / {machines} machines exceeds caps {max_apps}/{max_machines}")]
    SearchCapExceeded {
        apps: usize,
        machines: usize,
        max_apps: usize,
        max_machines: usize,
    },

    #[error("invalid numeric literal {0:?}")]
    InvalidNumber(String),

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// True when the error reports that no feasible solution exists, as
    /// opposed to a malformed input or a violated contract.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_)
                | Error::LoadExceedsCpuCap(_)
                | Error::MemoryDemandTooLarge { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
