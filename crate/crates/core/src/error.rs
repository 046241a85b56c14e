//! Crate-wide error with module-qualified codes.

use crate::cli_io::ConfigError;
use crate::escape::EscapeError;
use crate::logspace::LogError;
use crate::map_core::MapError;
use crate::rays::RayError;
use crate::symbolic::SymbolicError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Rays(#[from] RayError),
    #[error(transparent)]
    Escape(#[from] EscapeError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Stable identifier of the form `module.kind`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Map(e) => match e {
                MapError::DegenerateP => "map_core.degenerate_p",
                MapError::DegenerateQ => "map_core.degenerate_q",
                MapError::NonFinite(_) => "map_core.non_finite",
                MapError::Domain => "map_core.domain",
                MapError::Range(_) => "map_core.range",
                MapError::RootFinder(_) => "map_core.root_finder",
                MapError::OrbitSearch(_) => "map_core.orbit_search",
            },
            Error::Log(e) => match e {
                LogError::Range { .. } => "logspace.range",
                LogError::Precondition(_) => "logspace.precondition",
                LogError::BranchFailure { .. } => "logspace.branch_failure",
                LogError::OnCut(_) => "logspace.on_cut",
                LogError::NotInTract(_) => "logspace.not_in_tract",
                LogError::Budget(_) => "logspace.budget",
                LogError::Map(_) => "logspace.map",
            },
            Error::Symbolic(e) => match e {
                SymbolicError::EmptyPeriod => "symbolic.empty_period",
                SymbolicError::Parse { .. } => "symbolic.parse",
                SymbolicError::Incomparable(_) => "symbolic.incomparable",
                SymbolicError::Inadmissible { .. } => "symbolic.inadmissible",
                SymbolicError::Profile(..) => "symbolic.profile",
            },
            Error::Rays(e) => match e {
                RayError::Inadmissible(_) => "rays.inadmissible",
                RayError::Grid(_) => "rays.grid",
                RayError::Seed { .. } => "rays.seed",
                RayError::Branch { .. } => "rays.branch",
                RayError::NotPeriodic(_) => "rays.not_periodic",
                RayError::InsufficientPairs { .. } => "rays.insufficient_pairs",
                RayError::Inconsistent(_) => "rays.inconsistent",
                RayError::TractPair(..) => "rays.tract_pair",
            },
            Error::Escape(e) => match e {
                EscapeError::Viewport(_) => "escape.viewport",
                EscapeError::Params(_) => "escape.params",
                EscapeError::Threads(_) => "escape.threads",
            },
            Error::Config(e) => match e {
                ConfigError::Syntax { .. } => "cli_io.syntax",
                ConfigError::Invariant { .. } => "cli_io.invariant",
                ConfigError::UnknownPreset(_) => "cli_io.unknown_preset",
            },
            Error::Io { .. } => "cli_io.io",
            Error::Usage(_) => "cli_io.usage",
        }
    }

    /// 2 for usage and configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) | Error::Symbolic(SymbolicError::Parse { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
