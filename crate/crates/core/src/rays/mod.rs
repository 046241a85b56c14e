//! Dynamic rays: tails, landing, brokenness, head-start and speed ordering, bouquets.

mod bouquet;
mod headstart;
mod landing;
mod trace;

pub use bouquet::{
    check_bouquet_disjoint, check_bouquet_order, enumerate_addresses, periodic_cycles, sample_bouquet, BouquetResult,
    DisjointnessReport, OrderReport,
};
pub use headstart::{
    head_start_check, head_start_search, speed_compare, HeadStartReport, HeadStartSearch, Speed, HEAD_START_OFFSETS,
    HEAD_START_SLOPES,
};
pub use landing::{
    find_cycle_landing_on, is_broken, land_periodic_ray, CriticalHit, LandingConfig, LandingReport, Verdict,
};
pub use trace::{
    geometric_grid, min_parameter, next_height, sample_ratios, trace_point, trace_ray_tail, RayConfig, RaySample,
    RayTail, MAX_PLANE_T,
};

use crate::logspace::LogError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RayError {
    #[error("address {0} is not admissible")]
    Inadmissible(String),
    #[error("invalid parameter grid: {0}")]
    Grid(String),
    #[error("seed failure at t = {t}, depth {depth}: {msg}")]
    Seed { t: f64, depth: usize, msg: String },
    #[error("inverse branch failed at t = {t}, depth {depth}: {source}")]
    Branch { t: f64, depth: usize, source: LogError },
    #[error("address {0} is not purely periodic")]
    NotPeriodic(String),
    #[error("only {found} valid sample pairs, {needed} required")]
    InsufficientPairs { found: usize, needed: usize },
    #[error("speed ordering flipped at iterate {0}")]
    Inconsistent(usize),
    #[error("tract pair {0} -> {1} is not admissible")]
    TractPair(String, String),
}
