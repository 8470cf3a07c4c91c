//! Chern-Simons invariants of boundary-unipotent flat SL(2,C)-bundles over
//! semi-ideally triangulated 3-manifolds, computed through an explicit
//! dilogarithm formula, together with the transition cocycle of the
//! Chern-Simons line on triangulated surfaces.
//!
//! The main entry points are [`cs3d::invariant`] and [`cs3d::solve_ptolemy`]
//! for the 3-dimensional invariant, and [`csline2d::LineState`] for the
//! 2-dimensional line calculus. Everything downstream of a parsed
//! [`triangulation::Triangulation3`] is deterministic given a seed.

pub mod abelianization;
pub mod cs3d;
pub mod csline2d;
pub mod dilog;
pub mod orientation;
pub mod tables;
pub mod triangulation;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid triangulation: {0}")]
    Triangulation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point not on S^{eta}: residual {residual:.3e}")]
    OffSurface { eta: String, residual: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use dilog::{bloch_wigner, ell, ell_factor, li2, DilogValue, EtaPair};

