//! Numerical laboratory for 1D discrete Schrödinger operators.
//!
//! The library computes, for a half-line operator `h = -Δ + v`:
//!
//! - transfer matrices `T(L, E)` in an overflow-safe log-scaled representation,
//! - the band structure, Bloch waves and rotation number of the periodized
//!   operator `h_per,L`,
//! - Thouless and Landauer-Büttiker conductances of the finite sample coupled
//!   to two free half-line leads,
//! - desk-scale sweeps probing the joint decay (or joint flatness) of the
//!   three conductance functionals over an energy window.

pub mod cli;
pub mod ebbm;
pub mod experiments;
pub mod floquet;
pub mod numerics;
pub mod parallel;
pub mod potential;
pub mod transfer;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid bracket: f has the same sign at both endpoints")]
    InvalidBracket,
    #[error("invalid integrand: non-finite sample at E = {0}")]
    InvalidIntegrand(f64),
    #[error(
        "near-singular tridiagonal system (pivot {0:.3e}); energy at a decoupled-sample resonance"
    )]
    NearSingular(f64),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("band edge: |D(E)| = {0:.6} >= 2, quasi-momentum derivative diverges")]
    BandEdge(f64),
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
    #[error("decoupled-sample resonance at E = {0}")]
    DecoupledResonance(f64),
    #[error("reservoirs are not transparent for ({0}, {1}): the window must lie strictly inside the lead band (-2, 2)")]
    NotTransparent(f64, f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Code version reported in every JSON summary.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
