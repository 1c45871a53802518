//! Scattering resonances and single-mode parameter recovery.
//!
//! * [`zscan`]: zeros of holomorphic functions in rectangles.
//! * [`barrier`]: the rectangular barrier, its resonances, and recovery of the
//!   barrier width from one resonance.
//! * [`geometry`]: de Sitter-Schwarzschild horizons, potential and tortoise
//!   coordinate.
//! * [`spectrum`]: quasinormal modes from the pseudo-pole lattice and from a
//!   shooting solver.
//! * [`recovery`]: mass recovery from a single mode and stability probes.
//! * [`cli`]: the `qnm` command-line front end.

pub mod barrier;
pub mod cli;
pub mod geometry;
pub mod ode;
pub mod output;
pub mod recovery;
pub mod spectrum;
pub mod zscan;

pub use num_complex::Complex64;

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Zscan(#[from] zscan::ZscanError),
    #[error(transparent)]
    Barrier(#[from] barrier::BarrierError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Spectrum(#[from] spectrum::SpectrumError),
    #[error(transparent)]
    Recovery(#[from] recovery::RecoveryError),
}
