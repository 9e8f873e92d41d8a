//! Synthetic training-data toolkit for X-ray ptychography.
//!
//! The library covers the full pipeline from procedural object generation
//! to reconstruction scoring:
//!
//! - [`core`]: complex image types, 2D FFTs, deterministic random streams
//! - [`objgen`]: procedural synthetic objects (dead leaves, procedural
//!   shapes, white noise, blurred white noise, low-frequency noise)
//! - [`scan`]: raster and Fermat-spiral scan plans, quadrant-ordered
//!   grouping of overlapping measurements
//! - [`forward`]: far-field diffraction simulation with sub-pixel patch
//!   extraction, photon scaling and Poisson shot noise
//! - [`recon`]: an ePIE iterative phase-retrieval engine used as the
//!   reconstruction oracle
//! - [`metrics`]: sub-pixel registration, phase-ramp removal, Fourier
//!   ring correlation (FRC) and FRC-AUC, radial power spectral density
//! - [`io`]: a deterministic ZIP-based archive for datasets, probes,
//!   objects, groupings and results, plus detector preprocessing
//! - [`pipeline`]: declarative end-to-end runs and the benchmark harness
//!
//! See the crate `examples/` directory for one runnable example per
//! capability, and the `ptychoforge` binary for batch use.

pub mod core;
pub mod error;
pub mod forward;
pub mod io;
pub mod metrics;
pub mod objgen;
pub mod pipeline;
pub mod recon;
pub mod scan;

pub use error::{Error, Result};
