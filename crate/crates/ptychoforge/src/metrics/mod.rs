//! Reconstruction quality metrics: registration, phase-ramp removal,
//! soft masking, Fourier ring correlation, and radial power spectra.

pub mod frc;
pub mod mask;
pub mod psd;
pub mod ramp;
pub mod registration;

pub use frc::{default_ring_width, frc, frc_auc_pipeline, half_bit_threshold, FrcResult};
pub use mask::soft_edge_mask;
pub use psd::{radial_psd, radial_psd_real, RadialPsd};
pub use ramp::remove_phase_ramp;
pub use registration::{fourier_shift, register, Registration};
