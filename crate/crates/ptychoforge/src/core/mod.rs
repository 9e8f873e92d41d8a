//! Foundational image types, Fourier transforms, and deterministic
//! randomness shared by every other module.

pub mod fft;
pub mod image;
pub mod rng;

pub use fft::{fft2_forward, fft2_inverse, fft_freq, fftshift, ifftshift};
pub use image::{ComplexImage2D, RealImage2D};
pub use rng::{derive_stream, RandomSeed};
