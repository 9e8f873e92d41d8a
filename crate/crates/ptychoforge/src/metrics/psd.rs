//! Radially averaged power spectral density.

use serde::{Deserialize, Serialize};

use crate::core::{fft2_forward, fft_freq, ComplexImage2D, RealImage2D};
use crate::error::{Error, Result};

/// Ring-summed power spectrum with its center frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPsd {
    /// Ring center frequencies in cycles/pixel, ascending up to 0.5.
    pub frequencies: Vec<f64>,
    /// Mean |F|² per ring (total ring power divided by ring pixel count).
    pub power: Vec<f64>,
    /// Number of spectrum pixels contributing to each ring.
    pub counts: Vec<usize>,
}

impl RadialPsd {
    /// Fraction of total spectral power carried by rings with center
    /// frequency strictly above `cutoff` cycles/pixel.
    pub fn energy_fraction_above(&self, cutoff: f64) -> f64 {
        let ring_total = |sel: &dyn Fn(f64) -> bool| -> f64 {
            self.frequencies
                .iter()
                .zip(self.power.iter().zip(&self.counts))
                .filter(|(f, _)| sel(**f))
                .map(|(_, (p, n))| p * *n as f64)
                .sum()
        };
        let total = ring_total(&|_| true);
        if total > 0.0 {
            ring_total(&|f| f > cutoff) / total
        } else {
            0.0
        }
    }

    /// Mean power at the ring whose center is nearest `freq`.
    pub fn power_at(&self, freq: f64) -> f64 {
        let idx = self
            .frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - freq).abs().partial_cmp(&(b.1 - freq).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        self.power[idx]
    }
}

/// Radial PSD of a complex image; ring width is one frequency bin of the
/// larger dimension.
pub fn radial_psd(img: &ComplexImage2D) -> Result<RadialPsd> {
    let (h, w) = (img.height(), img.width());
    let ring_width = 1.0 / h.max(w) as f64;
    let ring_count = (0.5 / ring_width).round() as usize + 1;
    let spectrum = fft2_forward(img);

    let mut power = vec![0.0; ring_count];
    let mut counts = vec![0usize; ring_count];
    for r in 0..h {
        let fy = fft_freq(r, h);
        for c in 0..w {
            let fx = fft_freq(c, w);
            let ring = ((fx * fx + fy * fy).sqrt() / ring_width).round() as usize;
            if ring >= ring_count {
                continue;
            }
            power[ring] += spectrum.at(r, c).norm_sqr();
            counts[ring] += 1;
        }
    }
    let mut frequencies = Vec::with_capacity(ring_count);
    for (ring, (p, n)) in power.iter_mut().zip(&counts).enumerate() {
        if *n == 0 {
            return Err(Error::EmptyRing(ring));
        }
        *p /= *n as f64;
        frequencies.push(ring as f64 * ring_width);
    }
    Ok(RadialPsd { frequencies, power, counts })
}

/// Convenience wrapper for real-valued images.
pub fn radial_psd_real(img: &RealImage2D) -> Result<RadialPsd> {
    radial_psd(&img.to_complex())
}
