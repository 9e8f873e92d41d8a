//! Sub-pixel image registration by phase cross-correlation and
//! Fourier-domain resampling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core::{fft2_forward, fft2_inverse, fft_freq, ComplexImage2D};
use crate::error::{Error, Result};

/// Nuisance-transform parameters recovered when aligning an estimate to
/// a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Registration {
    /// Displacement (dx, dy) of the moving image relative to the
    /// reference, in pixels.
    pub shift: (f64, f64),
    /// Phase plane (gx, gy, c) in radians/pixel and radians.
    pub ramp: (f64, f64, f64),
    /// Constant phase of the moving image relative to the reference.
    pub global_phase: f64,
}

/// Shift image content by (dx, dy) via the Fourier shift theorem:
/// out(x, y) = in(x - dx, y - dy), periodic boundary.
pub fn fourier_shift(img: &ComplexImage2D, shift: (f64, f64)) -> ComplexImage2D {
    let (h, w) = (img.height(), img.width());
    let mut spectrum = fft2_forward(img);
    for r in 0..h {
        let fy = fft_freq(r, h);
        for c in 0..w {
            let fx = fft_freq(c, w);
            let phase = -std::f64::consts::TAU * (fx * shift.0 + fy * shift.1);
            *spectrum.at_mut(r, c) *= Complex64::from_polar(1.0, phase);
        }
    }
    fft2_inverse(&spectrum)
}

/// Align `moving` to `reference`.
///
/// The integer shift comes from the cross-correlation peak; it is refined
/// to 1/upsample pixel by maximizing the correlation magnitude on a local
/// upsampled grid. Returns the recovered parameters together with the
/// moving image resampled by Fourier shift (phase not yet removed).
pub fn register(
    reference: &ComplexImage2D,
    moving: &ComplexImage2D,
    upsample: usize,
) -> Result<(Registration, ComplexImage2D)> {
    if reference.height() != moving.height() || reference.width() != moving.width() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            reference.height(),
            reference.width(),
            moving.height(),
            moving.width()
        )));
    }
    if upsample == 0 {
        return Err(Error::InvalidParameter { field: "upsample", message: "must be >= 1".into() });
    }
    if reference.energy() == 0.0 || moving.energy() == 0.0 {
        return Err(Error::ZeroEnergy("cannot register a zero-energy image".into()));
    }
    let (h, w) = (reference.height(), reference.width());

    let fa = fft2_forward(reference);
    let fb = fft2_forward(moving);
    let cross = ComplexImage2D::from_fn(h, w, |r, c| fa.at(r, c) * fb.at(r, c).conj());

    // Integer peak of the correlation surface.
    let corr = fft2_inverse(&cross);
    let mut best = (0usize, 0usize);
    let mut best_mag = -1.0;
    for r in 0..h {
        for c in 0..w {
            let m = corr.at(r, c).norm();
            if m > best_mag {
                best_mag = m;
                best = (r, c);
            }
        }
    }
    let wrap = |idx: usize, n: usize| -> f64 {
        if idx > n / 2 {
            idx as f64 - n as f64
        } else {
            idx as f64
        }
    };
    let peak = (wrap(best.1, w), wrap(best.0, h));

    // Local refinement: evaluate C(delta) = sum cross * e^{i 2 pi f.delta}
    // on a (1/upsample)-pitch grid within +-1.5 px of the integer peak,
    // via separable matrix DFTs.
    let delta = refine_peak(&cross, peak, upsample);

    let shift = (-delta.0, -delta.1);
    let aligned = fourier_shift(moving, delta);
    let mut dot = Complex64::new(0.0, 0.0);
    for (a, b) in aligned.values().iter().zip(reference.values()) {
        dot += a * b.conj();
    }
    let global_phase = dot.arg();

    Ok((Registration { shift, ramp: (0.0, 0.0, 0.0), global_phase }, aligned))
}

fn refine_peak(cross: &ComplexImage2D, peak: (f64, f64), upsample: usize) -> (f64, f64) {
    if upsample == 1 {
        return peak;
    }
    let (h, w) = (cross.height(), cross.width());
    let span = (3 * upsample / 2) as isize;
    let pitch = 1.0 / upsample as f64;
    let dx: Vec<f64> = (-span..=span).map(|k| peak.0 + k as f64 * pitch).collect();
    let dy: Vec<f64> = (-span..=span).map(|k| peak.1 + k as f64 * pitch).collect();

    // rows: (len(dy) x h) kernel, cols: (w x len(dx)) kernel.
    let tau = std::f64::consts::TAU;
    let mut partial = vec![Complex64::new(0.0, 0.0); dy.len() * w];
    for (j, &dyv) in dy.iter().enumerate() {
        for c in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..h {
                let fy = fft_freq(r, h);
                acc += cross.at(r, c) * Complex64::from_polar(1.0, tau * fy * dyv);
            }
            partial[j * w + c] = acc;
        }
    }
    let mut best = peak;
    let mut best_mag = -1.0;
    for &dxv in &dx {
        let col_kernel: Vec<Complex64> = (0..w)
            .map(|c| Complex64::from_polar(1.0, tau * fft_freq(c, w) * dxv))
            .collect();
        for (j, &dyv) in dy.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..w {
                acc += partial[j * w + c] * col_kernel[c];
            }
            let mag = acc.norm();
            if mag > best_mag {
                best_mag = mag;
                best = (dxv, dyv);
            }
        }
    }
    best
}
