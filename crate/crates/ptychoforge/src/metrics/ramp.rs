//! Least-squares phase-plane (ramp) removal.

use num_complex::Complex64;

use crate::core::{ComplexImage2D, RealImage2D};
use crate::error::{Error, Result};

/// Fit and subtract the phase plane gx·x + gy·y + c from the image, with
/// x the column and y the row coordinate.
///
/// The gradient is estimated from the circular mean of masked
/// nearest-neighbor phase differences (the centroid of the cross
/// spectrum), which needs no phase unwrapping; the constant term is the
/// circular mean of the residual phase. Two passes absorb the coupling
/// between the terms.
pub fn remove_phase_ramp(
    img: &ComplexImage2D,
    mask: &RealImage2D,
) -> Result<(ComplexImage2D, (f64, f64, f64))> {
    if img.height() != mask.height() || img.width() != mask.width() {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs mask {}x{}",
            img.height(),
            img.width(),
            mask.height(),
            mask.width()
        )));
    }
    if mask.min() < 0.0 {
        return Err(Error::Validation("mask must be nonnegative".into()));
    }
    if mask.sum() <= 0.0 {
        return Err(Error::DegenerateMask("mask is all zero".into()));
    }

    let mut current = img.clone();
    let mut total = (0.0, 0.0, 0.0);
    for _ in 0..2 {
        let (gx, gy, c) = fit_plane(&current, mask)?;
        current = subtract_plane(&current, (gx, gy, c));
        total.0 += gx;
        total.1 += gy;
        total.2 += c;
    }
    Ok((current, total))
}

fn fit_plane(img: &ComplexImage2D, mask: &RealImage2D) -> Result<(f64, f64, f64)> {
    let (h, w) = (img.height(), img.width());

    let mut x_acc = Complex64::new(0.0, 0.0);
    for r in 0..h {
        for c in 0..w.saturating_sub(1) {
            let weight = mask.at(r, c) * mask.at(r, c + 1);
            x_acc += img.at(r, c + 1) * img.at(r, c).conj() * weight;
        }
    }
    let mut y_acc = Complex64::new(0.0, 0.0);
    for r in 0..h.saturating_sub(1) {
        for c in 0..w {
            let weight = mask.at(r, c) * mask.at(r + 1, c);
            y_acc += img.at(r + 1, c) * img.at(r, c).conj() * weight;
        }
    }
    if (w > 1 && x_acc.norm() == 0.0) || (h > 1 && y_acc.norm() == 0.0) {
        return Err(Error::DegenerateMask(
            "mask support too thin to estimate a phase gradient".into(),
        ));
    }
    let gx = if w > 1 { x_acc.arg() } else { 0.0 };
    let gy = if h > 1 { y_acc.arg() } else { 0.0 };

    let mut c_acc = Complex64::new(0.0, 0.0);
    for r in 0..h {
        for c in 0..w {
            let plane = gx * c as f64 + gy * r as f64;
            c_acc += img.at(r, c) * Complex64::from_polar(mask.at(r, c), -plane);
        }
    }
    Ok((gx, gy, c_acc.arg()))
}

fn subtract_plane(img: &ComplexImage2D, plane: (f64, f64, f64)) -> ComplexImage2D {
    let (gx, gy, c0) = plane;
    ComplexImage2D::from_fn(img.height(), img.width(), |r, c| {
        img.at(r, c) * Complex64::from_polar(1.0, -(gx * c as f64 + gy * r as f64 + c0))
    })
}
