//! 2D Fourier transforms with a fixed convention: unnormalized forward,
//! 1/(H·W) inverse. Zero frequency sits at index (0,0); use [`fftshift`]
//! to move it to the center.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::core::image::ComplexImage2D;

thread_local! {
    static PLAN_CACHE: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLAN_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, inverse))
            .or_insert_with(|| {
                let dir = if inverse { FftDirection::Inverse } else { FftDirection::Forward };
                FftPlanner::new().plan_fft(len, dir)
            })
            .clone()
    })
}

fn fft2(img: &ComplexImage2D, inverse: bool) -> ComplexImage2D {
    let (h, w) = (img.height(), img.width());
    let mut data = img.values().to_vec();

    let row_plan = plan(w, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); row_plan.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(w) {
        row_plan.process_with_scratch(row, &mut scratch);
    }

    let col_plan = plan(h, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); col_plan.get_inplace_scratch_len()];
    let mut column = vec![Complex64::new(0.0, 0.0); h];
    for c in 0..w {
        for r in 0..h {
            column[r] = data[r * w + c];
        }
        col_plan.process_with_scratch(&mut column, &mut scratch);
        for r in 0..h {
            data[r * w + c] = column[r];
        }
    }

    if inverse {
        let scale = 1.0 / (h * w) as f64;
        for v in &mut data {
            *v *= scale;
        }
    }
    ComplexImage2D::new(h, w, data).expect("transform preserves shape and finiteness")
}

/// Unnormalized forward 2D DFT.
pub fn fft2_forward(img: &ComplexImage2D) -> ComplexImage2D {
    fft2(img, false)
}

/// Inverse 2D DFT scaled by 1/(H·W), so `fft2_inverse(fft2_forward(x)) == x`.
pub fn fft2_inverse(img: &ComplexImage2D) -> ComplexImage2D {
    fft2(img, true)
}

fn roll(img: &ComplexImage2D, shift_r: usize, shift_c: usize) -> ComplexImage2D {
    let (h, w) = (img.height(), img.width());
    ComplexImage2D::from_fn(h, w, |r, c| {
        img.at((r + h - shift_r) % h, (c + w - shift_c) % w)
    })
}

/// Move the zero-frequency component from (0,0) to the center pixel
/// (H/2, W/2).
pub fn fftshift(img: &ComplexImage2D) -> ComplexImage2D {
    roll(img, img.height() / 2, img.width() / 2)
}

/// Inverse of [`fftshift`] for any (odd or even) size.
pub fn ifftshift(img: &ComplexImage2D) -> ComplexImage2D {
    let (h, w) = (img.height(), img.width());
    roll(img, h - h / 2, w - w / 2)
}

/// Signed frequency (cycles/pixel) of DFT bin `k` of `n` samples.
pub fn fft_freq(k: usize, n: usize) -> f64 {
    let k = k as isize;
    let n = n as isize;
    let signed = if k <= (n - 1) / 2 { k } else { k - n };
    signed as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_image(h: usize, w: usize, seed: u64) -> ComplexImage2D {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        ComplexImage2D::from_fn(h, w, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn dc_only_signal() {
        let img = ComplexImage2D::filled(2, 2, Complex64::new(1.0, 0.0));
        let spec = fft2_forward(&img);
        assert!((spec.at(0, 0) - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        for (r, c) in [(0, 1), (1, 0), (1, 1)] {
            assert!(spec.at(r, c).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_transform() {
        let mut img = ComplexImage2D::zeros(5, 7);
        *img.at_mut(0, 0) = Complex64::new(1.0, 0.0);
        let spec = fft2_forward(&img);
        for v in spec.values() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_unnormalized_forward() {
        let img = random_image(8, 8, 7);
        let spec = fft2_forward(&img);
        let lhs = spec.energy();
        let rhs = 64.0 * img.energy();
        assert!((lhs - rhs).abs() / rhs < 1e-10);
    }

    #[test]
    fn round_trip_identity() {
        let img = random_image(16, 16, 3);
        let back = fft2_inverse(&fft2_forward(&img));
        let max_err = img
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-12);
    }

    #[test]
    fn all_ones_spectrum_is_impulse() {
        let spec = ComplexImage2D::filled(6, 4, Complex64::new(1.0, 0.0));
        let img = fft2_inverse(&spec);
        assert!((img.at(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let rest: f64 = img.values().iter().skip(1).map(|v| v.norm()).sum();
        assert!(rest < 1e-10);
    }

    #[test]
    fn zero_maps_to_zero() {
        let img = ComplexImage2D::zeros(4, 4);
        assert_eq!(fft2_inverse(&img).energy(), 0.0);
    }

    #[test]
    fn linearity() {
        let x = random_image(9, 5, 1);
        let y = random_image(9, 5, 2);
        let (a, b) = (Complex64::new(1.3, -0.2), Complex64::new(-0.7, 2.1));
        let combo = ComplexImage2D::from_fn(9, 5, |r, c| a * x.at(r, c) + b * y.at(r, c));
        let lhs = fft2_forward(&combo);
        let fx = fft2_forward(&x);
        let fy = fft2_forward(&y);
        let norm: f64 = lhs.values().iter().map(|v| v.norm()).sum();
        let err: f64 = lhs
            .values()
            .iter()
            .zip(fx.values().iter().zip(fy.values()))
            .map(|(l, (vx, vy))| (l - (a * vx + b * vy)).norm())
            .sum();
        assert!(err / norm < 1e-10);
    }

    #[test]
    fn shift_round_trip_odd_sizes() {
        let img = random_image(7, 9, 11);
        let back = ifftshift(&fftshift(&img));
        assert_eq!(img.values(), back.values());
    }
}
