//! Scalar texture generators behind the synthetic object classes.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::core::{fft2_forward, fft2_inverse, fft_freq, RandomSeed, RealImage2D};
use crate::objgen::{DeadLeavesParams, GaussianBlurParams, GradientNoiseParams, ProceduralParams};

/// Value marking a pixel not yet covered by any dead-leaves shape.
pub(crate) const DEAD_LEAVES_SENTINEL: f64 = -1.0;

/// Occlusion model: disks painted front-to-back, each filling only pixels
/// not yet covered, until no sentinel pixel remains.
pub fn dead_leaves(params: &DeadLeavesParams, height: usize, width: usize, seed: RandomSeed) -> RealImage2D {
    let mut rng = seed.derive("dead-leaves", 0).rng();
    let mut img = RealImage2D::filled(height, width, DEAD_LEAVES_SENTINEL);
    let mut uncovered = height * width;

    let r_min = params.radius_min;
    let r_max = params.radius_max_fraction * height.min(width) as f64;
    // Inverse-CDF sampling of p(r) ∝ r^-3 on [r_min, r_max].
    let ratio_sq = (r_min / r_max) * (r_min / r_max);

    while uncovered > 0 {
        let u: f64 = rng.gen();
        let radius = r_min / (1.0 - u * (1.0 - ratio_sq)).sqrt();
        let cx = rng.gen::<f64>() * width as f64;
        let cy = rng.gen::<f64>() * height as f64;
        let gray: f64 = rng.gen();

        let r2 = radius * radius;
        let row_lo = (cy - radius).floor().max(0.0) as usize;
        let row_hi = ((cy + radius).ceil() as usize).min(height.saturating_sub(1));
        let col_lo = (cx - radius).floor().max(0.0) as usize;
        let col_hi = ((cx + radius).ceil() as usize).min(width.saturating_sub(1));
        for r in row_lo..=row_hi {
            let dy = r as f64 + 0.5 - cy;
            for c in col_lo..=col_hi {
                let dx = c as f64 + 0.5 - cx;
                if dx * dx + dy * dy <= r2 && img.at(r, c) == DEAD_LEAVES_SENTINEL {
                    *img.at_mut(r, c) = gray;
                    uncovered -= 1;
                }
            }
        }
    }
    img
}

/// Anti-aliased lines and filled ellipses composited additively on a zero
/// background, clipped to [0, 1]. Shapes are added until the requested
/// coverage fraction is reached.
pub fn procedural(params: &ProceduralParams, height: usize, width: usize, seed: RandomSeed) -> RealImage2D {
    let mut rng = seed.derive("procedural", 0).rng();
    let mut img = RealImage2D::zeros(height, width);
    let target = (params.coverage * (height * width) as f64) as usize;
    let mut covered = 0usize;
    let mut shape = 0usize;
    // Coverage can stall once the canvas saturates; cap the shape count.
    let max_shapes = 64 + target / 8;

    while covered < target && shape < max_shapes {
        let opacity = rng.gen_range(params.opacity_range.0..params.opacity_range.1);
        if shape % 2 == 0 {
            covered += add_line(&mut img, &mut rng, params, opacity);
        } else {
            covered += add_ellipse(&mut img, &mut rng, params, opacity);
        }
        shape += 1;
    }
    img.map(|v| v.min(1.0))
}

fn add_line(
    img: &mut RealImage2D,
    rng: &mut impl Rng,
    params: &ProceduralParams,
    opacity: f64,
) -> usize {
    let (h, w) = (img.height() as f64, img.width() as f64);
    let x0 = rng.gen::<f64>() * w;
    let y0 = rng.gen::<f64>() * h;
    let angle = rng.gen::<f64>() * std::f64::consts::TAU;
    let len = rng.gen_range(0.2..0.9) * h.min(w);
    let x1 = x0 + len * angle.cos();
    let y1 = y0 + len * angle.sin();
    let half = rng.gen_range(params.line_width_range.0..params.line_width_range.1) / 2.0;

    let mut newly = 0;
    let row_lo = (y0.min(y1) - half - 1.0).floor().max(0.0) as usize;
    let row_hi = ((y0.max(y1) + half + 1.0).ceil() as usize).min(img.height() - 1);
    let col_lo = (x0.min(x1) - half - 1.0).floor().max(0.0) as usize;
    let col_hi = ((x0.max(x1) + half + 1.0).ceil() as usize).min(img.width() - 1);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let len2 = dx * dx + dy * dy;
    for r in row_lo..=row_hi {
        for c in col_lo..=col_hi {
            let px = c as f64 + 0.5;
            let py = r as f64 + 0.5;
            let t = (((px - x0) * dx + (py - y0) * dy) / len2).clamp(0.0, 1.0);
            let qx = x0 + t * dx;
            let qy = y0 + t * dy;
            let dist = ((px - qx).powi(2) + (py - qy).powi(2)).sqrt();
            // Coverage-style anti-aliasing over a one-pixel transition band.
            let cov = (half + 0.5 - dist).clamp(0.0, 1.0);
            if cov > 0.0 {
                let v = img.at(r, c);
                if v == 0.0 {
                    newly += 1;
                }
                *img.at_mut(r, c) = v + opacity * cov;
            }
        }
    }
    newly
}

fn add_ellipse(
    img: &mut RealImage2D,
    rng: &mut impl Rng,
    params: &ProceduralParams,
    opacity: f64,
) -> usize {
    let (h, w) = (img.height() as f64, img.width() as f64);
    let cx = rng.gen::<f64>() * w;
    let cy = rng.gen::<f64>() * h;
    let a = rng.gen_range(params.ellipse_axis_range.0..params.ellipse_axis_range.1);
    let b = rng.gen_range(params.ellipse_axis_range.0..params.ellipse_axis_range.1);
    let theta = rng.gen::<f64>() * std::f64::consts::PI;
    let (st, ct) = theta.sin_cos();

    let reach = a.max(b) + 1.0;
    let row_lo = (cy - reach).floor().max(0.0) as usize;
    let row_hi = ((cy + reach).ceil() as usize).min(img.height() - 1);
    let col_lo = (cx - reach).floor().max(0.0) as usize;
    let col_hi = ((cx + reach).ceil() as usize).min(img.width() - 1);
    let mut newly = 0;
    for r in row_lo..=row_hi {
        for c in col_lo..=col_hi {
            let px = c as f64 + 0.5 - cx;
            let py = r as f64 + 0.5 - cy;
            let u = (px * ct + py * st) / a;
            let v = (-px * st + py * ct) / b;
            let rho = (u * u + v * v).sqrt();
            // Signed distance approximation to the boundary for the AA band.
            let dist = (rho - 1.0) * a.min(b);
            let cov = (0.5 - dist).clamp(0.0, 1.0);
            if cov > 0.0 {
                let val = img.at(r, c);
                if val == 0.0 {
                    newly += 1;
                }
                *img.at_mut(r, c) = val + opacity * cov;
            }
        }
    }
    newly
}

/// Per-pixel draws from N(0, 1).
pub fn white_noise(height: usize, width: usize, seed: RandomSeed) -> RealImage2D {
    let mut rng = seed.derive("white-noise", 0).rng();
    let mut values = Vec::with_capacity(height * width);
    for _ in 0..height * width {
        values.push(StandardNormal.sample(&mut rng));
    }
    RealImage2D::new(height, width, values).expect("finite normal draws")
}

/// White noise convolved with a truncated Gaussian kernel, reflective
/// boundary handling.
pub fn blurred_white_noise(
    params: &GaussianBlurParams,
    height: usize,
    width: usize,
    seed: RandomSeed,
) -> RealImage2D {
    let noise = white_noise(height, width, seed.derive("bwn", 0));
    gaussian_blur(&noise, params.sigma, params.truncate)
}

/// Separable Gaussian blur, kernel truncated at `truncate`·σ, reflective
/// boundary.
pub fn gaussian_blur(img: &RealImage2D, sigma: f64, truncate: f64) -> RealImage2D {
    let radius = (truncate * sigma).ceil() as isize;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for k in -radius..=radius {
        kernel.push((-(k * k) as f64 / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }

    let (h, w) = (img.height() as isize, img.width() as isize);
    let reflect = |i: isize, n: isize| -> usize {
        // Reflect about pixel edges: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
        let period = 2 * n;
        let mut i = i.rem_euclid(period);
        if i >= n {
            i = period - 1 - i;
        }
        i as usize
    };

    let mut tmp = RealImage2D::zeros(img.height(), img.width());
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let cc = reflect(c + ki as isize - radius, w);
                acc += kv * img.at(r as usize, cc);
            }
            *tmp.at_mut(r as usize, c as usize) = acc;
        }
    }
    let mut out = RealImage2D::zeros(img.height(), img.width());
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let rr = reflect(r + ki as isize - radius, h);
                acc += kv * tmp.at(rr, c as usize);
            }
            *out.at_mut(r as usize, c as usize) = acc;
        }
    }
    out
}

/// Multi-octave gradient noise, hard band-limited below
/// 1/min_wavelength cycles/pixel.
///
/// Each octave is lattice gradient noise with quintic interpolation; the
/// final spectral cut guarantees zero energy above the cutoff, matching
/// the low-frequency character of the class.
pub fn gradient_noise(
    params: &GradientNoiseParams,
    height: usize,
    width: usize,
    seed: RandomSeed,
) -> RealImage2D {
    let mut out = RealImage2D::zeros(height, width);
    // Octave 0 is the largest wavelength; the last octave sits at the
    // minimum wavelength (highest frequency).
    for octave in 0..params.octaves {
        let wavelength =
            params.min_wavelength * 2f64.powi((params.octaves - 1 - octave) as i32);
        let amplitude = params.persistence.powi(octave as i32);
        let layer = perlin_octave(height, width, wavelength, seed.derive("sn-octave", octave as u64));
        for (o, l) in out.values_mut().iter_mut().zip(layer.values()) {
            *o += amplitude * l;
        }
    }
    low_pass(&out, 1.0 / params.min_wavelength)
}

fn perlin_octave(height: usize, width: usize, wavelength: f64, seed: RandomSeed) -> RealImage2D {
    let cols = (width as f64 / wavelength).ceil() as usize + 2;
    let rows = (height as f64 / wavelength).ceil() as usize + 2;
    let mut rng = seed.rng();
    let mut grads = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        grads.push((angle.cos(), angle.sin()));
    }
    let grad = |r: usize, c: usize| grads[r * cols + c];
    let fade = |t: f64| t * t * t * (t * (t * 6.0 - 15.0) + 10.0);

    RealImage2D::from_fn(height, width, |r, c| {
        let x = c as f64 / wavelength;
        let y = r as f64 / wavelength;
        let xi = x.floor() as usize;
        let yi = y.floor() as usize;
        let xf = x - xi as f64;
        let yf = y - yi as f64;
        let dot = |gr: usize, gc: usize, dx: f64, dy: f64| {
            let (gx, gy) = grad(gr, gc);
            gx * dx + gy * dy
        };
        let n00 = dot(yi, xi, xf, yf);
        let n10 = dot(yi, xi + 1, xf - 1.0, yf);
        let n01 = dot(yi + 1, xi, xf, yf - 1.0);
        let n11 = dot(yi + 1, xi + 1, xf - 1.0, yf - 1.0);
        let u = fade(xf);
        let v = fade(yf);
        let nx0 = n00 + u * (n10 - n00);
        let nx1 = n01 + u * (n11 - n01);
        nx0 + v * (nx1 - nx0)
    })
}

/// Zero every Fourier component with radial frequency above `cutoff`
/// (cycles/pixel), keeping the result real.
pub fn low_pass(img: &RealImage2D, cutoff: f64) -> RealImage2D {
    let (h, w) = (img.height(), img.width());
    let mut spec = fft2_forward(&img.to_complex());
    for r in 0..h {
        let fy = fft_freq(r, h);
        for c in 0..w {
            let fx = fft_freq(c, w);
            if (fx * fx + fy * fy).sqrt() > cutoff {
                *spec.at_mut(r, c) = num_complex::Complex64::new(0.0, 0.0);
            }
        }
    }
    let back = fft2_inverse(&spec);
    RealImage2D::from_fn(h, w, |r, c| back.at(r, c).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dead_leaves_covers_every_pixel() {
        let img = dead_leaves(&DeadLeavesParams::default(), 96, 96, RandomSeed::new(5));
        assert!(img.values().iter().all(|&v| v != DEAD_LEAVES_SENTINEL));
        assert!(img.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn procedural_background_is_exactly_zero() {
        let img = procedural(&ProceduralParams::default(), 128, 128, RandomSeed::new(9));
        let zeros = img.values().iter().filter(|&&v| v == 0.0).count();
        assert!(zeros > 0, "procedural class must leave empty background");
        assert!(img.max() <= 1.0);
    }

    #[test]
    fn gaussian_blur_preserves_constants() {
        let img = RealImage2D::filled(32, 32, 3.5);
        let blurred = gaussian_blur(&img, 3.0, 4.0);
        for &v in blurred.values() {
            assert!((v - 3.5).abs() < 1e-12);
        }
    }

    #[test]
    fn low_pass_removes_high_frequency_exactly() {
        // 24 cycles over 64 samples: exactly one spectral bin at f = 0.375.
        let img =
            RealImage2D::from_fn(64, 64, |_, c| (std::f64::consts::TAU * 24.0 * c as f64 / 64.0).cos());
        let filtered = low_pass(&img, 0.1);
        assert!(filtered.values().iter().all(|v| v.abs() < 1e-10));
    }
}
