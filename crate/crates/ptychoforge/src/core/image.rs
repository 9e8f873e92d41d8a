//! Row-major 2D image containers for complex fields and real maps.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// H×W complex field. Amplitude is unitless, phase in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage2D {
    height: usize,
    width: usize,
    values: Vec<Complex64>,
}

impl ComplexImage2D {
    pub fn new(height: usize, width: usize, values: Vec<Complex64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter {
                field: "dimensions",
                message: format!("height and width must be >= 1, got {height}x{width}"),
            });
        }
        if values.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {height}x{width}, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("complex image contains NaN/Inf".into()));
        }
        Ok(Self { height, width, values })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self { height, width, values: vec![Complex64::new(0.0, 0.0); height * width] }
    }

    pub fn filled(height: usize, width: usize, value: Complex64) -> Self {
        Self { height, width, values: vec![value; height * width] }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self { height, width, values }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        &mut self.values[row * self.width + col]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn amplitude(&self) -> RealImage2D {
        RealImage2D {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|v| v.norm()).collect(),
        }
    }

    pub fn phase(&self) -> RealImage2D {
        RealImage2D {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|v| v.arg()).collect(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Rectangular crop with top-left corner (row0, col0).
    pub fn crop(&self, row0: usize, col0: usize, height: usize, width: usize) -> Result<Self> {
        if row0 + height > self.height || col0 + width > self.width {
            return Err(Error::DimensionMismatch(format!(
                "crop {height}x{width} at ({row0},{col0}) exceeds {}x{}",
                self.height, self.width
            )));
        }
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            let start = (row0 + r) * self.width + col0;
            values.extend_from_slice(&self.values[start..start + width]);
        }
        Ok(Self { height, width, values })
    }
}

/// H×W real-valued map (intensities, masks, spectra).
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage2D {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl RealImage2D {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter {
                field: "dimensions",
                message: format!("height and width must be >= 1, got {height}x{width}"),
            });
        }
        if values.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {height}x{width}, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("real image contains NaN/Inf".into()));
        }
        Ok(Self { height, width, values })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self { height, width, values: vec![0.0; height * width] }
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self { height, width, values: vec![value; height * width] }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self { height, width, values }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.values[row * self.width + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Lift into a complex image with zero imaginary part.
    pub fn to_complex(&self) -> ComplexImage2D {
        ComplexImage2D {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn crop(&self, row0: usize, col0: usize, height: usize, width: usize) -> Result<Self> {
        if row0 + height > self.height || col0 + width > self.width {
            return Err(Error::DimensionMismatch(format!(
                "crop {height}x{width} at ({row0},{col0}) exceeds {}x{}",
                self.height, self.width
            )));
        }
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            let start = (row0 + r) * self.width + col0;
            values.extend_from_slice(&self.values[start..start + width]);
        }
        Ok(Self { height, width, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert!(ComplexImage2D::new(0, 4, vec![]).is_err());
        assert!(RealImage2D::new(4, 0, vec![]).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(ComplexImage2D::new(2, 2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(RealImage2D::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(ComplexImage2D::new(1, 1, vec![Complex64::new(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn crop_geometry() {
        let img = RealImage2D::from_fn(4, 4, |r, c| (r * 4 + c) as f64);
        let sub = img.crop(1, 2, 2, 2).unwrap();
        assert_eq!(sub.values(), &[6.0, 7.0, 10.0, 11.0]);
        assert!(img.crop(3, 3, 2, 2).is_err());
    }
}
