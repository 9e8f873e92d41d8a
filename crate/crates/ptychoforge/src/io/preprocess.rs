//! Detector-data preprocessing: saturation flush and center crop.

use crate::error::{Error, Result};
use crate::forward::DiffractionStack;

/// Result of preprocessing with per-pattern accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessReport {
    pub stack: DiffractionStack,
    /// Saturated pixels flushed to zero, per pattern, counted on the
    /// cropped region.
    pub flushed_per_pattern: Vec<usize>,
}

impl PreprocessReport {
    pub fn total_flushed(&self) -> usize {
        self.flushed_per_pattern.iter().sum()
    }
}

/// Flush saturated pixels and center-crop every pattern.
///
/// Pixels with value >= `saturation_threshold` are set to exactly zero;
/// the comparison is inclusive because clipped detectors report the
/// ceiling value itself. The crop of `crop`x`crop` pixels is taken
/// symmetrically around pixel (H/2, W/2). Supported crop sizes are 64
/// and 128.
pub fn preprocess(
    stack: &DiffractionStack,
    saturation_threshold: f64,
    crop: usize,
) -> Result<PreprocessReport> {
    if !(saturation_threshold > 0.0) {
        return Err(Error::InvalidParameter {
            field: "saturation_threshold",
            message: format!("must be > 0, got {saturation_threshold}"),
        });
    }
    if crop != 64 && crop != 128 {
        return Err(Error::InvalidParameter {
            field: "crop",
            message: format!("supported crop sizes are 64 and 128, got {crop}"),
        });
    }
    let (h, w) = (stack.height(), stack.width());
    if crop > h || crop > w {
        return Err(Error::DimensionMismatch(format!(
            "crop {crop} larger than pattern {h}x{w}"
        )));
    }
    // Center pixel (H/2, W/2) sits at crop index crop/2.
    let row0 = h / 2 - crop / 2;
    let col0 = w / 2 - crop / 2;

    let mut out = Vec::with_capacity(stack.count() * crop * crop);
    let mut flushed_per_pattern = Vec::with_capacity(stack.count());
    for index in 0..stack.count() {
        let pattern = stack.pattern(index);
        let mut flushed = 0usize;
        for r in 0..crop {
            let offset = (row0 + r) * w + col0;
            for &v in &pattern[offset..offset + crop] {
                if v >= saturation_threshold {
                    flushed += 1;
                    out.push(0.0);
                } else {
                    out.push(v);
                }
            }
        }
        flushed_per_pattern.push(flushed);
    }
    let cropped = DiffractionStack::new(
        out,
        stack.count(),
        crop,
        crop,
        stack.positions.clone(),
        stack.photon_target,
        stack.probe_label.clone(),
    )?;
    Ok(PreprocessReport { stack: cropped, flushed_per_pattern })
}
