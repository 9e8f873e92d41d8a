//! Far-field measurement model: sub-pixel patch extraction, exit-wave
//! formation, diffraction intensity, photon scaling with Poisson
//! statistics, and per-stack normalization factors.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{fft2_forward, fftshift, ComplexImage2D, RandomSeed, RealImage2D};
use crate::error::{Error, Result};
use crate::objgen::SyntheticObject;
use crate::scan::ScanPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeNormalization {
    RawScale,
    RmsNormalized,
}

/// Complex illumination function with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub field: ComplexImage2D,
    pub source_label: String,
    pub normalization: ProbeNormalization,
}

impl Probe {
    pub fn new(field: ComplexImage2D, source_label: impl Into<String>) -> Result<Self> {
        if field.height() != field.width() {
            return Err(Error::DimensionMismatch(format!(
                "probe must be square, got {}x{}",
                field.height(),
                field.width()
            )));
        }
        Ok(Self { field, source_label: source_label.into(), normalization: ProbeNormalization::RawScale })
    }

    pub fn size(&self) -> usize {
        self.field.height()
    }

    /// Built-in test probe: smooth circular aperture with defocus plus a
    /// coma-like term so the phase is not centrosymmetric.
    pub fn synthetic(size: usize) -> Probe {
        let center = (size as f64 - 1.0) / 2.0;
        let aperture = 0.35 * size as f64;
        let edge = 0.08 * size as f64;
        let field = ComplexImage2D::from_fn(size, size, |r, c| {
            let x = (c as f64 - center) / aperture;
            let y = (r as f64 - center) / aperture;
            let rho = (x * x + y * y).sqrt() * aperture;
            let amp = if rho <= aperture - edge {
                1.0
            } else if rho >= aperture + edge {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * (aperture - rho) / (2.0 * edge)).sin())
            };
            let phase = 1.8 * (x * x + y * y) + 0.9 * x * (x * x + y * y);
            Complex64::from_polar(amp, phase)
        });
        let probe = Probe {
            field,
            source_label: "synthetic-disk".into(),
            normalization: ProbeNormalization::RawScale,
        };
        normalize_probe(&probe).expect("synthetic probe has nonzero energy")
    }
}

/// Scale the probe so the mean of |p|^2 over pixels equals 1. Phase is
/// untouched; idempotent.
pub fn normalize_probe(probe: &Probe) -> Result<Probe> {
    let mean_sq = probe.field.energy() / probe.field.len() as f64;
    if mean_sq == 0.0 {
        return Err(Error::ZeroEnergy("probe has zero energy".into()));
    }
    let scale = 1.0 / mean_sq.sqrt();
    Ok(Probe {
        field: probe.field.map(|v| v * scale),
        source_label: probe.source_label.clone(),
        normalization: ProbeNormalization::RmsNormalized,
    })
}

/// N×H×W stack of nonnegative diffraction patterns (photon counts) with
/// their scan positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionStack {
    patterns: Vec<f64>,
    count: usize,
    height: usize,
    width: usize,
    pub positions: ScanPlan,
    /// Expected total photons per pattern; None for unscaled data.
    pub photon_target: Option<f64>,
    pub probe_label: String,
}

impl DiffractionStack {
    pub fn new(
        patterns: Vec<f64>,
        count: usize,
        height: usize,
        width: usize,
        positions: ScanPlan,
        photon_target: Option<f64>,
        probe_label: impl Into<String>,
    ) -> Result<Self> {
        if patterns.len() != count * height * width {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {count}x{height}x{width} stack, got {}",
                count * height * width,
                patterns.len()
            )));
        }
        if positions.len() != count {
            return Err(Error::DimensionInconsistency(format!(
                "{count} patterns but {} scan positions",
                positions.len()
            )));
        }
        if patterns.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Validation("diffraction patterns must be finite and >= 0".into()));
        }
        Ok(Self {
            patterns,
            count,
            height,
            width,
            positions,
            photon_target,
            probe_label: probe_label.into(),
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn raw(&self) -> &[f64] {
        &self.patterns
    }

    pub fn pattern(&self, index: usize) -> &[f64] {
        let size = self.height * self.width;
        &self.patterns[index * size..(index + 1) * size]
    }

    pub fn pattern_image(&self, index: usize) -> RealImage2D {
        RealImage2D::new(self.height, self.width, self.pattern(index).to_vec())
            .expect("stack slices are valid images")
    }

    pub fn pattern_sum(&self, index: usize) -> f64 {
        self.pattern(index).iter().sum()
    }
}

/// Per-stack normalization factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationFactors {
    /// Root-mean-square factor: sqrt(HW / mean-per-pattern sum of I^2).
    pub n_rms: f64,
    /// Mean-intensity factor: 1 / mean-per-pattern sum of I.
    pub n_energy: f64,
    pub batch_size: usize,
}

/// Bilinear patch extraction at a real-valued center, applied
/// independently to real and imaginary parts. Integer centers reproduce
/// direct slicing exactly.
pub fn extract_patch(
    object: &ComplexImage2D,
    center: (f64, f64),
    size: usize,
) -> Result<ComplexImage2D> {
    let (cx, cy) = center;
    let half = size as f64 / 2.0;
    let x0 = cx - half;
    let y0 = cy - half;
    let x_max = x0 + (size - 1) as f64;
    let y_max = y0 + (size - 1) as f64;
    if x0 < 0.0
        || y0 < 0.0
        || x_max > (object.width() - 1) as f64
        || y_max > (object.height() - 1) as f64
    {
        return Err(Error::PatchOutOfBounds { x: cx, y: cy });
    }
    let w = object.width();
    let h = object.height();
    Ok(ComplexImage2D::from_fn(size, size, |r, c| {
        let x = x0 + c as f64;
        let y = y0 + r as f64;
        let xi = x.floor() as usize;
        let yi = y.floor() as usize;
        let tx = x - xi as f64;
        let ty = y - yi as f64;
        let xi1 = (xi + 1).min(w - 1);
        let yi1 = (yi + 1).min(h - 1);
        object.at(yi, xi) * ((1.0 - tx) * (1.0 - ty))
            + object.at(yi, xi1) * (tx * (1.0 - ty))
            + object.at(yi1, xi) * ((1.0 - tx) * ty)
            + object.at(yi1, xi1) * (tx * ty)
    }))
}

/// Integer top-left corner used when a patch center is rounded onto the
/// pixel lattice.
pub fn rounded_corner(center: (f64, f64), size: usize) -> (usize, usize) {
    let half = size as f64 / 2.0;
    let col = (center.0.round() - half) as isize;
    let row = (center.1.round() - half) as isize;
    (row.max(0) as usize, col.max(0) as usize)
}

/// Noiseless far-field intensity |FT(y · p)|^2, fftshifted so zero
/// frequency sits at the central pixel.
pub fn simulate_pattern(object_patch: &ComplexImage2D, probe: &Probe) -> Result<RealImage2D> {
    if object_patch.height() != probe.field.height() || object_patch.width() != probe.field.width() {
        return Err(Error::DimensionMismatch(format!(
            "patch {}x{} vs probe {}x{}",
            object_patch.height(),
            object_patch.width(),
            probe.field.height(),
            probe.field.width()
        )));
    }
    let exit_wave = ComplexImage2D::from_fn(object_patch.height(), object_patch.width(), |r, c| {
        object_patch.at(r, c) * probe.field.at(r, c)
    });
    let spectrum = fftshift(&fft2_forward(&exit_wave));
    Ok(RealImage2D::from_fn(spectrum.height(), spectrum.width(), |r, c| {
        spectrum.at(r, c).norm_sqr()
    }))
}

fn poisson_draw(lambda: f64, rng: &mut impl Rng) -> f64 {
    if lambda <= 0.0 {
        0.0
    } else {
        Poisson::new(lambda).expect("positive finite mean").sample(rng)
    }
}

/// Rescale a pattern so its sum equals `total_photons`, then draw each
/// pixel from a Poisson distribution with that pixel's value as mean.
pub fn apply_photon_scale(
    pattern: &RealImage2D,
    total_photons: f64,
    seed: RandomSeed,
) -> Result<RealImage2D> {
    if total_photons <= 0.0 || !total_photons.is_finite() {
        return Err(Error::InvalidParameter {
            field: "total_photons",
            message: format!("must be finite and > 0, got {total_photons}"),
        });
    }
    if pattern.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Validation("pattern must be nonnegative".into()));
    }
    let total = pattern.sum();
    if total <= 0.0 {
        return Err(Error::ZeroEnergy("cannot photon-scale an all-zero pattern".into()));
    }
    let scale = total_photons / total;
    let mut rng = seed.derive("poisson", 0).rng();
    Ok(pattern.map(|v| poisson_draw(v * scale, &mut rng)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    /// Photon target range; one log-uniform draw per dataset.
    pub photon_range: (f64, f64),
    /// Skip Poisson sampling, keeping scaled noiseless intensities.
    pub noiseless: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { photon_range: (1e4, 1e6), noiseless: false }
    }
}

/// Simulate a full diffraction stack over a scan plan.
///
/// A single photon target is drawn log-uniformly from the range; one
/// common scale factor brings the mean per-pattern total to that target,
/// preserving relative intensities across positions. Each position then
/// receives independent Poisson noise from its own derived stream, so the
/// result is deterministic under any thread count.
pub fn simulate_dataset(
    object: &SyntheticObject,
    probe: &Probe,
    plan: &ScanPlan,
    options: SimulationOptions,
    seed: RandomSeed,
) -> Result<DiffractionStack> {
    let (lo, hi) = options.photon_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidParameter {
            field: "photon_range",
            message: format!("must satisfy 0 < low <= high, got ({lo}, {hi})"),
        });
    }
    plan.validate()?;

    let target = if lo == hi {
        lo
    } else {
        let u: f64 = seed.derive("photon-target", 0).rng().gen();
        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
    };

    let size = probe.size();
    let noiseless: Vec<RealImage2D> = plan
        .positions
        .par_iter()
        .map(|&pos| {
            let patch = extract_patch(&object.field, pos, size)?;
            simulate_pattern(&patch, probe)
        })
        .collect::<Result<_>>()?;

    let mean_sum: f64 = noiseless.iter().map(|p| p.sum()).sum::<f64>() / noiseless.len() as f64;
    if mean_sum <= 0.0 {
        return Err(Error::ZeroEnergy("simulated stack has zero energy".into()));
    }
    let scale = target / mean_sum;

    let patterns: Vec<f64> = noiseless
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, pattern)| {
            let mut rng = seed.derive("pos", i as u64).rng();
            let noiseless_mode = options.noiseless;
            pattern
                .values()
                .iter()
                .map(move |&v| {
                    if noiseless_mode {
                        v * scale
                    } else {
                        poisson_draw(v * scale, &mut rng)
                    }
                })
                .collect::<Vec<f64>>()
        })
        .collect();

    DiffractionStack::new(
        patterns,
        plan.len(),
        size,
        size,
        plan.clone(),
        Some(target),
        probe.source_label.clone(),
    )
}

/// Per-stack normalization factors following the rms and mean-intensity
/// definitions.
pub fn rms_norm(stack: &DiffractionStack) -> Result<NormalizationFactors> {
    if stack.count() == 0 {
        return Err(Error::Validation("empty stack".into()));
    }
    let n = stack.count() as f64;
    let hw = (stack.height() * stack.width()) as f64;
    let sum_sq: f64 = stack.raw().iter().map(|v| v * v).sum();
    let sum: f64 = stack.raw().iter().sum();
    if sum_sq == 0.0 {
        return Err(Error::ZeroEnergy("all-zero stack has no normalization".into()));
    }
    Ok(NormalizationFactors {
        n_rms: (hw / (sum_sq / n)).sqrt(),
        n_energy: 1.0 / (sum / n),
        batch_size: stack.count(),
    })
}
