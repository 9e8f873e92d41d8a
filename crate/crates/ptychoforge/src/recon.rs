//! Iterative phase retrieval: a sequential ePIE engine with optional
//! probe refinement, used as the reconstruction oracle for the synthetic
//! pipeline.

use num_complex::Complex64;
use rand::seq::SliceRandom;

use crate::core::{fft2_forward, fft2_inverse, ifftshift, ComplexImage2D, RandomSeed, RealImage2D};
use crate::error::{Error, Result};
use crate::forward::{extract_patch, DiffractionStack, Probe};

#[derive(Debug, Clone)]
pub struct ReconConfig {
    /// Number of full sweeps over all positions.
    pub iterations: usize,
    /// Object update step.
    pub alpha: f64,
    /// Probe update step.
    pub beta: f64,
    pub update_probe: bool,
    pub seed: RandomSeed,
    /// Starting object; defaults to an all-ones field.
    pub initial_object: Option<ComplexImage2D>,
}

impl ReconConfig {
    pub fn new(iterations: usize, seed: RandomSeed) -> Self {
        Self { iterations, alpha: 0.9, beta: 0.9, update_probe: false, seed, initial_object: None }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter {
                field: "iterations",
                message: "must be >= 1".into(),
            });
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 2.0) {
                return Err(Error::InvalidParameter {
                    field: name,
                    message: format!("step must be in (0, 2], got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReconResult {
    pub object_estimate: ComplexImage2D,
    pub probe_estimate: ComplexImage2D,
    /// Mean squared amplitude residual per sweep.
    pub error_history: Vec<f64>,
    /// Summed |probe|^2 footprint over all positions.
    pub illuminated_mask: RealImage2D,
}

/// Object size that contains every patch footprint of the plan.
pub fn object_size_for(stack: &DiffractionStack) -> (usize, usize) {
    let size = stack.height() as f64;
    let mut max_x: f64 = 0.0;
    let mut max_y: f64 = 0.0;
    for &(x, y) in &stack.positions.positions {
        max_x = max_x.max(x + size / 2.0);
        max_y = max_y.max(y + size / 2.0);
    }
    (max_y.ceil() as usize + 1, max_x.ceil() as usize + 1)
}

/// Sequential ePIE sweeps over the stack.
///
/// Per position: extract the object patch, form the exit wave, project
/// onto the measured amplitudes in the far field, and scatter the update
/// back. Position order is shuffled each sweep under the config seed, so
/// the result is deterministic.
pub fn reconstruct(
    stack: &DiffractionStack,
    probe: &Probe,
    object_size: (usize, usize),
    config: &ReconConfig,
) -> Result<ReconResult> {
    config.validate()?;
    let size = stack.height();
    if stack.width() != size || probe.size() != size {
        return Err(Error::DimensionMismatch(format!(
            "stack {}x{} vs probe {}",
            stack.height(),
            stack.width(),
            probe.size()
        )));
    }
    let (obj_h, obj_w) = object_size;

    let mut object = match &config.initial_object {
        Some(init) => {
            if init.height() != obj_h || init.width() != obj_w {
                return Err(Error::DimensionMismatch(format!(
                    "initial object {}x{} vs requested {}x{}",
                    init.height(),
                    init.width(),
                    obj_h,
                    obj_w
                )));
            }
            init.clone()
        }
        None => ComplexImage2D::filled(obj_h, obj_w, Complex64::new(1.0, 0.0)),
    };
    let mut probe_field = probe.field.clone();

    // Measured amplitudes in unshifted FFT order.
    let amplitudes: Vec<Vec<f64>> = (0..stack.count())
        .map(|i| {
            let img = stack.pattern_image(i).map(f64::sqrt);
            ifftshift(&img.to_complex()).values().iter().map(|v| v.re).collect()
        })
        .collect();

    // Integer scatter footprints; the sub-pixel residual is honored by the
    // forward extraction.
    let corners: Vec<(usize, usize, bool)> = stack
        .positions
        .positions
        .iter()
        .map(|&(x, y)| {
            let col = x.round() - size as f64 / 2.0;
            let row = y.round() - size as f64 / 2.0;
            if col < 0.0
                || row < 0.0
                || col as usize + size > obj_w
                || row as usize + size > obj_h
            {
                Err(Error::PatchOutOfBounds { x, y })
            } else {
                let fractional = x.fract() != 0.0 || y.fract() != 0.0;
                Ok((row as usize, col as usize, fractional))
            }
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..stack.count()).collect();
    let mut error_history = Vec::with_capacity(config.iterations);
    let pixels = (size * size) as f64;

    for sweep in 0..config.iterations {
        let mut rng = config.seed.derive("sweep", sweep as u64).rng();
        order.shuffle(&mut rng);
        let mut sweep_error = 0.0;

        for &i in &order {
            let (row0, col0, fractional) = corners[i];
            let patch = if fractional {
                extract_patch(&object, stack.positions.positions[i], size)?
            } else {
                object.crop(row0, col0, size, size)?
            };

            let exit = ComplexImage2D::from_fn(size, size, |r, c| {
                patch.at(r, c) * probe_field.at(r, c)
            });
            let mut spectrum = fft2_forward(&exit);

            // Amplitude projection onto the measurement.
            let measured = &amplitudes[i];
            for (v, &a) in spectrum.values_mut().iter_mut().zip(measured.iter()) {
                let mag = v.norm();
                sweep_error += (mag - a) * (mag - a);
                *v = if mag > 0.0 { *v * (a / mag) } else { Complex64::new(0.0, 0.0) };
            }
            let corrected = fft2_inverse(&spectrum);

            let probe_max_sq = probe_field
                .values()
                .iter()
                .map(|v| v.norm_sqr())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            let patch_max_sq = patch
                .values()
                .iter()
                .map(|v| v.norm_sqr())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);

            // Scatter through the adjoint of the extraction operator:
            // direct write-back for lattice positions, bilinear spread for
            // sub-pixel ones (a mismatched adjoint feeds a systematic
            // shift back into the estimate and can diverge).
            let (x0, y0) = (
                stack.positions.positions[i].0 - size as f64 / 2.0,
                stack.positions.positions[i].1 - size as f64 / 2.0,
            );
            for r in 0..size {
                for c in 0..size {
                    let delta = corrected.at(r, c) - exit.at(r, c);
                    let obj_update =
                        probe_field.at(r, c).conj() * delta * (config.alpha / probe_max_sq);
                    if fractional {
                        let x = x0 + c as f64;
                        let y = y0 + r as f64;
                        let xi = x.floor() as usize;
                        let yi = y.floor() as usize;
                        let tx = x - xi as f64;
                        let ty = y - yi as f64;
                        let xi1 = (xi + 1).min(obj_w - 1);
                        let yi1 = (yi + 1).min(obj_h - 1);
                        *object.at_mut(yi, xi) += obj_update * ((1.0 - tx) * (1.0 - ty));
                        *object.at_mut(yi, xi1) += obj_update * (tx * (1.0 - ty));
                        *object.at_mut(yi1, xi) += obj_update * ((1.0 - tx) * ty);
                        *object.at_mut(yi1, xi1) += obj_update * (tx * ty);
                    } else {
                        *object.at_mut(row0 + r, col0 + c) += obj_update;
                    }
                    if config.update_probe {
                        let probe_update =
                            patch.at(r, c).conj() * delta * (config.beta / patch_max_sq);
                        *probe_field.at_mut(r, c) += probe_update;
                    }
                }
            }
        }

        let mean_error = sweep_error / (stack.count() as f64 * pixels);
        let baseline = error_history.first().copied().unwrap_or(mean_error);
        if !mean_error.is_finite() || mean_error > 1e6 * baseline.max(f64::MIN_POSITIVE) {
            return Err(Error::Diverged(sweep));
        }
        error_history.push(mean_error);
    }

    if !object.is_finite() || !probe_field.is_finite() {
        return Err(Error::Diverged(config.iterations - 1));
    }

    let mut illuminated_mask = RealImage2D::zeros(obj_h, obj_w);
    for &(row0, col0, _) in &corners {
        for r in 0..size {
            for c in 0..size {
                *illuminated_mask.at_mut(row0 + r, col0 + c) += probe_field.at(r, c).norm_sqr();
            }
        }
    }

    Ok(ReconResult { object_estimate: object, probe_estimate: probe_field, error_history, illuminated_mask })
}

/// Bounding box (row0, col0, height, width) of the region where the mask
/// reaches at least `fraction` of its maximum.
pub fn mask_bounding_box(mask: &RealImage2D, fraction: f64) -> Result<(usize, usize, usize, usize)> {
    let threshold = fraction * mask.max();
    let mut row_lo = usize::MAX;
    let mut row_hi = 0;
    let mut col_lo = usize::MAX;
    let mut col_hi = 0;
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if mask.at(r, c) >= threshold {
                row_lo = row_lo.min(r);
                row_hi = row_hi.max(r);
                col_lo = col_lo.min(c);
                col_hi = col_hi.max(c);
            }
        }
    }
    if row_lo > row_hi {
        return Err(Error::DegenerateMask("no pixel reaches the mask threshold".into()));
    }
    Ok((row_lo, col_lo, row_hi - row_lo + 1, col_hi - col_lo + 1))
}

/// Mean per-pixel Poisson negative log likelihood of measured counts
/// under predicted intensities.
pub fn poisson_nll(predicted: &RealImage2D, measured: &RealImage2D) -> Result<f64> {
    if predicted.height() != measured.height() || predicted.width() != measured.width() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            predicted.height(),
            predicted.width(),
            measured.height(),
            measured.width()
        )));
    }
    if predicted.min() < 0.0 || measured.min() < 0.0 {
        return Err(Error::Validation("poisson_nll requires nonnegative inputs".into()));
    }
    const EPS: f64 = 1e-9;
    let total: f64 = predicted
        .values()
        .iter()
        .zip(measured.values())
        .map(|(&lambda, &k)| lambda - k * (lambda + EPS).ln())
        .sum();
    Ok(total / predicted.values().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{simulate_dataset, SimulationOptions};
    use crate::objgen::{generate_object, ObjectClass, SyntheticObject};
    use crate::scan::{make_scan, ScanPattern, ScanPlan};

    fn raster(extent: f64, step: f64, offset: f64) -> ScanPlan {
        let base = make_scan(ScanPattern::Isotropic, extent, extent, step, step, 0.0, RandomSeed::new(0))
            .unwrap();
        base.translated(offset, offset)
    }

    fn noiseless_stack(object: &SyntheticObject, probe: &Probe, plan: &ScanPlan) -> DiffractionStack {
        simulate_dataset(
            object,
            probe,
            plan,
            SimulationOptions { photon_range: (1.0, 1.0), noiseless: true },
            RandomSeed::new(0),
        )
        .unwrap()
    }

    #[test]
    fn truth_is_a_fixed_point() {
        let probe = Probe::synthetic(16);
        let object = SyntheticObject {
            field: ComplexImage2D::filled(48, 48, Complex64::new(1.0, 0.0)),
            class: ObjectClass::WhiteNoise,
            seed: RandomSeed::new(0),
        };
        let plan = raster(24.0, 4.0, 12.0);
        // Build patterns without photon rescaling so amplitudes match the
        // model exactly.
        let patterns: Vec<f64> = plan
            .positions
            .iter()
            .flat_map(|&pos| {
                let patch = extract_patch(&object.field, pos, 16).unwrap();
                crate::forward::simulate_pattern(&patch, &probe).unwrap().values().to_vec()
            })
            .collect();
        let stack =
            DiffractionStack::new(patterns, plan.len(), 16, 16, plan, None, "test").unwrap();

        let config = ReconConfig {
            iterations: 2,
            initial_object: Some(object.field.clone()),
            ..ReconConfig::new(2, RandomSeed::new(1))
        };
        let result = reconstruct(&stack, &probe, (48, 48), &config).unwrap();
        assert!(result.error_history[0] < 1e-16, "residual {}", result.error_history[0]);
        let max_dev = result
            .object_estimate
            .values()
            .iter()
            .zip(object.field.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-8, "estimate moved by {max_dev}");
    }

    #[test]
    fn noiseless_round_trip_converges() {
        let probe = Probe::synthetic(16);
        let object = generate_object(&ObjectClass::WhiteNoise, 72, 72, RandomSeed::new(5)).unwrap();
        let plan = raster(40.0, 4.0, 16.0);
        let stack = noiseless_stack(&object, &probe, &plan);
        let config = ReconConfig::new(200, RandomSeed::new(2));
        let result = reconstruct(&stack, &probe, (72, 72), &config).unwrap();

        assert_eq!(result.error_history.len(), 200);
        assert!(result.error_history.iter().all(|e| e.is_finite()));
        let early = result.error_history[9];
        let late = *result.error_history.last().unwrap();
        assert!(late < early / 10.0, "error {early} -> {late} did not drop 10x");

        // Non-increasing over the last 80% of sweeps, up to small jitter.
        let start = 24;
        for w in result.error_history[start..].windows(2) {
            assert!(w[1] <= w[0] * 1.01 + 1e-6, "error increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn global_phase_gauge() {
        let probe = Probe::synthetic(16);
        let object = generate_object(&ObjectClass::WhiteNoise, 64, 64, RandomSeed::new(6)).unwrap();
        let plan = raster(32.0, 4.0, 14.0);
        let stack = noiseless_stack(&object, &probe, &plan);

        let base_cfg = ReconConfig::new(40, RandomSeed::new(3));
        let base = reconstruct(&stack, &probe, (64, 64), &base_cfg).unwrap();

        let phi = 0.8;
        let rotated_init = ComplexImage2D::filled(64, 64, Complex64::from_polar(1.0, phi));
        let rot_cfg = ReconConfig { initial_object: Some(rotated_init), ..base_cfg };
        let rotated = reconstruct(&stack, &probe, (64, 64), &rot_cfg).unwrap();

        let (r0, c0, h, w) = mask_bounding_box(&base.illuminated_mask, 0.5).unwrap();
        let mut phase_diff_sum = Complex64::new(0.0, 0.0);
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                let a = base.object_estimate.at(r, c);
                let b = rotated.object_estimate.at(r, c);
                assert!((a.norm() - b.norm()).abs() < 1e-5, "amplitudes differ beyond gauge");
                phase_diff_sum += b * a.conj();
            }
        }
        let mean_phase = phase_diff_sum.arg();
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                let a = base.object_estimate.at(r, c);
                let b = rotated.object_estimate.at(r, c) * Complex64::from_polar(1.0, -mean_phase);
                assert!((a - b).norm() < 1e-4, "gauge-aligned estimates differ");
            }
        }
    }

    #[test]
    fn determinism_under_seed() {
        let probe = Probe::synthetic(16);
        let object = generate_object(&ObjectClass::WhiteNoise, 64, 64, RandomSeed::new(7)).unwrap();
        let plan = raster(32.0, 8.0, 14.0);
        let stack = noiseless_stack(&object, &probe, &plan);
        let config = ReconConfig::new(10, RandomSeed::new(4));
        let a = reconstruct(&stack, &probe, (64, 64), &config).unwrap();
        let b = reconstruct(&stack, &probe, (64, 64), &config).unwrap();
        assert_eq!(a.object_estimate.values(), b.object_estimate.values());
    }

    #[test]
    fn nll_zero_prediction_zero_counts() {
        let z = RealImage2D::zeros(8, 8);
        let nll = poisson_nll(&z, &z).unwrap();
        assert!(nll.abs() < 1e-12);
    }

    #[test]
    fn nll_minimized_by_mean_rate() {
        let measured = RealImage2D::new(2, 2, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let mean = 4.0;
        let at = |lambda: f64| {
            let pred = RealImage2D::filled(2, 2, lambda);
            poisson_nll(&pred, &measured).unwrap()
        };
        let best = at(mean);
        for lambda in [1.0, 2.0, 3.0, 5.0, 6.0, 8.0] {
            assert!(at(lambda) > best, "constant rate {lambda} beat the mean");
        }
    }

    #[test]
    fn nll_prefers_true_object() {
        let probe = Probe::synthetic(16);
        let truth = generate_object(&ObjectClass::WhiteNoise, 64, 64, RandomSeed::new(8)).unwrap();
        let decoy = generate_object(&ObjectClass::WhiteNoise, 64, 64, RandomSeed::new(9)).unwrap();
        let plan = raster(32.0, 4.0, 14.0);
        let stack = simulate_dataset(
            &truth,
            &probe,
            &plan,
            SimulationOptions { photon_range: (1e5, 1e5), noiseless: false },
            RandomSeed::new(10),
        )
        .unwrap();

        let score = |object: &SyntheticObject| -> f64 {
            let scale = stack.photon_target.unwrap();
            let noiseless: Vec<f64> = plan
                .positions
                .iter()
                .map(|&pos| {
                    let patch = extract_patch(&object.field, pos, 16).unwrap();
                    crate::forward::simulate_pattern(&patch, &probe).unwrap().sum()
                })
                .collect();
            let mean_sum = noiseless.iter().sum::<f64>() / noiseless.len() as f64;
            let s = scale / mean_sum;
            (0..stack.count().min(50))
                .map(|i| {
                    let patch = extract_patch(&object.field, plan.positions[i], 16).unwrap();
                    let pred =
                        crate::forward::simulate_pattern(&patch, &probe).unwrap().map(|v| v * s);
                    poisson_nll(&pred, &stack.pattern_image(i)).unwrap()
                })
                .sum()
        };
        assert!(score(&truth) < score(&decoy), "true object must score lower NLL");
    }

    #[test]
    fn poisson_nll_rejects_negative() {
        let neg = RealImage2D::new(1, 2, vec![-1.0, 0.0]).unwrap();
        let ok = RealImage2D::zeros(1, 2);
        assert!(poisson_nll(&neg, &ok).is_err());
        assert!(poisson_nll(&ok, &neg).is_err());
    }
}
