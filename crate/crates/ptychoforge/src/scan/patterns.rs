//! Scan plan construction: jittered raster grids and Fermat spirals.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::core::RandomSeed;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPattern {
    Isotropic,
    Rectangular,
    Spiral,
}

/// Ordered scan positions in pixel coordinates plus pattern metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub positions: Vec<(f64, f64)>,
    pub pattern: ScanPattern,
    pub step_x: f64,
    pub step_y: f64,
    pub jitter_sigma: f64,
}

impl ScanPlan {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::Validation("scan plan has no positions".into()));
        }
        if self.positions.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::NonFinite("scan positions contain NaN/Inf".into()));
        }
        let rel = (self.step_x - self.step_y).abs() / self.step_x.max(self.step_y);
        match self.pattern {
            ScanPattern::Isotropic if rel >= 0.05 => Err(Error::Validation(format!(
                "isotropic plan requires near-equal steps, got {} vs {}",
                self.step_x, self.step_y
            ))),
            _ => Ok(()),
        }
    }

    /// Shift every position by (dx, dy).
    pub fn translated(&self, dx: f64, dy: f64) -> ScanPlan {
        ScanPlan {
            positions: self.positions.iter().map(|&(x, y)| (x + dx, y + dy)).collect(),
            ..self.clone()
        }
    }

    pub fn mean_step(&self) -> f64 {
        match self.pattern {
            ScanPattern::Spiral => self.step_x,
            _ => 0.5 * (self.step_x + self.step_y),
        }
    }

    /// Mean nearest-neighbor distance, brute force.
    pub fn mean_nearest_neighbor(&self) -> f64 {
        let n = self.positions.len();
        if n < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for (i, &(xi, yi)) in self.positions.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, &(xj, yj)) in self.positions.iter().enumerate() {
                if i != j {
                    let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
                    best = best.min(d);
                }
            }
            total += best;
        }
        total / n as f64
    }
}

/// Fermat spiral radial constant giving mean nearest-neighbor spacing of
/// about one `step`; calibrated against brute-force NN distances.
const FERMAT_SPACING: f64 = 0.59;

/// Scan plan over a rectangular extent.
///
/// Raster patterns place a jittered grid with the given steps; the spiral
/// pattern fills the extent's inscribed disk with a golden-angle Fermat
/// spiral whose mean nearest-neighbor spacing is approximately `step_x`.
pub fn make_scan(
    pattern: ScanPattern,
    extent_x: f64,
    extent_y: f64,
    step_x: f64,
    step_y: f64,
    jitter_sigma: f64,
    seed: RandomSeed,
) -> Result<ScanPlan> {
    if step_x <= 0.0 || step_y <= 0.0 {
        return Err(Error::InvalidParameter {
            field: "step",
            message: format!("steps must be > 0, got ({step_x}, {step_y})"),
        });
    }
    if extent_x < 0.0 || extent_y < 0.0 || !extent_x.is_finite() || !extent_y.is_finite() {
        return Err(Error::InvalidParameter {
            field: "extent",
            message: format!("degenerate extent ({extent_x}, {extent_y})"),
        });
    }
    let positions = match pattern {
        ScanPattern::Isotropic | ScanPattern::Rectangular => {
            let nx = (extent_x / step_x).floor() as usize + 1;
            let ny = (extent_y / step_y).floor() as usize + 1;
            let mut rng = seed.derive("scan-jitter", 0).rng();
            let normal = Normal::new(0.0, jitter_sigma.max(f64::MIN_POSITIVE)).unwrap();
            let mut positions = Vec::with_capacity(nx * ny);
            for iy in 0..ny {
                for ix in 0..nx {
                    let (jx, jy) = if jitter_sigma > 0.0 {
                        (normal.sample(&mut rng), normal.sample(&mut rng))
                    } else {
                        (0.0, 0.0)
                    };
                    positions.push((ix as f64 * step_x + jx, iy as f64 * step_y + jy));
                }
            }
            positions
        }
        ScanPattern::Spiral => {
            let radius = extent_x.min(extent_y) / 2.0;
            let c = FERMAT_SPACING * step_x;
            let n = ((radius / c) * (radius / c)).floor() as usize;
            if n == 0 {
                return Err(Error::InvalidParameter {
                    field: "extent",
                    message: format!("extent ({extent_x}, {extent_y}) too small for spiral step {step_x}"),
                });
            }
            fermat_spiral_points(n, step_x, radius)
        }
    };
    let plan = ScanPlan { positions, pattern, step_x, step_y, jitter_sigma };
    plan.validate()?;
    Ok(plan)
}

/// Golden-angle Fermat spiral with exactly `n` points, centered at the
/// given radius offset so all coordinates are nonnegative.
pub fn fermat_spiral(n: usize, step: f64) -> Result<ScanPlan> {
    if n == 0 {
        return Err(Error::InvalidParameter { field: "n", message: "need at least 1 point".into() });
    }
    if step <= 0.0 {
        return Err(Error::InvalidParameter {
            field: "step",
            message: format!("step must be > 0, got {step}"),
        });
    }
    let c = FERMAT_SPACING * step;
    let radius = c * (n as f64).sqrt();
    let positions = fermat_spiral_points(n, step, radius);
    Ok(ScanPlan {
        positions,
        pattern: ScanPattern::Spiral,
        step_x: step,
        step_y: step,
        jitter_sigma: 0.0,
    })
}

fn fermat_spiral_points(n: usize, step: f64, center_offset: f64) -> Vec<(f64, f64)> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let c = FERMAT_SPACING * step;
    (0..n)
        .map(|k| {
            let r = c * (k as f64).sqrt();
            let theta = k as f64 * golden_angle;
            (center_offset + r * theta.cos(), center_offset + r * theta.sin())
        })
        .collect()
}
