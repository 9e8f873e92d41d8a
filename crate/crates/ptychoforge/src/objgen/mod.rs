//! Procedural generation of synthetic complex-valued objects and their
//! conversion to correlated amplitude/phase maps.
//!
//! Five texture classes are supported: dead leaves (DL), procedural
//! lines/ellipses (PR), white noise (WN), blurred white noise (BWN) and
//! low-frequency gradient noise (SN). A scalar texture is rescaled into a
//! complex transmission function with amplitude in [0.7, 1.0] and phase
//! in [-pi, pi]; amplitude and phase share the same underlying texture.

pub mod textures;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core::{ComplexImage2D, RandomSeed, RealImage2D};
use crate::error::{Error, Result};

pub const DEFAULT_AMP_RANGE: (f64, f64) = (0.7, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadLeavesParams {
    /// Smallest disk radius in pixels; radii follow p(r) ∝ r^-3.
    pub radius_min: f64,
    /// Largest radius as a fraction of min(H, W).
    pub radius_max_fraction: f64,
}

impl Default for DeadLeavesParams {
    fn default() -> Self {
        Self { radius_min: 3.0, radius_max_fraction: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProceduralParams {
    /// Target fraction of pixels covered by at least one shape.
    pub coverage: f64,
    /// Line width range in pixels.
    pub line_width_range: (f64, f64),
    /// Ellipse semi-axis range in pixels.
    pub ellipse_axis_range: (f64, f64),
    /// Per-shape opacity range.
    pub opacity_range: (f64, f64),
}

impl Default for ProceduralParams {
    fn default() -> Self {
        Self {
            coverage: 0.6,
            line_width_range: (1.0, 3.0),
            ellipse_axis_range: (4.0, 40.0),
            opacity_range: (0.3, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBlurParams {
    /// Blur kernel sigma in pixels.
    pub sigma: f64,
    /// Kernel truncation radius in sigmas.
    pub truncate: f64,
}

impl Default for GaussianBlurParams {
    fn default() -> Self {
        Self { sigma: 3.0, truncate: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientNoiseParams {
    /// Shortest wavelength in pixels; the spectrum is hard-limited below
    /// 1/min_wavelength cycles/pixel.
    pub min_wavelength: f64,
    pub octaves: usize,
    pub persistence: f64,
}

impl Default for GradientNoiseParams {
    fn default() -> Self {
        Self { min_wavelength: 13.0, octaves: 3, persistence: 0.5 }
    }
}

/// Synthetic object class with class-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectClass {
    DeadLeaves(DeadLeavesParams),
    Procedural(ProceduralParams),
    WhiteNoise,
    BlurredWhiteNoise(GaussianBlurParams),
    SimplexNoise(GradientNoiseParams),
}

impl ObjectClass {
    /// Class from its two-letter tag with default parameters.
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "dl" => Ok(Self::DeadLeaves(DeadLeavesParams::default())),
            "pr" => Ok(Self::Procedural(ProceduralParams::default())),
            "wn" => Ok(Self::WhiteNoise),
            "bwn" => Ok(Self::BlurredWhiteNoise(GaussianBlurParams::default())),
            "sn" => Ok(Self::SimplexNoise(GradientNoiseParams::default())),
            other => Err(Error::InvalidParameter {
                field: "class",
                message: format!("unknown object class `{other}` (expected dl|pr|wn|bwn|sn)"),
            }),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::DeadLeaves(_) => "dl",
            Self::Procedural(_) => "pr",
            Self::WhiteNoise => "wn",
            Self::BlurredWhiteNoise(_) => "bwn",
            Self::SimplexNoise(_) => "sn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::DeadLeaves(p) => {
                if p.radius_min <= 0.0 {
                    return param_err("radius_min", "must be > 0", p.radius_min);
                }
                if !(0.0..=1.0).contains(&p.radius_max_fraction)
                    || p.radius_max_fraction == 0.0
                {
                    return param_err("radius_max_fraction", "must be in (0, 1]", p.radius_max_fraction);
                }
            }
            Self::Procedural(p) => {
                if !(0.0 < p.coverage && p.coverage < 1.0) {
                    return param_err("coverage", "must be in (0, 1)", p.coverage);
                }
                for (name, (lo, hi)) in [
                    ("line_width_range", p.line_width_range),
                    ("ellipse_axis_range", p.ellipse_axis_range),
                    ("opacity_range", p.opacity_range),
                ] {
                    if !(lo > 0.0 && hi > lo) {
                        return Err(Error::InvalidParameter {
                            field: name,
                            message: format!("range ({lo}, {hi}) must satisfy 0 < low < high"),
                        });
                    }
                }
            }
            Self::WhiteNoise => {}
            Self::BlurredWhiteNoise(p) => {
                if p.sigma <= 0.0 {
                    return param_err("sigma", "blur kernel sigma must be > 0", p.sigma);
                }
                if p.truncate <= 0.0 {
                    return param_err("truncate", "must be > 0", p.truncate);
                }
            }
            Self::SimplexNoise(p) => {
                if p.min_wavelength < 2.0 {
                    return param_err("min_wavelength", "must be >= 2 pixels", p.min_wavelength);
                }
                if p.octaves == 0 {
                    return param_err("octaves", "must be >= 1", 0.0);
                }
                if p.persistence <= 0.0 {
                    return param_err("persistence", "must be > 0", p.persistence);
                }
            }
        }
        Ok(())
    }
}

fn param_err<T>(field: &'static str, message: &str, value: f64) -> Result<T> {
    Err(Error::InvalidParameter { field, message: format!("{message} (got {value})") })
}

/// Complex object together with its generation provenance.
#[derive(Debug, Clone)]
pub struct SyntheticObject {
    pub field: ComplexImage2D,
    pub class: ObjectClass,
    pub seed: RandomSeed,
}

/// Raw scalar texture for an object class, in arbitrary units.
pub fn generate_scalar_texture(
    class: &ObjectClass,
    height: usize,
    width: usize,
    seed: RandomSeed,
) -> Result<RealImage2D> {
    class.validate()?;
    if height < 64 || width < 64 {
        return Err(Error::InvalidParameter {
            field: "size",
            message: format!("texture size must be at least 64x64, got {height}x{width}"),
        });
    }
    Ok(match class {
        ObjectClass::DeadLeaves(p) => textures::dead_leaves(p, height, width, seed),
        ObjectClass::Procedural(p) => textures::procedural(p, height, width, seed),
        ObjectClass::WhiteNoise => textures::white_noise(height, width, seed),
        ObjectClass::BlurredWhiteNoise(p) => textures::blurred_white_noise(p, height, width, seed),
        ObjectClass::SimplexNoise(p) => textures::gradient_noise(p, height, width, seed),
    })
}

/// Rescale a texture into a complex object: phase spans [-pi, pi] and
/// amplitude spans `amp_range`, both affine in the same texture. A
/// constant texture maps to phase 0 and the amplitude midpoint.
pub fn to_complex_object(
    texture: &RealImage2D,
    amp_range: (f64, f64),
    class: ObjectClass,
    seed: RandomSeed,
) -> Result<SyntheticObject> {
    let (lo, hi) = amp_range;
    if !(lo >= 0.0 && hi <= 1.0 && lo < hi) {
        return Err(Error::InvalidParameter {
            field: "amp_range",
            message: format!("must satisfy 0 <= low < high <= 1, got ({lo}, {hi})"),
        });
    }
    if !texture.is_finite() {
        return Err(Error::NonFinite("texture contains NaN/Inf".into()));
    }
    let t_min = texture.min();
    let t_max = texture.max();
    let span = t_max - t_min;

    let field = if span == 0.0 {
        let mid = 0.5 * (lo + hi);
        ComplexImage2D::filled(texture.height(), texture.width(), Complex64::new(mid, 0.0))
    } else {
        ComplexImage2D::from_fn(texture.height(), texture.width(), |r, c| {
            let t = (texture.at(r, c) - t_min) / span;
            let phase = -std::f64::consts::PI + t * std::f64::consts::TAU;
            let amp = lo + t * (hi - lo);
            Complex64::from_polar(amp, phase)
        })
    };
    Ok(SyntheticObject { field, class, seed })
}

/// Generate a texture and convert it in one step with default amplitude
/// range.
pub fn generate_object(
    class: &ObjectClass,
    height: usize,
    width: usize,
    seed: RandomSeed,
) -> Result<SyntheticObject> {
    let texture = generate_scalar_texture(class, height, width, seed)?;
    to_complex_object(&texture, DEFAULT_AMP_RANGE, class.clone(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_endpoints() {
        let texture = RealImage2D::new(1, 64.max(2), {
            let mut v = vec![0.0; 64];
            v[0] = -2.0;
            v[1] = 2.0;
            v
        })
        .unwrap();
        let obj = to_complex_object(&texture, (0.7, 1.0), ObjectClass::WhiteNoise, RandomSeed::new(0)).unwrap();
        let lo = obj.field.at(0, 0);
        let hi = obj.field.at(0, 1);
        assert!((lo.norm() - 0.7).abs() < 1e-12);
        assert!((lo.arg().abs() - std::f64::consts::PI).abs() < 1e-12);
        assert!((hi.norm() - 1.0).abs() < 1e-12);
        assert!((hi.arg().abs() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn constant_texture_degenerate_rule() {
        let texture = RealImage2D::filled(64, 64, 5.0);
        let obj = to_complex_object(&texture, (0.7, 1.0), ObjectClass::WhiteNoise, RandomSeed::new(0)).unwrap();
        for v in obj.field.values() {
            assert!((v.norm() - 0.85).abs() < 1e-12);
            assert!(v.arg().abs() < 1e-12);
        }
    }

    #[test]
    fn white_noise_moments() {
        for seed in [1u64, 2, 3] {
            let t =
                generate_scalar_texture(&ObjectClass::WhiteNoise, 64, 64, RandomSeed::new(seed)).unwrap();
            let n = t.values().len() as f64;
            let mean = t.sum() / n;
            let var = t.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 0.15, "mean {mean} out of range for seed {seed}");
            assert!((0.9..1.1).contains(&var.sqrt()), "std {} out of range", var.sqrt());
        }
    }

    #[test]
    fn invariants_hold_for_all_classes() {
        let classes = [
            ObjectClass::DeadLeaves(DeadLeavesParams::default()),
            ObjectClass::Procedural(ProceduralParams::default()),
            ObjectClass::WhiteNoise,
            ObjectClass::BlurredWhiteNoise(GaussianBlurParams::default()),
            ObjectClass::SimplexNoise(GradientNoiseParams::default()),
        ];
        for class in classes {
            let obj = generate_object(&class, 80, 96, RandomSeed::new(11)).unwrap();
            for v in obj.field.values() {
                let amp = v.norm();
                assert!(
                    (0.7 - 1e-12..=1.0 + 1e-12).contains(&amp),
                    "amplitude {amp} out of range for class {}",
                    class.tag()
                );
                assert!(v.arg().abs() <= std::f64::consts::PI + 1e-12);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let class = ObjectClass::DeadLeaves(DeadLeavesParams::default());
        let a = generate_object(&class, 96, 96, RandomSeed::new(21)).unwrap();
        let b = generate_object(&class, 96, 96, RandomSeed::new(21)).unwrap();
        assert_eq!(a.field.values(), b.field.values());
    }

    #[test]
    fn invalid_params_name_the_field() {
        let class = ObjectClass::BlurredWhiteNoise(GaussianBlurParams { sigma: -1.0, truncate: 4.0 });
        let err = generate_scalar_texture(&class, 64, 64, RandomSeed::new(0)).unwrap_err();
        assert!(err.to_string().contains("sigma"), "error should name the field: {err}");
    }
}
