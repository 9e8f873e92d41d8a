//! Declarative end-to-end runs: generate, simulate, group, reconstruct,
//! evaluate — driven by a single JSON description.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::core::{ComplexImage2D, RandomSeed};
use crate::error::{Error, Result};
use crate::forward::{
    normalize_probe, simulate_dataset, DiffractionStack, Probe, SimulationOptions,
};
use crate::io::{
    read_probe_bundle, write_bundle, write_groups_bundle, write_object_bundle, write_recon_bundle,
    CountKind, DatasetBundle,
};
use crate::metrics::{frc_auc_pipeline, radial_psd};
use crate::objgen::{generate_object, ObjectClass};
use crate::recon::{mask_bounding_box, reconstruct, ReconConfig, ReconResult};
use crate::scan::grouping::{group_quadrants, GroupingParams};
use crate::scan::{make_scan, ScanPattern, ScanPlan};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    /// One of dl | pr | wn | bwn | sn.
    pub class: String,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ProbeSource {
    /// Built-in smooth-aperture test probe.
    Builtin { size: usize },
    /// A probe bundle on disk.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    /// One of raster | spiral.
    pub pattern: String,
    pub extent_x: f64,
    pub extent_y: f64,
    pub step_x: f64,
    pub step_y: f64,
    #[serde(default)]
    pub jitter_sigma: f64,
    /// Scan origin in object pixels; when absent the scan is centered in
    /// the object.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    /// Photon-target range for the log-uniform draw; absent means no
    /// photon scaling (raw intensities).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_range: Option<(f64, f64)>,
    /// Skip Poisson sampling, keeping noiseless intensities.
    #[serde(default)]
    pub noiseless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconSpec {
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub update_probe: bool,
}

/// Declarative description of a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub seed: u64,
    pub object: ObjectSpec,
    pub probe: ProbeSource,
    pub scan: ScanSpec,
    #[serde(default = "SimulationSpec::default")]
    pub simulation: SimulationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping: Option<GroupingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconSpec>,
    /// Evaluate the truth/estimate correlation curve when both exist.
    #[serde(default = "default_true")]
    pub evaluate_frc: bool,
    /// Record the spectral energy split of the generated object.
    #[serde(default)]
    pub evaluate_psd: bool,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self { photon_range: None, noiseless: true }
    }
}

/// JSON run report: seeds, timings, scalar metrics, artifact list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    /// Derivation label of every stage seed.
    pub seeds: BTreeMap<String, String>,
    pub timings_seconds: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
}

fn scan_pattern_from_tag(tag: &str, step_x: f64, step_y: f64) -> Result<ScanPattern> {
    match tag {
        "raster" => {
            if (step_x - step_y).abs() <= 0.05 * step_x.max(step_y) {
                Ok(ScanPattern::Isotropic)
            } else {
                Ok(ScanPattern::Rectangular)
            }
        }
        "spiral" => Ok(ScanPattern::Spiral),
        other => Err(Error::InvalidParameter {
            field: "scan.pattern",
            message: format!("unknown pattern `{other}` (expected raster|spiral)"),
        }),
    }
}

impl PipelineSpec {
    /// Fail-fast validation: every stage's inputs must be resolvable
    /// before any compute or file output happens.
    pub fn validate(&self) -> Result<()> {
        ObjectClass::from_tag(&self.object.class)?;
        if self.object.height < 64 || self.object.width < 64 {
            return Err(Error::InvalidParameter {
                field: "object",
                message: format!(
                    "object must be at least 64x64, got {}x{}",
                    self.object.height, self.object.width
                ),
            });
        }
        match &self.probe {
            ProbeSource::Builtin { size } => {
                if *size < 8 {
                    return Err(Error::InvalidParameter {
                        field: "probe.size",
                        message: format!("builtin probe must be at least 8 px, got {size}"),
                    });
                }
            }
            ProbeSource::File { path } => {
                if !path.is_file() {
                    return Err(Error::Validation(format!(
                        "probe file `{}` does not exist",
                        path.display()
                    )));
                }
            }
        }
        scan_pattern_from_tag(&self.scan.pattern, self.scan.step_x, self.scan.step_y)?;
        if self.scan.step_x <= 0.0 || self.scan.step_y <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "scan.step",
                message: "steps must be > 0".into(),
            });
        }
        if let Some((lo, hi)) = self.simulation.photon_range {
            if !(lo > 0.0 && hi >= lo) {
                return Err(Error::InvalidParameter {
                    field: "simulation.photon_range",
                    message: format!("need 0 < lo <= hi, got ({lo}, {hi})"),
                });
            }
        }
        if let Some(recon) = &self.reconstruction {
            if recon.iterations == 0 {
                return Err(Error::InvalidParameter {
                    field: "reconstruction.iterations",
                    message: "must be >= 1".into(),
                });
            }
            if let Some(alpha) = recon.alpha {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return Err(Error::InvalidParameter {
                        field: "reconstruction.alpha",
                        message: format!("must be in (0, 2], got {alpha}"),
                    });
                }
            }
        }
        Ok(())
    }
}

fn resolve_probe(source: &ProbeSource) -> Result<Probe> {
    match source {
        ProbeSource::Builtin { size } => Ok(Probe::synthetic(*size)),
        ProbeSource::File { path } => {
            let (probe, _) = read_probe_bundle(path)?;
            normalize_probe(&probe)
        }
    }
}

/// Place the scan inside the object so every probe footprint fits,
/// honoring an explicit offset when given.
fn place_scan(
    plan: &ScanPlan,
    spec: &ScanSpec,
    object: (usize, usize),
    probe_size: usize,
) -> Result<ScanPlan> {
    let (min_x, max_x) = plan
        .positions
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (min_y, max_y) = plan
        .positions
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let (dx, dy) = match spec.offset {
        Some(offset) => offset,
        None => {
            let dx = (object.1 as f64 - (max_x - min_x)) / 2.0 - min_x;
            let dy = (object.0 as f64 - (max_y - min_y)) / 2.0 - min_y;
            (dx, dy)
        }
    };
    let placed = plan.translated(dx, dy);
    let half = probe_size as f64 / 2.0;
    for &(x, y) in &placed.positions {
        if x - half < 0.0
            || y - half < 0.0
            || x + half > object.1 as f64 - 1.0
            || y + half > object.0 as f64 - 1.0
        {
            return Err(Error::Validation(format!(
                "scan position ({x:.1}, {y:.1}) puts the {probe_size} px probe outside the \
                 {}x{} object",
                object.0, object.1
            )));
        }
    }
    Ok(placed)
}

/// Execute a spec, writing artifacts and a `report.json` into `out_dir`.
pub fn run_pipeline(spec: &PipelineSpec, out_dir: &Path) -> Result<RunReport> {
    spec.validate()?;
    let root = RandomSeed::new(spec.seed);
    let mut seeds = BTreeMap::new();
    let mut timings = BTreeMap::new();
    let mut metrics = BTreeMap::new();

    // Compute stages first; artifacts are only written when the whole run
    // has succeeded, so a failing spec leaves no partial output.
    let object_seed = root.derive("object", 0);
    seeds.insert("object".to_string(), format!("root({}).derive(\"object\", 0)", spec.seed));
    let started = Instant::now();
    let class = ObjectClass::from_tag(&spec.object.class)?;
    let object = generate_object(&class, spec.object.height, spec.object.width, object_seed)?;
    timings.insert("gen_object".to_string(), started.elapsed().as_secs_f64());

    let probe = resolve_probe(&spec.probe)?;

    let scan_seed = root.derive("scan", 0);
    seeds.insert("scan".to_string(), format!("root({}).derive(\"scan\", 0)", spec.seed));
    let pattern = scan_pattern_from_tag(&spec.scan.pattern, spec.scan.step_x, spec.scan.step_y)?;
    let plan = make_scan(
        pattern,
        spec.scan.extent_x,
        spec.scan.extent_y,
        spec.scan.step_x,
        spec.scan.step_y,
        spec.scan.jitter_sigma,
        scan_seed,
    )?;
    let plan = place_scan(
        &plan,
        &spec.scan,
        (spec.object.height, spec.object.width),
        probe.size(),
    )?;

    let sim_seed = root.derive("simulate", 0);
    seeds.insert("simulate".to_string(), format!("root({}).derive(\"simulate\", 0)", spec.seed));
    let options = SimulationOptions {
        photon_range: spec.simulation.photon_range.unwrap_or((1.0, 1.0)),
        noiseless: spec.simulation.noiseless || spec.simulation.photon_range.is_none(),
    };
    let started = Instant::now();
    let mut stack = simulate_dataset(&object, &probe, &plan, options, sim_seed)?;
    if spec.simulation.photon_range.is_none() {
        stack = DiffractionStack::new(
            stack.raw().to_vec(),
            stack.count(),
            stack.height(),
            stack.width(),
            stack.positions.clone(),
            None,
            stack.probe_label.clone(),
        )?;
    }
    timings.insert("simulate".to_string(), started.elapsed().as_secs_f64());
    metrics.insert("pattern_count".to_string(), stack.count() as f64);

    let groups = match &spec.grouping {
        Some(grouping) => {
            let group_seed = root.derive("group", 0);
            seeds.insert("group".to_string(), format!("root({}).derive(\"group\", 0)", spec.seed));
            let mut params = GroupingParams::for_step(plan.mean_step());
            if let Some(d_min) = grouping.d_min {
                params.d_min = d_min;
            }
            if let Some(d_max) = grouping.d_max {
                params.d_max = d_max;
            }
            if let Some(top_n) = grouping.top_n {
                params.top_n = top_n;
            }
            if let Some(rounds) = grouping.rounds {
                params.groups_per_reference = rounds;
            }
            let started = Instant::now();
            let groups = group_quadrants(&plan, params, group_seed)?;
            timings.insert("group".to_string(), started.elapsed().as_secs_f64());
            metrics.insert("group_count".to_string(), groups.groups.len() as f64);
            metrics.insert("group_skipped".to_string(), groups.skipped.len() as f64);
            Some(groups)
        }
        None => None,
    };

    let recon = match &spec.reconstruction {
        Some(recon_spec) => {
            let recon_seed = root.derive("recon", 0);
            seeds.insert("recon".to_string(), format!("root({}).derive(\"recon\", 0)", spec.seed));
            let mut config = ReconConfig::new(recon_spec.iterations, recon_seed);
            if let Some(alpha) = recon_spec.alpha {
                config.alpha = alpha;
            }
            config.update_probe = recon_spec.update_probe;
            let started = Instant::now();
            let result = reconstruct(
                &stack,
                &probe,
                (spec.object.height, spec.object.width),
                &config,
            )?;
            timings.insert("reconstruct".to_string(), started.elapsed().as_secs_f64());
            metrics.insert(
                "recon_final_error".to_string(),
                *result.error_history.last().expect("iterations >= 1"),
            );
            Some(result)
        }
        None => None,
    };

    if let Some(result) = &recon {
        if spec.evaluate_frc {
            let started = Instant::now();
            let auc = evaluate_against_truth(&object.field, result)?;
            timings.insert("frc".to_string(), started.elapsed().as_secs_f64());
            metrics.insert("frc_auc".to_string(), auc);
        }
    }
    if spec.evaluate_psd {
        let psd = radial_psd(&object.field)?;
        metrics.insert(
            "object_energy_fraction_above_1_13".to_string(),
            psd.energy_fraction_above(1.0 / 13.0),
        );
    }

    // All compute succeeded; emit artifacts.
    std::fs::create_dir_all(out_dir)?;
    let mut artifacts = Vec::new();
    let lineage = format!("root seed {}", spec.seed);

    let object_path = out_dir.join("object.zip");
    write_object_bundle(&object.field, class.tag(), &lineage, &object_path)?;
    artifacts.push("object.zip".to_string());

    let dataset_path = out_dir.join("dataset.zip");
    let counts = if spec.simulation.noiseless || spec.simulation.photon_range.is_none() {
        CountKind::Normalized
    } else {
        CountKind::Raw
    };
    let bundle = DatasetBundle::new(
        stack,
        probe.clone(),
        Some(object.field.clone()),
        groups.clone(),
        lineage.clone(),
        counts,
    )?;
    write_bundle(&bundle, &dataset_path)?;
    artifacts.push("dataset.zip".to_string());

    if let Some(groups) = &groups {
        let groups_path = out_dir.join("groups.zip");
        write_groups_bundle(groups, &plan, &lineage, &groups_path)?;
        artifacts.push("groups.zip".to_string());
    }
    if let Some(result) = &recon {
        let recon_path = out_dir.join("recon.zip");
        let probe_estimate = Probe {
            field: result.probe_estimate.clone(),
            source_label: probe.source_label.clone(),
            normalization: probe.normalization,
        };
        write_recon_bundle(
            &result.object_estimate,
            &probe_estimate,
            &result.error_history,
            Some(&result.illuminated_mask),
            &lineage,
            &recon_path,
        )?;
        artifacts.push("recon.zip".to_string());
    }

    let report = RunReport { seed: spec.seed, seeds, timings_seconds: timings, metrics, artifacts };
    std::fs::write(out_dir.join("report.json"), serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

/// Correlation-curve AUC between truth and estimate, restricted to the
/// illuminated region of the reconstruction.
pub fn evaluate_against_truth(truth: &ComplexImage2D, result: &ReconResult) -> Result<f64> {
    let (row0, col0, height, width) = mask_bounding_box(&result.illuminated_mask, 0.5)?;
    let truth_crop = truth.crop(row0, col0, height, width)?;
    let estimate_crop = result.object_estimate.crop(row0, col0, height, width)?;
    Ok(frc_auc_pipeline(&truth_crop, &estimate_crop)?.auc)
}

// ---------------------------------------------------------------------------
// Benchmarking

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub name: String,
    pub image_count: usize,
    pub iterations: usize,
    pub repetitions: usize,
    pub runs_seconds: Vec<f64>,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub seconds_per_iteration: f64,
}

impl BenchResult {
    pub fn csv_header() -> &'static str {
        "name,images,iterations,repetitions,mean_seconds,std_seconds,seconds_per_iteration"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6}",
            self.name,
            self.image_count,
            self.iterations,
            self.repetitions,
            self.mean_seconds,
            self.std_seconds,
            self.seconds_per_iteration
        )
    }
}

/// Time repeated reconstructions of the same dataset (default shape:
/// 5 repetitions, mean and standard deviation reported).
pub fn bench_recon(
    name: &str,
    stack: &DiffractionStack,
    probe: &Probe,
    iterations: usize,
    repetitions: usize,
    seed: RandomSeed,
) -> Result<BenchResult> {
    if iterations == 0 {
        return Err(Error::InvalidParameter { field: "iterations", message: "must be >= 1".into() });
    }
    if repetitions == 0 {
        return Err(Error::InvalidParameter {
            field: "repetitions",
            message: "must be >= 1".into(),
        });
    }
    let size = crate::recon::object_size_for(stack);
    let config = ReconConfig::new(iterations, seed);
    let mut runs = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let started = Instant::now();
        let result = reconstruct(stack, probe, size, &config)?;
        let elapsed = started.elapsed().as_secs_f64();
        assert!(result.error_history.len() == iterations);
        runs.push(elapsed);
    }
    let mean = runs.iter().sum::<f64>() / repetitions as f64;
    let variance =
        runs.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / repetitions as f64;
    Ok(BenchResult {
        name: name.to_string(),
        image_count: stack.count(),
        iterations,
        repetitions,
        runs_seconds: runs,
        mean_seconds: mean,
        std_seconds: variance.sqrt(),
        seconds_per_iteration: mean / iterations as f64,
    })
}
