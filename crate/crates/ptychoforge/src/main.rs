//! Thin batch CLI over the library: generate, simulate, group,
//! preprocess, reconstruct, evaluate, inspect, run, bench.
//!
//! Exit codes: 0 success, 2 validation failure, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ptychoforge::core::RandomSeed;
use ptychoforge::forward::{
    normalize_probe, simulate_dataset, Probe, SimulationOptions,
};
use ptychoforge::io::{
    open_bundle, preprocess, read_bundle, read_object_bundle, read_recon_bundle,
    write_bundle, write_groups_bundle, write_object_bundle, write_recon_bundle, CountKind,
    DatasetBundle,
};
use ptychoforge::metrics::{frc_auc_pipeline, radial_psd};
use ptychoforge::objgen::{generate_object, ObjectClass};
use ptychoforge::pipeline::{bench_recon, run_pipeline, PipelineSpec};
use ptychoforge::recon::{reconstruct, ReconConfig};
use ptychoforge::scan::grouping::{group_quadrants, verify_groupset, GroupingParams};
use ptychoforge::scan::{make_scan, ScanPattern};
use ptychoforge::{Error, Result};

#[derive(Parser)]
#[command(name = "ptychoforge", version, about = "Synthetic ptychography data toolkit")]
struct Cli {
    /// Worker thread cap; falls back to PTYCHOFORGE_THREADS, then the
    /// machine default. Outputs are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Root seed for all derived randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic complex object and write it as a bundle.
    GenObject {
        /// Object class: dl | pr | wn | bwn | sn.
        #[arg(long)]
        class: String,
        /// Dimensions as HxW, e.g. 512x512.
        #[arg(long)]
        size: String,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a diffraction dataset from an object bundle.
    Simulate {
        /// Object bundle path.
        #[arg(long)]
        object: PathBuf,
        /// Probe bundle path; omit to use the built-in probe.
        #[arg(long)]
        probe: Option<PathBuf>,
        /// Built-in probe size when no probe file is given.
        #[arg(long, default_value_t = 64)]
        probe_size: usize,
        /// Scan pattern: raster | spiral.
        #[arg(long, default_value = "raster")]
        pattern: String,
        #[arg(long)]
        extent: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Photon target range; equal bounds pin the target.
        #[arg(long)]
        photon_min: Option<f64>,
        #[arg(long)]
        photon_max: Option<f64>,
        /// Skip Poisson noise.
        #[arg(long)]
        noiseless: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build quadrant groups over a dataset's scan positions.
    Group {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dmin: Option<f64>,
        #[arg(long)]
        dmax: Option<f64>,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flush saturated pixels and center-crop a dataset.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        /// Saturation threshold in counts (inclusive).
        #[arg(long)]
        sat: f64,
        /// Crop size: 64 or 128.
        #[arg(long)]
        crop: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Iterative reconstruction of a dataset.
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 300)]
        iterations: usize,
        #[arg(long, default_value_t = 0.9)]
        alpha: f64,
        #[arg(long)]
        update_probe: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlation curve between a truth object and a reconstruction.
    Frc {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        estimate: PathBuf,
        /// Optional CSV output of the per-ring curve.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radial power spectrum of an object bundle.
    Psd {
        #[arg(long = "in")]
        input: PathBuf,
        /// Optional CSV output of the ring spectrum.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a bundle's manifest and validation status.
    Inspect { file: PathBuf },
    /// Execute a JSON pipeline description.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time repeated reconstructions of a dataset (CSV output).
    Bench {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
}

fn parse_size(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split('x').collect();
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::InvalidParameter {
            field: "size",
            message: format!("expected HxW, got `{text}`"),
        })
    };
    match parts.as_slice() {
        [h, w] => Ok((parse(h)?, parse(w)?)),
        _ => Err(Error::InvalidParameter {
            field: "size",
            message: format!("expected HxW, got `{text}`"),
        }),
    }
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("PTYCHOFORGE_THREADS").ok().and_then(|v| v.parse::<usize>().ok())
    })
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(threads) = thread_count(cli.threads) {
        if threads == 0 {
            return Err(Error::InvalidParameter {
                field: "threads",
                message: "must be >= 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Validation(format!("thread pool setup failed: {e}")))?;
    }

    match cli.command {
        Command::GenObject { class, size, seed, out } => {
            let class = ObjectClass::from_tag(&class)?;
            let (height, width) = parse_size(&size)?;
            let object =
                generate_object(&class, height, width, RandomSeed::new(seed.seed))?;
            write_object_bundle(
                &object.field,
                class.tag(),
                &format!("root seed {}", seed.seed),
                &out,
            )?;
            println!("wrote {} ({}x{} {})", out.display(), height, width, class.tag());
        }
        Command::Simulate {
            object,
            probe,
            probe_size,
            pattern,
            extent,
            step,
            jitter,
            photon_min,
            photon_max,
            noiseless,
            seed,
            out,
        } => {
            let (field, object_manifest) = read_object_bundle(&object)?;
            let probe = match probe {
                Some(path) => {
                    let (p, _) = ptychoforge::io::read_probe_bundle(&path)?;
                    normalize_probe(&p)?
                }
                None => Probe::synthetic(probe_size),
            };
            let root = RandomSeed::new(seed.seed);
            let scan_pattern = match pattern.as_str() {
                "raster" => ScanPattern::Isotropic,
                "spiral" => ScanPattern::Spiral,
                other => {
                    return Err(Error::InvalidParameter {
                        field: "pattern",
                        message: format!("unknown pattern `{other}` (expected raster|spiral)"),
                    })
                }
            };
            let plan = make_scan(
                scan_pattern,
                extent,
                extent,
                step,
                step,
                jitter,
                root.derive("scan", 0),
            )?;
            // Center the scan in the object.
            let margin_x = (field.width() as f64 - extent) / 2.0;
            let margin_y = (field.height() as f64 - extent) / 2.0;
            let plan = plan.translated(margin_x, margin_y);
            let photon_range = match (photon_min, photon_max) {
                (Some(lo), Some(hi)) => (lo, hi),
                (Some(v), None) | (None, Some(v)) => (v, v),
                (None, None) => (1.0, 1.0),
            };
            let options = SimulationOptions {
                photon_range,
                noiseless: noiseless || (photon_min.is_none() && photon_max.is_none()),
            };
            let object = ptychoforge::objgen::SyntheticObject {
                field,
                class: ObjectClass::from_tag(
                    object_manifest.object_class.as_deref().unwrap_or("wn"),
                )?,
                seed: root,
            };
            let stack = simulate_dataset(&object, &probe, &plan, options, root.derive("simulate", 0))?;
            let count = stack.count();
            let bundle = DatasetBundle::new(
                stack,
                probe,
                Some(object.field),
                None,
                format!("root seed {}", seed.seed),
                if options.noiseless { CountKind::Normalized } else { CountKind::Raw },
            )?;
            write_bundle(&bundle, &out)?;
            println!("wrote {} ({count} patterns)", out.display());
        }
        Command::Group { input, dmin, dmax, rounds, seed, out } => {
            let bundle = read_bundle(&input)?;
            let plan = &bundle.diffraction.positions;
            let mut params = GroupingParams::for_step(plan.mean_step());
            if let Some(d) = dmin {
                params.d_min = d;
            }
            if let Some(d) = dmax {
                params.d_max = d;
            }
            params.groups_per_reference = rounds;
            let groups = group_quadrants(plan, params, RandomSeed::new(seed.seed))?;
            verify_groupset(plan, &groups)?;
            write_groups_bundle(
                &groups,
                plan,
                &format!("root seed {}", seed.seed),
                &out,
            )?;
            println!(
                "wrote {} ({} groups, {} skipped)",
                out.display(),
                groups.groups.len(),
                groups.skipped.len()
            );
        }
        Command::Preprocess { input, sat, crop, out } => {
            let bundle = read_bundle(&input)?;
            let report = preprocess(&bundle.diffraction, sat, crop)?;
            let flushed = report.total_flushed();
            let processed = DatasetBundle::new(
                report.stack,
                bundle.probe,
                bundle.ground_truth_object,
                bundle.groups,
                bundle.manifest.seed_lineage.clone(),
                bundle.manifest.counts,
            )?;
            write_bundle(&processed, &out)?;
            println!("wrote {} (crop {crop}, {flushed} pixels flushed)", out.display());
        }
        Command::Reconstruct { input, iterations, alpha, update_probe, seed, out } => {
            let bundle = read_bundle(&input)?;
            let mut config = ReconConfig::new(iterations, RandomSeed::new(seed.seed));
            config.alpha = alpha;
            config.update_probe = update_probe;
            let size = ptychoforge::recon::object_size_for(&bundle.diffraction);
            let result = reconstruct(&bundle.diffraction, &bundle.probe, size, &config)?;
            let probe_estimate = Probe {
                field: result.probe_estimate.clone(),
                source_label: bundle.probe.source_label.clone(),
                normalization: bundle.probe.normalization,
            };
            write_recon_bundle(
                &result.object_estimate,
                &probe_estimate,
                &result.error_history,
                Some(&result.illuminated_mask),
                &format!("root seed {}", seed.seed),
                &out,
            )?;
            println!(
                "wrote {} (final error {:.3e})",
                out.display(),
                result.error_history.last().unwrap()
            );
        }
        Command::Frc { truth, estimate, out } => {
            let (truth_field, _) = read_object_bundle(&truth)?;
            let recon = read_recon_bundle(&estimate)?;
            let estimate_field = &recon.object_estimate;
            // Both images share the scan's pixel coordinates, so restrict
            // the comparison to the illuminated region when it is known.
            let (truth_crop, estimate_crop) = match &recon.illuminated_mask {
                Some(mask) => {
                    let (r0, c0, mut h, mut w) =
                        ptychoforge::recon::mask_bounding_box(mask, 0.5)?;
                    h = h.min(truth_field.height().saturating_sub(r0));
                    w = w.min(truth_field.width().saturating_sub(c0));
                    (truth_field.crop(r0, c0, h, w)?, estimate_field.crop(r0, c0, h, w)?)
                }
                None => {
                    let h = truth_field.height().min(estimate_field.height());
                    let w = truth_field.width().min(estimate_field.width());
                    (truth_field.crop(0, 0, h, w)?, estimate_field.crop(0, 0, h, w)?)
                }
            };
            let result = frc_auc_pipeline(&truth_crop, &estimate_crop)?;
            if let Some(path) = out {
                let mut csv = String::from("frequency,correlation\n");
                for (f, c) in result.frequencies.iter().zip(&result.correlation) {
                    csv.push_str(&format!("{f},{c}\n"));
                }
                std::fs::write(&path, csv)?;
            }
            println!("auc {:.6}", result.auc);
            if let Some(f) = result.crossing_half_bit {
                println!("half-bit crossing at {f:.4} cycles/pixel");
            } else {
                println!("curve stays above the half-bit threshold");
            }
        }
        Command::Psd { input, out } => {
            let (field, _) = read_object_bundle(&input)?;
            let psd = radial_psd(&field)?;
            if let Some(path) = out {
                let mut csv = String::from("frequency,power\n");
                for (f, p) in psd.frequencies.iter().zip(&psd.power) {
                    csv.push_str(&format!("{f},{p}\n"));
                }
                std::fs::write(&path, csv)?;
            }
            println!(
                "energy fraction above 1/13 cycles/pixel: {:.6}",
                psd.energy_fraction_above(1.0 / 13.0)
            );
        }
        Command::Inspect { file } => {
            let raw = open_bundle(&file)?;
            println!("{}", serde_json::to_string_pretty(&raw.manifest)?);
            println!("validation: ok ({} members)", raw.manifest.members.len());
        }
        Command::Run { spec, out } => {
            let text = std::fs::read_to_string(&spec)?;
            let spec: PipelineSpec = serde_json::from_str(&text)?;
            let report = run_pipeline(&spec, &out)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Bench { input, iterations, repetitions, seed } => {
            let bundle = read_bundle(&input)?;
            let name = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_string());
            let result = bench_recon(
                &name,
                &bundle.diffraction,
                &bundle.probe,
                iterations,
                repetitions,
                RandomSeed::new(seed.seed),
            )?;
            println!("{}", ptychoforge::pipeline::BenchResult::csv_header());
            println!("{}", result.csv_row());
        }
    }
    Ok(())
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::InvalidParameter { .. }
        | Error::Validation(_)
        | Error::DimensionMismatch(_)
        | Error::DimensionInconsistency(_)
        | Error::VersionMismatch { .. }
        | Error::MissingMember(_)
        | Error::DegenerateMask(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
