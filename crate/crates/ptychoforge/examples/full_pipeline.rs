//! A complete declarative run: object generation, simulation, grouping,
//! reconstruction and evaluation from a single JSON spec, with all
//! artifacts written to a temporary directory.
//!
//! Run with: cargo run --release --example full_pipeline

use ptychoforge::pipeline::{run_pipeline, PipelineSpec};

fn main() -> ptychoforge::Result<()> {
    let spec: PipelineSpec = serde_json::from_str(
        r#"{
            "seed": 42,
            "object": { "class": "dl", "height": 160, "width": 160 },
            "probe": { "source": "builtin", "size": 32 },
            "scan": {
                "pattern": "raster",
                "extent_x": 96.0, "extent_y": 96.0,
                "step_x": 6.0, "step_y": 6.0,
                "jitter_sigma": 0.5
            },
            "simulation": { "photon_range": [100000.0, 100000.0], "noiseless": false },
            "grouping": {},
            "reconstruction": { "iterations": 100 },
            "evaluate_frc": true,
            "evaluate_psd": true
        }"#,
    )?;

    let out = std::env::temp_dir().join("ptychoforge-full-pipeline");
    let report = run_pipeline(&spec, &out)?;
    println!("artifacts in {}:", out.display());
    for artifact in &report.artifacts {
        println!("  {artifact}");
    }
    println!("\nmetrics:");
    for (key, value) in &report.metrics {
        println!("  {key}: {value:.6}");
    }
    Ok(())
}
