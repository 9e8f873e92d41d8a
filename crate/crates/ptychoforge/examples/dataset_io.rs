//! Write, inspect and read back a dataset bundle, then preprocess it
//! (saturation flush + center crop).
//!
//! Run with: cargo run --example dataset_io

use ptychoforge::core::RandomSeed;
use ptychoforge::forward::{simulate_dataset, Probe, SimulationOptions};
use ptychoforge::io::{preprocess, read_bundle, write_bundle, CountKind, DatasetBundle};
use ptychoforge::objgen::{generate_object, ObjectClass};
use ptychoforge::scan::{make_scan, ScanPattern};

fn main() -> ptychoforge::Result<()> {
    let seed = RandomSeed::new(17);
    let object = generate_object(&ObjectClass::from_tag("bwn")?, 256, 256, seed.derive("obj", 0))?;
    let probe = Probe::synthetic(128);
    let plan =
        make_scan(ScanPattern::Isotropic, 96.0, 96.0, 12.0, 12.0, 0.5, seed.derive("scan", 0))?
            .translated(80.0, 80.0);
    let options = SimulationOptions { photon_range: (1e6, 1e6), noiseless: false };
    let stack = simulate_dataset(&object, &probe, &plan, options, seed.derive("sim", 0))?;

    let bundle = DatasetBundle::new(
        stack,
        probe,
        Some(object.field.clone()),
        None,
        "root seed 17",
        CountKind::Raw,
    )?;
    let path = std::env::temp_dir().join("ptychoforge-demo-dataset.zip");
    let manifest = write_bundle(&bundle, &path)?;
    println!("wrote {} with members:", path.display());
    for member in &manifest.members {
        println!("  {:<14} {:>5} {:?}", member.name, member.dtype, member.shape);
    }

    let back = read_bundle(&path)?;
    assert_eq!(back.diffraction.raw(), bundle.diffraction.raw());
    println!("\nround trip verified: {} patterns bit-identical", back.diffraction.count());

    let report = preprocess(&back.diffraction, 5e4, 64)?;
    println!(
        "preprocess: 128 -> 64 crop, {} saturated pixels flushed across {} patterns",
        report.total_flushed(),
        report.flushed_per_pattern.len()
    );
    Ok(())
}
