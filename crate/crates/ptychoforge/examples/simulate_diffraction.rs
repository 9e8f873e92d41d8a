//! Simulate a diffraction dataset: dead-leaves object, built-in probe,
//! jittered raster scan, Poisson photon noise. Prints count statistics
//! and the derived normalization factors.
//!
//! Run with: cargo run --example simulate_diffraction

use ptychoforge::core::RandomSeed;
use ptychoforge::forward::{rms_norm, simulate_dataset, Probe, SimulationOptions};
use ptychoforge::objgen::{generate_object, ObjectClass};
use ptychoforge::scan::{make_scan, ScanPattern};

fn main() -> ptychoforge::Result<()> {
    let seed = RandomSeed::new(3);
    let object = generate_object(&ObjectClass::from_tag("dl")?, 192, 192, seed.derive("obj", 0))?;
    let probe = Probe::synthetic(48);
    let plan = make_scan(ScanPattern::Isotropic, 96.0, 96.0, 8.0, 8.0, 0.5, seed.derive("scan", 0))?
        .translated(48.0, 48.0);

    let options = SimulationOptions { photon_range: (1e5, 1e5), noiseless: false };
    let stack = simulate_dataset(&object, &probe, &plan, options, seed.derive("sim", 0))?;

    let totals: Vec<f64> = (0..stack.count()).map(|i| stack.pattern_sum(i)).collect();
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    println!("{} patterns of {}x{}", stack.count(), stack.height(), stack.width());
    println!("photon target {:?}, mean total counts {:.1}", stack.photon_target, mean);

    let norm = rms_norm(&stack)?;
    println!("normalization: n_rms {:.3e}, n_energy {:.3e}", norm.n_rms, norm.n_energy);
    Ok(())
}
