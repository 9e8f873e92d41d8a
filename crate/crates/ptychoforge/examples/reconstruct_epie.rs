//! Small end-to-end reconstruction: simulate a noiseless dataset and
//! recover the object, printing the error history.
//!
//! Run with: cargo run --release --example reconstruct_epie

use ptychoforge::core::RandomSeed;
use ptychoforge::forward::{simulate_dataset, Probe, SimulationOptions};
use ptychoforge::objgen::{generate_object, ObjectClass};
use ptychoforge::pipeline::evaluate_against_truth;
use ptychoforge::recon::{reconstruct, ReconConfig};
use ptychoforge::scan::{make_scan, ScanPattern};

fn main() -> ptychoforge::Result<()> {
    let seed = RandomSeed::new(21);
    let object = generate_object(&ObjectClass::from_tag("dl")?, 160, 160, seed.derive("obj", 0))?;
    let probe = Probe::synthetic(32);
    let plan = make_scan(ScanPattern::Isotropic, 96.0, 96.0, 6.0, 6.0, 0.5, seed.derive("scan", 0))?
        .translated(32.0, 32.0);
    let options = SimulationOptions { photon_range: (1.0, 1.0), noiseless: true };
    let stack = simulate_dataset(&object, &probe, &plan, options, seed.derive("sim", 0))?;

    let config = ReconConfig::new(100, seed.derive("recon", 0));
    let result = reconstruct(&stack, &probe, (160, 160), &config)?;

    for (sweep, error) in result.error_history.iter().enumerate() {
        if sweep % 20 == 0 || sweep + 1 == result.error_history.len() {
            println!("sweep {sweep:>3}: amplitude residual {error:.3e}");
        }
    }
    let auc = evaluate_against_truth(&object.field, &result)?;
    println!("correlation-curve AUC vs truth (illuminated region): {auc:.4}");
    Ok(())
}
