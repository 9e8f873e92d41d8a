//! Build raster and Fermat-spiral scan plans and compare their spacing
//! statistics.
//!
//! Run with: cargo run --example scan_patterns

use ptychoforge::core::RandomSeed;
use ptychoforge::scan::{make_scan, ScanPattern};

fn main() -> ptychoforge::Result<()> {
    let seed = RandomSeed::new(7);
    let raster = make_scan(ScanPattern::Isotropic, 80.0, 80.0, 8.0, 8.0, 0.6, seed.derive("r", 0))?;
    let spiral = make_scan(ScanPattern::Spiral, 80.0, 80.0, 8.0, 8.0, 0.0, seed.derive("s", 0))?;

    for (name, plan) in [("raster", &raster), ("spiral", &spiral)] {
        println!(
            "{name}: {} positions, mean step {:.2} px, mean nearest neighbor {:.2} px",
            plan.len(),
            plan.mean_step(),
            plan.mean_nearest_neighbor()
        );
    }
    println!("\nfirst raster positions: {:?}", &raster.positions[..4.min(raster.len())]);
    println!("first spiral positions: {:?}", &spiral.positions[..4.min(spiral.len())]);
    Ok(())
}
