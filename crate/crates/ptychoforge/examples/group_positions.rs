//! Build quadrant-ordered groups over a jittered raster scan, verify
//! them exhaustively, and show a few assignments.
//!
//! Run with: cargo run --example group_positions

use ptychoforge::core::RandomSeed;
use ptychoforge::scan::grouping::{group_quadrants, verify_groupset, GroupingParams};
use ptychoforge::scan::{make_scan, ScanPattern};

fn main() -> ptychoforge::Result<()> {
    let seed = RandomSeed::new(11);
    let plan =
        make_scan(ScanPattern::Isotropic, 120.0, 120.0, 8.0, 8.0, 0.8, seed.derive("scan", 0))?;
    let params = GroupingParams::for_step(plan.mean_step());
    let groups = group_quadrants(&plan, params, seed.derive("group", 0))?;
    let checked = verify_groupset(&plan, &groups)?;

    println!(
        "{} positions -> {} groups ({} skipped), {} channel assignments verified",
        plan.len(),
        groups.groups.len(),
        groups.skipped.len(),
        checked
    );
    for group in groups.groups.iter().take(3) {
        let (rx, ry) = plan.positions[group.reference];
        println!("reference {} at ({rx:.1}, {ry:.1}):", group.reference);
        for (channel, &member) in group.channels.iter().enumerate() {
            let (mx, my) = plan.positions[member];
            let tag = if group.is_fallback_channel(channel) {
                " (fallback)"
            } else if group.is_self_channel(channel) {
                " (self)"
            } else {
                ""
            };
            println!(
                "  channel {channel}: position {member} offset ({:+.1}, {:+.1}){tag}",
                mx - rx,
                my - ry
            );
        }
    }
    Ok(())
}
