//! Generate one object of every synthetic class and print basic
//! amplitude/phase statistics.
//!
//! Run with: cargo run --example generate_objects

use ptychoforge::core::RandomSeed;
use ptychoforge::objgen::{generate_object, ObjectClass};

fn main() -> ptychoforge::Result<()> {
    let seed = RandomSeed::new(42);
    println!("{:<6} {:>10} {:>10} {:>10} {:>10}", "class", "amp min", "amp max", "ph min", "ph max");
    for tag in ["dl", "pr", "wn", "bwn", "sn"] {
        let class = ObjectClass::from_tag(tag)?;
        let object = generate_object(&class, 256, 256, seed.derive(tag, 0))?;
        let amp = object.field.amplitude();
        let phase = object.field.phase();
        println!(
            "{:<6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            tag,
            amp.min(),
            amp.max(),
            phase.min(),
            phase.max()
        );
    }
    Ok(())
}
