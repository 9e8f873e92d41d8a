//! Radial power spectra of the five synthetic classes: the band-limited
//! classes concentrate energy below 1/13 cycles/pixel, the textured
//! classes do not.
//!
//! Run with: cargo run --example radial_psd

use ptychoforge::core::RandomSeed;
use ptychoforge::metrics::radial_psd;
use ptychoforge::objgen::{generate_object, ObjectClass};

fn main() -> ptychoforge::Result<()> {
    let seed = RandomSeed::new(13);
    println!("{:<6} {:>28}", "class", "energy fraction above 1/13");
    for tag in ["dl", "pr", "wn", "bwn", "sn"] {
        let class = ObjectClass::from_tag(tag)?;
        let object = generate_object(&class, 256, 256, seed.derive(tag, 0))?;
        // Drop the DC term so the fraction reflects structure, not mean.
        let mean: num_complex::Complex64 =
            object.field.values().iter().sum::<num_complex::Complex64>()
                / object.field.len() as f64;
        let centered = object.field.map(|v| v - mean);
        let psd = radial_psd(&centered)?;
        println!("{:<6} {:>28.4}", tag, psd.energy_fraction_above(1.0 / 13.0));
    }
    Ok(())
}
