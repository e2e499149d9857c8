//! Personality alignment between a user's trait scores and agent profiles.
//!
//!     cargo run --example alignment -- 4.2 3.1 2.0 4.5 3.3

use tmk::model::{alignment_score, band_of, trait_distances, Level, Trait, TraitProfile, TraitScores};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let raw: [f64; 5] = match args.len() {
        0 => [4.2, 3.1, 2.0, 4.5, 3.3],
        5 => [args[0], args[1], args[2], args[3], args[4]],
        n => return Err(format!("expected 5 scores, got {n}").into()),
    };
    let user = TraitScores::new(raw)?;
    for t in Trait::ALL {
        println!("{:<20} {:.2} ({:?})", t.name(), user.get(t), band_of(user.get(t))?);
    }
    println!();
    for level in Level::ALL {
        let agent = TraitProfile::uniform(level);
        let d = trait_distances(&user, &agent);
        println!("{agent}  alignment {:.4}  distances {:.2?}", alignment_score(&user, &agent), d);
    }
    Ok(())
}
