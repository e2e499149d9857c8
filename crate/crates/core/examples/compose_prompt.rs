//! Builds the system prompt for one personality profile and shows how a
//! single level change swaps exactly one Personality Key.
//!
//!     cargo run --example compose_prompt -- HMLMH

use tmk::keypack::KeyPack;
use tmk::model::{Trait, TraitProfile};
use tmk::prompt::{assemble_prompt, enumerate_profiles, PromptSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = std::env::args().nth(1).unwrap_or_else(|| "HMLMH".into());
    let profile = TraitProfile::from_code(&code)?;
    let pack = KeyPack::bundled();
    let prompt = assemble_prompt(&PromptSpec::new(profile, &pack));
    println!("{prompt}");

    let flipped = profile.with_level(Trait::Extraversion, profile.level(Trait::Extraversion).opposite());
    let other = assemble_prompt(&PromptSpec::new(flipped, &pack));
    let changed = prompt.lines().zip(other.lines()).filter(|(a, b)| a != b).count();
    println!("--- {profile} vs {flipped}: {changed} lines differ");
    println!("--- {} profiles in the full design", enumerate_profiles().len());
    Ok(())
}
