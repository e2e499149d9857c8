//! Administers the Mini-IPIP to a real OpenAI-compatible endpoint under one
//! profile. Needs an API key in the environment.
//!
//!     OPENAI_API_KEY=... cargo run --example live_provider -- HLMHL

use tmk::gateway::{administer_inventory, HttpProvider, ProviderConfig};
use tmk::keypack::KeyPack;
use tmk::model::TraitProfile;
use tmk::prompt::{assemble_prompt, PromptSpec};
use tmk::psychometrics::{score_sheet, Inventory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = std::env::args().nth(1).unwrap_or_else(|| "HHHHH".into());
    let profile = TraitProfile::from_code(&code)?;
    let cfg = ProviderConfig {
        base_url: std::env::var("TMK_BASE_URL").unwrap_or_else(|_| ProviderConfig::default().base_url),
        ..ProviderConfig::default()
    };
    let provider = HttpProvider::new(cfg)?;
    let prompt = assemble_prompt(&PromptSpec::new(profile, &KeyPack::bundled()));
    let inv = Inventory::mini_ipip();
    let sheet = administer_inventory(&provider, &prompt, &inv)?;
    for (subscale, score) in score_sheet(&inv, &sheet)? {
        println!("{subscale:<22} {score:.2}");
    }
    Ok(())
}
