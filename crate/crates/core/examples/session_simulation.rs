//! A scripted day-trip planning session against the mock agent, with flow
//! conformance and per-reply lint.
//!
//!     cargo run --example session_simulation -- LLHHM

use tmk::gateway::Backend;
use tmk::keypack::KeyPack;
use tmk::model::TraitProfile;
use tmk::prompt::{assemble_prompt, PromptSpec};
use tmk::session::{default_script, simulate, Speaker};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = std::env::args().nth(1).unwrap_or_else(|| "MMMMM".into());
    let profile = TraitProfile::from_code(&code)?;
    let prompt = assemble_prompt(&PromptSpec::new(profile, &KeyPack::bundled()));
    let provider = Backend::Mock { seed: 3 }.provider(profile, 0)?;
    let out = simulate(provider.as_ref(), &prompt, &default_script(), 60)?;
    for rec in &out.transcript {
        let who = match rec.speaker {
            Speaker::User => "user ",
            Speaker::Agent => "agent",
        };
        let flag = rec.lint.as_ref().filter(|l| !l.passed).map(|_| "  [lint]").unwrap_or("");
        println!("{who}: {}{flag}", rec.text);
    }
    let s = &out.summary;
    println!(
        "\nterminated {}, {} replies, lint pass rate {:.2}, stay asked {}x, share asked {}x",
        s.terminated, s.agent_replies, s.lint_pass_rate, s.stay_question_count, s.share_question_count
    );
    Ok(())
}
