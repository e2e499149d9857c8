//! Full 243-profile validation battery against the deterministic mock model,
//! with band fidelity and reliability summaries.
//!
//!     cargo run --release --example mock_battery

use tmk::gateway::Backend;
use tmk::harness::{run_battery, validation_report, BatterySpec, ResultsStore, ValidationOptions};
use tmk::keypack::KeyPack;
use tmk::prompt::enumerate_profiles;
use tmk::psychometrics::Inventory;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let pack = KeyPack::bundled();
    let invs = vec![Inventory::mini_ipip(), Inventory::ipip_markers(), Inventory::criteria_demo()];
    let store = ResultsStore::open(dir.path())?;
    let spec = BatterySpec::new(&pack, enumerate_profiles(), invs.clone());
    let run = run_battery(&Backend::Mock { seed: 42 }, &spec, &store)?;
    println!("cells: {} completed, {} failed", run.completed, run.failures.len());

    let report = validation_report(&store.load_cells()?, &invs, &ValidationOptions::default())?;
    let f = &report.fidelity;
    println!("fidelity {} / {} ({:.1}%)", f.n_matches, f.n_observations, 100.0 * f.match_rate);
    for t in &f.per_trait {
        println!("  {:<20} rho {:?}", t.trait_.name(), t.rho);
    }
    println!(
        "live-model reference: {:.1}% matched, mean rho {:.2}",
        100.0 * f.reference.match_rate,
        f.reference.mean_rho
    );
    Ok(())
}
