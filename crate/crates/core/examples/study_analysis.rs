//! RQ1-RQ3 on the bundled synthetic study: condition differences, alignment
//! against perceptions, and per-trait distances.
//!
//!     cargo run --example study_analysis [-- participants.csv]

use tmk::study::{ingest, rq1, rq2, rq3, CaProfiles, Measure, PerceptionKey};
use tmk::model::Trait;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/study_synthetic.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| FIXTURE.into());
    let data = ingest(&path, &PerceptionKey::default())?;
    println!("{} records, {} rejected\n", data.records.len(), data.rejected.len());
    let profiles = CaProfiles::default();

    let r1 = rq1(&data.records);
    for m in &r1.measures {
        let h = m.omnibus.result.as_ref().map(|r| format!("H = {:.3}, p = {:.4}", r.statistic, r.p_value));
        println!("{:<20} {}", m.measure.label(), h.unwrap_or_else(|| "n/a".into()));
        for p in &m.pairwise {
            println!("    {:<16} U = {:>7.1}  p_adj = {:.4}  r = {:.3}  higher: {}", p.pair, p.u, p.p_adj, p.r, p.higher);
        }
    }

    let r2 = rq2(&data.records, &profiles)?;
    println!("\nalignment mean {:.3}", r2.alignment.mean);
    for m in &r2.measures {
        println!("{:<20} rho = {}", m.measure.label(), fmt(m.spearman.rho));
    }

    let r3 = rq3(&data.records, &profiles)?;
    println!("\ndistance vs Likeability");
    for t in Trait::ALL {
        let c = r3.cell(Measure::Likeability, t);
        println!("{:<20} rho = {}", t.name(), fmt(c.correlation.rho));
    }
    Ok(())
}

fn fmt(rho: Option<f64>) -> String {
    rho.map(|r| format!("{r:.3}")).unwrap_or_else(|| "undefined".into())
}
