//! Internal consistency of a simulated four-item scale.
//!
//!     cargo run --example reliability -- 0.5

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tmk::psychometrics::{cronbach_alpha, guttman_lambda6, mcdonald_omega, ItemMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: Vec<Vec<f64>> = (0..2000)
        .map(|_| {
            let common: f64 = rng.sample(StandardNormal);
            (0..4)
                .map(|_| rho.sqrt() * common + (1.0 - rho).sqrt() * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let m = ItemMatrix::from_rows(rows)?;
    let l6 = guttman_lambda6(&m)?;
    println!("inter-item correlation {rho}");
    println!("alpha   {:.4}", cronbach_alpha(&m)?);
    println!("omega   {:.4}", mcdonald_omega(&m)?);
    println!("lambda6 {:.4}{}", l6.value, if l6.pseudo_inverse_used { " (pseudo-inverse)" } else { "" });
    Ok(())
}
