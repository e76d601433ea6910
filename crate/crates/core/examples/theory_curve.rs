// Closed-form key match rate between Alice and Eve as the deceiving
// channel grows relative to the direct one, checked against a direct
// simulation of the same Gaussian model.

use riskeysim::rng::{stream, Domain};
use riskeysim::theory::{kmr_curve, kmr_floor, kmr_limit, monte_carlo_kmr, KmrQuery};

pub fn run_example() -> riskeysim::Result<()> {
    let beta = 0.1;
    println!("beta = {beta}: floor {:.4}, ceiling {:.4}", kmr_floor(beta)?, kmr_limit(beta)?);
    let grid: Vec<f64> = (-4..=6).map(|k| 5.0 * k as f64).collect();
    let mut rng = stream(1, Domain::Aux, 0);
    println!("{:>9} {:>8} {:>14}", "ratio_dB", "kmr", "simulated");
    for p in kmr_curve(beta, &grid)? {
        let (mc, se) = monte_carlo_kmr(KmrQuery::from_variance_ratio_db(p.ratio_db, beta)?, 50_000, &mut rng)?;
        println!("{:>9.1} {:>8.4} {:>8.4}±{:.4}", p.ratio_db, p.kmr, mc, se);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
