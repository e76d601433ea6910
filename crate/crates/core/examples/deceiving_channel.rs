// Variance of the deceiving channel h_E for random and optimized surface
// phases, from the closed forms and from sampling.

use riskeysim::channel::LinkLayout;
use riskeysim::config::{linear_to_db, Endpoint};
use riskeysim::geometry::UpaGeometry;
use riskeysim::phase_opt::{optimize_phase, OptimizerConfig};
use riskeysim::ris::{deceiving_channel_weights, stats_fixed_phase, stats_random_phase, PhaseVector, VarianceOperator};
use riskeysim::rng::{stream, Domain};
use riskeysim::{Complex64, ScenarioConfig};

fn sampled_variance(w: &[Complex64], a: &LinkLayout, b: &LinkLayout, seed: u64) -> f64 {
    let mut rng = stream(seed, Domain::Round, 0);
    let n = 20_000;
    let xs: Vec<Complex64> = (0..n)
        .map(|_| {
            let ga = a.compose(&a.draw_gains(&mut rng));
            let gb = b.compose(&b.draw_gains(&mut rng));
            deceiving_channel_weights(w, &ga, &gb)
        })
        .collect();
    let mean = xs.iter().sum::<Complex64>() / n as f64;
    xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / n as f64
}

pub fn run_example() -> riskeysim::Result<()> {
    let cfg = ScenarioConfig::preset();
    let geom = UpaGeometry::from_config(&cfg)?;
    let mut rng = stream(3, Domain::Epoch, 0);
    let a = LinkLayout::sample(&cfg, &geom, Endpoint::Alice, &mut rng)?;
    let b = LinkLayout::sample(&cfg, &geom, Endpoint::Bob, &mut rng)?;

    let random = stats_random_phase(&cfg);
    println!(
        "random phases: 2σ_E² = {:.2} dB (LoS-only approximation {:.2} dB)",
        linear_to_db(2.0 * random.sigma_e2_exact),
        linear_to_db(2.0 * random.sigma_e2)
    );

    let w = PhaseVector::random(cfg.num_elements(), cfg.amp_gain, &mut rng);
    let fixed = stats_fixed_phase(&w, &a, &b)?;
    println!(
        "one random phase held fixed: 2wᴴGw = {:.2} dB, sampled {:.2} dB",
        linear_to_db(2.0 * fixed.sigma_e2),
        linear_to_db(sampled_variance(&w.weights(), &a, &b, 1))
    );

    let g = VarianceOperator::new(&a, &b)?;
    let best = optimize_phase(&g, cfg.amp_gain, &OptimizerConfig::default(), 5)?;
    println!(
        "optimized phase: 2wᴴGw = {:.2} dB, sampled {:.2} dB, direct channel {:.2} dB",
        linear_to_db(2.0 * best.objective),
        linear_to_db(sampled_variance(&best.phase.weights(), &a, &b, 2)),
        linear_to_db(cfg.direct_var2())
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
