// Maximize the deceiving-channel variance wᴴGw over unit-modulus phases
// and compare with the eigenvector seed and with random phases.

use riskeysim::channel::LinkLayout;
use riskeysim::config::Endpoint;
use riskeysim::geometry::UpaGeometry;
use riskeysim::linalg::HermitianOperator;
use riskeysim::phase_opt::{eig_phase_init, optimize_phase, random_phase_objectives, OptimizerConfig, StepRule};
use riskeysim::ris::VarianceOperator;
use riskeysim::rng::{stream, Domain};
use riskeysim::ScenarioConfig;

pub fn run_example() -> riskeysim::Result<()> {
    let cfg = ScenarioConfig::preset().with_square_ris(20);
    let geom = UpaGeometry::from_config(&cfg)?;
    let mut rng = stream(11, Domain::Epoch, 0);
    let a = LinkLayout::sample(&cfg, &geom, Endpoint::Alice, &mut rng)?;
    let b = LinkLayout::sample(&cfg, &geom, Endpoint::Bob, &mut rng)?;
    let g = VarianceOperator::new(&a, &b)?;

    let (seed_phase, fell_back) = eig_phase_init(&g, cfg.amp_gain, 1);
    let (mean_random, best_random) = random_phase_objectives(&g, cfg.amp_gain, 200, &mut rng);
    let opts = OptimizerConfig { step_rule: StepRule::Backtracking { initial: 1.0, max_halvings: 30 }, ..OptimizerConfig::default() };
    let best = optimize_phase(&g, cfg.amp_gain, &opts, 1)?;

    println!("M = {}", cfg.num_elements());
    println!("random phases: mean {:.3e}, best of 200 {:.3e}", mean_random, best_random);
    println!("eigenvector seed: {:.3e}{}", g.quad_form(&seed_phase.weights()), if fell_back { " (fallback)" } else { "" });
    println!("optimized: {:.3e} after {} iterations, starts {:?}", best.objective, best.history.len() - 1, best.start_objectives);
    println!("gain over the mean random phase: {:.1}x", best.objective / mean_random);
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
