// Eve's side of one round: place a few RF-chain sensors on the surface,
// measure both links through them and rebuild the links and the deceiving
// channel by orthogonal matching pursuit over a beamspace dictionary.

use riskeysim::channel::LinkLayout;
use riskeysim::config::Endpoint;
use riskeysim::geometry::UpaGeometry;
use riskeysim::linalg::norm;
use riskeysim::ris::{deceiving_channel_weights, PhaseVector};
use riskeysim::rng::{complex_normal, stream, Domain};
use riskeysim::sensing::{build_dictionary, condition_number, csi_attack_round, place_sensors, CompressedOperator};
use riskeysim::{Complex64, ScenarioConfig};

pub fn run_example() -> riskeysim::Result<()> {
    let cfg = ScenarioConfig::preset();
    let geom = UpaGeometry::from_config(&cfg)?;
    let dict = build_dictionary(&geom, cfg.lambda, 64, 64)?;
    let sensing = place_sensors(&dict, 20)?;
    println!("sensors {:?}, condition number {:.2}", sensing.rows, condition_number(&dict, &sensing.rows)?);
    let op = CompressedOperator::new(&dict, sensing)?;

    let mut rng = stream(21, Domain::Epoch, 0);
    let a = LinkLayout::sample(&cfg, &geom, Endpoint::Alice, &mut rng)?;
    let b = LinkLayout::sample(&cfg, &geom, Endpoint::Bob, &mut rng)?;
    let w = PhaseVector::random(cfg.num_elements(), cfg.amp_gain, &mut rng).weights();

    for round in 0..5 {
        let ga = a.compose(&a.draw_gains(&mut rng));
        let gb = b.compose(&b.draw_gains(&mut rng));
        let noise = 2.0 * cfg.noise_var / cfg.pilot_power_a;
        let noisy = |g: &[Complex64], rng: &mut _| -> Vec<Complex64> {
            op.sensing.select(g).iter().map(|x| x + complex_normal(rng, noise)).collect()
        };
        let ya = noisy(&ga, &mut rng);
        let yb = noisy(&gb, &mut rng);
        let est = csi_attack_round(&ya, &yb, &w, &dict, &op, cfg.iota + 1)?;
        let truth = deceiving_channel_weights(&w, &ga, &gb);
        let link_err = {
            let rec = est.link_a.synthesize(&dict);
            let diff: Vec<Complex64> = ga.iter().zip(&rec).map(|(x, y)| x - y).collect();
            norm(&diff) / norm(&ga)
        };
        println!(
            "round {round}: link A error {:.3}, h_E relative error {:.3}, atoms {:?}",
            link_err,
            (est.value - truth).norm() / truth.norm(),
            est.link_a.support
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
