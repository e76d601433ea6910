// Draw the channels of the default scene: the direct Alice-Bob gain and
// the two surface links, and compare their empirical power with the model.

use riskeysim::channel::{sample_direct, sample_ris_link};
use riskeysim::config::{linear_to_db, Endpoint};
use riskeysim::geometry::{los_angles, UpaGeometry};
use riskeysim::linalg::norm_sqr;
use riskeysim::rng::{stream, Domain};
use riskeysim::ScenarioConfig;

pub fn run_example() -> riskeysim::Result<()> {
    let cfg = ScenarioConfig::preset();
    let geom = UpaGeometry::from_config(&cfg)?;
    let mut rng = stream(7, Domain::Round, 0);

    let draws = 5000;
    let direct: f64 = (0..draws).map(|_| sample_direct(&cfg, &mut rng).h.norm_sqr()).sum::<f64>() / draws as f64;
    println!("direct channel power {:.2} dB (model {:.2} dB)", linear_to_db(direct), linear_to_db(cfg.direct_var2()));

    for endpoint in [Endpoint::Alice, Endpoint::Bob] {
        let d = cfg.endpoint_distance(endpoint);
        let (el, az) = los_angles(&cfg.pos_eve, &cfg.endpoint_pos(endpoint))?;
        let per_element = (0..200)
            .map(|_| sample_ris_link(&cfg, &geom, endpoint, None, &mut rng).map(|l| norm_sqr(&l.g)))
            .sum::<riskeysim::Result<f64>>()?
            / (200 * cfg.num_elements()) as f64;
        let model = cfg.los_gain(d) + cfg.nlos_gain(d);
        println!(
            "{endpoint:?}: {d:.2} m, LoS angles ({el:.3}, {az:.3}) rad, per-element power {:.2} dB (model {:.2} dB)",
            linear_to_db(per_element),
            linear_to_db(model)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
