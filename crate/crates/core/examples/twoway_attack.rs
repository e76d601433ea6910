// The attack on two-way cross-multiplication key generation, where both
// parties send random pilots. Eve never learns the pilots; they ride along
// in the sparse coefficients her sensors recover.

use riskeysim::config::db_to_linear;
use riskeysim::harness::{run_point, EngineSettings, PhaseStrategy, Variant};
use riskeysim::skg::Scheme;
use riskeysim::ScenarioConfig;

pub fn run_example() -> riskeysim::Result<()> {
    let settings = EngineSettings { rounds: 2000, rounds_per_epoch: 500, seed: 2, ..EngineSettings::default() };
    for db in [0.0, 20.0] {
        let cfg = ScenarioConfig { amp_gain: db_to_linear(db), ..ScenarioConfig::preset() };
        for variant in [Variant::no_attacker(Scheme::Twoway), Variant::eve_ris(100, PhaseStrategy::Optimized, Scheme::Twoway)] {
            let r = run_point(&cfg, &variant, &settings)?;
            println!("A_E = {db:>4} dB {:<30} kmr_ae {:.4}  kmr_ab {:.4}  akr {:.4}", r.variant, r.kmr_ae, r.kmr_ab, r.akr);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
