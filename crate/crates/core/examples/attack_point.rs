// One operating point of the full attack: an optimized 10x10 Eve-RIS at
// 10 dB amplification against CSI-based key generation.

use riskeysim::config::db_to_linear;
use riskeysim::harness::{run_point, EngineSettings, PhaseStrategy, Variant};
use riskeysim::skg::Scheme;
use riskeysim::ScenarioConfig;

pub fn run_example() -> riskeysim::Result<()> {
    let rounds = 2000;
    let cfg = ScenarioConfig { amp_gain: db_to_linear(10.0), ..ScenarioConfig::preset() };
    let settings = EngineSettings { rounds, rounds_per_epoch: 500, seed: 1, ..EngineSettings::default() };
    for variant in [
        Variant::no_attacker(Scheme::Csi),
        Variant::eve_ris(100, PhaseStrategy::Random, Scheme::Csi),
        Variant::eve_ris(100, PhaseStrategy::Optimized, Scheme::Csi),
    ] {
        let r = run_point(&cfg, &variant, &settings)?;
        println!(
            "{:<28} kmr_ae {:.4}±{:.4}  kmr_ab {:.4}  akr {:.4}  mismatch {:.2} dBW",
            r.variant, r.kmr_ae, r.stderr_kmr_ae, r.kmr_ab, r.akr, r.mse_ab_dbw
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
