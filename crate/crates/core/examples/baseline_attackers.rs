// The two classic attackers: an amplify-and-forward relay and a pilot
// spoofer. The relay preserves reciprocity; the spoofer breaks it and shows
// up in the mismatch between Alice's and Bob's estimates.

use riskeysim::baseline::{
    benchmark_mse, detection_mse, relay_round, relay_variance, spoof_mse, spoof_round, undetectable_region,
    RelayConfig, SpoofingConfig,
};
use riskeysim::channel::sample_direct;
use riskeysim::config::{db_to_linear, linear_to_db};
use riskeysim::rng::{stream, Domain};
use riskeysim::ScenarioConfig;

pub fn run_example() -> riskeysim::Result<()> {
    let cfg = ScenarioConfig::preset();
    let rounds = 5000;

    let relay = RelayConfig { gain: db_to_linear(60.0), position: cfg.pos_eve };
    let mut rng = stream(9, Domain::Round, 0);
    let probes = (0..rounds)
        .map(|_| relay_round(&relay, &sample_direct(&cfg, &mut rng), &cfg, &mut rng).map(|r| (r.psi_a, r.psi_b)))
        .collect::<riskeysim::Result<Vec<_>>>()?;
    println!(
        "relay at 60 dB: inserted variance {:.2} dB, A/B mismatch {:.2} dBW",
        linear_to_db(relay_variance(&relay, &cfg)?),
        linear_to_db(detection_mse(&probes)?)
    );

    let benchmark = benchmark_mse(&cfg);
    let gains: Vec<f64> = (0..=12).map(|k| -60.0 + 5.0 * k as f64).collect();
    let mut measured = Vec::new();
    for &db in &gains {
        let sc = SpoofingConfig { spoof_gain: db_to_linear(db), position: cfg.pos_eve, detection_snr_db: 1.0 };
        let probes = (0..rounds)
            .map(|_| spoof_round(&sc, &sample_direct(&cfg, &mut rng), &cfg, &mut rng).map(|r| (r.psi_a, r.psi_b)))
            .collect::<riskeysim::Result<Vec<_>>>()?;
        let mse = detection_mse(&probes)?;
        println!(
            "spoof gain {db:>5.1} dB: mismatch {:.2} dBW (closed form {:.2})",
            linear_to_db(mse),
            linear_to_db(spoof_mse(&sc, &cfg)?)
        );
        measured.push(mse);
    }
    let threshold = undetectable_region(&gains, &measured, benchmark, 1.0)?;
    println!("benchmark {:.2} dBW; spoofing stays hidden up to {threshold:?} dB gain", linear_to_db(benchmark));
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
