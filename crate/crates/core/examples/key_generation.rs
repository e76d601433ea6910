// Legitimate key generation without an attacker: probe the reciprocal
// channel with both schemes, quantize with the two-threshold rule and
// measure the agreement between Alice and Bob.

use riskeysim::channel::sample_direct;
use riskeysim::rng::{stream, Domain};
use riskeysim::skg::{csi_probe, key_match_rate, quantize_block, twoway_probe, Scheme};
use riskeysim::theory::kmr_limit;
use riskeysim::{Complex64, ScenarioConfig};

pub fn run_example() -> riskeysim::Result<()> {
    let cfg = ScenarioConfig::preset();
    let rounds = 20_000;
    let none = Complex64::new(0.0, 0.0);
    for scheme in [Scheme::Csi, Scheme::Twoway] {
        let mut rng = stream(5, Domain::Round, 0);
        let (mut fa, mut fb) = (Vec::with_capacity(rounds), Vec::with_capacity(rounds));
        for _ in 0..rounds {
            let h = sample_direct(&cfg, &mut rng);
            let p = match scheme {
                Scheme::Csi => csi_probe(&h, none, &cfg, &mut rng)?,
                Scheme::Twoway => twoway_probe(&h, none, &cfg, &mut rng)?,
            };
            fa.push(p.feature_a.re);
            fb.push(p.feature_b.re);
        }
        let ka = quantize_block(&fa, cfg.beta)?;
        let kb = quantize_block(&fb, cfg.beta)?;
        let preview: String = ka.to_text().chars().take(32).collect();
        println!(
            "{scheme:?}: Pr{{k_A = k_B}} = {:.4} (noiseless ceiling {:.4}), Alice drops {:.1}%, first bits {preview}",
            key_match_rate(&ka, &kb)?,
            kmr_limit(cfg.beta)?,
            100.0 * ka.drop_rate()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
