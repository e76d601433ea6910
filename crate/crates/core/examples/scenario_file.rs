// Scenarios load from JSON; any field left out keeps the default scene and
// powers may be given in dB. Invalid files are rejected with a reason.

use riskeysim::ScenarioConfig;

pub fn run_example() -> riskeysim::Result<()> {
    let text = r#"{ "pos_eve": [0.0, 25.0, 5.0], "amp_gain_db": 20.0, "mx": 20, "my": 20, "beta": 0.2 }"#;
    let cfg = ScenarioConfig::from_json_str(text)?;
    println!(
        "Eve at {:?}, {} elements, A_E = {:.0}, d_AE = {:.2} m, d_BE = {:.2} m",
        cfg.pos_eve,
        cfg.num_elements(),
        cfg.amp_gain,
        cfg.d_ae(),
        cfg.d_be()
    );
    for bad in [r#"{ "beta": 0.7 }"#, r#"{ "amp_gain": 2.0, "amp_gain_db": 3.0 }"#, r#"{ "colour": "red" }"#] {
        match ScenarioConfig::from_json_str(bad) {
            Ok(_) => println!("{bad}: unexpectedly accepted"),
            Err(e) => println!("{bad}: {e}"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
