use std::io::Write;

use sha2::{Digest, Sha256};

use super::{ExperimentSpec, FigureResult};
use crate::error::Result;

pub const CSV_COLUMNS: [&str; 9] = [
    "sweep_value",
    "variant",
    "kmr_ae",
    "kmr_ab",
    "akr",
    "mse_ab_dbw",
    "stderr_kmr_ae",
    "rounds",
    "seed",
];

/// SHA-256 over the scenario, sweep, variants and engine settings.
pub fn config_hash(spec: &ExperimentSpec) -> String {
    let mut h = Sha256::new();
    h.update(spec.figure.name());
    h.update(spec.base.to_json());
    h.update(serde_json::to_string(&spec.sweep).expect("sweep serializes"));
    h.update(serde_json::to_string(&spec.variants).expect("variants serialize"));
    h.update(format!("{:?}", spec.settings));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Write the result table. Header lines start with '#'; nothing in the
/// output depends on wall time or thread count.
pub fn write_csv<W: Write>(mut out: W, spec: &ExperimentSpec, result: &FigureResult) -> Result<()> {
    let s = &spec.settings;
    writeln!(out, "# figure={}", spec.figure)?;
    writeln!(out, "# config_hash=sha256:{}", config_hash(spec))?;
    writeln!(out, "# seed={} rounds={} rounds_per_epoch={}", s.seed, s.rounds, s.rounds_per_epoch)?;
    writeln!(
        out,
        "# provenance=riskeysim/{} dictionary={}x{} sensors={} on_grid={} phase=re-optimized per scatterer epoch, shared across gains",
        env!("CARGO_PKG_VERSION"),
        s.sensing.grid_el,
        s.sensing.grid_az,
        s.sensing.sensors,
        s.sensing.on_grid
    )?;
    for (m, rows) in &result.sensors {
        let list: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
        writeln!(out, "# sensor_rows_m{m}={}", list.join(" "))?;
    }
    if result.eig_fallbacks > 0 {
        writeln!(out, "# eigenvector_seed_fallbacks={}", result.eig_fallbacks)?;
    }
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.sweep_value, r.variant, r.kmr_ae, r.kmr_ab, r.akr, r.mse_ab_dbw, r.stderr_kmr_ae, r.rounds, r.seed
        )?;
    }
    Ok(())
}
