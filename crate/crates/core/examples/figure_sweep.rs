// A cut-down amplification sweep written as CSV to stdout, the same format
// the command-line tool produces.

use riskeysim::harness::{preset, run_figure, write_csv, FigureId, PhaseStrategy, Sweep, SweepParam, Variant};
use riskeysim::skg::Scheme;
use riskeysim::ScenarioConfig;

pub fn run_example() -> riskeysim::Result<()> {
    let mut spec = preset(FigureId::Fig2, ScenarioConfig::preset());
    spec.sweep = Sweep::range(SweepParam::AmpGainDb, 0.0, 30.0, 15.0);
    spec.variants = vec![
        Variant::no_attacker(Scheme::Csi),
        Variant::eve_ris(100, PhaseStrategy::Optimized, Scheme::Csi),
    ];
    spec.settings.rounds = 1000;
    spec.settings.rounds_per_epoch = 250;
    spec.settings.seed = 3;
    let result = run_figure(&spec)?;
    write_csv(std::io::stdout().lock(), &spec, &result)
}

#[allow(dead_code)]
fn main() -> riskeysim::Result<()> {
    run_example()
}
