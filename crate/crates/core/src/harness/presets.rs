use super::{EngineSettings, ExperimentSpec, FigureId, PhaseStrategy, Sweep, SweepParam, Variant};
use crate::config::ScenarioConfig;
use crate::skg::Scheme;

fn gain_figure(scheme: Scheme) -> (Sweep, Vec<Variant>) {
    let mut variants = vec![Variant::no_attacker(scheme)];
    for m in [100, 400, 1600] {
        for phase in [PhaseStrategy::Random, PhaseStrategy::Optimized] {
            variants.push(Variant::eve_ris(m, phase, scheme));
        }
    }
    (Sweep::range(SweepParam::AmpGainDb, 0.0, 30.0, 5.0), variants)
}

fn beta_figure(scheme: Scheme) -> (Sweep, Vec<Variant>) {
    let mut variants = vec![Variant::no_attacker(scheme)];
    for m in [100, 400, 1600, 6400] {
        variants.push(Variant::eve_ris(m, PhaseStrategy::Optimized, scheme));
    }
    (Sweep::range(SweepParam::Beta, 0.0, 0.45, 0.05), variants)
}

/// The built-in experiment for a figure, on top of `base`.
///
/// | figure | sweep | variants |
/// |---|---|---|
/// | fig1b | σ_E/σ_h from −20 to 30 dB | closed-form curve |
/// | fig2 / fig4 | gain 0 to 30 dB | no attacker; M ∈ {100, 400, 1600} random and optimized (CSI / two-way) |
/// | fig3 / fig5 | β from 0 to 0.45 | no attacker; passive optimized M ∈ {100, 400, 1600, 6400} |
/// | fig6 | gain −60 to 30 dB | no attacker; passive-array M = 100 optimized; spoofer |
/// | fig7 | gain −60 to 30 dB | optimized M ∈ {100, 400, 1600}; spoofer |
/// | fig8 | attacker at (0, y, 0), y = 1…49 | passive optimized M ∈ {100, 400, 1600}; 60 dB relay |
pub fn preset(figure: FigureId, base: ScenarioConfig) -> ExperimentSpec {
    let mut settings = EngineSettings::default();
    let (sweep, variants) = match figure {
        FigureId::Fig1b => (Sweep::range(SweepParam::RatioDb, -20.0, 30.0, 1.0), Vec::new()),
        FigureId::Fig2 => gain_figure(Scheme::Csi),
        FigureId::Fig4 => gain_figure(Scheme::Twoway),
        FigureId::Fig3 => beta_figure(Scheme::Csi),
        FigureId::Fig5 => beta_figure(Scheme::Twoway),
        FigureId::Fig6 => (
            Sweep::range(SweepParam::AmpGainDb, -60.0, 30.0, 5.0),
            vec![
                Variant::no_attacker(Scheme::Csi),
                Variant::eve_ris(100, PhaseStrategy::Optimized, Scheme::Csi),
                Variant::spoof(),
            ],
        ),
        FigureId::Fig7 => (
            Sweep::range(SweepParam::AmpGainDb, -60.0, 30.0, 5.0),
            vec![
                Variant::eve_ris(100, PhaseStrategy::Optimized, Scheme::Csi),
                Variant::eve_ris(400, PhaseStrategy::Optimized, Scheme::Csi),
                Variant::eve_ris(1600, PhaseStrategy::Optimized, Scheme::Csi),
                Variant::spoof(),
            ],
        ),
        FigureId::Fig8 => {
            settings.rounds = 20_000;
            settings.rounds_per_epoch = 200;
            (
                Sweep::range(SweepParam::EveY, 1.0, 49.0, 1.0),
                vec![
                    Variant::eve_ris(100, PhaseStrategy::Optimized, Scheme::Csi),
                    Variant::eve_ris(400, PhaseStrategy::Optimized, Scheme::Csi),
                    Variant::eve_ris(1600, PhaseStrategy::Optimized, Scheme::Csi),
                    Variant::relay(60.0),
                ],
            )
        }
    };
    let mut base = base;
    if matches!(figure, FigureId::Fig3 | FigureId::Fig5 | FigureId::Fig8) {
        base.amp_gain = 1.0;
    }
    ExperimentSpec { figure, sweep, variants, base, settings }
}
