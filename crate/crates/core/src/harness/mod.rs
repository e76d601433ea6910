//! Experiment presets, the Monte Carlo engine and CSV output.
//!
//! An [`ExperimentSpec`] is a sweep over one parameter crossed with a list of
//! [`Variant`]s. Each (sweep value, variant) pair is a point; a point runs a
//! block of coherence rounds and reduces them to one [`ResultRow`].

mod checks;
mod engine;
mod output;
mod presets;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::phase_opt::{OptimizerConfig, StepRule};
use crate::skg::{DroppedAttacker, Scheme};

pub use checks::{invariant_suite, Check};
pub use engine::{run_figure, run_point, simulate_point, FigureResult, PointSamples, Resources};
pub use output::{config_hash, write_csv, CSV_COLUMNS};
pub use presets::preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1b,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1b,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1b => "fig1b",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::config(format!("unknown figure preset {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseStrategy {
    /// Fresh uniform phases every round.
    Random,
    /// Variance-maximising phases, fixed within a scatterer epoch.
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Attacker {
    /// No attacker; only the legitimate parties probe.
    None,
    /// The adversarial surface.
    EveRis,
    /// Amplify-and-forward relay at the attacker position with a fixed gain.
    Relay { gain_db: f64 },
    /// Pilot spoofer at the attacker position; its gain is the scenario's
    /// `amp_gain`.
    Spoof,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    /// Surface size M (a perfect square); ignored by the other attackers.
    pub elements: usize,
    pub phase: PhaseStrategy,
    pub attacker: Attacker,
    pub scheme: Scheme,
}

impl Variant {
    pub fn eve_ris(elements: usize, phase: PhaseStrategy, scheme: Scheme) -> Self {
        Self { elements, phase, attacker: Attacker::EveRis, scheme }
    }

    pub fn no_attacker(scheme: Scheme) -> Self {
        Self { elements: 0, phase: PhaseStrategy::Random, attacker: Attacker::None, scheme }
    }

    pub fn relay(gain_db: f64) -> Self {
        Self { elements: 0, phase: PhaseStrategy::Random, attacker: Attacker::Relay { gain_db }, scheme: Scheme::Csi }
    }

    pub fn spoof() -> Self {
        Self { elements: 0, phase: PhaseStrategy::Random, attacker: Attacker::Spoof, scheme: Scheme::Csi }
    }

    /// Side length of the square surface.
    pub fn side(&self) -> Result<usize> {
        let side = (self.elements as f64).sqrt().round() as usize;
        if side == 0 || side * side != self.elements {
            return Err(Error::config(format!("surface size {} is not a positive perfect square", self.elements)));
        }
        Ok(side)
    }

    pub fn id(&self) -> String {
        let scheme = match self.scheme {
            Scheme::Csi => "csi",
            Scheme::Twoway => "twoway",
        };
        match self.attacker {
            Attacker::None => format!("none_{scheme}"),
            Attacker::EveRis => {
                let phase = match self.phase {
                    PhaseStrategy::Random => "random",
                    PhaseStrategy::Optimized => "optimized",
                };
                format!("eve_ris_{phase}_m{}_{scheme}", self.elements)
            }
            Attacker::Relay { gain_db } => format!("relay_{gain_db}db_{scheme}"),
            Attacker::Spoof => format!("spoof_{scheme}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.attacker {
            Attacker::EveRis => {
                self.side()?;
            }
            Attacker::Relay { gain_db } => {
                if !gain_db.is_finite() {
                    return Err(Error::config("relay gain must be finite"));
                }
            }
            Attacker::None | Attacker::Spoof => {}
        }
        if matches!(self.attacker, Attacker::Relay { .. } | Attacker::Spoof) && self.scheme != Scheme::Csi {
            return Err(Error::config(format!("{} only attacks the CSI scheme", self.id())));
        }
        if self.phase == PhaseStrategy::Optimized && self.attacker != Attacker::EveRis {
            return Err(Error::config("only the surface attacker has a phase to optimize"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Amplifier gain of the surface (and spoofing gain) in dB.
    AmpGainDb,
    /// Quantizer threshold parameter.
    Beta,
    /// Attacker position along the Alice-Bob line, (0, y, 0).
    EveY,
    /// σ_E/σ_h in dB; theory curves only.
    RatioDb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Self {
        Self { param, values }
    }

    /// `start, start + step, …` up to and including `stop`.
    pub fn range(param: SweepParam, start: f64, stop: f64, step: f64) -> Self {
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Self { param, values: (0..n).map(|k| ((start + step * k as f64) * 1e9).round() / 1e9).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("sweep has no values"));
        }
        for &v in &self.values {
            let ok = match self.param {
                SweepParam::AmpGainDb => (-200.0..=100.0).contains(&v),
                SweepParam::Beta => (0.0..0.5).contains(&v),
                SweepParam::EveY => v.is_finite(),
                SweepParam::RatioDb => (-200.0..=200.0).contains(&v),
            };
            if !ok {
                return Err(Error::config(format!("sweep value {v} out of range for {:?}", self.param)));
            }
        }
        Ok(())
    }

    /// The scenario at one sweep value.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self.param {
            SweepParam::AmpGainDb => cfg.amp_gain = crate::config::db_to_linear(value),
            SweepParam::Beta => cfg.beta = value,
            SweepParam::EveY => cfg.pos_eve = [0.0, value, 0.0],
            SweepParam::RatioDb => {}
        }
        cfg
    }
}

/// Attacker-side channel probing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingSettings {
    pub grid_el: usize,
    pub grid_az: usize,
    /// Number of element sensors (RF chains).
    pub sensors: usize,
    /// Snap every arrival angle to the nearest dictionary point, removing
    /// basis mismatch.
    pub on_grid: bool,
}

impl Default for SensingSettings {
    fn default() -> Self {
        Self { grid_el: 64, grid_az: 64, sensors: 20, on_grid: false }
    }
}

/// Monte Carlo engine parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineSettings {
    pub rounds: usize,
    pub seed: u64,
    /// Rounds that share one draw of scatterer angles (and one optimized
    /// phase vector).
    pub rounds_per_epoch: usize,
    pub optimizer: OptimizerConfig,
    pub sensing: SensingSettings,
    pub dropped: DroppedAttacker,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            rounds: 100_000,
            seed: 0,
            rounds_per_epoch: 100,
            optimizer: OptimizerConfig {
                max_iters: 300,
                step_rule: StepRule::Backtracking { initial: 1.0, max_halvings: 30 },
                restarts: 4,
                tolerance: 1e-8,
                patience: 5,
            },
            sensing: SensingSettings::default(),
            dropped: DroppedAttacker::Differs,
        }
    }
}

impl EngineSettings {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 2 {
            return Err(Error::config(format!("need at least two rounds per point, got {}", self.rounds)));
        }
        if self.rounds_per_epoch == 0 {
            return Err(Error::config("rounds per epoch must be positive"));
        }
        self.optimizer.validate()?;
        let s = &self.sensing;
        if s.grid_el < 2 || s.grid_az < 2 {
            return Err(Error::config("dictionary grid needs at least two points per axis"));
        }
        if s.sensors == 0 {
            return Err(Error::config("need at least one sensor"));
        }
        Ok(())
    }

    pub fn epochs(&self) -> usize {
        self.rounds.div_ceil(self.rounds_per_epoch)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub figure: FigureId,
    pub sweep: Sweep,
    pub variants: Vec<Variant>,
    pub base: ScenarioConfig,
    pub settings: EngineSettings,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.sweep.validate()?;
        self.settings.validate()?;
        if self.figure != FigureId::Fig1b && self.variants.is_empty() {
            return Err(Error::config("experiment has no variants"));
        }
        for v in &self.variants {
            v.validate()?;
            if v.attacker == Attacker::EveRis && self.settings.sensing.sensors > v.elements {
                return Err(Error::config(format!(
                    "{} has fewer elements than the {} sensors",
                    v.id(),
                    self.settings.sensing.sensors
                )));
            }
        }
        for &value in &self.sweep.values {
            self.sweep.apply(&self.base, value).validate()?;
        }
        Ok(())
    }
}

/// One point of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub variant: String,
    /// Pr{k_A = k_E}.
    pub kmr_ae: f64,
    /// Pr{k_A = k_B}.
    pub kmr_ab: f64,
    /// Pr{k_A = k_B ≠ k_E}.
    pub akr: f64,
    /// Mean |ψ_A − ψ_B|² in dBW.
    pub mse_ab_dbw: f64,
    pub stderr_kmr_ae: f64,
    pub rounds: usize,
    pub seed: u64,
}

/// √(p(1 − p)/n).
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentSpec {
        let mut spec = preset(FigureId::Fig2, ScenarioConfig::preset());
        spec.sweep = Sweep::new(SweepParam::AmpGainDb, vec![0.0, 20.0]);
        spec.variants = vec![Variant::no_attacker(Scheme::Csi), Variant::eve_ris(25, PhaseStrategy::Random, Scheme::Csi)];
        spec.settings.rounds = 60;
        spec.settings.rounds_per_epoch = 30;
        spec.settings.sensing.grid_el = 8;
        spec.settings.sensing.grid_az = 8;
        spec.settings.sensing.sensors = 6;
        spec
    }

    #[test]
    fn too_few_rounds_rejected() {
        for rounds in [0, 1] {
            let mut spec = tiny();
            spec.settings.rounds = rounds;
            assert!(matches!(spec.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn unknown_preset_name() {
        assert!("fig9".parse::<FigureId>().is_err());
        for f in FigureId::ALL {
            assert_eq!(f.name().parse::<FigureId>().unwrap(), f);
        }
    }

    #[test]
    fn baselines_only_attack_csi() {
        let mut relay = Variant::relay(60.0);
        relay.scheme = Scheme::Twoway;
        assert!(relay.validate().is_err());
        let mut spoof = Variant::spoof();
        spoof.scheme = Scheme::Twoway;
        assert!(spoof.validate().is_err());
        let mut opt_relay = Variant::relay(60.0);
        opt_relay.phase = PhaseStrategy::Optimized;
        assert!(opt_relay.validate().is_err());
    }

    #[test]
    fn non_square_surface_rejected() {
        assert!(Variant::eve_ris(50, PhaseStrategy::Random, Scheme::Csi).validate().is_err());
    }

    #[test]
    fn every_preset_validates() {
        for f in FigureId::ALL {
            preset(f, ScenarioConfig::preset()).validate().unwrap();
        }
    }

    #[test]
    fn epochs_round_up() {
        let mut s = EngineSettings::default();
        s.rounds = 250;
        s.rounds_per_epoch = 100;
        assert_eq!(s.epochs(), 3);
    }

    #[test]
    fn stderr_of_a_fair_coin() {
        assert!((binomial_stderr(0.5, 100) - 0.05).abs() < 1e-12);
        assert!(binomial_stderr(0.5, 0).is_nan());
    }

    #[test]
    fn csv_header_and_rows() {
        let spec = tiny();
        let result = run_figure(&spec).unwrap();
        assert_eq!(result.rows.len(), 4);
        let mut buf = Vec::new();
        write_csv(&mut buf, &spec, &result).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(&format!("# config_hash=sha256:{}", config_hash(&spec))));
        assert!(text.contains(&format!("seed={}", spec.settings.seed)));
        let mut body = text.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(body.next().unwrap(), CSV_COLUMNS.join(","));
        for line in body {
            assert_eq!(line.split(',').count(), CSV_COLUMNS.len());
        }
    }

    #[test]
    fn hash_tracks_the_seed() {
        let a = tiny();
        let mut b = tiny();
        b.settings.seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a), config_hash(&tiny()));
    }

    #[test]
    fn reruns_are_identical() {
        let spec = tiny();
        assert_eq!(run_figure(&spec).unwrap().rows, run_figure(&spec).unwrap().rows);
    }
}
