use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::{
    binomial_stderr, Attacker, EngineSettings, ExperimentSpec, FigureId, PhaseStrategy, ResultRow, SweepParam,
    Variant,
};
use crate::baseline::{relay_round, spoof_round, RelayConfig, SpoofingConfig};
use crate::channel::{sample_direct, sample_path_angles, LinkLayout};
use crate::config::{db_to_linear, linear_to_db, Endpoint, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{los_angles, UpaGeometry};
use crate::linalg::dotu;
use crate::phase_opt::optimize_phase;
use crate::ris::{BilinearDeception, PhaseVector, VarianceOperator};
use crate::rng::{complex_normal, derive_seed, stream, Domain};
use crate::sensing::{build_dictionary, omp, place_sensors, CompressedOperator, Dictionary, SparseEstimate};
use crate::skg::{
    available_key_rate, csi_probe, draw_pilots, key_match_rate, quantize_block, twoway_probe, twoway_probe_with,
    DroppedAttacker, KeyBit, KeyStream, Scheme,
};
use crate::theory::{kmr_limit, theoretical_kmr, KmrQuery};
use crate::Complex64;

/// Dictionary and sensor layout for one surface size.
#[derive(Debug)]
struct SensingSetup {
    dict: Dictionary,
    op: CompressedOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PhaseKey {
    side: usize,
    pos_eve: [u64; 3],
    epoch: usize,
}

impl PhaseKey {
    fn new(cfg: &ScenarioConfig, side: usize, epoch: usize) -> Self {
        Self { side, pos_eve: cfg.pos_eve.map(f64::to_bits), epoch }
    }
}

/// Everything shared by the points of one experiment: one dictionary and
/// sensor placement per surface size, and one optimized phase vector
/// (unit amplitude) per surface size, attacker position and epoch.
///
/// The variance operator only scales with the amplifier gain, so the
/// optimized phases do not depend on it and are shared across a gain sweep.
#[derive(Debug, Default)]
pub struct Resources {
    sensing: BTreeMap<usize, Arc<SensingSetup>>,
    phases: HashMap<PhaseKey, Arc<Vec<Complex64>>>,
    /// Starts whose eigenvector seed fell back to a random start.
    pub eig_fallbacks: usize,
}

fn scenario_for(cfg: &ScenarioConfig, side: usize) -> ScenarioConfig {
    cfg.clone().with_square_ris(side)
}

fn epoch_layouts(
    cfg: &ScenarioConfig,
    geom: &UpaGeometry,
    snap: Option<&Dictionary>,
    seed: u64,
    epoch: usize,
) -> Result<(Arc<LinkLayout>, Arc<LinkLayout>)> {
    let mut rng = stream(seed, Domain::Epoch, epoch as u64);
    let angles_a = sample_path_angles(cfg.iota, &mut rng);
    let angles_b = sample_path_angles(cfg.iota, &mut rng);
    let build = |endpoint: Endpoint, angles: Vec<(f64, f64)>| -> Result<Arc<LinkLayout>> {
        let los = los_angles(&cfg.pos_eve, &cfg.endpoint_pos(endpoint))?;
        let layout = match snap {
            None => LinkLayout::with_los_angle(cfg, geom, endpoint, los, angles)?,
            Some(d) => {
                let s = |(el, az): (f64, f64)| d.angles(d.nearest(el, az));
                let angles = angles.into_iter().map(s).collect();
                LinkLayout::with_los_angle(cfg, geom, endpoint, s(los), angles)?
            }
        };
        Ok(Arc::new(layout))
    };
    Ok((build(Endpoint::Alice, angles_a)?, build(Endpoint::Bob, angles_b)?))
}

impl Resources {
    /// Build what the given points need. Sensor placement and phase
    /// optimization run here, before any rounds, in a fixed order.
    pub fn prepare(points: &[(ScenarioConfig, Variant)], settings: &EngineSettings) -> Result<Self> {
        let mut res = Resources::default();
        let mut phase_jobs: BTreeMap<PhaseKey, ScenarioConfig> = BTreeMap::new();
        for (cfg, v) in points {
            if v.attacker != Attacker::EveRis {
                continue;
            }
            let side = v.side()?;
            let scfg = scenario_for(cfg, side);
            if !res.sensing.contains_key(&side) {
                let geom = UpaGeometry::from_config(&scfg)?;
                let s = &settings.sensing;
                let dict = build_dictionary(&geom, scfg.lambda, s.grid_el, s.grid_az)?;
                let op = CompressedOperator::new(&dict, place_sensors(&dict, s.sensors)?)?;
                res.sensing.insert(side, Arc::new(SensingSetup { dict, op }));
            }
            if v.phase == PhaseStrategy::Optimized {
                for epoch in 0..settings.epochs() {
                    phase_jobs.entry(PhaseKey::new(&scfg, side, epoch)).or_insert_with(|| scfg.clone());
                }
            }
        }
        let jobs: Vec<(PhaseKey, ScenarioConfig)> = phase_jobs.into_iter().collect();
        let solved = jobs
            .par_iter()
            .map(|(key, scfg)| {
                let setup = &res.sensing[&key.side];
                let geom = setup.dict.geometry();
                let snap = settings.sensing.on_grid.then_some(&setup.dict);
                let (a, b) = epoch_layouts(scfg, geom, snap, settings.seed, key.epoch)?;
                let g = VarianceOperator::new(&a, &b)?;
                let opt_seed = derive_seed(settings.seed, key.epoch as u64);
                let r = optimize_phase(&g, 1.0, &settings.optimizer, opt_seed)?;
                Ok((*key, Arc::new(r.phase.weights()), r.eig_fallback))
            })
            .collect::<Result<Vec<_>>>()?;
        for (key, w, fallback) in solved {
            res.eig_fallbacks += fallback as usize;
            res.phases.insert(key, w);
        }
        Ok(res)
    }

    /// Sensor indices chosen for each surface size.
    pub fn sensor_rows(&self) -> BTreeMap<usize, Vec<usize>> {
        self.sensing.iter().map(|(&side, s)| (side * side, s.op.sensing.rows.clone())).collect()
    }
}

/// Raw per-round features of one point, before quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSamples {
    /// Alice's feature ĥ_A or φ̂_A.
    pub feature_a: Vec<Complex64>,
    pub feature_b: Vec<Complex64>,
    /// The attacker's reconstruction; absent without an attacker.
    pub feature_e: Option<Vec<Complex64>>,
    /// The surface's true contribution h_E (h_E·q_A·q_B for the two-way
    /// scheme), for diagnostics.
    pub deceiving: Option<Vec<Complex64>>,
}

fn real_parts(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

impl PointSamples {
    pub fn rounds(&self) -> usize {
        self.feature_a.len()
    }

    /// Key streams of Alice, Bob and the attacker from the real parts of
    /// their features. Without an attacker every attacker round is dropped.
    pub fn keys(&self, beta: f64) -> Result<(KeyStream, KeyStream, KeyStream)> {
        let ka = quantize_block(&real_parts(&self.feature_a), beta)?;
        let kb = quantize_block(&real_parts(&self.feature_b), beta)?;
        let ke = match &self.feature_e {
            Some(e) => quantize_block(&real_parts(e), beta)?,
            None => KeyStream {
                outcomes: vec![KeyBit::Dropped; self.rounds()],
                thresholds: (f64::NAN, f64::NAN),
                block_stats: (f64::NAN, f64::NAN),
                degenerate: true,
            },
        };
        Ok((ka, kb, ke))
    }

    /// Key streams with the attacker's key taken from the true deceiving
    /// channel instead of its reconstruction.
    pub fn oracle_keys(&self, beta: f64) -> Result<Option<(KeyStream, KeyStream, KeyStream)>> {
        let Some(d) = &self.deceiving else { return Ok(None) };
        let (ka, kb, _) = self.keys(beta)?;
        Ok(Some((ka, kb, quantize_block(&real_parts(d), beta)?)))
    }

    /// Mean |ψ_A − ψ_B|².
    pub fn mse(&self) -> f64 {
        let n = self.rounds().max(1) as f64;
        self.feature_a.iter().zip(&self.feature_b).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n
    }

    pub fn row(
        &self,
        sweep_value: f64,
        variant: &str,
        beta: f64,
        dropped: DroppedAttacker,
        seed: u64,
    ) -> Result<ResultRow> {
        let (ka, kb, ke) = self.keys(beta)?;
        let kmr_ae = key_match_rate(&ka, &ke)?;
        Ok(ResultRow {
            sweep_value,
            variant: variant.to_string(),
            kmr_ae,
            kmr_ab: key_match_rate(&ka, &kb)?,
            akr: available_key_rate(&ka, &kb, &ke, dropped)?,
            mse_ab_dbw: linear_to_db(self.mse()),
            stderr_kmr_ae: binomial_stderr(kmr_ae, self.rounds()),
            rounds: self.rounds(),
            seed,
        })
    }
}

/// Per-epoch state of a fixed-phase surface.
struct FixedPhase {
    unit: Arc<Vec<Complex64>>,
    amp: f64,
    truth: BilinearDeception,
    /// Σ_m w_m·D[m, i]·D[m, j] on unit-amplitude weights, filled lazily.
    pairs: Mutex<HashMap<(usize, usize), Complex64>>,
}

impl FixedPhase {
    fn pair(&self, dict: &Dictionary, i: usize, j: usize) -> Complex64 {
        if let Some(v) = self.pairs.lock().expect("pair cache poisoned").get(&(i, j)) {
            return *v;
        }
        let v = dict.weighted_pair(&self.unit, i, j);
        self.pairs.lock().expect("pair cache poisoned").insert((i, j), v);
        v
    }

    fn reconstruct(&self, dict: &Dictionary, a: &SparseEstimate, b: &SparseEstimate) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&i, ca) in a.support.iter().zip(&a.coeffs) {
            for (&j, cb) in b.support.iter().zip(&b.coeffs) {
                acc += ca * cb * self.pair(dict, i, j);
            }
        }
        acc * self.amp
    }
}

struct RoundOut {
    a: Complex64,
    b: Complex64,
    e: Option<Complex64>,
    deceiving: Option<Complex64>,
}

fn baseline_round(cfg: &ScenarioConfig, variant: &Variant, seed: u64, r: usize) -> Result<RoundOut> {
    let mut rng = stream(seed, Domain::Round, r as u64);
    let h = sample_direct(cfg, &mut rng);
    let zero = Complex64::new(0.0, 0.0);
    match variant.attacker {
        Attacker::None => {
            let p = match variant.scheme {
                Scheme::Csi => csi_probe(&h, zero, cfg, &mut rng)?,
                Scheme::Twoway => twoway_probe(&h, zero, cfg, &mut rng)?,
            };
            Ok(RoundOut { a: p.feature_a, b: p.feature_b, e: None, deceiving: None })
        }
        Attacker::Relay { gain_db } => {
            let rc = RelayConfig { gain: db_to_linear(gain_db), position: cfg.pos_eve };
            let o = relay_round(&rc, &h, cfg, &mut rng)?;
            Ok(RoundOut { a: o.psi_a, b: o.psi_b, e: Some(o.psi_e), deceiving: None })
        }
        Attacker::Spoof => {
            let sc = SpoofingConfig { spoof_gain: cfg.amp_gain, position: cfg.pos_eve, detection_snr_db: 0.0 };
            let o = spoof_round(&sc, &h, cfg, &mut rng)?;
            Ok(RoundOut { a: o.psi_a, b: o.psi_b, e: Some(o.psi_e), deceiving: None })
        }
        Attacker::EveRis => Err(Error::contract("surface rounds need epoch state")),
    }
}

#[allow(clippy::too_many_arguments)]
fn surface_round(
    cfg: &ScenarioConfig,
    variant: &Variant,
    setup: &SensingSetup,
    layouts: &(Arc<LinkLayout>, Arc<LinkLayout>),
    fixed: Option<&FixedPhase>,
    seed: u64,
    r: usize,
) -> Result<RoundOut> {
    let (la, lb) = layouts;
    let mut rng = stream(seed, Domain::Round, r as u64);
    let h = sample_direct(cfg, &mut rng);
    let ga = la.draw_gains(&mut rng);
    let gb = lb.draw_gains(&mut rng);

    let random_w: Option<Vec<Complex64>> = match fixed {
        Some(_) => None,
        None => {
            let mut wrng = stream(derive_seed(seed, u64::MAX), Domain::Round, r as u64);
            Some(PhaseVector::random(la.num_elements(), cfg.amp_gain, &mut wrng).weights())
        }
    };
    let he = match (fixed, &random_w) {
        (Some(f), _) => f.truth.evaluate(&ga, &gb),
        (None, Some(w)) => {
            let a = la.compose(&ga);
            let b = lb.compose(&gb);
            let wa: Vec<Complex64> = w.iter().zip(&a).map(|(x, y)| x * y).collect();
            dotu(&wa, &b)
        }
        (None, None) => unreachable!("either a fixed or a random phase"),
    };

    let dict = &setup.dict;
    let rows = &setup.op.sensing.rows;
    let geom = dict.geometry();
    let sens_a = la.entries(geom, rows, &ga);
    let sens_b = lb.entries(geom, rows, &gb);
    let (p, meas_a, meas_b, deceiving) = match variant.scheme {
        Scheme::Csi => {
            let p = csi_probe(&h, he, cfg, &mut rng)?;
            let va = 2.0 * cfg.noise_var / cfg.pilot_power_a;
            let vb = 2.0 * cfg.noise_var / cfg.pilot_power_b;
            let ya: Vec<Complex64> = sens_a.iter().map(|x| x + complex_normal(&mut rng, va)).collect();
            let yb: Vec<Complex64> = sens_b.iter().map(|x| x + complex_normal(&mut rng, vb)).collect();
            (p, ya, yb, he)
        }
        Scheme::Twoway => {
            let pilots = draw_pilots(cfg, &mut rng);
            let p = twoway_probe_with(&h, he, pilots, cfg, &mut rng);
            let (qa, qb) = pilots;
            let v = 2.0 * cfg.noise_var;
            let ra: Vec<Complex64> = sens_a.iter().map(|x| x * qa + complex_normal(&mut rng, v)).collect();
            let rb: Vec<Complex64> = sens_b.iter().map(|x| x * qb + complex_normal(&mut rng, v)).collect();
            (p, ra, rb, he * qa * qb)
        }
    };
    let sparsity = cfg.iota + 1;
    let est_a = omp(&meas_a, &setup.op, sparsity)?;
    let est_b = omp(&meas_b, &setup.op, sparsity)?;
    let e = match (fixed, &random_w) {
        (Some(f), _) => f.reconstruct(dict, &est_a, &est_b),
        (None, Some(w)) => {
            let a = est_a.synthesize(dict);
            let b = est_b.synthesize(dict);
            let wa: Vec<Complex64> = w.iter().zip(&a).map(|(x, y)| x * y).collect();
            dotu(&wa, &b)
        }
        (None, None) => unreachable!("either a fixed or a random phase"),
    };
    Ok(RoundOut { a: p.feature_a, b: p.feature_b, e: Some(e), deceiving: Some(deceiving) })
}

/// Run every round of one point. Rounds are independent given the seed, so
/// the result does not depend on the thread count.
pub fn simulate_point(
    cfg: &ScenarioConfig,
    variant: &Variant,
    settings: &EngineSettings,
    resources: &Resources,
) -> Result<PointSamples> {
    settings.validate()?;
    variant.validate()?;
    cfg.validate()?;
    let seed = settings.seed;
    let outs: Vec<RoundOut> = if variant.attacker == Attacker::EveRis {
        let side = variant.side()?;
        let scfg = scenario_for(cfg, side);
        let setup = resources
            .sensing
            .get(&side)
            .ok_or_else(|| Error::contract(format!("no sensing setup prepared for M = {}", variant.elements)))?;
        let snap = settings.sensing.on_grid.then_some(&setup.dict);
        let mut outs = Vec::with_capacity(settings.rounds);
        for epoch in 0..settings.epochs() {
            let layouts = epoch_layouts(&scfg, setup.dict.geometry(), snap, seed, epoch)?;
            let fixed = match variant.phase {
                PhaseStrategy::Random => None,
                PhaseStrategy::Optimized => {
                    let unit = resources
                        .phases
                        .get(&PhaseKey::new(&scfg, side, epoch))
                        .ok_or_else(|| Error::contract("no optimized phase prepared for this point"))?
                        .clone();
                    let amp = scfg.amp_gain.sqrt();
                    let w: Vec<Complex64> = unit.iter().map(|x| x * amp).collect();
                    let truth = BilinearDeception::new(&w, &layouts.0, &layouts.1)?;
                    Some(FixedPhase { unit, amp, truth, pairs: Mutex::new(HashMap::new()) })
                }
            };
            let start = epoch * settings.rounds_per_epoch;
            let end = (start + settings.rounds_per_epoch).min(settings.rounds);
            let chunk = (start..end)
                .into_par_iter()
                .map(|r| surface_round(&scfg, variant, setup, &layouts, fixed.as_ref(), seed, r))
                .collect::<Result<Vec<_>>>()?;
            outs.extend(chunk);
        }
        outs
    } else {
        (0..settings.rounds)
            .into_par_iter()
            .map(|r| baseline_round(cfg, variant, seed, r))
            .collect::<Result<Vec<_>>>()?
    };
    let has_e = outs.first().is_some_and(|o| o.e.is_some());
    let has_d = outs.first().is_some_and(|o| o.deceiving.is_some());
    Ok(PointSamples {
        feature_a: outs.iter().map(|o| o.a).collect(),
        feature_b: outs.iter().map(|o| o.b).collect(),
        feature_e: has_e.then(|| outs.iter().map(|o| o.e.unwrap_or_default()).collect()),
        deceiving: has_d.then(|| outs.iter().map(|o| o.deceiving.unwrap_or_default()).collect()),
    })
}

/// One point at the scenario's own β. The row's sweep value is NaN.
pub fn run_point(cfg: &ScenarioConfig, variant: &Variant, settings: &EngineSettings) -> Result<ResultRow> {
    let res = Resources::prepare(&[(cfg.clone(), *variant)], settings)?;
    let s = simulate_point(cfg, variant, settings, &res)?;
    s.row(f64::NAN, &variant.id(), cfg.beta, settings.dropped, settings.seed)
}

/// Rows of a figure together with what is needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureResult {
    pub rows: Vec<ResultRow>,
    /// Sensor indices per surface size.
    pub sensors: BTreeMap<usize, Vec<usize>>,
    pub eig_fallbacks: usize,
}

fn theory_rows(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let beta = spec.base.beta;
    let ceiling = kmr_limit(beta)?;
    spec.sweep
        .values
        .iter()
        .map(|&db| {
            let kmr = theoretical_kmr(KmrQuery::from_variance_ratio_db(db, beta)?)?;
            Ok(ResultRow {
                sweep_value: db,
                variant: format!("theory_beta{beta}"),
                kmr_ae: kmr,
                kmr_ab: ceiling,
                akr: ceiling - kmr,
                mse_ab_dbw: f64::NAN,
                stderr_kmr_ae: 0.0,
                rounds: 0,
                seed: spec.settings.seed,
            })
        })
        .collect()
}

/// Every (sweep value, variant) point of a spec, in sweep-major order.
pub fn run_figure(spec: &ExperimentSpec) -> Result<FigureResult> {
    spec.validate()?;
    let settings = &spec.settings;
    if spec.figure == FigureId::Fig1b || spec.sweep.param == SweepParam::RatioDb {
        if spec.sweep.param != SweepParam::RatioDb {
            return Err(Error::config("the theory curve sweeps ratio_db"));
        }
        return Ok(FigureResult { rows: theory_rows(spec)?, sensors: BTreeMap::new(), eig_fallbacks: 0 });
    }
    let nv = spec.variants.len();
    if spec.sweep.param == SweepParam::Beta {
        // β only enters the quantizer: simulate each variant once.
        let points: Vec<(ScenarioConfig, Variant)> = spec.variants.iter().map(|v| (spec.base.clone(), *v)).collect();
        let res = Resources::prepare(&points, settings)?;
        let samples = points
            .par_iter()
            .map(|(cfg, v)| simulate_point(cfg, v, settings, &res))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(spec.sweep.values.len() * nv);
        for &beta in &spec.sweep.values {
            for (s, v) in samples.iter().zip(&spec.variants) {
                rows.push(s.row(beta, &v.id(), beta, settings.dropped, settings.seed)?);
            }
        }
        return Ok(FigureResult { rows, sensors: res.sensor_rows(), eig_fallbacks: res.eig_fallbacks });
    }
    let points: Vec<(f64, ScenarioConfig, Variant)> = spec
        .sweep
        .values
        .iter()
        .flat_map(|&x| spec.variants.iter().map(move |v| (x, *v)))
        .map(|(x, v)| (x, spec.sweep.apply(&spec.base, x), v))
        .collect();
    let plain: Vec<(ScenarioConfig, Variant)> = points.iter().map(|(_, c, v)| (c.clone(), *v)).collect();
    let res = Resources::prepare(&plain, settings)?;
    let rows = points
        .par_iter()
        .map(|(x, cfg, v)| {
            let s = simulate_point(cfg, v, settings, &res)?;
            s.row(*x, &v.id(), cfg.beta, settings.dropped, settings.seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureResult { rows, sensors: res.sensor_rows(), eig_fallbacks: res.eig_fallbacks })
}
