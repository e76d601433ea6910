//! A quick self-test over the properties every run relies on. Each check
//! takes well under a second in release builds.

use nalgebra::DMatrix;

use super::{preset, run_figure, write_csv, FigureId, PhaseStrategy, Sweep, SweepParam, Variant, CSV_COLUMNS};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::UpaGeometry;
use crate::linalg::DenseOperator;
use crate::phase_opt::{optimize_phase, random_phase_objectives, OptimizerConfig};
use crate::rng::{complex_normal, stream, Domain};
use crate::sensing::{build_dictionary, omp, place_sensors, CompressedOperator};
use crate::skg::Scheme;
use crate::theory::{kmr_derivative_signs, kmr_limit, monte_carlo_kmr, theoretical_kmr, KmrQuery};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn limit_law() -> Result<Check> {
    let limit = kmr_limit(0.1)?;
    let q = KmrQuery::new(1e3, 0.1)?;
    let (mc, se) = monte_carlo_kmr(q, 200_000, &mut stream(11, Domain::Aux, 0))?;
    let ok = (limit - 0.9203).abs() < 1e-4 && (mc - limit).abs() < 4.0 * se;
    Ok(check("kmr limit at beta=0.1", ok, format!("closed form {limit:.4}, simulated {mc:.4} ± {se:.4}")))
}

fn quadrature_vs_simulation() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (i, &(ratio, beta)) in [(0.5, 0.1), (2.0, 0.3)].iter().enumerate() {
        let q = KmrQuery::new(ratio, beta)?;
        let exact = theoretical_kmr(q)?;
        let (mc, se) = monte_carlo_kmr(q, 200_000, &mut stream(12, Domain::Aux, i as u64))?;
        worst = worst.max((mc - exact).abs() / se);
    }
    Ok(check("quadrature matches simulation", worst < 4.0, format!("worst deviation {worst:.2} stderr")))
}

fn shape_of_curve() -> Result<Check> {
    let grid: Vec<f64> = (1..=12).map(|k| 0.5 * k as f64).collect();
    let (first, second) = kmr_derivative_signs(0.2, &grid)?;
    let ok = first.iter().all(|&d| d > 0.0) && second.iter().all(|&d| d < 0.0);
    Ok(check("kmr increasing and concave in the ratio", ok, format!("{} slopes, {} curvatures", first.len(), second.len())))
}

fn sparse_recovery() -> Result<Check> {
    let geom = UpaGeometry::new(40, 40, 0.5)?;
    let dict = build_dictionary(&geom, 1.0, 8, 8)?;
    let op = CompressedOperator::new(&dict, place_sensors(&dict, 20)?)?;
    let mut rng = stream(13, Domain::Aux, 0);
    let mut exact = 0;
    let trials = 20;
    for _ in 0..trials {
        let mut atoms: Vec<usize> = Vec::new();
        while atoms.len() < 3 {
            let a = rand::Rng::gen_range(&mut rng, 0..dict.size());
            // Mirrored grid points give the same atom; keep one of each.
            let (el, az) = dict.angles(a);
            if !atoms.iter().any(|&b| b == a || dict.angles(b) == (-el, -az)) {
                atoms.push(a);
            }
        }
        let coeffs: Vec<Complex64> = atoms.iter().map(|_| complex_normal(&mut rng, 1.0)).collect();
        let g = dict.synthesize(&atoms, &coeffs);
        let est = omp(&op.sensing.select(&g), &op, 3)?;
        let rec = est.synthesize(&dict);
        let err: f64 = g.iter().zip(&rec).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = g.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if err < 1e-6 * norm {
            exact += 1;
        }
    }
    Ok(check("noiseless sparse recovery", exact * 10 >= trials * 9, format!("{exact}/{trials} exact")))
}

fn optimizer_dominance() -> Result<Check> {
    let mut rng = stream(14, Domain::Aux, 0);
    let b = DMatrix::from_fn(12, 3, |_, _| complex_normal(&mut rng, 1.0));
    let g = DenseOperator(&b * b.adjoint());
    let best = optimize_phase(&g, 1.0, &OptimizerConfig::default(), 5)?;
    let (_, random_max) = random_phase_objectives(&g, 1.0, 100, &mut rng);
    Ok(check(
        "optimized phase beats random phases",
        best.objective > random_max,
        format!("optimized {:.3}, best random {:.3}", best.objective, random_max),
    ))
}

fn small_spec() -> super::ExperimentSpec {
    let mut spec = preset(FigureId::Fig2, ScenarioConfig::preset());
    spec.sweep = Sweep::new(SweepParam::AmpGainDb, vec![0.0, 10.0]);
    spec.variants = vec![Variant::no_attacker(Scheme::Csi), Variant::eve_ris(25, PhaseStrategy::Optimized, Scheme::Csi)];
    spec.settings.rounds = 400;
    spec.settings.rounds_per_epoch = 100;
    spec.settings.sensing.grid_el = 16;
    spec.settings.sensing.grid_az = 16;
    spec.settings.sensing.sensors = 10;
    spec.settings.seed = 7;
    spec
}

fn csv_bytes(spec: &super::ExperimentSpec, threads: usize) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_figure(spec))?;
    let mut out = Vec::new();
    write_csv(&mut out, spec, &result)?;
    Ok(out)
}

fn determinism() -> Result<Check> {
    let spec = small_spec();
    let one = csv_bytes(&spec, 1)?;
    let four = csv_bytes(&spec, 4)?;
    let text = String::from_utf8_lossy(&one);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap_or_default().to_string();
    let ok = one == four && header == CSV_COLUMNS.join(",");
    Ok(check("identical output across thread counts", ok, format!("{} bytes, columns `{header}`", one.len())))
}

fn coherence() -> Result<Check> {
    let mut cfg = ScenarioConfig::preset();
    cfg.noise_var = 1e-16;
    let mut spec = small_spec();
    spec.base = cfg;
    spec.sweep = Sweep::new(SweepParam::AmpGainDb, vec![0.0]);
    spec.variants = vec![Variant::no_attacker(Scheme::Csi)];
    spec.settings.rounds = 40_000;
    let row = &run_figure(&spec)?.rows[0];
    let limit = kmr_limit(spec.base.beta)?;
    let se = super::binomial_stderr(limit, row.rounds);
    Ok(check(
        "legitimate agreement reaches the limit without noise",
        (row.kmr_ab - limit).abs() < 3.0 * se,
        format!("kmr_ab {:.4}, limit {limit:.4}, stderr {se:.4}", row.kmr_ab),
    ))
}

/// Run every check. An `Err` means a check could not be evaluated at all.
pub fn invariant_suite() -> Result<Vec<Check>> {
    let checks: [fn() -> Result<Check>; 7] =
        [limit_law, quadrature_vs_simulation, shape_of_curve, sparse_recovery, optimizer_dominance, determinism, coherence];
    checks.iter().map(|c| c()).collect()
}
