//! Maximisation of the deceiving-channel variance wᴴGw under the
//! per-element power constraint |w_m|² = A_E.
//!
//! The optimum lies on the constraint boundary, so the search runs on the
//! torus of unit-modulus phase vectors: projected gradient ascent
//! w ← √A_E·exp(j·arg(w + μ·Gw)). The μ → ∞ step, w ← √A_E·exp(j·arg(Gw)),
//! is a minorise-maximise update and never decreases the objective for PSD G;
//! it is tried first and smaller steps are used only if it fails to ascend.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dotc, norm, HermitianOperator};
use crate::ris::PhaseVector;
use crate::rng::{complex_normal, stream, Domain};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Fixed gradient step μ.
    Fixed(f64),
    /// Try the fixed-point step first, then halve from `initial`.
    Backtracking { initial: f64, max_halvings: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Total number of starts; the first one is the eigenvector seed.
    pub restarts: usize,
    /// Relative objective change treated as stalled.
    pub tolerance: f64,
    /// Consecutive stalled iterations before stopping.
    pub patience: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step_rule: StepRule::Backtracking { initial: 1.0, max_halvings: 30 },
            restarts: 8,
            tolerance: 1e-8,
            patience: 5,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 || self.patience == 0 {
            return Err(Error::config("optimizer iterations, restarts and patience must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("optimizer tolerance must be positive"));
        }
        match self.step_rule {
            StepRule::Fixed(mu) if !(mu > 0.0) => Err(Error::config("fixed step must be positive")),
            StepRule::Backtracking { initial, .. } if !(initial > 0.0) => {
                Err(Error::config("initial step must be positive"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizedPhase {
    pub phase: PhaseVector,
    pub objective: f64,
    /// Objective after each iteration of the winning start.
    pub history: Vec<f64>,
    /// Final objective of every start, in start order.
    pub start_objectives: Vec<f64>,
    /// The eigenvector seed did not converge and a random start was used.
    pub eig_fallback: bool,
}

fn project(v: &[Complex64], amp: f64) -> Vec<Complex64> {
    v.iter()
        .map(|z| if z.norm_sqr() > 0.0 { z * (amp / z.norm()) } else { Complex64::new(amp, 0.0) })
        .collect()
}

/// Check Hermitian symmetry and non-negativity of `g` on random probes.
pub fn spot_check_hermitian<O: HermitianOperator + ?Sized>(g: &O, seed: u64) -> Result<()> {
    let n = g.dim();
    let mut rng = stream(seed, Domain::Optimizer, u64::MAX - 1);
    let x: Vec<Complex64> = (0..n).map(|_| complex_normal(&mut rng, 1.0)).collect();
    let y: Vec<Complex64> = (0..n).map(|_| complex_normal(&mut rng, 1.0)).collect();
    let mut gx = vec![Complex64::new(0.0, 0.0); n];
    let mut gy = vec![Complex64::new(0.0, 0.0); n];
    g.apply(&x, &mut gx);
    g.apply(&y, &mut gy);
    let a = dotc(&x, &gy);
    let b = dotc(&y, &gx).conj();
    let scale = norm(&x) * norm(&gy) + norm(&y) * norm(&gx);
    if (a - b).norm() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::contract("variance operator is not Hermitian"));
    }
    let qx = dotc(&x, &gx);
    if qx.re < -1e-9 * norm(&x) * norm(&gx) {
        return Err(Error::contract("variance operator is not positive semidefinite"));
    }
    Ok(())
}

/// Phases of the principal eigenvector of G (power iteration). The flag is
/// set when the iteration did not settle and a random start was returned.
pub fn eig_phase_init<O: HermitianOperator + ?Sized>(g: &O, amp_gain: f64, seed: u64) -> (PhaseVector, bool) {
    let n = g.dim();
    let mut rng = stream(seed, Domain::Optimizer, u64::MAX);
    let mut v: Vec<Complex64> = (0..n).map(|_| complex_normal(&mut rng, 1.0)).collect();
    let s = 1.0 / norm(&v);
    v.iter_mut().for_each(|z| *z *= s);
    let mut gv = vec![Complex64::new(0.0, 0.0); n];
    let mut rho_prev = f64::NAN;
    for _ in 0..1000 {
        g.apply(&v, &mut gv);
        let rho = dotc(&v, &gv).re;
        let gn = norm(&gv);
        if gn == 0.0 {
            return (PhaseVector::zeros(n, amp_gain), false);
        }
        let resid: f64 = gv.iter().zip(&v).map(|(a, b)| (a - b * rho).norm_sqr()).sum::<f64>().sqrt();
        let settled = resid <= 1e-8 * gn || (rho - rho_prev).abs() <= 1e-12 * rho.abs();
        v.iter_mut().zip(&gv).for_each(|(a, b)| *a = b / gn);
        if settled {
            return (PhaseVector::from_directions(amp_gain, &v), false);
        }
        rho_prev = rho;
    }
    (PhaseVector::random(n, amp_gain, &mut rng), true)
}

struct Run {
    w: Vec<Complex64>,
    objective: f64,
    history: Vec<f64>,
}

fn ascend<O: HermitianOperator + ?Sized>(g: &O, start: Vec<Complex64>, amp: f64, cfg: &OptimizerConfig) -> Run {
    let n = g.dim();
    let mut w = start;
    let mut gw = vec![Complex64::new(0.0, 0.0); n];
    g.apply(&w, &mut gw);
    let mut f = dotc(&w, &gw).re;
    let mut history = vec![f];
    let mut stalled = 0;
    let mut g_new = vec![Complex64::new(0.0, 0.0); n];
    let gn = norm(&gw).max(f64::MIN_POSITIVE);
    let trial = |mu: Option<f64>, w: &[Complex64], gw: &[Complex64]| -> Vec<Complex64> {
        match mu {
            None => project(gw, amp),
            Some(mu) => {
                let v: Vec<Complex64> = w.iter().zip(gw).map(|(a, b)| a + b * mu).collect();
                project(&v, amp)
            }
        }
    };
    // Steps are expressed relative to ‖w‖/‖Gw‖ so they are scale free.
    let base = norm(&w) / gn;
    for _ in 0..cfg.max_iters {
        let steps: Vec<Option<f64>> = match cfg.step_rule {
            StepRule::Fixed(mu) => vec![Some(mu * base)],
            StepRule::Backtracking { initial, max_halvings } => std::iter::once(None)
                .chain((0..=max_halvings).map(|k| Some(initial * base * 0.5f64.powi(k as i32))))
                .collect(),
        };
        let mut accepted = false;
        for mu in steps {
            let cand = trial(mu, &w, &gw);
            g.apply(&cand, &mut g_new);
            let fc = dotc(&cand, &g_new).re;
            if fc >= f {
                let rel = (fc - f) / f.abs().max(f64::MIN_POSITIVE);
                w = cand;
                std::mem::swap(&mut gw, &mut g_new);
                f = fc;
                accepted = true;
                stalled = if rel < cfg.tolerance { stalled + 1 } else { 0 };
                break;
            }
        }
        history.push(f);
        if !accepted || stalled >= cfg.patience {
            break;
        }
    }
    Run { w, objective: f, history }
}

/// Best phase vector over all starts. Deterministic in `seed`.
pub fn optimize_phase<O: HermitianOperator + ?Sized>(
    g: &O,
    amp_gain: f64,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizedPhase> {
    cfg.validate()?;
    if !(amp_gain > 0.0 && amp_gain.is_finite()) {
        return Err(Error::domain(format!("amplitude gain must be positive, got {amp_gain}")));
    }
    spot_check_hermitian(g, seed)?;
    let n = g.dim();
    let (seed_phase, eig_fallback) = eig_phase_init(g, amp_gain, seed);
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                seed_phase.weights()
            } else {
                let mut rng = stream(seed, Domain::Optimizer, r as u64);
                PhaseVector::random(n, amp_gain, &mut rng).weights()
            };
            ascend(g, start, amp_gain.sqrt(), cfg)
        })
        .collect();
    let start_objectives: Vec<f64> = runs.iter().map(|r| r.objective).collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.objective > runs[best].objective {
            best = i;
        }
    }
    let run = runs.into_iter().nth(best).expect("at least one start");
    Ok(OptimizedPhase {
        phase: PhaseVector::from_directions(amp_gain, &run.w),
        objective: run.objective,
        history: run.history,
        start_objectives,
        eig_fallback,
    })
}

/// Exhaustive optimum over a phase grid with `steps` points per element
/// (the first phase is pinned to 0 by global-phase invariance). Only for
/// M ≤ 3.
pub fn grid_search_optimum<O: HermitianOperator + ?Sized>(g: &O, amp_gain: f64, steps: usize) -> Result<f64> {
    let n = g.dim();
    if n == 0 || n > 3 {
        return Err(Error::contract("grid search supports 1 to 3 elements"));
    }
    let a = amp_gain.sqrt();
    let phase = |k: usize| std::f64::consts::TAU * k as f64 / steps as f64;
    let mut best = f64::NEG_INFINITY;
    let free = n - 1;
    let total = steps.pow(free as u32);
    for code in 0..total {
        let mut w = vec![Complex64::new(a, 0.0); n];
        let mut c = code;
        for wi in w.iter_mut().skip(1) {
            *wi = Complex64::from_polar(a, phase(c % steps));
            c /= steps;
        }
        best = best.max(g.quad_form(&w));
    }
    Ok(best)
}

/// Mean and maximum objective over `draws` random phase vectors.
pub fn random_phase_objectives<O: HermitianOperator + ?Sized, R: Rng + ?Sized>(
    g: &O,
    amp_gain: f64,
    draws: usize,
    rng: &mut R,
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    for _ in 0..draws {
        let w = PhaseVector::random(g.dim(), amp_gain, rng).weights();
        let f = g.quad_form(&w);
        sum += f;
        max = max.max(f);
    }
    (sum / draws.max(1) as f64, max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseOperator;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_psd(n: usize, rank: usize, seed: u64) -> DenseOperator {
        let mut rng = stream(seed, Domain::Aux, 0);
        let b = DMatrix::from_fn(n, rank, |_, _| complex_normal(&mut rng, 1.0));
        DenseOperator(&b * b.adjoint())
    }

    #[test]
    fn scalar_case() {
        let g = DenseOperator(DMatrix::from_element(1, 1, c(2.5, 0.0)));
        let r = optimize_phase(&g, 3.0, &OptimizerConfig::default(), 1).unwrap();
        assert!((r.objective - 7.5).abs() < 1e-12);
    }

    #[test]
    fn identity_is_flat() {
        let g = DenseOperator(DMatrix::identity(5, 5));
        let r = optimize_phase(&g, 2.0, &OptimizerConfig::default(), 2).unwrap();
        assert!((r.objective - 10.0).abs() < 1e-10);
    }

    #[test]
    fn two_element_optimum() {
        let g = DenseOperator(DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]));
        let r = optimize_phase(&g, 1.0, &OptimizerConfig::default(), 3).unwrap();
        assert!((r.objective - 6.0).abs() < 1e-9);
        let w = r.phase.weights();
        assert!((w[0] - w[1]).norm() < 1e-6);
        let brute = grid_search_optimum(&g, 1.0, 360).unwrap();
        assert!((brute - 6.0).abs() < 1e-9);
    }

    #[test]
    fn rank_one_seed_is_optimal() {
        let mut rng = stream(4, Domain::Aux, 0);
        let u: Vec<Complex64> = (0..12).map(|_| Complex64::from_polar(1.0, rand::Rng::gen_range(&mut rng, 0.0..6.28))).collect();
        let v = nalgebra::DVector::from_vec(u);
        let g = DenseOperator(&v * v.adjoint());
        let (w, fallback) = eig_phase_init(&g, 2.0, 0);
        assert!(!fallback);
        assert!((g.quad_form(&w.weights()) - 2.0 * 144.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_seed() {
        let g = DenseOperator(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(5.0, 0.0), c(2.0, 0.0)])));
        let (w, _) = eig_phase_init(&g, 1.0, 0);
        assert!((g.quad_form(&w.weights()) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn seed_beats_random_average() {
        let g = random_psd(4, 2, 5);
        let (w, _) = eig_phase_init(&g, 1.0, 0);
        let mut rng = stream(6, Domain::Aux, 0);
        let (mean, _) = random_phase_objectives(&g, 1.0, 100, &mut rng);
        assert!(g.quad_form(&w.weights()) >= mean);
    }

    #[test]
    fn small_instances_match_brute_force() {
        for seed in 0..5 {
            for n in 2..=3 {
                let g = random_psd(n, 2, 10 + seed);
                let r = optimize_phase(&g, 1.0, &OptimizerConfig::default(), seed).unwrap();
                let brute = grid_search_optimum(&g, 1.0, 360).unwrap();
                assert!(r.objective >= 0.99 * brute, "{} {}", r.objective, brute);
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = DenseOperator(DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));
        assert!(matches!(optimize_phase(&g, 1.0, &OptimizerConfig::default(), 0), Err(Error::Contract(_))));
    }

    #[test]
    fn invalid_config_rejected() {
        let g = random_psd(3, 3, 1);
        let mut cfg = OptimizerConfig::default();
        cfg.restarts = 0;
        assert!(optimize_phase(&g, 1.0, &cfg, 0).is_err());
        assert!(optimize_phase(&g, 0.0, &OptimizerConfig::default(), 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn feasible_monotone_and_dominant(seed in 0u64..10_000, n in 2usize..16, rank in 1usize..5, amp in 0.1f64..100.0) {
            let g = random_psd(n, rank, seed);
            let cfg = OptimizerConfig { restarts: 3, ..OptimizerConfig::default() };
            let r = optimize_phase(&g, amp, &cfg, seed).unwrap();
            for w in r.phase.weights() {
                prop_assert!((w.norm_sqr() - amp).abs() < 1e-9 * amp);
            }
            for h in r.history.windows(2) {
                prop_assert!(h[1] >= h[0]);
            }
            let mut rng = stream(seed, Domain::Aux, 1);
            let (_, best_random) = random_phase_objectives(&g, amp, 100, &mut rng);
            prop_assert!(r.objective >= best_random * (1.0 - 1e-12));
            let rotated: Vec<Complex64> = r.phase.weights().iter().map(|w| w * Complex64::from_polar(1.0, 0.7)).collect();
            prop_assert!((g.quad_form(&rotated) - r.objective).abs() < 1e-9 * r.objective.max(1.0));
        }
    }
}
