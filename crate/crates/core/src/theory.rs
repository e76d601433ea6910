//! Closed-form key match rate between a legitimate party and the attacker.
//!
//! With z_A = z_E + z, z_E ~ N(0, σ_E²), z ~ N(0, σ_h²) and thresholds at
//! ±β times each party's standard deviation, the probability that both emit
//! the same bit is
//!
//! √(2/π)·∫_β^∞ Φ(−β√(x²+1) + xζ)·exp(−ζ²/2) dζ,   x = σ_E/σ_h,
//!
//! which increases with x from 2Φ(−β)² (independent features) towards
//! 2Φ(−β) (attacker owns the whole channel). There is no elementary
//! antiderivative; the integral is evaluated by adaptive Gauss-Kronrod.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::standard_normal;

/// Width of the integration window above β, in standard deviations.
const WINDOW: f64 = 12.0;
/// Absolute error target of the quadrature.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmrQuery {
    /// σ_E / σ_h.
    pub ratio: f64,
    pub beta: f64,
}

impl KmrQuery {
    pub fn new(ratio: f64, beta: f64) -> Result<Self> {
        if !(ratio >= 0.0 && ratio.is_finite()) {
            return Err(Error::domain(format!("ratio must be finite and non-negative, got {ratio}")));
        }
        check_beta(beta)?;
        Ok(Self { ratio, beta })
    }

    /// Query from the variance ratio σ_E²/σ_h² expressed in dB.
    pub fn from_variance_ratio_db(db: f64, beta: f64) -> Result<Self> {
        Self::new(10f64.powf(db / 20.0), beta)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if (0.0..0.5).contains(&beta) {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must lie in [0, 0.5), got {beta}")))
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
        let (value, err) = gk15(f, a, b);
        if err <= tol || (b - a) < 1e-13 {
            return Ok(value);
        }
        if depth == 0 {
            return Err(Error::Numerical(format!(
                "quadrature did not converge on [{a}, {b}] (error estimate {err:e})"
            )));
        }
        let m = 0.5 * (a + b);
        Ok(recurse(f, a, m, 0.5 * tol, depth - 1)? + recurse(f, m, b, 0.5 * tol, depth - 1)?)
    }
    recurse(&f, a, b, tol, 60)
}

pub fn theoretical_kmr(q: KmrQuery) -> Result<f64> {
    theoretical_kmr_tol(q, DEFAULT_TOLERANCE)
}

pub fn theoretical_kmr_tol(q: KmrQuery, tol: f64) -> Result<f64> {
    let KmrQuery { ratio: x, beta } = KmrQuery::new(q.ratio, q.beta)?;
    let shift = beta * (x * x + 1.0).sqrt();
    let scale = (2.0 / PI).sqrt();
    let f = |z: f64| normal_cdf(-shift + x * z) * (-0.5 * z * z).exp();
    let (lo, hi) = (beta, beta + WINDOW);
    // The integrand switches on around ζ = shift / x; split there so the
    // near-step shape at large ratios is resolved.
    let mut value = 0.0;
    let knee = if x > 0.0 { shift / x } else { f64::INFINITY };
    if knee > lo && knee < hi {
        value += integrate(f, lo, knee, 0.5 * tol / scale)?;
        value += integrate(f, knee, hi, 0.5 * tol / scale)?;
    } else {
        value += integrate(f, lo, hi, tol / scale)?;
    }
    Ok((scale * value).clamp(0.0, 1.0))
}

/// Ceiling 2Φ(−β), reached when the attacker's channel dominates.
pub fn kmr_limit(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(2.0 * normal_cdf(-beta))
}

/// Floor 2Φ(−β)², reached when the features are independent.
pub fn kmr_floor(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let p = normal_cdf(-beta);
    Ok(2.0 * p * p)
}

/// First differences of the key match rate over `grid`, and differences of
/// the consecutive slopes (so the sign of the second entry reflects
/// curvature on a non-uniform grid).
pub fn kmr_derivative_signs(beta: f64, ratio_grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if ratio_grid.len() < 3 {
        return Err(Error::contract("ratio grid needs at least three points"));
    }
    if ratio_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::contract("ratio grid must be strictly increasing"));
    }
    let values = ratio_grid
        .iter()
        .map(|&r| theoretical_kmr(KmrQuery::new(r, beta)?))
        .collect::<Result<Vec<_>>>()?;
    let first: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let slopes: Vec<f64> = first.iter().zip(ratio_grid.windows(2)).map(|(d, w)| d / (w[1] - w[0])).collect();
    let second: Vec<f64> = slopes.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((first, second))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub ratio_db: f64,
    pub kmr: f64,
}

/// Key match rate over a grid of variance ratios σ_E²/σ_h² given in dB.
pub fn kmr_curve(beta: f64, ratio_db: &[f64]) -> Result<Vec<CurvePoint>> {
    ratio_db
        .iter()
        .map(|&db| {
            let kmr = theoretical_kmr(KmrQuery::from_variance_ratio_db(db, beta)?)?;
            Ok(CurvePoint { ratio_db: db, kmr })
        })
        .collect()
}

pub fn write_curve_csv<W: std::io::Write>(mut out: W, beta: f64, points: &[CurvePoint]) -> Result<()> {
    writeln!(out, "# beta={beta}")?;
    writeln!(out, "# kmr_limit={:.10}", kmr_limit(beta)?)?;
    writeln!(out, "ratio_db,sigma_ratio,kmr")?;
    for p in points {
        writeln!(out, "{},{:.10},{:.10}", p.ratio_db, 10f64.powf(p.ratio_db / 20.0), p.kmr)?;
    }
    Ok(())
}

/// Direct simulation of the Gaussian model behind the closed form, with
/// thresholds at the analytic ±β·σ. Returns (rate, standard error).
pub fn monte_carlo_kmr<R: Rng + ?Sized>(q: KmrQuery, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::Empty("samples"));
    }
    let q = KmrQuery::new(q.ratio, q.beta)?;
    let sigma_a = (q.ratio * q.ratio + 1.0).sqrt();
    let (ga, ge) = (q.beta * sigma_a, q.beta * q.ratio);
    let mut hits = 0usize;
    for _ in 0..samples {
        let ze = q.ratio * standard_normal(rng);
        let za = ze + standard_normal(rng);
        let same = (za > ga && ze > ge) || (za < -ga && ze < -ge);
        hits += same as usize;
    }
    let p = hits as f64 / samples as f64;
    Ok((p, (p * (1.0 - p) / samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    fn kmr(r: f64, b: f64) -> f64 {
        theoretical_kmr(KmrQuery::new(r, b).unwrap()).unwrap()
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((normal_cdf(-8.0) - 6.220_960_574_271_785e-16).abs() < 1e-27);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-14);
    }

    #[test]
    fn limit_values() {
        assert!((kmr_limit(0.1).unwrap() - 0.92034).abs() < 1e-5);
        assert!((kmr_limit(0.2).unwrap() - 0.84148).abs() < 1e-5);
        assert_eq!(kmr_limit(0.0).unwrap(), 1.0);
        assert!(kmr_limit(0.5).is_err());
    }

    #[test]
    fn large_ratio_reaches_limit() {
        assert!((kmr(1e6, 0.1) - 0.92034).abs() < 1e-4);
    }

    #[test]
    fn zero_ratio_is_independence_floor() {
        assert!((kmr(0.0, 0.1) - 0.42351).abs() < 1e-4);
        assert!((kmr(0.0, 0.1) - kmr_floor(0.1).unwrap()).abs() < 1e-9);
        assert!((kmr(0.0, 0.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn bounded_by_floor_and_limit() {
        for &b in &[0.0, 0.1, 0.25, 0.45] {
            for &r in &[0.0, 0.1, 0.7, 3.0, 50.0] {
                let v = kmr(r, b);
                assert!(v >= kmr_floor(b).unwrap() - 1e-9 && v <= kmr_limit(b).unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn tolerance_halving_is_stable() {
        for &r in &[0.3, 2.0, 40.0] {
            let q = KmrQuery::new(r, 0.2).unwrap();
            let a = theoretical_kmr_tol(q, 1e-9).unwrap();
            let b = theoretical_kmr_tol(q, 5e-10).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn shape_on_small_grid() {
        let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
        let (d1, _) = kmr_derivative_signs(0.1, &grid).unwrap();
        assert!(d1.iter().all(|&d| d > 0.0));
        let (_, d2) = kmr_derivative_signs(0.3, &grid).unwrap();
        assert!(d2.iter().all(|&d| d < 0.0));
        let (d1, _) = kmr_derivative_signs(0.0, &grid).unwrap();
        assert!(d1.iter().all(|&d| d >= 0.0));
        assert!(kmr_derivative_signs(0.1, &[1.0, 0.5, 2.0]).is_err());
    }

    #[test]
    fn agrees_with_direct_simulation() {
        let mut rng = stream(1, Domain::Aux, 0);
        for &(r, b) in &[(1.0, 0.1), (5.0, 0.3)] {
            let (p, se) = monte_carlo_kmr(KmrQuery::new(r, b).unwrap(), 200_000, &mut rng).unwrap();
            assert!((p - kmr(r, b)).abs() < 4.0 * se, "{p} {}", kmr(r, b));
        }
    }

    #[test]
    fn invalid_queries() {
        assert!(KmrQuery::new(-1.0, 0.1).is_err());
        assert!(KmrQuery::new(1.0, 0.6).is_err());
        assert!(KmrQuery::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn integrator_exact_on_polynomials_and_gaussian() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
        let g = integrate(|x| (-0.5 * x * x).exp(), -12.0, 12.0, 1e-12).unwrap();
        assert!((g - (2.0 * PI).sqrt()).abs() < 1e-10);
    }
}
