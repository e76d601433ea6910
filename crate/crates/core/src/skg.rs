//! Legitimate key generation: channel probing, quantization and key
//! agreement metrics.
//!
//! Two probing schemes are modelled. In the CSI scheme each side estimates
//! the reciprocal channel h + h_E from the other's pilot. In the two-way
//! scheme both sides send random scalar pilots and multiply what they sent
//! by what they received, so the shared feature is (h + h_E)·q_A·q_B.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::DirectChannel;
use crate::config::ScenarioConfig;
use crate::error::{check_len, Error, Result};
use crate::rng::complex_normal;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Csi,
    Twoway,
}

/// Outcome of one probing round for both legitimate parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRound {
    pub scheme: Scheme,
    /// ĥ_A (CSI) or φ̂_A (two-way).
    pub feature_a: Complex64,
    /// ĥ_B (CSI) or φ̂_B (two-way).
    pub feature_b: Complex64,
    /// (q_A, q_B) for the two-way scheme.
    pub pilots: Option<(Complex64, Complex64)>,
    /// Additive error on each feature: n̂ for CSI, ε̂ = n·q for two-way.
    pub noise_a: Complex64,
    pub noise_b: Complex64,
}

/// ĥ_A = (h + h_E) + n̂_A with n̂_A ~ CN(0, 2σ_n²/‖x_B‖²), and symmetrically
/// for Bob.
pub fn csi_probe<R: Rng + ?Sized>(
    h: &DirectChannel,
    h_e: Complex64,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<ProbeRound> {
    if !(cfg.pilot_power_a > 0.0 && cfg.pilot_power_b > 0.0) {
        return Err(Error::domain("CSI probing needs positive pilot powers"));
    }
    let shared = h.h + h_e;
    let noise_a = complex_normal(rng, 2.0 * cfg.noise_var / cfg.pilot_power_b);
    let noise_b = complex_normal(rng, 2.0 * cfg.noise_var / cfg.pilot_power_a);
    Ok(ProbeRound {
        scheme: Scheme::Csi,
        feature_a: shared + noise_a,
        feature_b: shared + noise_b,
        pilots: None,
        noise_a,
        noise_b,
    })
}

/// Draw the two random pilots q_A, q_B ~ CN(0, P).
pub fn draw_pilots<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> (Complex64, Complex64) {
    (complex_normal(rng, cfg.twoway_power), complex_normal(rng, cfg.twoway_power))
}

/// Two-way probing with given pilots: v_A = (h + h_E)·q_B + n_A,
/// φ̂_A = v_A·q_A, and symmetrically for Bob; n ~ CN(0, 2σ_n²).
pub fn twoway_probe_with<R: Rng + ?Sized>(
    h: &DirectChannel,
    h_e: Complex64,
    pilots: (Complex64, Complex64),
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> ProbeRound {
    let (qa, qb) = pilots;
    let shared = h.h + h_e;
    let na = complex_normal(rng, 2.0 * cfg.noise_var);
    let nb = complex_normal(rng, 2.0 * cfg.noise_var);
    let product = shared * (qa * qb);
    ProbeRound {
        scheme: Scheme::Twoway,
        feature_a: product + na * qa,
        feature_b: product + nb * qb,
        pilots: Some(pilots),
        noise_a: na * qa,
        noise_b: nb * qb,
    }
}

pub fn twoway_probe<R: Rng + ?Sized>(
    h: &DirectChannel,
    h_e: Complex64,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<ProbeRound> {
    if !(cfg.twoway_power > 0.0) {
        return Err(Error::domain("two-way probing needs a positive pilot power"));
    }
    let pilots = draw_pilots(cfg, rng);
    Ok(twoway_probe_with(h, h_e, pilots, cfg, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyBit {
    One,
    Zero,
    Dropped,
}

impl KeyBit {
    pub fn is_bit(self) -> bool {
        self != KeyBit::Dropped
    }

    fn as_char(self) -> char {
        match self {
            KeyBit::One => '1',
            KeyBit::Zero => '0',
            KeyBit::Dropped => '-',
        }
    }
}

/// Quantizer output for one party over one block of rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyStream {
    pub outcomes: Vec<KeyBit>,
    /// (γ_0, γ_1).
    pub thresholds: (f64, f64),
    /// (mean, population standard deviation) of the block.
    pub block_stats: (f64, f64),
    /// The block had zero variance and every round was dropped.
    pub degenerate: bool,
}

impl KeyStream {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn drop_rate(&self) -> f64 {
        let dropped = self.outcomes.iter().filter(|b| !b.is_bit()).count();
        dropped as f64 / self.outcomes.len().max(1) as f64
    }

    /// Outcome string with one character per round ('1', '0' or '-').
    pub fn to_text(&self) -> String {
        self.outcomes.iter().map(|b| b.as_char()).collect()
    }

    /// Parse the text form. Thresholds and block statistics are not part of
    /// the text and come back as NaN.
    pub fn from_text(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for KeyStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for KeyStream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let outcomes = s
            .chars()
            .map(|c| match c {
                '1' => Ok(KeyBit::One),
                '0' => Ok(KeyBit::Zero),
                '-' => Ok(KeyBit::Dropped),
                other => Err(Error::domain(format!("invalid key character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KeyStream {
            outcomes,
            thresholds: (f64::NAN, f64::NAN),
            block_stats: (f64::NAN, f64::NAN),
            degenerate: false,
        })
    }
}

/// Two-threshold quantizer with thresholds mean ± β·std of the block.
///
/// β may be anywhere in [0, 0.5]; samples exactly on a threshold are dropped.
pub fn quantize_block(features: &[f64], beta: f64) -> Result<KeyStream> {
    if features.len() < 2 {
        return Err(Error::contract("quantization block needs at least two samples"));
    }
    if !(0.0..=0.5).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [0, 0.5], got {beta}")));
    }
    let n = features.len() as f64;
    let mean = features.iter().sum::<f64>() / n;
    let var = features.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let (g0, g1) = (mean - beta * std, mean + beta * std);
    if !(std > 0.0) {
        return Ok(KeyStream {
            outcomes: vec![KeyBit::Dropped; features.len()],
            thresholds: (g0, g1),
            block_stats: (mean, std),
            degenerate: true,
        });
    }
    let outcomes = features
        .iter()
        .map(|&z| {
            if z > g1 {
                KeyBit::One
            } else if z < g0 {
                KeyBit::Zero
            } else {
                KeyBit::Dropped
            }
        })
        .collect();
    Ok(KeyStream { outcomes, thresholds: (g0, g1), block_stats: (mean, std), degenerate: false })
}

/// Fraction of rounds where both streams emitted the same bit.
pub fn key_match_rate(a: &KeyStream, b: &KeyStream) -> Result<f64> {
    check_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::Empty("key stream"));
    }
    let hits = a
        .outcomes
        .iter()
        .zip(&b.outcomes)
        .filter(|(x, y)| x.is_bit() && x == y)
        .count();
    Ok(hits as f64 / a.len() as f64)
}

/// How an attacker round without a bit enters the available key rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DroppedAttacker {
    /// A dropped attacker round differs from any bit, so the legitimate bit
    /// is available.
    #[default]
    Differs,
    /// Rounds where the attacker dropped are not counted as available.
    Excluded,
}

/// Fraction of rounds where a and b emit the same bit and e does not hold it.
pub fn available_key_rate(a: &KeyStream, b: &KeyStream, e: &KeyStream, convention: DroppedAttacker) -> Result<f64> {
    check_len(a.len(), b.len())?;
    check_len(a.len(), e.len())?;
    if a.is_empty() {
        return Err(Error::Empty("key stream"));
    }
    let hits = a
        .outcomes
        .iter()
        .zip(&b.outcomes)
        .zip(&e.outcomes)
        .filter(|((x, y), z)| {
            x.is_bit()
                && x == y
                && match convention {
                    DroppedAttacker::Differs => z != x,
                    DroppedAttacker::Excluded => z.is_bit() && z != x,
                }
        })
        .count();
    Ok(hits as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{standard_normal, stream, Domain};
    use crate::theory::normal_cdf;
    use proptest::prelude::*;

    use KeyBit::{Dropped, One, Zero};

    #[test]
    fn hand_computed_block() {
        let k = quantize_block(&[3.0, -3.0, 1.0, -1.0, 0.0], 0.5).unwrap();
        assert_eq!(k.block_stats, (0.0, 2.0));
        assert_eq!(k.thresholds, (-1.0, 1.0));
        assert_eq!(k.outcomes, vec![One, Zero, Dropped, Dropped, Dropped]);
        assert!(quantize_block(&[3.0, -3.0, 1.0, -1.0, 0.0], 0.51).is_err());
    }

    #[test]
    fn boundary_samples_are_dropped() {
        // Thresholds land exactly on ±1 for β = 0.25 and std 4.
        let k = quantize_block(&[6.0, -6.0, 1.0, -1.0, 0.0, 2.0, -2.0], 0.25).unwrap();
        let (g0, g1) = k.thresholds;
        for (z, b) in [6.0, -6.0, 1.0, -1.0, 0.0, 2.0, -2.0].iter().zip(&k.outcomes) {
            let want = if *z > g1 { One } else if *z < g0 { Zero } else { Dropped };
            assert_eq!(*b, want);
        }
    }

    #[test]
    fn zero_beta_keeps_every_sample() {
        let mut rng = stream(1, Domain::Aux, 0);
        let z: Vec<f64> = (0..1000).map(|_| standard_normal(&mut rng)).collect();
        assert_eq!(quantize_block(&z, 0.0).unwrap().drop_rate(), 0.0);
    }

    #[test]
    fn constant_block_is_flagged() {
        let k = quantize_block(&[1.5; 10], 0.1).unwrap();
        assert!(k.degenerate);
        assert_eq!(k.drop_rate(), 1.0);
        assert!(quantize_block(&[1.0], 0.1).is_err());
    }

    #[test]
    fn gaussian_emission_probability() {
        let mut rng = stream(2, Domain::Aux, 0);
        let n = 200_000;
        let z: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let k = quantize_block(&z, 0.1).unwrap();
        let p = 1.0 - k.drop_rate();
        let want = 2.0 * normal_cdf(-0.1);
        assert!((p - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt());
    }

    #[test]
    fn match_rate_edge_cases() {
        let ones: KeyStream = "1111".parse().unwrap();
        let drops: KeyStream = "----".parse().unwrap();
        assert_eq!(key_match_rate(&ones, &ones).unwrap(), 1.0);
        assert_eq!(key_match_rate(&ones, &drops).unwrap(), 0.0);
        assert!(key_match_rate(&ones, &"11".parse().unwrap()).is_err());
    }

    #[test]
    fn identical_gaussian_features_reach_limit() {
        let mut rng = stream(3, Domain::Aux, 0);
        let z: Vec<f64> = (0..200_000).map(|_| standard_normal(&mut rng)).collect();
        let k = quantize_block(&z, 0.1).unwrap();
        assert!((key_match_rate(&k, &k).unwrap() - 0.9204).abs() < 0.003);
    }

    #[test]
    fn available_rate_conventions() {
        let a: KeyStream = "1100-".parse().unwrap();
        let e_same = a.clone();
        assert_eq!(available_key_rate(&a, &a, &e_same, DroppedAttacker::Differs).unwrap(), 0.0);
        let e_drop: KeyStream = "-----".parse().unwrap();
        let kmr = key_match_rate(&a, &a).unwrap();
        assert_eq!(available_key_rate(&a, &a, &e_drop, DroppedAttacker::Differs).unwrap(), kmr);
        assert_eq!(available_key_rate(&a, &a, &e_drop, DroppedAttacker::Excluded).unwrap(), 0.0);
        let e_flip: KeyStream = "0-11-".parse().unwrap();
        assert_eq!(available_key_rate(&a, &a, &e_flip, DroppedAttacker::Differs).unwrap(), 0.8);
        assert_eq!(available_key_rate(&a, &a, &e_flip, DroppedAttacker::Excluded).unwrap(), 0.6);
    }

    #[test]
    fn independent_attacker_closed_form() {
        let mut rng = stream(4, Domain::Aux, 0);
        let n = 200_000;
        let za: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let ze: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let ka = quantize_block(&za, 0.2).unwrap();
        let ke = quantize_block(&ze, 0.2).unwrap();
        let akr = available_key_rate(&ka, &ka, &ke, DroppedAttacker::Differs).unwrap();
        let p = normal_cdf(-0.2);
        let want = 2.0 * p * (1.0 - p);
        assert!((akr - want).abs() < 0.005, "{akr} {want}");
    }

    #[test]
    fn text_roundtrip() {
        let k: KeyStream = "10-01--1".parse().unwrap();
        assert_eq!(k.to_string(), "10-01--1");
        assert!("10x".parse::<KeyStream>().is_err());
    }

    #[test]
    fn csi_noise_statistics() {
        let cfg = ScenarioConfig::preset();
        let mut rng = stream(5, Domain::Aux, 0);
        let n = 100_000;
        let mut mse = 0.0;
        let mut na = 0.0;
        for _ in 0..n {
            let h = crate::channel::sample_direct(&cfg, &mut rng);
            let p = csi_probe(&h, Complex64::new(0.0, 0.0), &cfg, &mut rng).unwrap();
            mse += (p.feature_a - p.feature_b).norm_sqr();
            na += p.noise_a.norm_sqr();
        }
        assert!((mse / n as f64 / 4e-10 - 1.0).abs() < 0.03);
        assert!((na / n as f64 / 2e-10 - 1.0).abs() < 0.03);
    }

    #[test]
    fn noiseless_probes_agree() {
        let mut cfg = ScenarioConfig::preset();
        cfg.noise_var = 0.0;
        let mut rng = stream(6, Domain::Aux, 0);
        let h = crate::channel::sample_direct(&cfg, &mut rng);
        let he = Complex64::new(1e-5, -2e-5);
        let p = csi_probe(&h, he, &cfg, &mut rng).unwrap();
        assert_eq!(p.feature_a, h.h + he);
        assert_eq!(p.feature_b, h.h + he);
        let t = twoway_probe(&h, he, &cfg, &mut rng).unwrap();
        assert_eq!(t.feature_a, t.feature_b);
        let one = Complex64::new(1.0, 0.0);
        let u = twoway_probe_with(&h, he, (one, one), &cfg, &mut rng);
        assert_eq!(u.feature_a, h.h + he);
    }

    #[test]
    fn twoway_feature_is_heavy_tailed() {
        let cfg = ScenarioConfig::preset();
        let mut rng = stream(7, Domain::Aux, 0);
        let n = 100_000;
        let z: Vec<f64> = (0..n)
            .map(|_| {
                let h = crate::channel::sample_direct(&cfg, &mut rng);
                twoway_probe(&h, Complex64::new(0.0, 0.0), &cfg, &mut rng).unwrap().feature_a.re
            })
            .collect();
        let mean = z.iter().sum::<f64>() / n as f64;
        let m2 = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        assert!(m4 / (m2 * m2) - 3.0 > 1.0);
    }

    fn stream_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 2..200)
    }

    proptest! {
        #[test]
        fn negation_swaps_bits(z in stream_strategy(), beta in 0.0f64..0.49) {
            let k = quantize_block(&z, beta).unwrap();
            let neg: Vec<f64> = z.iter().map(|x| -x).collect();
            let kn = quantize_block(&neg, beta).unwrap();
            for (a, b) in k.outcomes.iter().zip(&kn.outcomes) {
                let want = match a { One => Zero, Zero => One, Dropped => Dropped };
                prop_assert_eq!(*b, want);
            }
        }

        #[test]
        fn affine_invariance(z in stream_strategy(), beta in 0.0f64..0.49, a in 0.01f64..100.0, b in -100.0f64..100.0) {
            let k = quantize_block(&z, beta).unwrap();
            let t: Vec<f64> = z.iter().map(|x| a * x + b).collect();
            let kt = quantize_block(&t, beta).unwrap();
            let (g0, g1) = k.thresholds;
            let scale = k.block_stats.1.max(1.0);
            for ((x, p), q) in z.iter().zip(&k.outcomes).zip(&kt.outcomes) {
                let near = (x - g0).abs() < 1e-9 * scale || (x - g1).abs() < 1e-9 * scale;
                if !near {
                    prop_assert_eq!(p, q);
                }
            }
        }

        #[test]
        fn thresholds_ordered(z in stream_strategy(), beta in 0.0f64..0.49) {
            let k = quantize_block(&z, beta).unwrap();
            prop_assert!(k.thresholds.1 >= k.thresholds.0);
            if beta == 0.0 {
                prop_assert_eq!(k.thresholds.0, k.thresholds.1);
            }
        }
    }
}
