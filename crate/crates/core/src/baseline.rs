//! Comparison attackers: an untrusted amplify-and-forward relay, which keeps
//! the legitimate channel reciprocal, and a pilot spoofer, which does not.
//! Both see single-antenna Rician links drawn with the same propagation laws
//! as the surface links.

use rand::Rng;

use crate::channel::DirectChannel;
use crate::config::{distance, linear_to_db, Endpoint, Point3, ScenarioConfig};
use crate::error::{Error, Result};
use crate::rng::complex_normal;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayConfig {
    /// Relaying power gain |w̃|² (linear).
    pub gain: f64,
    pub position: Point3,
}

impl RelayConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain >= 0.0 && self.gain.is_finite()) {
            return Err(Error::config(format!("relay gain must be finite and non-negative, got {}", self.gain)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpoofingConfig {
    /// E_s/‖x_B‖² (linear).
    pub spoof_gain: f64,
    pub position: Point3,
    pub detection_snr_db: f64,
}

impl SpoofingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.spoof_gain >= 0.0 && self.spoof_gain.is_finite()) {
            return Err(Error::config(format!("spoof gain must be finite and non-negative, got {}", self.spoof_gain)));
        }
        if !self.detection_snr_db.is_finite() {
            return Err(Error::config("detection SNR must be finite"));
        }
        Ok(())
    }
}

/// Probing results of one round under a baseline attacker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackRound {
    pub psi_a: Complex64,
    pub psi_b: Complex64,
    /// The attacker's own estimate of the feature it wants to copy.
    pub psi_e: Complex64,
}

/// Single-antenna link statistics: LoS amplitude and NLoS variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLink {
    pub los: f64,
    pub nlos_var: f64,
}

impl ScalarLink {
    pub fn between(cfg: &ScenarioConfig, a: &Point3, b: &Point3) -> Result<Self> {
        let d = distance(a, b);
        if !(d > 0.0) {
            return Err(Error::domain("attacker coincides with a legitimate party"));
        }
        Ok(Self { los: cfg.los_gain(d).sqrt(), nlos_var: cfg.nlos_gain(d) })
    }

    pub fn to_endpoint(cfg: &ScenarioConfig, endpoint: Endpoint, attacker: &Point3) -> Result<Self> {
        Self::between(cfg, &cfg.endpoint_pos(endpoint), attacker)
    }

    /// E|g̃|².
    pub fn power(&self) -> f64 {
        self.los * self.los + self.nlos_var
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        Complex64::new(self.los, 0.0) + complex_normal(rng, self.nlos_var)
    }
}

fn csi_noise_vars(scenario: &ScenarioConfig) -> (f64, f64) {
    (2.0 * scenario.noise_var / scenario.pilot_power_b, 2.0 * scenario.noise_var / scenario.pilot_power_a)
}

/// Relay insertion: ψ_E = g̃_BE·w̃·g̃_AE with a fresh random relay phase.
/// Both parties see h + ψ_E plus their estimation noise; the relay combines
/// its own noisy estimates of g̃_AE and g̃_BE with the w̃ it applied.
pub fn relay_round<R: Rng + ?Sized>(
    cfg: &RelayConfig,
    h: &DirectChannel,
    scenario: &ScenarioConfig,
    rng: &mut R,
) -> Result<AttackRound> {
    cfg.validate()?;
    let la = ScalarLink::to_endpoint(scenario, Endpoint::Alice, &cfg.position)?;
    let lb = ScalarLink::to_endpoint(scenario, Endpoint::Bob, &cfg.position)?;
    let ga = la.draw(rng);
    let gb = lb.draw(rng);
    let w = Complex64::from_polar(cfg.gain.sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    let psi_e = gb * w * ga;
    let (va, vb) = csi_noise_vars(scenario);
    let psi_a = h.h + psi_e + complex_normal(rng, va);
    let psi_b = h.h + psi_e + complex_normal(rng, vb);
    let ga_hat = ga + complex_normal(rng, 2.0 * scenario.noise_var / scenario.pilot_power_a);
    let gb_hat = gb + complex_normal(rng, 2.0 * scenario.noise_var / scenario.pilot_power_b);
    Ok(AttackRound { psi_a, psi_b, psi_e: gb_hat * w * ga_hat })
}

/// E|ψ_E|² = |w̃|²·E|g̃_AE|²·E|g̃_BE|².
pub fn relay_variance(cfg: &RelayConfig, scenario: &ScenarioConfig) -> Result<f64> {
    cfg.validate()?;
    let la = ScalarLink::to_endpoint(scenario, Endpoint::Alice, &cfg.position)?;
    let lb = ScalarLink::to_endpoint(scenario, Endpoint::Bob, &cfg.position)?;
    Ok(cfg.gain * la.power() * lb.power())
}

/// LoS-only approximation |w̃|²·C0²·d_AE^(−α_L)·d_BE^(−α_L).
pub fn relay_variance_los(cfg: &RelayConfig, scenario: &ScenarioConfig) -> Result<f64> {
    cfg.validate()?;
    let la = ScalarLink::to_endpoint(scenario, Endpoint::Alice, &cfg.position)?;
    let lb = ScalarLink::to_endpoint(scenario, Endpoint::Bob, &cfg.position)?;
    Ok(cfg.gain * la.los.powi(2) * lb.los.powi(2))
}

/// Pilot spoofing: Alice's estimate is contaminated by √gain·g̃_AE, Bob's
/// is untouched, and the spoofer estimates g̃_AE from Alice's pilot.
pub fn spoof_round<R: Rng + ?Sized>(
    cfg: &SpoofingConfig,
    h: &DirectChannel,
    scenario: &ScenarioConfig,
    rng: &mut R,
) -> Result<AttackRound> {
    cfg.validate()?;
    let la = ScalarLink::to_endpoint(scenario, Endpoint::Alice, &cfg.position)?;
    let g = la.draw(rng);
    let (va, vb) = csi_noise_vars(scenario);
    let psi_a = h.h + g * cfg.spoof_gain.sqrt() + complex_normal(rng, va);
    let psi_b = h.h + complex_normal(rng, vb);
    let psi_e = g + complex_normal(rng, 2.0 * scenario.noise_var / scenario.pilot_power_a);
    Ok(AttackRound { psi_a, psi_b, psi_e })
}

/// E|ψ̂_A − ψ̂_B|² with no attacker: the sum of both estimation-noise
/// variances.
pub fn benchmark_mse(scenario: &ScenarioConfig) -> f64 {
    let (va, vb) = csi_noise_vars(scenario);
    va + vb
}

/// E|ψ̂_A − ψ̂_B|² under spoofing: gain·(|g̃_LoS|² + 2σ²) plus the benchmark.
pub fn spoof_mse(cfg: &SpoofingConfig, scenario: &ScenarioConfig) -> Result<f64> {
    cfg.validate()?;
    let la = ScalarLink::to_endpoint(scenario, Endpoint::Alice, &cfg.position)?;
    Ok(cfg.spoof_gain * la.power() + benchmark_mse(scenario))
}

/// Mean of |ψ̂_A − ψ̂_B|².
pub fn detection_mse(rounds: &[(Complex64, Complex64)]) -> Result<f64> {
    if rounds.is_empty() {
        return Err(Error::Empty("probe rounds"));
    }
    Ok(rounds.iter().map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / rounds.len() as f64)
}

/// Largest gain of an increasing gain sweep up to which every MSE stays
/// within `detection_snr_db` of the benchmark. `None` when even the smallest
/// gain is detectable.
pub fn undetectable_region(gains: &[f64], mse: &[f64], benchmark: f64, detection_snr_db: f64) -> Result<Option<f64>> {
    crate::error::check_len(gains.len(), mse.len())?;
    if gains.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::contract("gain sweep must be strictly increasing"));
    }
    if !(benchmark > 0.0) {
        return Err(Error::domain("benchmark MSE must be positive"));
    }
    let limit = linear_to_db(benchmark) + detection_snr_db;
    let mut last = None;
    for (&g, &m) in gains.iter().zip(mse) {
        if linear_to_db(m) <= limit {
            last = Some(g);
        } else {
            break;
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_direct;
    use crate::config::db_to_linear;
    use crate::rng::{stream, Domain};

    fn relay(gain: f64) -> RelayConfig {
        RelayConfig { gain, position: ScenarioConfig::preset().pos_eve }
    }

    fn spoof(gain: f64) -> SpoofingConfig {
        SpoofingConfig { spoof_gain: gain, position: ScenarioConfig::preset().pos_eve, detection_snr_db: 1.0 }
    }

    #[test]
    fn zero_gain_relay_inserts_nothing() {
        let s = ScenarioConfig::preset();
        let mut rng = stream(1, Domain::Aux, 0);
        let h = sample_direct(&s, &mut rng);
        let r = relay_round(&relay(0.0), &h, &s, &mut rng).unwrap();
        assert_eq!(r.psi_e, Complex64::new(0.0, 0.0));
        assert!((r.psi_a - h.h).norm_sqr() < 50.0 * benchmark_mse(&s));
    }

    #[test]
    fn relay_variance_closed_forms() {
        let s = ScenarioConfig::preset();
        let cfg = relay(1e6);
        let approx = relay_variance_los(&cfg, &s).unwrap();
        assert!((approx - 1e6 * 1e-6 / (125.0 * 1625.0)).abs() < 1e-12 * approx);
        let exact = relay_variance(&cfg, &s).unwrap();
        let want = 1e6 * (1e-3 / 125.0 + 1e-3 / 125f64.powf(1.5)) * (1e-3 / 1625.0 + 1e-3 / 1625f64.powf(1.5));
        assert!((exact - want).abs() < 1e-12 * want);
    }

    #[test]
    fn relay_monte_carlo_variance() {
        let s = ScenarioConfig::preset();
        let cfg = relay(1e6);
        let mut rng = stream(2, Domain::Aux, 0);
        let h = DirectChannel { h: Complex64::new(0.0, 0.0), var2: 0.0 };
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let r = relay_round(&cfg, &h, &s, &mut rng).unwrap();
            acc += (r.psi_a.norm_sqr() - csi_noise_vars(&s).0) / n as f64;
        }
        let want = relay_variance(&cfg, &s).unwrap();
        assert!((acc / want - 1.0).abs() < 0.05, "{acc} vs {want}");
    }

    #[test]
    fn relay_keeps_reciprocity() {
        let s = ScenarioConfig::preset();
        let mut rng = stream(3, Domain::Aux, 0);
        let rounds: Vec<_> = (0..20_000)
            .map(|_| {
                let h = sample_direct(&s, &mut rng);
                let r = relay_round(&relay(1e6), &h, &s, &mut rng).unwrap();
                (r.psi_a, r.psi_b)
            })
            .collect();
        let mse = detection_mse(&rounds).unwrap();
        assert!((mse / benchmark_mse(&s) - 1.0).abs() < 0.05);
    }

    #[test]
    fn spoof_mse_matches_expansion() {
        let s = ScenarioConfig::preset();
        let mut rng = stream(4, Domain::Aux, 0);
        for db in [-50.0, -40.0, -30.0] {
            let cfg = spoof(db_to_linear(db));
            let rounds: Vec<_> = (0..100_000)
                .map(|_| {
                    let h = sample_direct(&s, &mut rng);
                    let r = spoof_round(&cfg, &h, &s, &mut rng).unwrap();
                    (r.psi_a, r.psi_b)
                })
                .collect();
            let mc = detection_mse(&rounds).unwrap();
            let want = spoof_mse(&cfg, &s).unwrap();
            assert!((mc / want - 1.0).abs() < 0.05, "{db}: {mc} vs {want}");
        }
    }

    #[test]
    fn spoof_mse_grows_with_gain() {
        let s = ScenarioConfig::preset();
        let b = benchmark_mse(&s);
        assert!((b - 4e-10).abs() < 1e-22);
        let lo = spoof_mse(&spoof(1e-4), &s).unwrap() - b;
        let hi = spoof_mse(&spoof(1e-3), &s).unwrap() - b;
        assert!((hi / lo - 10.0).abs() < 1e-9);
        assert_eq!(spoof_mse(&spoof(0.0), &s).unwrap(), b);
    }

    #[test]
    fn detection_mse_basics() {
        let z = Complex64::new(1.0, 2.0);
        assert_eq!(detection_mse(&[(z, z), (z, z)]).unwrap(), 0.0);
        assert!(detection_mse(&[]).is_err());
    }

    #[test]
    fn undetectable_threshold() {
        let gains = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(undetectable_region(&gains, &[1.0; 4], 1.0, 0.0).unwrap(), Some(4.0));
        assert_eq!(undetectable_region(&gains, &[1.0, 1.0, 1.5, 3.0], 1.0, 0.0).unwrap(), Some(2.0));
        assert_eq!(undetectable_region(&gains, &[1.0, 1.0, 1.2, 3.0], 1.0, 1.0).unwrap(), Some(3.0));
        assert_eq!(undetectable_region(&gains, &[5.0; 4], 1.0, 1.0).unwrap(), None);
        assert!(undetectable_region(&[2.0, 1.0], &[1.0, 1.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn spoof_threshold_near_minus_49_db() {
        let s = ScenarioConfig::preset();
        let gains: Vec<f64> = (0..=180).map(|k| -60.0 + 0.5 * k as f64).collect();
        let lin: Vec<f64> = gains.iter().map(|&g| db_to_linear(g)).collect();
        let mse: Vec<f64> = lin.iter().map(|&g| spoof_mse(&spoof(g), &s).unwrap()).collect();
        let t = undetectable_region(&lin, &mse, benchmark_mse(&s), 1.0).unwrap().unwrap();
        let t_db = linear_to_db(t);
        assert!((-50.0..=-48.0).contains(&t_db), "{t_db}");
    }
}
