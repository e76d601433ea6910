//! Direct and surface-link channel sampling.
//!
//! A surface link is split into a deterministic [`LinkLayout`] (LoS angle and
//! gain, NLoS path angles, steering vectors) that stays fixed for a scatterer
//! epoch, and per-round complex path gains. [`RisLinkChannel`] is one
//! realization of a layout.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::config::{Endpoint, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{check_angle, los_angles, steering_entries, steering_vector, UpaGeometry};
use crate::rng::complex_normal;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectChannel {
    pub h: Complex64,
    /// Total variance 2σ_h².
    pub var2: f64,
}

pub fn sample_direct<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> DirectChannel {
    let var2 = cfg.direct_var2();
    DirectChannel { h: complex_normal(rng, var2), var2 }
}

/// Draw `iota` NLoS (el, az) pairs uniformly on [-π/2, π/2]².
pub fn sample_path_angles<R: Rng + ?Sized>(iota: usize, rng: &mut R) -> Vec<(f64, f64)> {
    (0..iota)
        .map(|_| (rng.gen_range(-FRAC_PI_2..=FRAC_PI_2), rng.gen_range(-FRAC_PI_2..=FRAC_PI_2)))
        .collect()
}

/// Deterministic part of one endpoint-to-surface link.
#[derive(Debug, Clone)]
pub struct LinkLayout {
    pub endpoint: Endpoint,
    pub distance: f64,
    pub los_angle: (f64, f64),
    /// √(C0·d^(-α_L)).
    pub los_amplitude: f64,
    /// C0·d^(-α_N), the variance of each NLoS gain ρ_n.
    pub nlos_power: f64,
    pub path_angles: Vec<(f64, f64)>,
    pub lambda: f64,
    pub g_los: Vec<Complex64>,
    /// One steering vector per NLoS path.
    pub steering: Vec<Vec<Complex64>>,
}

impl LinkLayout {
    pub fn new(
        cfg: &ScenarioConfig,
        geom: &UpaGeometry,
        endpoint: Endpoint,
        path_angles: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let los_angle = los_angles(&cfg.pos_eve, &cfg.endpoint_pos(endpoint))?;
        Self::with_los_angle(cfg, geom, endpoint, los_angle, path_angles)
    }

    /// Like [`LinkLayout::new`] but with the LoS arrival angle supplied
    /// instead of derived from the positions.
    pub fn with_los_angle(
        cfg: &ScenarioConfig,
        geom: &UpaGeometry,
        endpoint: Endpoint,
        los_angle: (f64, f64),
        path_angles: Vec<(f64, f64)>,
    ) -> Result<Self> {
        check_angle("LoS elevation", los_angle.0)?;
        check_angle("LoS azimuth", los_angle.1)?;
        if path_angles.len() != cfg.iota {
            return Err(Error::contract(format!(
                "expected {} path angle pairs, got {}",
                cfg.iota,
                path_angles.len()
            )));
        }
        for &(el, az) in &path_angles {
            check_angle("path elevation", el)?;
            check_angle("path azimuth", az)?;
        }
        let distance = cfg.endpoint_distance(endpoint);
        let los_amplitude = cfg.los_gain(distance).sqrt();
        let g_los = steering_vector(geom, los_angle.0, los_angle.1, cfg.lambda)?
            .into_iter()
            .map(|u| u * los_amplitude)
            .collect();
        let steering = path_angles
            .iter()
            .map(|&(el, az)| steering_vector(geom, el, az, cfg.lambda))
            .collect::<Result<_>>()?;
        Ok(Self {
            endpoint,
            distance,
            los_angle,
            los_amplitude,
            nlos_power: cfg.nlos_gain(distance),
            path_angles,
            lambda: cfg.lambda,
            g_los,
            steering,
        })
    }

    pub fn sample<R: Rng + ?Sized>(
        cfg: &ScenarioConfig,
        geom: &UpaGeometry,
        endpoint: Endpoint,
        rng: &mut R,
    ) -> Result<Self> {
        let angles = sample_path_angles(cfg.iota, rng);
        Self::new(cfg, geom, endpoint, angles)
    }

    pub fn num_elements(&self) -> usize {
        self.g_los.len()
    }

    pub fn iota(&self) -> usize {
        self.steering.len()
    }

    /// Per-path weight p/ι of the NLoS covariance.
    pub fn path_weight(&self) -> f64 {
        self.nlos_power / self.iota() as f64
    }

    pub fn draw_gains<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        (0..self.iota()).map(|_| complex_normal(rng, self.nlos_power)).collect()
    }

    /// Entries of g = g_los + Σ_n (ρ_n/√ι)·u_n at the given rows.
    pub fn entries(&self, geom: &UpaGeometry, rows: &[usize], gains: &[Complex64]) -> Vec<Complex64> {
        let s = 1.0 / (self.iota() as f64).sqrt();
        let mut out = steering_entries(geom, self.los_angle.0, self.los_angle.1, self.lambda, rows);
        for v in &mut out {
            *v *= self.los_amplitude;
        }
        for (&(el, az), rho) in self.path_angles.iter().zip(gains) {
            let u = steering_entries(geom, el, az, self.lambda, rows);
            for (o, x) in out.iter_mut().zip(u) {
                *o += rho * s * x;
            }
        }
        out
    }

    /// g = g_los + Σ_n (ρ_n/√ι)·u_n over all elements.
    pub fn compose(&self, gains: &[Complex64]) -> Vec<Complex64> {
        let s = 1.0 / (self.iota() as f64).sqrt();
        let mut g = self.g_los.clone();
        for (u, rho) in self.steering.iter().zip(gains) {
            let c = rho * s;
            for (gi, ui) in g.iter_mut().zip(u) {
                *gi += c * ui;
            }
        }
        g
    }

    pub fn realize(self: &Arc<Self>, gains: Vec<Complex64>) -> Result<RisLinkChannel> {
        crate::error::check_len(self.iota(), gains.len())?;
        let g = self.compose(&gains);
        Ok(RisLinkChannel { layout: Arc::clone(self), path_gains: gains, g })
    }

    /// E[g_nlos g_nlosᴴ] = Σ_n (p/ι)·u_n u_nᴴ as a dense matrix.
    pub fn cov2(&self) -> DMatrix<Complex64> {
        let m = self.num_elements();
        let w = self.path_weight();
        DMatrix::from_fn(m, m, |i, j| {
            self.steering.iter().map(|u| u[i] * u[j].conj()).sum::<Complex64>() * w
        })
    }

    /// Diagonal of the NLoS covariance; every entry equals C0·d^(-α_N).
    pub fn cov2_diag(&self) -> Vec<f64> {
        vec![self.path_weight() * self.iota() as f64; self.num_elements()]
    }
}

/// One realization of a surface link.
#[derive(Debug, Clone)]
pub struct RisLinkChannel {
    pub layout: Arc<LinkLayout>,
    pub path_gains: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl RisLinkChannel {
    pub fn g_los(&self) -> &[Complex64] {
        &self.layout.g_los
    }

    pub fn path_angles(&self) -> &[(f64, f64)] {
        &self.layout.path_angles
    }

    pub fn cov2(&self) -> DMatrix<Complex64> {
        self.layout.cov2()
    }

    /// Rebuild g from the stored components.
    pub fn recompose(&self) -> Vec<Complex64> {
        self.layout.compose(&self.path_gains)
    }
}

/// Sample one link; `angles = None` draws fresh NLoS angles.
pub fn sample_ris_link<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    geom: &UpaGeometry,
    endpoint: Endpoint,
    angles: Option<&[(f64, f64)]>,
    rng: &mut R,
) -> Result<RisLinkChannel> {
    let angles = match angles {
        Some(a) => a.to_vec(),
        None => sample_path_angles(cfg.iota, rng),
    };
    let layout = Arc::new(LinkLayout::new(cfg, geom, endpoint, angles)?);
    let gains = layout.draw_gains(rng);
    layout.realize(gains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    #[test]
    fn direct_variance_and_mean() {
        let cfg = ScenarioConfig::preset();
        let mut rng = stream(3, Domain::Aux, 0);
        let n = 100_000;
        let draws: Vec<Complex64> = (0..n).map(|_| sample_direct(&cfg, &mut rng).h).collect();
        let var = draws.iter().map(|h| h.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var / 8e-9 - 1.0).abs() < 0.03, "{var}");
        let mean: Complex64 = draws.iter().sum::<Complex64>() / n as f64;
        let se = (8e-9 / 2.0 / n as f64).sqrt();
        assert!(mean.re.abs() < 3.0 * se && mean.im.abs() < 3.0 * se);
    }

    #[test]
    fn path_loss_monotone_in_distance() {
        let mut cfg = ScenarioConfig::preset();
        let near = cfg.direct_var2();
        cfg.pos_bob = [0.0, 60.0, 0.0];
        assert!(cfg.direct_var2() < near);
    }

    #[test]
    fn preset_los_energy() {
        let cfg = ScenarioConfig::preset();
        let geom = UpaGeometry::from_config(&cfg).unwrap();
        let mut rng = stream(1, Domain::Aux, 0);
        let link = sample_ris_link(&cfg, &geom, Endpoint::Alice, None, &mut rng).unwrap();
        let e: f64 = link.g_los().iter().map(|x| x.norm_sqr()).sum();
        assert!((e / 100.0 - 8e-6).abs() < 1e-18);
        assert!((link.layout.distance - 125f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn realization_recomposes_exactly() {
        let cfg = ScenarioConfig::preset();
        let geom = UpaGeometry::from_config(&cfg).unwrap();
        let mut rng = stream(2, Domain::Aux, 0);
        let link = sample_ris_link(&cfg, &geom, Endpoint::Bob, None, &mut rng).unwrap();
        assert_eq!(link.g, link.recompose());
        let rows: Vec<usize> = vec![0, 7, 42, 99];
        let sub = link.layout.entries(&geom, &rows, &link.path_gains);
        for (k, &r) in rows.iter().enumerate() {
            assert!((sub[k] - link.g[r]).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_nlos_power_leaves_los_only() {
        let mut cfg = ScenarioConfig::preset();
        cfg.alpha_nlos = 400.0;
        let geom = UpaGeometry::from_config(&cfg).unwrap();
        let mut rng = stream(4, Domain::Aux, 0);
        let link = sample_ris_link(&cfg, &geom, Endpoint::Alice, None, &mut rng).unwrap();
        assert_eq!(link.layout.nlos_power, 0.0);
        assert_eq!(link.g, link.g_los());
    }

    #[test]
    fn cov2_hermitian_psd_with_expected_trace() {
        let mut cfg = ScenarioConfig::preset().with_square_ris(4);
        cfg.elem_spacing = cfg.lambda / 8.0;
        let geom = UpaGeometry::from_config(&cfg).unwrap();
        let mut rng = stream(5, Domain::Aux, 0);
        let layout = LinkLayout::sample(&cfg, &geom, Endpoint::Alice, &mut rng).unwrap();
        let c = layout.cov2();
        assert!((&c - c.adjoint()).norm() < 1e-20);
        let tr: f64 = c.diagonal().iter().map(|z| z.re).sum();
        assert!((tr / (16.0 * layout.nlos_power) - 1.0).abs() < 1e-12);
        let eig = c.symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l > -1e-12 * layout.nlos_power));
    }

    #[test]
    fn single_path_covariance_matches_monte_carlo() {
        let mut cfg = ScenarioConfig::preset().with_square_ris(3);
        cfg.iota = 1;
        let geom = UpaGeometry::from_config(&cfg).unwrap();
        let layout = Arc::new(LinkLayout::new(&cfg, &geom, Endpoint::Alice, vec![(0.4, -0.9)]).unwrap());
        let mut rng = stream(6, Domain::Aux, 0);
        let n = 100_000;
        let m = 9;
        let mut acc = DMatrix::<Complex64>::zeros(m, m);
        for _ in 0..n {
            let ch = layout.realize(layout.draw_gains(&mut rng)).unwrap();
            let d: Vec<Complex64> = ch.g.iter().zip(&layout.g_los).map(|(a, b)| a - b).collect();
            for i in 0..m {
                for j in 0..m {
                    acc[(i, j)] += d[i] * d[j].conj();
                }
            }
        }
        acc /= Complex64::from(n as f64);
        let want = layout.cov2();
        let rel = (&acc - &want).norm() / want.norm();
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn fixed_angles_must_match_iota() {
        let cfg = ScenarioConfig::preset();
        let geom = UpaGeometry::from_config(&cfg).unwrap();
        let mut rng = stream(7, Domain::Aux, 0);
        assert!(sample_ris_link(&cfg, &geom, Endpoint::Alice, Some(&[(0.0, 0.0)]), &mut rng).is_err());
        assert!(sample_ris_link(&cfg, &geom, Endpoint::Alice, Some(&[(2.0, 0.0); 4]), &mut rng).is_err());
    }
}
