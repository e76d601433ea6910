//! Surface phase state, the deceiving channel and its statistics.
//!
//! The deceiving channel is h_E = Σ_m w_m·g_A,m·g_B,m. With random phases it
//! is zero-mean with variance set by the per-element second moments; with a
//! fixed phase vector its variance is 2·wᴴGw where
//!
//! G = 2Σ_A⊙Σ_B + diag(g_B,los)*·Σ_A·diag(g_B,los) + diag(g_A,los)*·Σ_B·diag(g_A,los)
//!
//! and Σ = conj(E[g_nlos g_nlosᴴ]) / 2. Every term of G is a sum of rank-one
//! pieces built from steering vectors, which gives the matrix-free
//! [`VarianceOperator`] used for large surfaces.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng;

use crate::channel::LinkLayout;
use crate::config::ScenarioConfig;
use crate::error::{check_len, Error, Result};
use crate::linalg::{dotu, HermitianOperator};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub amp_gain: f64,
    /// Phases in [0, 2π).
    pub phases: Vec<f64>,
}

fn wrap_phase(p: f64) -> f64 {
    let r = p.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl PhaseVector {
    pub fn new(amp_gain: f64, phases: Vec<f64>) -> Result<Self> {
        if !(amp_gain >= 0.0 && amp_gain.is_finite()) {
            return Err(Error::domain(format!("amplitude gain must be non-negative, got {amp_gain}")));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("phase is not finite"));
        }
        Ok(Self { amp_gain, phases: phases.into_iter().map(wrap_phase).collect() })
    }

    pub fn zeros(m: usize, amp_gain: f64) -> Self {
        Self { amp_gain, phases: vec![0.0; m] }
    }

    /// Independent uniform phases.
    pub fn random<R: Rng + ?Sized>(m: usize, amp_gain: f64, rng: &mut R) -> Self {
        Self { amp_gain, phases: (0..m).map(|_| rng.gen_range(0.0..TAU)).collect() }
    }

    /// Phases taken from the arguments of `v`; zero entries get phase 0.
    pub fn from_directions(amp_gain: f64, v: &[Complex64]) -> Self {
        let phases = v
            .iter()
            .map(|z| if z.norm_sqr() > 0.0 { wrap_phase(z.arg()) } else { 0.0 })
            .collect();
        Self { amp_gain, phases }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// w_m = √A_E·exp(jθ_m).
    pub fn weights(&self) -> Vec<Complex64> {
        let a = self.amp_gain.sqrt();
        self.phases.iter().map(|&p| Complex64::from_polar(a, p)).collect()
    }
}

/// h_E = g_Bᵀ·diag(w)·g_A.
pub fn deceiving_channel(w: &PhaseVector, g_a: &[Complex64], g_b: &[Complex64]) -> Result<Complex64> {
    check_len(w.len(), g_a.len())?;
    check_len(w.len(), g_b.len())?;
    Ok(deceiving_channel_weights(&w.weights(), g_a, g_b))
}

pub fn deceiving_channel_weights(w: &[Complex64], g_a: &[Complex64], g_b: &[Complex64]) -> Complex64 {
    w.iter().zip(g_a).zip(g_b).map(|((w, a), b)| w * a * b).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeceptionStats {
    pub mu_e: Complex64,
    /// σ_E²; h_E has total variance 2σ_E².
    pub sigma_e2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPhaseStats {
    pub mu_e: Complex64,
    /// LoS-dominant closed form 0.5·A_E·M·C0²·d_AE^(-α_L)·d_BE^(-α_L).
    pub sigma_e2: f64,
    /// Half the exact per-element second-moment sum
    /// A_E·Σ_m E|g_A,m|²·E|g_B,m|².
    pub sigma_e2_exact: f64,
}

pub fn stats_random_phase(cfg: &ScenarioConfig) -> RandomPhaseStats {
    let m = cfg.num_elements() as f64;
    let (da, db) = (cfg.d_ae(), cfg.d_be());
    let approx = 0.5 * cfg.amp_gain * m * cfg.los_gain(da) * cfg.los_gain(db);
    let ea = cfg.los_gain(da) + cfg.nlos_gain(da);
    let eb = cfg.los_gain(db) + cfg.nlos_gain(db);
    RandomPhaseStats {
        mu_e: Complex64::new(0.0, 0.0),
        sigma_e2: approx,
        sigma_e2_exact: 0.5 * cfg.amp_gain * m * ea * eb,
    }
}

/// Mean and variance of h_E for a fixed phase vector.
pub fn stats_fixed_phase(w: &PhaseVector, a: &LinkLayout, b: &LinkLayout) -> Result<DeceptionStats> {
    check_len(a.num_elements(), w.len())?;
    check_len(b.num_elements(), w.len())?;
    let weights = w.weights();
    let mu_e = deceiving_channel_weights(&weights, &a.g_los, &b.g_los);
    let op = VarianceOperator::new(a, b)?;
    Ok(DeceptionStats { mu_e, sigma_e2: op.quad_form(&weights) })
}

/// G as a sum of rank-one Hermitian terms Σ_t c_t·conj(z_t)·z_tᵀ, so that
/// wᴴGw = Σ_t c_t·|z_tᵀw|².
#[derive(Debug, Clone)]
pub struct VarianceOperator {
    dim: usize,
    coefs: Vec<f64>,
    /// Term vectors stored back to back, `dim` entries each.
    terms: Vec<Complex64>,
}

impl VarianceOperator {
    pub fn new(a: &LinkLayout, b: &LinkLayout) -> Result<Self> {
        let m = a.num_elements();
        check_len(m, b.num_elements())?;
        let ca = 0.5 * a.path_weight();
        let cb = 0.5 * b.path_weight();
        let mut coefs = Vec::new();
        let mut terms = Vec::new();
        for u in &a.steering {
            for v in &b.steering {
                coefs.push(2.0 * ca * cb);
                terms.extend(u.iter().zip(v).map(|(x, y)| x * y));
            }
        }
        for u in &a.steering {
            coefs.push(ca);
            terms.extend(u.iter().zip(&b.g_los).map(|(x, y)| x * y));
        }
        for v in &b.steering {
            coefs.push(cb);
            terms.extend(v.iter().zip(&a.g_los).map(|(x, y)| x * y));
        }
        Ok(Self { dim: m, coefs, terms })
    }

    pub fn num_terms(&self) -> usize {
        self.coefs.len()
    }

    fn term(&self, t: usize) -> &[Complex64] {
        &self.terms[t * self.dim..(t + 1) * self.dim]
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let m = self.dim;
        let mut g = DMatrix::zeros(m, m);
        for (t, &c) in self.coefs.iter().enumerate() {
            let z = self.term(t);
            for j in 0..m {
                let zj = z[j] * c;
                for i in 0..m {
                    g[(i, j)] += z[i].conj() * zj;
                }
            }
        }
        g
    }
}

impl HermitianOperator for VarianceOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (t, &c) in self.coefs.iter().enumerate() {
            let z = self.term(t);
            let s = dotu(z, x) * c;
            for (o, zi) in out.iter_mut().zip(z) {
                *o += zi.conj() * s;
            }
        }
    }

    fn quad_form(&self, x: &[Complex64]) -> f64 {
        self.coefs
            .iter()
            .enumerate()
            .map(|(t, &c)| c * dotu(self.term(t), x).norm_sqr())
            .sum()
    }
}

/// Dense G for a pair of links.
pub fn g_matrix(a: &LinkLayout, b: &LinkLayout) -> Result<DMatrix<Complex64>> {
    Ok(VarianceOperator::new(a, b)?.to_dense())
}

fn check_psd(name: &str, c: &DMatrix<Complex64>) -> Result<()> {
    let scale = c.norm().max(f64::MIN_POSITIVE);
    if (c - c.adjoint()).norm() > 1e-10 * scale {
        return Err(Error::contract(format!("{name} is not Hermitian")));
    }
    let min = c.clone().symmetric_eigenvalues().min();
    if min < -1e-10 * scale {
        return Err(Error::contract(format!("{name} is not positive semidefinite (eigenvalue {min:e})")));
    }
    Ok(())
}

/// G from explicit NLoS covariances E[g_nlos g_nlosᴴ] and LoS vectors.
pub fn g_matrix_from_parts(
    cov2_a: &DMatrix<Complex64>,
    cov2_b: &DMatrix<Complex64>,
    los_a: &[Complex64],
    los_b: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    let m = los_a.len();
    check_len(m, los_b.len())?;
    for c in [cov2_a, cov2_b] {
        if c.nrows() != m || c.ncols() != m {
            return Err(Error::LengthMismatch { expected: m, actual: c.nrows() });
        }
    }
    check_psd("covariance of link A", cov2_a)?;
    check_psd("covariance of link B", cov2_b)?;
    let sa = cov2_a.map(|z| z.conj() * 0.5);
    let sb = cov2_b.map(|z| z.conj() * 0.5);
    Ok(DMatrix::from_fn(m, m, |i, j| {
        sa[(i, j)] * sb[(i, j)] * 2.0
            + los_b[i].conj() * sa[(i, j)] * los_b[j]
            + los_a[i].conj() * sb[(i, j)] * los_a[j]
    }))
}

/// h_E for a fixed phase vector as a bilinear form in the path gains:
/// with c_A = (1, ρ_A,1, …) and c_B likewise, h_E = c_Aᵀ·Q·c_B.
#[derive(Debug, Clone)]
pub struct BilinearDeception {
    n_a: usize,
    n_b: usize,
    q: Vec<Complex64>,
}

impl BilinearDeception {
    pub fn new(w: &[Complex64], a: &LinkLayout, b: &LinkLayout) -> Result<Self> {
        check_len(w.len(), a.num_elements())?;
        check_len(w.len(), b.num_elements())?;
        let basis = |l: &LinkLayout| -> Vec<Vec<Complex64>> {
            let s = 1.0 / (l.iota() as f64).sqrt();
            std::iter::once(l.g_los.clone())
                .chain(l.steering.iter().map(|u| u.iter().map(|x| x * s).collect()))
                .collect()
        };
        let ba = basis(a);
        let bb = basis(b);
        let mut q = Vec::with_capacity(ba.len() * bb.len());
        for x in &ba {
            let wx: Vec<Complex64> = x.iter().zip(w).map(|(x, w)| x * w).collect();
            for y in &bb {
                q.push(dotu(&wx, y));
            }
        }
        Ok(Self { n_a: ba.len(), n_b: bb.len(), q })
    }

    /// Mean of h_E (both NLoS gain vectors at zero).
    pub fn mean(&self) -> Complex64 {
        self.q[0]
    }

    pub fn evaluate(&self, gains_a: &[Complex64], gains_b: &[Complex64]) -> Complex64 {
        debug_assert_eq!(gains_a.len() + 1, self.n_a);
        debug_assert_eq!(gains_b.len() + 1, self.n_b);
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.n_a {
            let ca = if i == 0 { one } else { gains_a[i - 1] };
            let row = &self.q[i * self.n_b..(i + 1) * self.n_b];
            let inner: Complex64 = row[0] + dotu(&row[1..], gains_b);
            acc += ca * inner;
        }
        acc
    }
}
