use nalgebra::DMatrix;
use rand::Rng;

use super::{omp, CompressedOperator, Dictionary, SparseEstimate};
use crate::error::{check_len, Error, Result};
use crate::linalg::norm_sqr;
use crate::ris::deceiving_channel_weights;
use crate::rng::complex_normal;
use crate::Complex64;

/// Raw sensor observation of a pilot sequence: Y = g_C·x + N with
/// N entries ~ CN(0, noise_var). Rows are sensors, columns pilot symbols.
pub fn pilot_observation<R: Rng + ?Sized>(
    g_rows: &[Complex64],
    pilot: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(g_rows.len(), pilot.len(), |r, l| g_rows[r] * pilot[l] + complex_normal(rng, noise_var))
}

/// Y·xᴴ / ‖x‖², one complex value per sensor.
pub fn matched_filter(obs: &DMatrix<Complex64>, pilot: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(obs.ncols(), pilot.len())?;
    let p = norm_sqr(pilot);
    if !(p > 0.0) {
        return Err(Error::domain("pilot sequence has zero energy"));
    }
    Ok((0..obs.nrows())
        .map(|r| (0..pilot.len()).map(|l| obs[(r, l)] * pilot[l].conj()).sum::<Complex64>() / p)
        .collect())
}

/// Attacker reconstruction of one round.
#[derive(Debug, Clone)]
pub struct AttackEstimate {
    /// ĥ_E (CSI) or φ̂_E (two-way).
    pub value: Complex64,
    pub link_a: SparseEstimate,
    pub link_b: SparseEstimate,
}

fn reconstruct(
    meas_a: &[Complex64],
    meas_b: &[Complex64],
    weights: &[Complex64],
    dict: &Dictionary,
    op: &CompressedOperator,
    sparsity: usize,
) -> Result<AttackEstimate> {
    check_len(dict.num_elements(), weights.len())?;
    let link_a = omp(meas_a, op, sparsity)?;
    let link_b = omp(meas_b, op, sparsity)?;
    let ga = link_a.synthesize(dict);
    let gb = link_b.synthesize(dict);
    Ok(AttackEstimate { value: deceiving_channel_weights(weights, &ga, &gb), link_a, link_b })
}

/// CSI attack: from matched-filtered sensor measurements of each party's
/// pilot, recover both links by OMP and return ĥ_E = ĝ_Bᵀ·diag(w)·ĝ_A.
pub fn csi_attack_round(
    y_a: &[Complex64],
    y_b: &[Complex64],
    weights: &[Complex64],
    dict: &Dictionary,
    op: &CompressedOperator,
    sparsity: usize,
) -> Result<AttackEstimate> {
    reconstruct(y_a, y_b, weights, dict, op, sparsity)
}

/// Two-way attack: the unknown random pilots ride along with the sparse
/// coefficients, so OMP on the raw measurements recovers s_A·q_A and
/// s_B·q_B, and the same bilinear form yields an estimate of h_E·q_A·q_B.
pub fn twoway_attack_round(
    r_a: &[Complex64],
    r_b: &[Complex64],
    weights: &[Complex64],
    dict: &Dictionary,
    op: &CompressedOperator,
    sparsity: usize,
) -> Result<AttackEstimate> {
    reconstruct(r_a, r_b, weights, dict, op, sparsity)
}
