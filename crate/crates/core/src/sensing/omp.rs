use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use super::{Dictionary, SensingMatrix};
use crate::error::{check_len, Error, Result};
use crate::Complex64;

/// Relative residual below which OMP stops early.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Gram columns kept at most; each costs 16·D bytes.
const GRAM_CACHE_LIMIT: usize = 1024;

/// The compressed operator A = C·D restricted to distinct atoms (mirrored
/// grid points repeat an atom and are dropped). Inverse squared column norms
/// are cached and Gram columns Aᴴ·a_k memoised as atoms get selected.
#[derive(Debug)]
pub struct CompressedOperator {
    pub sensing: SensingMatrix,
    /// Dictionary index of each column.
    atoms: Vec<usize>,
    matrix: DMatrix<Complex64>,
    inv_norm_sq: Vec<f64>,
    gram: Mutex<HashMap<usize, Arc<Vec<Complex64>>>>,
}

impl Clone for CompressedOperator {
    fn clone(&self) -> Self {
        Self {
            sensing: self.sensing.clone(),
            atoms: self.atoms.clone(),
            matrix: self.matrix.clone(),
            inv_norm_sq: self.inv_norm_sq.clone(),
            gram: Mutex::new(HashMap::new()),
        }
    }
}

impl CompressedOperator {
    pub fn new(dict: &Dictionary, sensing: SensingMatrix) -> Result<Self> {
        check_len(dict.num_elements(), sensing.num_elements)?;
        let atoms = dict.distinct_atoms();
        let rows = &sensing.rows;
        let matrix = DMatrix::from_fn(rows.len(), atoms.len(), |r, k| dict.entry(rows[r], atoms[k]));
        let col_norms: Vec<f64> = matrix.column_iter().map(|c| c.norm()).collect();
        if col_norms.iter().any(|&n| !(n > 0.0)) {
            return Err(Error::contract("compressed operator has a zero column"));
        }
        let inv_norm_sq = col_norms.iter().map(|n| 1.0 / (n * n)).collect();
        Ok(Self { sensing, atoms, matrix, inv_norm_sq, gram: Mutex::new(HashMap::new()) })
    }

    /// Aᴴ·a_d.
    fn gram_column(&self, d: usize) -> Arc<Vec<Complex64>> {
        if let Some(c) = self.gram.lock().expect("gram cache poisoned").get(&d) {
            return Arc::clone(c);
        }
        let col = Arc::new(self.matrix.ad_mul(&self.matrix.column(d)).iter().copied().collect::<Vec<_>>());
        let mut cache = self.gram.lock().expect("gram cache poisoned");
        if cache.len() < GRAM_CACHE_LIMIT {
            cache.insert(d, Arc::clone(&col));
        }
        col
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn num_measurements(&self) -> usize {
        self.matrix.nrows()
    }

    /// Distinct atoms, i.e. columns of [`Self::matrix`].
    pub fn num_atoms(&self) -> usize {
        self.matrix.ncols()
    }

    /// Dictionary index of column `k`.
    pub fn atom_index(&self, k: usize) -> usize {
        self.atoms[k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseEstimate {
    pub support: Vec<usize>,
    pub coeffs: Vec<Complex64>,
    pub residual_norm: f64,
    /// Residual norm after each selected atom.
    pub residual_history: Vec<f64>,
    /// A least-squares refit was rank deficient and fell back to the
    /// minimum-norm solution.
    pub min_norm_fallback: bool,
}

impl SparseEstimate {
    /// D·ŝ over all elements.
    pub fn synthesize(&self, dict: &Dictionary) -> Vec<Complex64> {
        dict.synthesize(&self.support, &self.coeffs)
    }
}

/// Orthogonal matching pursuit: pick the atom most correlated with the
/// residual, refit all picked atoms by least squares, repeat until `sparsity`
/// atoms are in or the residual is negligible.
pub fn omp(y: &[Complex64], op: &CompressedOperator, sparsity: usize) -> Result<SparseEstimate> {
    if sparsity == 0 {
        return Err(Error::contract("sparsity must be at least 1"));
    }
    check_len(op.num_measurements(), y.len())?;
    let a = &op.matrix;
    let yv = DVector::from_column_slice(y);
    let y_norm = yv.norm();
    let mut residual = yv.clone();
    let mut support: Vec<usize> = Vec::with_capacity(sparsity);
    let mut coeffs = DVector::<Complex64>::zeros(0);
    let mut history = Vec::with_capacity(sparsity);
    let mut fallback = false;
    let max_atoms = sparsity.min(op.num_atoms());
    // Aᴴr = Aᴴy − Σ_s (Aᴴa_s)·c_s, so one pass over A per call suffices
    // once the Gram columns of the chosen atoms are known.
    let corr_y: Vec<Complex64> = a.ad_mul(&yv).iter().copied().collect();
    let mut gram_cols: Vec<Arc<Vec<Complex64>>> = Vec::with_capacity(sparsity);
    let mut corr = corr_y.clone();
    while support.len() < max_atoms {
        if residual.norm() <= RESIDUAL_TOL * y_norm || y_norm == 0.0 {
            break;
        }
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        // Compare squared scores; picked atoms have zero residual correlation
        // in exact arithmetic but are excluded explicitly.
        for (d, (c, w)) in corr.iter().zip(&op.inv_norm_sq).enumerate() {
            let score = c.norm_sqr() * w;
            if score > best.0 && !support.contains(&d) {
                best = (score, d);
            }
        }
        support.push(best.1);
        gram_cols.push(op.gram_column(best.1));
        let sub = DMatrix::from_fn(a.nrows(), support.len(), |r, k| a[(r, support[k])]);
        let svd = sub.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let rank_tol = smax * 1e-10 * (a.nrows().max(support.len()) as f64);
        if svd.singular_values.iter().any(|&s| s <= rank_tol) {
            fallback = true;
        }
        coeffs = svd
            .solve(&yv, rank_tol)
            .map_err(|e| Error::Numerical(format!("least-squares refit failed: {e}")))?;
        residual = &yv - &sub * &coeffs;
        history.push(residual.norm());
        corr.copy_from_slice(&corr_y);
        for (g, c) in gram_cols.iter().zip(coeffs.iter()) {
            corr.iter_mut().zip(g.iter()).for_each(|(x, gi)| *x -= gi * c);
        }
    }
    Ok(SparseEstimate {
        support: support.iter().map(|&k| op.atoms[k]).collect(),
        coeffs: coeffs.iter().copied().collect(),
        residual_norm: residual.norm(),
        residual_history: history,
        min_norm_fallback: fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UpaGeometry;
    use crate::rng::{complex_normal, stream, Domain};
    use crate::sensing::{build_dictionary, place_sensors};
    use rand::Rng;

    fn setup(side: usize, spacing: f64, grid: usize, c: usize) -> (Dictionary, CompressedOperator) {
        let g = UpaGeometry::new(side, side, spacing).unwrap();
        let d = build_dictionary(&g, 1.0, grid, grid).unwrap();
        let s = place_sensors(&d, c).unwrap();
        let op = CompressedOperator::new(&d, s).unwrap();
        (d, op)
    }

    #[test]
    fn single_atom_exact() {
        let (d, op) = setup(6, 0.5, 8, 10);
        let coef = Complex64::new(0.7, -1.3);
        let g: Vec<Complex64> = d.atom(19).iter().map(|a| a * coef).collect();
        let y = op.sensing.select(&g);
        let est = omp(&y, &op, 5).unwrap();
        assert_eq!(est.support, vec![19]);
        assert!((est.coeffs[0] - coef).norm() < 1e-9 * coef.norm());
        assert!(est.residual_norm < 1e-9);
    }

    #[test]
    fn zero_measurement_gives_empty_estimate() {
        let (d, op) = setup(4, 0.5, 8, 6);
        let est = omp(&vec![Complex64::new(0.0, 0.0); 6], &op, 3).unwrap();
        assert!(est.support.is_empty());
        assert_eq!(est.residual_norm, 0.0);
        assert!(est.synthesize(&d).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn residual_is_monotone_and_orthogonal() {
        let (d, op) = setup(6, 0.5, 8, 12);
        let mut rng = stream(3, Domain::Aux, 0);
        let y: Vec<Complex64> = (0..12).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let est = omp(&y, &op, 4).unwrap();
        for w in est.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        let sub = d.rows(&op.sensing.rows);
        let g: Vec<Complex64> = est.support.iter().map(|&k| k).map(|k| {
            let col = sub.column(k);
            let fit: Vec<Complex64> = (0..12).map(|r| {
                y[r] - est.support.iter().zip(&est.coeffs).map(|(&s, c)| sub[(r, s)] * c).sum::<Complex64>()
            }).collect();
            col.iter().zip(&fit).map(|(a, b)| a.conj() * b).sum()
        }).collect();
        assert!(g.iter().all(|z| z.norm() < 1e-9 * crate::linalg::norm(&y)));
    }

    #[test]
    fn noiseless_five_sparse_recovery_at_half_wavelength() {
        let (d, op) = setup(40, 0.5, 8, 20);
        let mut rng = stream(5, Domain::Aux, 0);
        let mut ok = 0;
        for _ in 0..20 {
            let mut atoms = Vec::new();
            while atoms.len() < 5 {
                let k = rng.gen_range(0..d.size());
                if !atoms.contains(&k) {
                    atoms.push(k);
                }
            }
            let coeffs: Vec<Complex64> = (0..5).map(|_| complex_normal(&mut rng, 1.0)).collect();
            let g = d.synthesize(&atoms, &coeffs);
            let est = omp(&op.sensing.select(&g), &op, 5).unwrap();
            let gh = est.synthesize(&d);
            let err = crate::linalg::norm(&g.iter().zip(&gh).map(|(a, b)| a - b).collect::<Vec<_>>());
            if err < 1e-6 * crate::linalg::norm(&g) {
                ok += 1;
            }
        }
        assert!(ok >= 17, "{ok}");
    }

    #[test]
    fn invalid_inputs() {
        let (_, op) = setup(4, 0.5, 8, 6);
        assert!(omp(&[Complex64::new(1.0, 0.0); 6], &op, 0).is_err());
        assert!(omp(&[Complex64::new(1.0, 0.0); 5], &op, 2).is_err());
    }
}
