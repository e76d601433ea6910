use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::Dictionary;
use crate::error::{Error, Result};
use crate::Complex64;

/// Selection of the elements that carry a channel sensor. Conceptually a
/// C×M matrix with a single unit entry per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingMatrix {
    pub rows: Vec<usize>,
    pub num_elements: usize,
}

impl SensingMatrix {
    pub fn new(rows: Vec<usize>, num_elements: usize) -> Result<Self> {
        let mut seen = vec![false; num_elements];
        for &r in &rows {
            if r >= num_elements {
                return Err(Error::contract(format!("sensor index {r} outside 0..{num_elements}")));
            }
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::contract(format!("sensor index {r} selected twice")));
            }
        }
        Ok(Self { rows, num_elements })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// C·x.
    pub fn select(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows.iter().map(|&r| x[r]).collect()
    }

    /// Cᵀ·y, an M-vector that is zero off the sensed elements.
    pub fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_elements];
        for (&r, &v) in self.rows.iter().zip(y) {
            out[r] = v;
        }
        out
    }
}

/// Row Gram entries of a dictionary indexed by element-grid offset:
/// Σ_d D[i, d]·conj(D[j, d]) depends only on grid(i) − grid(j).
struct RowGram {
    table: DMatrix<Complex64>,
    offset: [i64; 2],
}

impl RowGram {
    fn new(dict: &Dictionary) -> Self {
        let [ny, nz] = dict.span();
        let (ry, rz) = (2 * ny - 1, 2 * nz - 1);
        let offset = [ny as i64 - 1, nz as i64 - 1];
        let py = DMatrix::from_fn(ry, dict.size(), |a, d| {
            Complex64::from_polar(1.0, dict.steps(d)[0] * (a as i64 - offset[0]) as f64)
        });
        let pz = DMatrix::from_fn(rz, dict.size(), |b, d| {
            Complex64::from_polar(1.0, dict.steps(d)[1] * (b as i64 - offset[1]) as f64)
        });
        Self { table: py * pz.transpose(), offset }
    }

    fn entry(&self, gi: [i64; 2], gj: [i64; 2]) -> Complex64 {
        let a = (gi[0] - gj[0] + self.offset[0]) as usize;
        let b = (gi[1] - gj[1] + self.offset[1]) as usize;
        self.table[(a, b)]
    }
}

fn gram_condition(gram: DMatrix<Complex64>) -> f64 {
    let eig = gram.symmetric_eigenvalues();
    let max = eig.max();
    if !(max > 0.0) {
        return f64::INFINITY;
    }
    let min = eig.iter().copied().filter(|&l| l > max * 1e-12).fold(f64::INFINITY, f64::min);
    (max / min).sqrt()
}

fn grid_of(dict: &Dictionary, rows: &[usize]) -> Vec<[i64; 2]> {
    rows.iter().map(|&r| dict.geometry().grid_index(r)).collect()
}

fn subset_condition(gram: &RowGram, grid: &[[i64; 2]]) -> f64 {
    let k = grid.len();
    gram_condition(DMatrix::from_fn(k, k, |i, j| gram.entry(grid[i], grid[j])))
}

/// Ratio of the largest to the smallest nonzero singular value of the row
/// submatrix D[rows, :].
pub fn condition_number(dict: &Dictionary, rows: &[usize]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Empty("sensor rows"));
    }
    let gram = RowGram::new(dict);
    Ok(subset_condition(&gram, &grid_of(dict, rows)))
}

/// Greedy sensor placement: grow the set one element at a time, each time
/// adding the element that minimises the condition number of the selected
/// dictionary rows. Ties go to the lowest index.
pub fn place_sensors(dict: &Dictionary, c: usize) -> Result<SensingMatrix> {
    let m = dict.num_elements();
    if c == 0 || c > m {
        return Err(Error::config(format!("sensor count must lie in 1..={m}, got {c}")));
    }
    let gram = RowGram::new(dict);
    let all_grid: Vec<[i64; 2]> = (0..m).map(|i| dict.geometry().grid_index(i)).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(c);
    let mut taken = vec![false; m];
    while chosen.len() < c {
        let base: Vec<[i64; 2]> = chosen.iter().map(|&i| all_grid[i]).collect();
        let scores: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|i| {
                if taken[i] {
                    return f64::INFINITY;
                }
                let mut g = base.clone();
                g.push(all_grid[i]);
                subset_condition(&gram, &g)
            })
            .collect();
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, &s) in scores.iter().enumerate() {
            if !taken[i] && (best.1 == usize::MAX || s < best.0 * (1.0 - 1e-12)) {
                best = (s, i);
            }
        }
        taken[best.1] = true;
        chosen.push(best.1);
    }
    SensingMatrix::new(chosen, m)
}

/// Exhaustive search over all C-subsets; returns the best subset and its
/// condition number. Exponential cost, meant for tiny arrays.
pub fn best_subset(dict: &Dictionary, c: usize) -> Result<(Vec<usize>, f64)> {
    let m = dict.num_elements();
    if c == 0 || c > m {
        return Err(Error::config(format!("sensor count must lie in 1..={m}, got {c}")));
    }
    let gram = RowGram::new(dict);
    let all_grid: Vec<[i64; 2]> = (0..m).map(|i| dict.geometry().grid_index(i)).collect();
    let mut idx: Vec<usize> = (0..c).collect();
    let mut best = (idx.clone(), f64::INFINITY);
    loop {
        let g: Vec<[i64; 2]> = idx.iter().map(|&i| all_grid[i]).collect();
        let s = subset_condition(&gram, &g);
        if s < best.1 {
            best = (idx.clone(), s);
        }
        // Advance to the next combination in lexicographic order.
        let mut k = c;
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            if idx[k] < m - c + k {
                idx[k] += 1;
                for j in k + 1..c {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Uniformly random distinct sensor positions, sorted.
pub fn random_placement<R: Rng + ?Sized>(m: usize, c: usize, rng: &mut R) -> Result<SensingMatrix> {
    if c == 0 || c > m {
        return Err(Error::config(format!("sensor count must lie in 1..={m}, got {c}")));
    }
    let mut rows = rand::seq::index::sample(rng, m, c).into_vec();
    rows.sort_unstable();
    SensingMatrix::new(rows, m)
}
