use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{wave_vector_yz, UpaGeometry};
use crate::Complex64;

/// Beamspace dictionary: one steering vector per point of a uniform
/// (el, az) grid over [-π/2, π/2]², endpoints included.
///
/// Atoms are never stored in full. Because the element grid is regular,
/// entry (m, d) factors as p_y[d]^iy(m) · p_z[d]^iz(m).
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub grid_el: usize,
    pub grid_az: usize,
    grid: Vec<(f64, f64)>,
    /// Phase advance per grid step along y and z, one pair per atom.
    steps: Vec<[f64; 2]>,
    geom: UpaGeometry,
    /// 1 + the largest grid index along (y, z).
    span: [usize; 2],
}

fn linspace(n: usize) -> Vec<f64> {
    (0..n).map(|i| -FRAC_PI_2 + PI * i as f64 / (n - 1) as f64).collect()
}

pub fn build_dictionary(geom: &UpaGeometry, lambda: f64, grid_el: usize, grid_az: usize) -> Result<Dictionary> {
    if grid_el < 2 || grid_az < 2 {
        return Err(Error::config("dictionary grid needs at least two points per axis"));
    }
    if !(lambda > 0.0) {
        return Err(Error::domain("wavelength must be positive"));
    }
    let mut grid = Vec::with_capacity(grid_el * grid_az);
    let mut steps = Vec::with_capacity(grid_el * grid_az);
    for &el in &linspace(grid_el) {
        for &az in &linspace(grid_az) {
            let [ky, kz] = wave_vector_yz(el, az, lambda);
            grid.push((el, az));
            steps.push([ky * geom.elem_spacing, kz * geom.elem_spacing]);
        }
    }
    let mut span = [1usize, 1usize];
    for m in 0..geom.num_elements() {
        let g = geom.grid_index(m);
        span[0] = span[0].max(g[0].unsigned_abs() as usize + 1);
        span[1] = span[1].max(g[1].unsigned_abs() as usize + 1);
    }
    Ok(Dictionary { grid_el, grid_az, grid, steps, geom: geom.clone(), span })
}

impl Dictionary {
    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn num_elements(&self) -> usize {
        self.geom.num_elements()
    }

    pub fn geometry(&self) -> &UpaGeometry {
        &self.geom
    }

    pub fn angles(&self, d: usize) -> (f64, f64) {
        self.grid[d]
    }

    /// Phase advance of atom `d` per grid step along (y, z).
    pub fn steps(&self, d: usize) -> [f64; 2] {
        self.steps[d]
    }

    /// 1 + the largest absolute grid index along (y, z).
    pub fn span(&self) -> [usize; 2] {
        self.span
    }

    /// Index of the grid point nearest to (el, az) on each axis.
    pub fn nearest(&self, el: f64, az: f64) -> usize {
        let snap = |x: f64, n: usize| -> usize {
            let t = (x + FRAC_PI_2) / PI * (n - 1) as f64;
            t.round().clamp(0.0, (n - 1) as f64) as usize
        };
        snap(el, self.grid_el) * self.grid_az + snap(az, self.grid_az)
    }

    pub fn entry(&self, m: usize, d: usize) -> Complex64 {
        let [iy, iz] = self.geom.grid_index(m);
        let [sy, sz] = self.steps[d];
        Complex64::from_polar(1.0, sy * iy as f64 + sz * iz as f64)
    }

    /// The grid point (-el, -az). It has the same wave vector, hence the
    /// same atom, as `d`.
    pub fn mirror(&self, d: usize) -> usize {
        let (i, j) = (d / self.grid_az, d % self.grid_az);
        (self.grid_el - 1 - i) * self.grid_az + (self.grid_az - 1 - j)
    }

    /// One index per distinct atom: the lower of each mirrored pair.
    pub fn distinct_atoms(&self) -> Vec<usize> {
        (0..self.size()).filter(|&d| d <= self.mirror(d)).collect()
    }

    /// Column `d` over all elements.
    pub fn atom(&self, d: usize) -> Vec<Complex64> {
        let [sy, sz] = self.steps[d];
        let py: Vec<Complex64> = (0..self.span[0]).map(|i| Complex64::from_polar(1.0, sy * i as f64)).collect();
        let pz: Vec<Complex64> = (0..self.span[1]).map(|i| Complex64::from_polar(1.0, sz * i as f64)).collect();
        (0..self.num_elements())
            .map(|m| {
                let [iy, iz] = self.geom.grid_index(m);
                if iy >= 0 && iz >= 0 {
                    py[iy as usize] * pz[iz as usize]
                } else {
                    self.entry(m, d)
                }
            })
            .collect()
    }

    /// Σ_m w_m·D[m, d1]·D[m, d2], the bilinear coupling of two atoms through
    /// a phase vector. The product of two atoms is itself a plane wave, so
    /// this costs one pass over the elements.
    pub fn weighted_pair(&self, w: &[Complex64], d1: usize, d2: usize) -> Complex64 {
        let [a, b] = self.steps[d1];
        let [c, d] = self.steps[d2];
        let (sy, sz) = (a + c, b + d);
        let py: Vec<Complex64> = (0..self.span[0]).map(|i| Complex64::from_polar(1.0, sy * i as f64)).collect();
        let pz: Vec<Complex64> = (0..self.span[1]).map(|i| Complex64::from_polar(1.0, sz * i as f64)).collect();
        w.iter()
            .enumerate()
            .map(|(m, wm)| {
                let [iy, iz] = self.geom.grid_index(m);
                let p = if iy >= 0 && iz >= 0 {
                    py[iy as usize] * pz[iz as usize]
                } else {
                    Complex64::from_polar(1.0, sy * iy as f64 + sz * iz as f64)
                };
                wm * p
            })
            .sum()
    }

    /// Rows of the dictionary for the given elements (a C×D matrix).
    pub fn rows(&self, rows: &[usize]) -> DMatrix<Complex64> {
        DMatrix::from_fn(rows.len(), self.size(), |r, d| self.entry(rows[r], d))
    }

    /// Full M×D matrix; only sensible for small arrays.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let all: Vec<usize> = (0..self.num_elements()).collect();
        self.rows(&all)
    }

    /// D_S·s over all elements.
    pub fn synthesize(&self, support: &[usize], coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_elements()];
        for (&d, &c) in support.iter().zip(coeffs) {
            for (o, a) in out.iter_mut().zip(self.atom(d)) {
                *o += c * a;
            }
        }
        out
    }
}
