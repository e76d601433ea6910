//! Planar array layout and steering vectors.
//!
//! The surface lies in the plane x = 0 of its local frame with boresight along
//! +x. Element `m` (0-based) sits at `[0, (m mod mx)·d, ⌊m / mx⌋·d]`, a
//! row-major grid with `mx` elements along y and `my` rows along z.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::config::Point3;
use crate::error::{Error, Result};
use crate::Complex64;

/// Angular tolerance when checking that an angle lies in [-π/2, π/2].
const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct UpaGeometry {
    pub mx: usize,
    pub my: usize,
    pub elem_spacing: f64,
    /// Element positions (y, z) in metres; the x coordinate is always 0.
    positions: Vec<[f64; 2]>,
    /// Integer grid coordinates (y index, z index) of every element.
    grid_index: Vec<[i64; 2]>,
}

impl UpaGeometry {
    pub fn new(mx: usize, my: usize, elem_spacing: f64) -> Result<Self> {
        if mx == 0 || my == 0 {
            return Err(Error::config("array dimensions must be positive"));
        }
        if !(elem_spacing > 0.0 && elem_spacing.is_finite()) {
            return Err(Error::config("element spacing must be positive"));
        }
        let m = mx * my;
        let grid_index: Vec<[i64; 2]> = (0..m).map(|i| [(i % mx) as i64, (i / mx) as i64]).collect();
        let positions = grid_index
            .iter()
            .map(|g| [g[0] as f64 * elem_spacing, g[1] as f64 * elem_spacing])
            .collect();
        Ok(Self { mx, my, elem_spacing, positions, grid_index })
    }

    pub fn from_config(cfg: &crate::ScenarioConfig) -> Result<Self> {
        Self::new(cfg.mx, cfg.my, cfg.elem_spacing)
    }

    pub fn num_elements(&self) -> usize {
        self.positions.len()
    }

    /// Full 3-D element position l_m.
    pub fn position(&self, m: usize) -> Point3 {
        let p = self.positions[m];
        [0.0, p[0], p[1]]
    }

    pub fn grid_index(&self, m: usize) -> [i64; 2] {
        self.grid_index[m]
    }

    /// Copy of the geometry with every element position negated.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.positions {
            p[0] = -p[0];
            p[1] = -p[1];
        }
        for g in &mut out.grid_index {
            g[0] = -g[0];
            g[1] = -g[1];
        }
        out
    }
}

pub fn check_angle(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value.abs() <= FRAC_PI_2 + ANGLE_EPS {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {value} outside [-pi/2, pi/2]")))
    }
}

/// Wave-vector components along y and z, (2π/λ)·[sin el sin az, cos el].
/// The x component never contributes because every element has x = 0.
pub fn wave_vector_yz(el: f64, az: f64, lambda: f64) -> [f64; 2] {
    let k = 2.0 * PI / lambda;
    [k * el.sin() * az.sin(), k * el.cos()]
}

/// u(el, az): entry m equals exp(j·a(el, az)·l_m).
pub fn steering_vector(geom: &UpaGeometry, el: f64, az: f64, lambda: f64) -> Result<Vec<Complex64>> {
    check_angle("elevation", el)?;
    check_angle("azimuth", az)?;
    if !(lambda > 0.0) {
        return Err(Error::domain("wavelength must be positive"));
    }
    let [ky, kz] = wave_vector_yz(el, az, lambda);
    Ok(geom
        .positions
        .iter()
        .map(|p| Complex64::from_polar(1.0, ky * p[0] + kz * p[1]))
        .collect())
}

/// Steering entries for a subset of elements only.
pub fn steering_entries(geom: &UpaGeometry, el: f64, az: f64, lambda: f64, rows: &[usize]) -> Vec<Complex64> {
    let [ky, kz] = wave_vector_yz(el, az, lambda);
    rows.iter()
        .map(|&m| {
            let p = geom.positions[m];
            Complex64::from_polar(1.0, ky * p[0] + kz * p[1])
        })
        .collect()
}

/// Angles (el, az) under which the surface at `ris` sees the point `target`.
///
/// The local frame is the global one rotated by π about x, so the surface
/// looks along +x and points below it (smaller global z) have cos el ≥ 0.
/// Targets strictly above the surface cannot be represented with
/// el, az ∈ [-π/2, π/2] and are rejected.
pub fn los_angles(ris: &Point3, target: &Point3) -> Result<(f64, f64)> {
    let v = [target[0] - ris[0], target[1] - ris[1], target[2] - ris[2]];
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::domain("target coincides with the surface"));
    }
    let (vx, vy, vz) = (v[0] / norm, -v[1] / norm, -v[2] / norm);
    if vz < -1e-12 {
        return Err(Error::domain(format!(
            "target {target:?} lies above the surface at {ris:?}; its direction is outside the half-space"
        )));
    }
    let cos_el = vz.clamp(0.0, 1.0);
    let sin_el = (1.0 - cos_el * cos_el).sqrt();
    if sin_el < 1e-15 {
        return Ok((0.0, 0.0));
    }
    let mut el = cos_el.acos();
    let mut az = vy.atan2(vx);
    if az > FRAC_PI_2 + ANGLE_EPS {
        az -= PI;
        el = -el;
    } else if az < -FRAC_PI_2 - ANGLE_EPS {
        az += PI;
        el = -el;
    }
    Ok((el, az.clamp(-FRAC_PI_2, FRAC_PI_2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn positions_follow_indexing_rule() {
        let g = UpaGeometry::new(3, 3, 0.5).unwrap();
        assert_eq!(g.position(0), [0.0, 0.0, 0.0]);
        assert_eq!(g.position(4), [0.0, 0.5, 0.5]);
        assert_eq!(g.position(8), [0.0, 1.0, 1.0]);
        assert_eq!(g.num_elements(), 9);
    }

    #[test]
    fn rectangular_arrays_fill_every_grid_point() {
        let g = UpaGeometry::new(4, 2, 1.0).unwrap();
        let mut seen: Vec<[i64; 2]> = (0..8).map(|m| g.grid_index(m)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert_eq!(g.position(5), [0.0, 1.0, 1.0]);
        assert!(seen.iter().all(|p| p[0] < 4 && p[1] < 2));
    }

    #[test]
    fn hand_evaluated_steering_vector() {
        let g = UpaGeometry::new(2, 2, 1.0 / 8.0).unwrap();
        let u = steering_vector(&g, FRAC_PI_2, FRAC_PI_2, 1.0).unwrap();
        let e = Complex64::from_polar(1.0, PI / 4.0);
        let want = [c(1.0, 0.0), e, c(1.0, 0.0), e];
        for (a, b) in u.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn boresight_depends_on_z_only() {
        let g = UpaGeometry::new(4, 4, 0.25).unwrap();
        let u = steering_vector(&g, 0.0, 0.0, 1.0).unwrap();
        for m in 0..16 {
            let z = (m / 4) as f64 * 0.25;
            assert!((u[m] - Complex64::from_polar(1.0, 2.0 * PI * z)).norm() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_angle_is_domain_error() {
        let g = UpaGeometry::new(2, 2, 0.1).unwrap();
        assert!(matches!(steering_vector(&g, 1.6, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(steering_vector(&g, 0.0, -1.6, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reflected_geometry_conjugates() {
        let g = UpaGeometry::new(5, 5, 0.0125).unwrap();
        let r = g.reflected();
        let u = steering_vector(&g, 0.3, -0.7, 0.1).unwrap();
        let v = steering_vector(&r, 0.3, -0.7, 0.1).unwrap();
        for (a, b) in u.iter().zip(v.iter()) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn los_direction_reproduces_wave_vector() {
        let ris = [0.0, 10.0, 5.0];
        for target in [[0.0, 0.0, 0.0], [0.0, 50.0, 0.0], [3.0, -2.0, 1.0], [-4.0, 7.0, -9.0]] {
            let (el, az) = los_angles(&ris, &target).unwrap();
            let d = crate::config::distance(&ris, &target);
            let want_y = -(target[1] - ris[1]) / d;
            let want_z = -(target[2] - ris[2]) / d;
            assert!((el.sin() * az.sin() - want_y).abs() < 1e-12);
            assert!((el.cos() - want_z).abs() < 1e-12);
        }
    }

    #[test]
    fn in_plane_targets_are_endfire() {
        let (el, az) = los_angles(&[0.0, 10.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        assert!((el - FRAC_PI_2).abs() < 1e-12);
        assert!((az - FRAC_PI_2).abs() < 1e-12);
        let (el, az) = los_angles(&[0.0, 10.0, 0.0], &[0.0, 50.0, 0.0]).unwrap();
        assert!((el.sin() * az.sin() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn targets_above_are_rejected() {
        assert!(los_angles(&[0.0, 0.0, 0.0], &[0.0, 1.0, 1.0]).is_err());
    }
}
