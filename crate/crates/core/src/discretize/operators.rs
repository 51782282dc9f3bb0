//! Discrete Laplacians, boundary traces and plateau detection.
//!
//! The Laplacian is reported only where the stencil stays inside the domain.
//! Each sample carries a truncation estimate obtained by comparing the
//! stencil at spacing `h` with the same stencil at `2h`: for a second-order
//! operator the difference is three times the leading error of the fine one.
//! A roundoff term is added on top: on fine meshes the second difference of
//! values stored to machine precision is noisier than the truncation error.

use super::grid::ScalarField2D;
use super::radial::RadialField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplacianSample {
    /// Node index into the field's samples.
    pub index: usize,
    pub value: f64,
    /// Estimated size of the discretisation error in `value`.
    pub truncation: f64,
}

/// Relative tolerance under which two samples count as the same level.
const PLATEAU_RTOL: f64 = 1e-12;

fn scale(values: &[f64]) -> f64 {
    values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Fill missing truncation estimates with the largest available one.
fn finish(mut out: Vec<(usize, f64, Option<f64>)>) -> Vec<LaplacianSample> {
    let fallback = out
        .iter()
        .filter_map(|s| s.2)
        .fold(0.0f64, f64::max);
    out.drain(..)
        .map(|(index, value, t)| LaplacianSample {
            index,
            value,
            truncation: t.unwrap_or(fallback),
        })
        .collect()
}

/// Relative perturbation assumed in stored samples.
const SAMPLE_NOISE: f64 = 4.0 * f64::EPSILON;

/// Bound on the stencil error caused by perturbing each sample by
/// `SAMPLE_NOISE·|u|`, given the sum of absolute stencil weights.
fn roundoff(weights: f64, magnitude: f64) -> f64 {
    SAMPLE_NOISE * weights * magnitude.max(1.0)
}

fn radial_weights(r: &[f64], i: usize) -> f64 {
    if i == 0 {
        return 8.0 / (r[1] * r[1]);
    }
    let (rm, r0, rp) = (r[i - 1], r[i], r[i + 1]);
    let (hm, hp) = (r0 - rm, rp - r0);
    let (mm, mp) = (0.5 * (r0 + rm), 0.5 * (r0 + rp));
    2.0 * (mp / hp + mm / hm) / (r0 * 0.5 * (hm + hp))
}

fn radial_stencil(r: &[f64], u: &[f64], i: usize, s: usize) -> Option<f64> {
    if i + s >= r.len() {
        return None;
    }
    if i == 0 {
        // only meaningful at the centre of a disc, where Δu(0) = 2u''(0)
        return (r[0] == 0.0).then(|| 4.0 * (u[s] - u[0]) / (r[s] * r[s]));
    }
    if i < s {
        return None;
    }
    let (rm, r0, rp) = (r[i - s], r[i], r[i + s]);
    let (hm, hp) = (r0 - rm, rp - r0);
    let (mm, mp) = (0.5 * (r0 + rm), 0.5 * (r0 + rp));
    let flux = mp * (u[i + s] - u[i]) / hp - mm * (u[i] - u[i - s]) / hm;
    Some(flux / (r0 * 0.5 * (hm + hp)))
}

/// Laplacian of a radial field at every node whose stencil fits in the mesh.
pub fn radial_laplacian(field: &RadialField) -> Vec<LaplacianSample> {
    let r = field.nodes();
    let u = field.values();
    let out = (0..r.len())
        .filter_map(|i| {
            let fine = radial_stencil(r, u, i, 1)?;
            let coarse = radial_stencil(r, u, i, 2);
            let lo = i.saturating_sub(1);
            let mag = u[lo..=i + 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let noise = roundoff(radial_weights(r, i), mag);
            Some((i, fine, coarse.map(|c| (c - fine).abs() / 3.0 + noise)))
        })
        .collect();
    finish(out)
}

/// Five-point Laplacian at inside nodes whose dual cell is not cut and whose
/// four neighbours are inside the domain.
pub fn grid_laplacian(field: &ScalarField2D) -> Vec<LaplacianSample> {
    let grid = field.grid();
    let n = grid.resolution();
    let h = grid.spacing();
    let inside = grid.inside();
    let v = field.values();
    let at = |i: isize, j: isize| -> Option<usize> {
        if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
            return None;
        }
        let k = grid.index(i as usize, j as usize);
        inside[k].then_some(k)
    };
    let stencil = |i: isize, j: isize, s: isize| -> Option<f64> {
        let ks = [at(i - s, j)?, at(i + s, j)?, at(i, j - s)?, at(i, j + s)?];
        let k = at(i, j)?;
        let sum: f64 = ks.iter().map(|&q| v[q]).sum();
        Some((sum - 4.0 * v[k]) / ((s as f64 * h).powi(2)))
    };
    let out = (0..grid.len())
        .filter(|&k| inside[k] && !grid.is_cut(k))
        .filter_map(|k| {
            let (i, j) = grid.ij(k);
            let (i, j) = (i as isize, j as isize);
            let fine = stencil(i, j, 1)?;
            let coarse = stencil(i, j, 2);
            let noise = roundoff(8.0 / (h * h), v[k].abs());
            Some((k, fine, coarse.map(|c| (c - fine).abs() / 3.0 + noise)))
        })
        .collect();
    finish(out)
}

/// Values on the boundary: the end samples of a radial field.
pub fn radial_boundary_trace(field: &RadialField) -> Vec<f64> {
    if field.mesh().is_disc() {
        vec![field.last()]
    } else {
        vec![field.first(), field.last()]
    }
}

/// Bilinear samples on every boundary circle, `8n` per circle.
pub fn grid_boundary_trace(field: &ScalarField2D) -> Vec<f64> {
    let grid = field.grid();
    let shape = grid.shape();
    let m = 8 * grid.resolution();
    let mut circles = vec![shape.outer()];
    if shape.inner() > 0.0 {
        circles.push(shape.inner());
    }
    circles
        .into_iter()
        .flat_map(|c| {
            (0..m).map(move |k| {
                let a = std::f64::consts::TAU * k as f64 / m as f64;
                (c * a.cos(), c * a.sin())
            })
        })
        .map(|(x, y)| field.interpolate(x, y))
        .collect()
}

/// How far apart boundary samples of a radial field may be and still count as constant.
pub fn radial_boundary_tolerance(field: &RadialField) -> f64 {
    1e-9 * scale(field.values())
}

/// Boundary samples of a grid field interpolate between inside nodes and the
/// extension outside, so they can wander by about `h |∇φ|` near the wall.
pub fn grid_boundary_tolerance(field: &ScalarField2D) -> f64 {
    let grid = field.grid();
    let grad = field.gradient();
    let steep = (0..grid.len())
        .filter(|&k| grid.inside()[k] && grid.is_cut(k))
        .map(|k| grad[k].0.hypot(grad[k].1))
        .fold(0.0f64, f64::max);
    grid.spacing() * steep + 1e-9 * scale(field.values())
}

/// Two neighbouring radial nodes both sit on level `t`.
pub fn radial_is_plateau(field: &RadialField, t: f64) -> bool {
    let tol = PLATEAU_RTOL * scale(field.values());
    field
        .values()
        .windows(2)
        .any(|w| (w[0] - t).abs() <= tol && (w[1] - t).abs() <= tol)
}

/// Two 4-adjacent inside nodes both sit on level `t`.
pub fn grid_is_plateau(field: &ScalarField2D, t: f64) -> bool {
    let grid = field.grid();
    let n = grid.resolution();
    let v = field.values();
    let tol = PLATEAU_RTOL * scale(v);
    let on = |k: usize| grid.inside()[k] && (v[k] - t).abs() <= tol;
    (0..grid.len()).filter(|&k| on(k)).any(|k| {
        let (i, j) = grid.ij(k);
        (i + 1 < n && on(k + 1)) || (j + 1 < n && on(k + n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Grid2D, RadialMesh};
    use std::sync::Arc;

    #[test]
    fn radial_laplacian_of_r_squared_is_four() {
        let mesh = Arc::new(RadialMesh::uniform(0.0, 1.0, 65).unwrap());
        let f = RadialField::from_fn(mesh, |r| r * r).unwrap();
        let lap = radial_laplacian(&f);
        assert_eq!(lap.len(), 64);
        for s in &lap {
            assert!((s.value - 4.0).abs() < 1e-10, "{s:?}");
            assert!(s.truncation < 1e-9);
        }
    }

    #[test]
    fn radial_truncation_estimate_tracks_the_error() {
        // Δ r⁴ = 16 r²; the conservative stencil is off by h²·(const)
        let mesh = Arc::new(RadialMesh::uniform(0.0, 1.0, 129).unwrap());
        let f = RadialField::from_fn(mesh, |r| r.powi(4)).unwrap();
        for s in radial_laplacian(&f).iter().filter(|s| s.index > 2) {
            let r = f.nodes()[s.index];
            let err = (s.value - 16.0 * r * r).abs();
            assert!(err <= 2.0 * s.truncation + 1e-12, "{err} vs {}", s.truncation);
        }
    }

    #[test]
    fn grid_laplacian_of_quadratic() {
        let grid = Arc::new(Grid2D::disc(1.0, 33).unwrap());
        let f = ScalarField2D::from_fn(grid, |x, y| x * x + 3.0 * y * y).unwrap();
        let lap = grid_laplacian(&f);
        assert!(!lap.is_empty());
        for s in &lap {
            assert!((s.value - 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn traces_and_plateaus() {
        let grid = Arc::new(Grid2D::annulus(0.3, 1.0, 41).unwrap());
        let f = ScalarField2D::radial(grid, |r| (r - 0.3) * (1.0 - r)).unwrap();
        let trace = grid_boundary_trace(&f);
        let spread = trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(spread <= grid_boundary_tolerance(&f), "{spread}");
        assert!(!grid_is_plateau(&f, 0.05));

        let flat = ScalarField2D::radial(f.grid().clone(), |r| (r - 0.6).max(0.0)).unwrap();
        assert!(grid_is_plateau(&flat, 0.0));

        let mesh = Arc::new(RadialMesh::uniform(0.0, 1.0, 32).unwrap());
        let rf = RadialField::from_fn(mesh, |r| (0.5 - r).max(0.0)).unwrap();
        assert!(radial_is_plateau(&rf, 0.0));
        assert!(!radial_is_plateau(&rf, 0.25));
        assert_eq!(radial_boundary_trace(&rf), vec![0.0]);
    }
}
