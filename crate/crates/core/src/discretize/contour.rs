//! Marching squares on node grids with linear edge interpolation.

use serde::{Deserialize, Serialize};

use super::grid::{bilinear, ScalarField2D};

/// Line integrals over a level set `{φ = t}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    /// ∫ ds
    pub length: f64,
    /// ∫ e^{u/2} ds
    pub weighted_length: f64,
    /// ∫ |∇φ| ds
    pub flux: f64,
    /// ∫ e^u / |∇φ| ds, which equals −da/dt by the co-area formula.
    pub inverse_flux: f64,
}

pub type Segment = ((f64, f64), (f64, f64));

/// Segments of `{φ = t}` in cells whose centre lies in the grid's domain.
pub fn level_segments(phi: &ScalarField2D, t: f64) -> Vec<Segment> {
    let grid = phi.grid();
    let n = grid.resolution();
    let h = grid.spacing();
    let v = phi.values();
    let shape = grid.shape();
    let mut out = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let k = j * n + i;
            let corners = [v[k], v[k + 1], v[k + n + 1], v[k + n]];
            let above = corners.map(|c| c > t);
            if above.iter().all(|&a| a) || above.iter().all(|&a| !a) {
                continue;
            }
            let x0 = grid.coord(i);
            let y0 = grid.coord(j);
            let pos = [(x0, y0), (x0 + h, y0), (x0 + h, y0 + h), (x0, y0 + h)];
            // edges: bottom (0-1), right (1-2), top (3-2), left (0-3)
            let ends = [(0usize, 1usize), (1, 2), (3, 2), (0, 3)];
            let mut hits: [Option<(f64, f64)>; 4] = [None; 4];
            for (e, &(a, b)) in ends.iter().enumerate() {
                if above[a] != above[b] {
                    let s = (t - corners[a]) / (corners[b] - corners[a]);
                    hits[e] = Some((
                        pos[a].0 + s * (pos[b].0 - pos[a].0),
                        pos[a].1 + s * (pos[b].1 - pos[a].1),
                    ));
                }
            }
            let found: Vec<usize> = (0..4).filter(|&e| hits[e].is_some()).collect();
            let pairs: Vec<(usize, usize)> = if found.len() == 2 {
                vec![(found[0], found[1])]
            } else {
                let centre_above = corners.iter().sum::<f64>() / 4.0 > t;
                if centre_above == above[0] {
                    vec![(0, 1), (2, 3)]
                } else {
                    vec![(3, 0), (1, 2)]
                }
            };
            for (a, b) in pairs {
                let (p, q) = (hits[a].unwrap(), hits[b].unwrap());
                let mid = (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1));
                if shape.contains_radius(mid.0.hypot(mid.1)) {
                    out.push((p, q));
                }
            }
        }
    }
    out
}

/// Line integrals over `{φ = t}` with midpoint evaluation on every segment.
pub fn grid_contour(u: &ScalarField2D, phi: &ScalarField2D, t: f64) -> Contour {
    let grid = phi.grid();
    let grad = phi.gradient();
    let gx: Vec<f64> = grad.iter().map(|g| g.0).collect();
    let gy: Vec<f64> = grad.iter().map(|g| g.1).collect();
    let mut c = Contour::default();
    for (p, q) in level_segments(phi, t) {
        let len = (q.0 - p.0).hypot(q.1 - p.1);
        if len == 0.0 {
            continue;
        }
        let (mx, my) = (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1));
        let uu = bilinear(grid, u.values(), mx, my);
        let g = bilinear(grid, &gx, mx, my).hypot(bilinear(grid, &gy, mx, my));
        c.length += len;
        c.weighted_length += len * (0.5 * uu).exp();
        c.flux += len * g;
        if g > 0.0 {
            c.inverse_flux += len * uu.exp() / g;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::grid::Grid2D;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn circle_contour_converges() {
        let err = |n: usize| {
            let g = Arc::new(Grid2D::disc(1.0, n).unwrap());
            let phi = ScalarField2D::from_fn(g.clone(), |x, y| -(x * x + y * y)).unwrap();
            let u = ScalarField2D::from_fn(g, |_, _| 0.0).unwrap();
            let c = grid_contour(&u, &phi, -0.25);
            assert_relative_eq!(c.length, c.weighted_length, epsilon = 1e-14);
            (c.weighted_length - PI).abs().max((c.flux - PI).abs())
        };
        let coarse = err(65);
        let fine = err(257);
        assert!(fine < 2e-3, "{fine}");
        assert!(coarse / fine > 4.0);
    }

    #[test]
    fn saddle_cells_produce_two_segments() {
        let g = Arc::new(Grid2D::disc(1.0, 5).unwrap());
        // x·y has a saddle at the origin node; shift so the level passes through cells
        let phi = ScalarField2D::from_fn(g, |x, y| x * y).unwrap();
        let segs = level_segments(&phi, 0.01);
        assert!(!segs.is_empty());
        for ((x0, y0), (x1, y1)) in segs {
            assert!((x0 * y0 - 0.01).abs() < 0.2 && (x1 * y1 - 0.01).abs() < 0.2);
        }
    }
}
