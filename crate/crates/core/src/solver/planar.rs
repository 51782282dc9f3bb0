//! Finite-difference discretisation on Cartesian grids over discs and annuli.
//!
//! Interior nodes use the five-point Laplacian; nodes next to the curved
//! boundary use the Shortley–Weller stencil with the exact distance to the
//! boundary circle. When that distance is below `THETA_MIN·h` the node instead
//! carries the linear interpolation constraint between its opposite neighbour
//! and the boundary point, which avoids the huge and badly conditioned
//! coefficients of very short arms.

use super::linear::SparseRankOne;
use super::newton::NewtonSystem;
use crate::discretize::{Grid2D, ScalarField2D};
use std::sync::Arc;

const THETA_MIN: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
enum Arm {
    /// Neighbour node index at distance `h`.
    Node(usize),
    /// Boundary point at distance `θh` carrying value `g`.
    Wall { theta: f64, g: f64 },
}

#[derive(Clone, Debug)]
enum Row {
    /// Arms in the order −x, +x, −y, +y.
    Stencil([Arm; 4]),
    /// `u_p = (θ u_q + g) / (1 + θ)`, or `u_p = g` without an opposite node.
    Constraint { opposite: Option<usize>, theta: f64, g: f64 },
}

pub(crate) struct Planar {
    grid: Arc<Grid2D>,
    k: Vec<f64>,
    f: Vec<f64>,
    rho: Option<f64>,
    /// Values at nodes outside the open domain.
    fixed: Vec<f64>,
    /// Grid node of each unknown.
    nodes: Vec<usize>,
    /// Unknown index of each grid node.
    index: Vec<Option<usize>>,
    rows: Vec<Row>,
    h: f64,
}

/// Distance from `p` along unit direction `e` to the circle of radius `c`,
/// taking the first crossing ahead.
fn ray_to_circle(p: (f64, f64), e: (f64, f64), c: f64, from_inside: bool) -> f64 {
    let pe = p.0 * e.0 + p.1 * e.1;
    let pp = p.0 * p.0 + p.1 * p.1;
    let disc = (pe * pe - pp + c * c).max(0.0);
    if from_inside {
        -pe + disc.sqrt()
    } else {
        -pe - disc.sqrt()
    }
}

impl Planar {
    pub fn new(
        grid: Arc<Grid2D>,
        k: Vec<f64>,
        f: Vec<f64>,
        rho: Option<f64>,
        g_inner: f64,
        g_outer: f64,
    ) -> Self {
        let n = grid.resolution();
        let h = grid.spacing();
        let shape = grid.shape();
        let (r_in, r_out) = (shape.inner(), shape.outer());
        let inside = grid.inside();
        let mut index = vec![None; n * n];
        let mut nodes = Vec::new();
        for k in 0..n * n {
            if inside[k] {
                index[k] = Some(nodes.len());
                nodes.push(k);
            }
        }
        let fixed: Vec<f64> = (0..n * n)
            .map(|k| {
                if inside[k] {
                    0.0
                } else if grid.radius(k) >= r_out {
                    g_outer
                } else {
                    g_inner
                }
            })
            .collect();
        let dirs: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        let rows = nodes
            .iter()
            .map(|&p| {
                let (i, j) = grid.ij(p);
                let pos = grid.position(p);
                let mut arms = [Arm::Node(0); 4];
                for (d, &(di, dj)) in dirs.iter().enumerate() {
                    // neighbours of inside nodes always exist on the grid
                    let qi = (i as isize + di) as usize;
                    let qj = (j as isize + dj) as usize;
                    let q = grid.index(qi, qj);
                    if inside[q] {
                        arms[d] = Arm::Node(q);
                    } else {
                        let e = (di as f64, dj as f64);
                        let (dist, g) = if grid.radius(q) >= r_out {
                            (ray_to_circle(pos, e, r_out, true), g_outer)
                        } else {
                            (ray_to_circle(pos, e, r_in, false), g_inner)
                        };
                        let theta = (dist / h).clamp(1e-300, 1.0);
                        arms[d] = Arm::Wall { theta, g };
                    }
                }
                let shortest = (0..4)
                    .filter_map(|d| match arms[d] {
                        Arm::Wall { theta, g } => Some((d, theta, g)),
                        Arm::Node(_) => None,
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                match shortest {
                    Some((d, theta, g)) if theta < THETA_MIN => {
                        let opposite = match arms[d ^ 1] {
                            Arm::Node(q) => Some(q),
                            Arm::Wall { .. } => None,
                        };
                        Row::Constraint { opposite, theta, g }
                    }
                    _ => Row::Stencil(arms),
                }
            })
            .collect();
        Self {
            grid,
            k,
            f,
            rho,
            fixed,
            nodes,
            index,
            rows,
            h,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut u = self.fixed.clone();
        for (&k, &v) in self.nodes.iter().zip(x) {
            u[k] = v;
        }
        u
    }

    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&k| u[k]).collect()
    }

    pub fn field(&self, x: &[f64]) -> ScalarField2D {
        ScalarField2D::new(self.grid.clone(), self.expand(x)).expect("finite iterate")
    }

    pub fn normalisation(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.k)
            .zip(self.grid.weights())
            .filter(|(_, &w)| w > 0.0)
            .map(|((u, k), w)| w * k * u.exp())
            .sum()
    }

    fn scale(&self, u: &[f64]) -> (f64, f64) {
        let z = self.normalisation(u);
        (self.rho.map_or(1.0, |rho| rho / z), z)
    }

    /// Coefficients `(node or wall, weight)` of the Laplacian row, plus the diagonal.
    fn laplacian_row(&self, arms: &[Arm; 4]) -> ([(Arm, f64); 4], f64) {
        let h = self.h;
        let len = |a: Arm| match a {
            Arm::Node(_) => h,
            Arm::Wall { theta, .. } => theta * h,
        };
        let mut out = [(Arm::Node(0), 0.0); 4];
        let mut diag = 0.0;
        for axis in 0..2 {
            let (am, ap) = (arms[2 * axis], arms[2 * axis + 1]);
            let (hm, hp) = (len(am), len(ap));
            let cm = 2.0 / (hm * (hm + hp));
            let cp = 2.0 / (hp * (hm + hp));
            out[2 * axis] = (am, cm);
            out[2 * axis + 1] = (ap, cp);
            diag -= cm + cp;
        }
        (out, diag)
    }
}

impl NewtonSystem for Planar {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let u = self.expand(x);
        let (s, _) = self.scale(&u);
        self.nodes
            .iter()
            .zip(&self.rows)
            .map(|(&p, row)| match row {
                Row::Constraint { opposite, theta, g } => match opposite {
                    Some(q) => u[p] - (theta * u[*q] + g) / (1.0 + theta),
                    None => u[p] - g,
                },
                Row::Stencil(arms) => {
                    let (coef, diag) = self.laplacian_row(arms);
                    let lap = coef.iter().fold(diag * u[p], |acc, &(a, c)| {
                        acc + c * match a {
                            Arm::Node(q) => u[q],
                            Arm::Wall { g, .. } => g,
                        }
                    });
                    lap + s * self.k[p] * u[p].exp() - self.f[p]
                }
            })
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> SparseRankOne {
        let u = self.expand(x);
        let (s, z) = self.scale(&u);
        let m = self.unknowns();
        let mut jac = SparseRankOne::new(m);
        let mut a = vec![0.0; m];
        for (row_idx, (&p, row)) in self.nodes.iter().zip(&self.rows).enumerate() {
            match row {
                Row::Constraint { opposite, theta, .. } => {
                    jac.push(row_idx, row_idx, 1.0);
                    if let Some(q) = opposite {
                        let col = self.index[*q].expect("opposite node is an unknown");
                        jac.push(row_idx, col, -theta / (1.0 + theta));
                    }
                }
                Row::Stencil(arms) => {
                    let (coef, diag) = self.laplacian_row(arms);
                    let nl = s * self.k[p] * u[p].exp();
                    jac.push(row_idx, row_idx, diag + nl);
                    for (arm, c) in coef {
                        if let Arm::Node(q) = arm {
                            jac.push(row_idx, self.index[q].expect("inside neighbour"), c);
                        }
                    }
                    a[row_idx] = nl;
                }
            }
        }
        if self.rho.is_some() {
            let w = self.grid.weights();
            jac.b = self
                .nodes
                .iter()
                .map(|&q| w[q] * self.k[q] * u[q].exp() / z)
                .collect();
            jac.a = a;
        }
        jac
    }

    fn roundoff_floor(&self, x: &[f64]) -> f64 {
        let u = self.expand(x);
        let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lmax = self
            .rows
            .iter()
            .map(|row| match row {
                Row::Stencil(arms) => 2.0 * self.laplacian_row(arms).1.abs(),
                Row::Constraint { .. } => 2.0,
            })
            .fold(0.0, f64::max);
        let (s, _) = self.scale(&u);
        let nmax = self
            .nodes
            .iter()
            .map(|&p| s * self.k[p] * u[p].exp())
            .fold(0.0, f64::max);
        64.0 * f64::EPSILON * (lmax * (umax + 1.0) + nmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::newton::max_norm;

    #[test]
    fn laplacian_is_exact_on_quadratics_up_to_the_wall() {
        // u = x² + y² has Δu = 4; Shortley–Weller is exact for quadratics.
        let grid = Arc::new(Grid2D::disc(1.0, 41).unwrap());
        let n = grid.len();
        let sys = Planar::new(grid.clone(), vec![1.0; n], vec![4.0; n], None, 1.0, 1.0);
        let u: Vec<f64> = (0..n)
            .map(|k| {
                let r = grid.radius(k);
                if grid.inside()[k] {
                    r * r
                } else {
                    1.0
                }
            })
            .collect();
        let x = sys.restrict(&u);
        // Liouville residual = Δu + e^u − f = e^u here; subtract it back out.
        let res = sys.residual(&x);
        let mut worst: f64 = 0.0;
        for (row_idx, (&p, row)) in sys.nodes.iter().zip(&sys.rows).enumerate() {
            if let Row::Stencil(_) = row {
                worst = worst.max((res[row_idx] - u[p].exp()).abs());
            }
        }
        assert!(worst < 1e-9, "{worst}");
        let constraint_res: Vec<f64> = sys
            .rows
            .iter()
            .zip(&res)
            .filter(|(r, _)| matches!(r, Row::Constraint { .. }))
            .map(|(_, v)| *v)
            .collect();
        // linear interpolation of r² misses by O(h²)
        assert!(max_norm(&constraint_res) < 4.0 * sys.h * sys.h);
    }
}
