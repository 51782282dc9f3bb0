//! Second-order finite-volume discretisation of the radial problem.
//!
//! At an interior node the operator is the conservative difference
//! `[r₊(u_{i+1} − u_i)/h₊ − r₋(u_i − u_{i−1})/h₋] / (r_i (h₊ + h₋)/2)` with
//! midpoint radii `r±`. On a disc the origin row uses `Δu(0) ≈ 4(u₁ − u₀)/r₁²`.
//! The normalisation `∫K e^u` uses the trapezoid rule on `2πr K e^u`, whose
//! weights are diagonal, so the Jacobian is tridiagonal plus rank one.

use std::f64::consts::PI;

use super::linear::SparseRankOne;
use super::newton::NewtonSystem;

pub(crate) struct RadialFd {
    r: Vec<f64>,
    k: Vec<f64>,
    f: Vec<f64>,
    rho: Option<f64>,
    disc: bool,
    g_inner: f64,
    g_outer: f64,
    /// Trapezoid weights for `∫ · dy` (include `2πr`).
    omega: Vec<f64>,
}

impl RadialFd {
    pub fn new(
        r: &[f64],
        k: Vec<f64>,
        f: Vec<f64>,
        rho: Option<f64>,
        g_inner: f64,
        g_outer: f64,
    ) -> Self {
        let n = r.len();
        let omega = (0..n)
            .map(|i| {
                let left = if i > 0 { r[i] - r[i - 1] } else { 0.0 };
                let right = if i + 1 < n { r[i + 1] - r[i] } else { 0.0 };
                2.0 * PI * r[i] * 0.5 * (left + right)
            })
            .collect();
        Self {
            r: r.to_vec(),
            k,
            f,
            rho,
            disc: r[0] == 0.0,
            g_inner,
            g_outer,
            omega,
        }
    }

    fn first_unknown(&self) -> usize {
        if self.disc {
            0
        } else {
            1
        }
    }

    pub fn unknowns(&self) -> usize {
        self.r.len() - 1 - self.first_unknown()
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.r.len());
        if !self.disc {
            u.push(self.g_inner);
        }
        u.extend_from_slice(x);
        u.push(self.g_outer);
        u
    }

    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        u[self.first_unknown()..self.r.len() - 1].to_vec()
    }

    /// Stencil `(c₋, c₀, c₊)` of the operator at node `i`.
    fn stencil(&self, i: usize) -> (f64, f64, f64) {
        let r = &self.r;
        if i == 0 {
            let c = 4.0 / (r[1] * r[1]);
            return (0.0, -c, c);
        }
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        let rm = 0.5 * (r[i] + r[i - 1]);
        let rp = 0.5 * (r[i] + r[i + 1]);
        let vol = r[i] * 0.5 * (hm + hp);
        let cm = rm / hm / vol;
        let cp = rp / hp / vol;
        (cm, -(cm + cp), cp)
    }

    pub fn normalisation(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.k)
            .zip(&self.omega)
            .map(|((u, k), w)| w * k * u.exp())
            .sum()
    }

    /// Nonlinear term at every node.
    fn nonlinearity(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let z = self.normalisation(u);
        let scale = self.rho.map_or(1.0, |rho| rho / z);
        (
            u.iter().zip(&self.k).map(|(u, k)| scale * k * u.exp()).collect(),
            z,
        )
    }

    /// Pointwise residual at every node (Dirichlet nodes report `u − g`).
    pub fn full_residual(&self, u: &[f64]) -> Vec<f64> {
        let n = self.r.len();
        let (nl, _) = self.nonlinearity(u);
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return u[i] - self.g_outer;
                }
                if i == 0 && !self.disc {
                    return u[0] - self.g_inner;
                }
                let (cm, c0, cp) = self.stencil(i);
                let lm = if i > 0 { cm * u[i - 1] } else { 0.0 };
                lm + c0 * u[i] + cp * u[i + 1] + nl[i] - self.f[i]
            })
            .collect()
    }
}

impl NewtonSystem for RadialFd {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let u = self.expand(x);
        let full = self.full_residual(&u);
        self.restrict(&full)
    }

    fn jacobian(&self, x: &[f64]) -> SparseRankOne {
        let u = self.expand(x);
        let (nl, z) = self.nonlinearity(&u);
        let off = self.first_unknown();
        let m = self.unknowns();
        let mut jac = SparseRankOne::new(m);
        for row in 0..m {
            let i = row + off;
            let (cm, c0, cp) = self.stencil(i);
            jac.push(row, row, c0 + nl[i]);
            if i > 0 && row > 0 {
                jac.push(row, row - 1, cm);
            }
            if row + 1 < m {
                jac.push(row, row + 1, cp);
            }
        }
        if self.rho.is_some() {
            jac.a = (0..m).map(|row| nl[row + off]).collect();
            jac.b = (0..m)
                .map(|row| {
                    let i = row + off;
                    self.omega[i] * self.k[i] * u[i].exp() / z
                })
                .collect();
        }
        jac
    }

    fn roundoff_floor(&self, x: &[f64]) -> f64 {
        let u = self.expand(x);
        let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lmax = (0..self.r.len() - 1)
            .map(|i| self.stencil(i).1.abs() * 2.0)
            .fold(0.0, f64::max);
        let (nl, _) = self.nonlinearity(&u);
        let nmax = nl.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        64.0 * f64::EPSILON * (lmax * (umax + 1.0) + nmax)
    }
}
