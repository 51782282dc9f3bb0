//! Piecewise cubic Hermite interpolation with finite-difference slopes.
//!
//! Nodal slopes come from three-point (second order, non-uniform aware)
//! differences, so interpolation, differentiation and integration of smooth
//! samples are all at least second order and integration is fourth order on
//! uniform meshes (trapezoid plus Euler–Maclaurin end correction).

#[derive(Clone, Debug, PartialEq)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    /// `x` must be strictly increasing with at least three points.
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        debug_assert_eq!(x.len(), y.len());
        debug_assert!(x.len() >= 3);
        let d = nodal_slopes(x, y);
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        }
    }

    pub fn with_slopes(x: &[f64], y: &[f64], d: &[f64]) -> Self {
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d: d.to_vec(),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn end(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` containing `r` (clamped).
    pub fn cell(&self, r: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    fn local(&self, i: usize, r: f64) -> (f64, f64) {
        let h = self.x[i + 1] - self.x[i];
        (h, (r - self.x[i]) / h)
    }

    pub fn eval_in(&self, i: usize, r: f64) -> f64 {
        let (h, t) = self.local(i, r);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.y[i]
            + (t3 - 2.0 * t2 + t) * h * self.d[i]
            + (-2.0 * t3 + 3.0 * t2) * self.y[i + 1]
            + (t3 - t2) * h * self.d[i + 1]
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_in(self.cell(r), r)
    }

    pub fn derivative_in(&self, i: usize, r: f64) -> f64 {
        let (h, t) = self.local(i, r);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * self.y[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * h * self.d[i]
            + (-6.0 * t2 + 6.0 * t) * self.y[i + 1]
            + (3.0 * t2 - 2.0 * t) * h * self.d[i + 1])
            / h
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.derivative_in(self.cell(r), r)
    }

    /// ∫ over `[x_i, x_i + τ h]` of cell `i`'s cubic, `τ ∈ [0, 1]`.
    fn partial_cell_integral(&self, i: usize, tau: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let t = tau;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        h * ((t4 / 2.0 - t3 + t) * self.y[i]
            + (t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0) * h * self.d[i]
            + (-t4 / 2.0 + t3) * self.y[i + 1]
            + (t4 / 4.0 - t3 / 3.0) * h * self.d[i + 1])
    }

    fn cell_integral(&self, i: usize) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        0.5 * h * (self.y[i] + self.y[i + 1]) + h * h * (self.d[i] - self.d[i + 1]) / 12.0
    }

    /// ∫_{x_0}^{r} of the interpolant, `r` clamped to the node range.
    pub fn cumulative(&self, r: f64) -> f64 {
        let r = r.clamp(self.start(), self.end());
        let i = self.cell(r);
        let (_, t) = self.local(i, r);
        (0..i).map(|k| self.cell_integral(k)).sum::<f64>() + self.partial_cell_integral(i, t)
    }

    /// ∫_a^b of the interpolant (`a ≤ b`, clamped to the node range).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(self.start(), self.end());
        let b = b.clamp(self.start(), self.end());
        if b <= a {
            return 0.0;
        }
        let ia = self.cell(a);
        let ib = self.cell(b);
        let (_, ta) = self.local(ia, a);
        let (_, tb) = self.local(ib, b);
        if ia == ib {
            return self.partial_cell_integral(ib, tb) - self.partial_cell_integral(ia, ta);
        }
        let mut total = self.cell_integral(ia) - self.partial_cell_integral(ia, ta);
        total += ((ia + 1)..ib).map(|k| self.cell_integral(k)).sum::<f64>();
        total + self.partial_cell_integral(ib, tb)
    }

    /// Integral over the whole node range.
    pub fn total(&self) -> f64 {
        (0..self.x.len() - 1).map(|k| self.cell_integral(k)).sum()
    }

    /// Running integrals `∫_{x_0}^{x_k}` at every node.
    pub fn running(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.x.len());
        let mut acc = 0.0;
        out.push(0.0);
        for k in 0..self.x.len() - 1 {
            acc += self.cell_integral(k);
            out.push(acc);
        }
        out
    }

    /// Roots of `p(r) = level` in cells whose endpoint samples straddle the
    /// level (`y_i > level` differs from `y_{i+1} > level`).
    pub fn crossings(&self, level: f64) -> Vec<Crossing> {
        let mut out = Vec::new();
        for i in 0..self.x.len() - 1 {
            let above_l = self.y[i] > level;
            let above_r = self.y[i + 1] > level;
            if above_l == above_r {
                continue;
            }
            let r = self.root_in(i, level);
            out.push(Crossing {
                radius: r,
                cell: i,
                descending: above_l,
            });
        }
        out
    }

    /// Root of `p − level` inside cell `i`, by safeguarded bisection/secant.
    pub fn root_in(&self, i: usize, level: f64) -> f64 {
        let (mut a, mut b) = (self.x[i], self.x[i + 1]);
        let mut fa = self.y[i] - level;
        let fb = self.y[i + 1] - level;
        if fa == 0.0 {
            return a;
        }
        if fb == 0.0 {
            return b;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = self.eval_in(i, m) - level;
            if fm == 0.0 || (b - a) <= 4.0 * f64::EPSILON * b.abs().max(1e-300) {
                return m;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// One solution of `p(r) = level`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub radius: f64,
    pub cell: usize,
    /// The interpolant drops below the level when passing outward.
    pub descending: bool,
}

/// Second-order nodal slopes on a non-uniform mesh.
pub fn nodal_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        d[i] = (hm * hm * y[i + 1] - hp * hp * y[i - 1] + (hp * hp - hm * hm) * y[i])
            / (hm * hp * (hm + hp));
    }
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    d[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * y[0] + (h0 + h1) / (h0 * h1) * y[1]
        - h0 / (h1 * (h0 + h1)) * y[2];
    let a = x[n - 1] - x[n - 2];
    let b = x[n - 2] - x[n - 3];
    d[n - 1] = (2.0 * a + b) / (a * (a + b)) * y[n - 1] - (a + b) / (a * b) * y[n - 2]
        + a / (b * (a + b)) * y[n - 3];
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mesh(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn reproduces_quadratics_exactly() {
        let x: Vec<f64> = [0.0, 0.1, 0.35, 0.4, 0.9, 1.3].to_vec();
        let y: Vec<f64> = x.iter().map(|&t| 1.0 - 2.0 * t + 3.0 * t * t).collect();
        let s = Hermite::new(&x, &y);
        for &t in &[0.05, 0.2, 0.77, 1.25] {
            assert_relative_eq!(s.eval(t), 1.0 - 2.0 * t + 3.0 * t * t, epsilon = 1e-13);
            assert_relative_eq!(s.derivative(t), -2.0 + 6.0 * t, epsilon = 1e-12);
        }
        let exact = |t: f64| t - t * t + t * t * t;
        assert_relative_eq!(s.total(), exact(1.3), epsilon = 1e-13);
        assert_relative_eq!(s.integrate(0.07, 0.88), exact(0.88) - exact(0.07), epsilon = 1e-13);
        assert_relative_eq!(s.cumulative(0.5), exact(0.5), epsilon = 1e-13);
    }

    #[test]
    fn integration_is_fourth_order_on_uniform_meshes() {
        let err = |n: usize| {
            let x = mesh(n, 0.0, 2.0);
            let y: Vec<f64> = x.iter().map(|t| t.exp() * t.sin()).collect();
            let exact = |t: f64| 0.5 * t.exp() * (t.sin() - t.cos());
            (Hermite::new(&x, &y).total() - (exact(2.0) - exact(0.0))).abs()
        };
        let ratio = err(65) / err(129);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn crossings_find_roots() {
        let x = mesh(101, 0.0, 1.0);
        let y: Vec<f64> = x.iter().map(|t| (3.0 * t).cos()).collect();
        let s = Hermite::new(&x, &y);
        let c = s.crossings(0.0);
        assert_eq!(c.len(), 1);
        assert!(c[0].descending);
        assert_relative_eq!(c[0].radius, std::f64::consts::FRAC_PI_6, epsilon = 1e-7);
    }
}
