//! Cartesian node grids covering a disc or an annulus centred at the origin.
//!
//! Nodes sit at `(−R + i h, −R + j h)` for `i, j ∈ 0..n`, `R` the outer radius.
//! Each node owns the dual cell `[x ± h/2] × [y ± h/2]`; its quadrature weight
//! is the exact area of that cell inside the domain, so the weights always sum
//! to the domain area.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disc { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Shape {
    pub fn inner(self) -> f64 {
        match self {
            Shape::Disc { .. } => 0.0,
            Shape::Annulus { inner, .. } => inner,
        }
    }

    pub fn outer(self) -> f64 {
        match self {
            Shape::Disc { radius } => radius,
            Shape::Annulus { outer, .. } => outer,
        }
    }

    pub fn area(self) -> f64 {
        PI * (self.outer().powi(2) - self.inner().powi(2))
    }

    /// Open domain membership by radius.
    pub fn contains_radius(self, r: f64) -> bool {
        match self {
            Shape::Disc { radius } => r < radius,
            Shape::Annulus { inner, outer } => r > inner && r < outer,
        }
    }

    fn validate(self) -> Result<Self> {
        let ok = match self {
            Shape::Disc { radius } => radius.is_finite() && radius > 0.0,
            Shape::Annulus { inner, outer } => {
                inner.is_finite() && outer.is_finite() && inner > 0.0 && outer > inner
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(invalid("shape", format!("invalid radii in {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    shape: Shape,
    n: usize,
    h: f64,
    weights: Vec<f64>,
    inside: Vec<bool>,
}

impl Grid2D {
    /// `n × n` nodes over the bounding square of `shape`; `n ≥ 5`.
    pub fn new(shape: Shape, n: usize) -> Result<Self> {
        let shape = shape.validate()?;
        if n < 5 {
            return Err(invalid("resolution", format!("need at least 5 nodes per side, got {n}")));
        }
        let outer = shape.outer();
        let h = 2.0 * outer / (n - 1) as f64;
        let mut weights = vec![0.0; n * n];
        let mut inside = vec![false; n * n];
        for j in 0..n {
            let y = -outer + h * j as f64;
            for i in 0..n {
                let x = -outer + h * i as f64;
                let k = j * n + i;
                let (x0, x1, y0, y1) = (x - 0.5 * h, x + 0.5 * h, y - 0.5 * h, y + 0.5 * h);
                let mut w = rect_disc_area(x0, x1, y0, y1, outer);
                if shape.inner() > 0.0 {
                    w -= rect_disc_area(x0, x1, y0, y1, shape.inner());
                }
                weights[k] = w.max(0.0);
                inside[k] = shape.contains_radius(x.hypot(y));
            }
        }
        Ok(Self {
            shape,
            n,
            h,
            weights,
            inside,
        })
    }

    pub fn disc(radius: f64, n: usize) -> Result<Self> {
        Self::new(Shape::Disc { radius }, n)
    }

    pub fn annulus(inner: f64, outer: f64, n: usize) -> Result<Self> {
        Self::new(Shape::Annulus { inner, outer }, n)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Nodes per side.
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes strictly inside the open domain.
    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.shape.outer() + self.h * i as f64
    }

    pub fn position(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.coord(i), self.coord(j))
    }

    pub fn radius(&self, k: usize) -> f64 {
        let (x, y) = self.position(k);
        x.hypot(y)
    }

    /// Whether a node's dual cell is cut by (or lies outside) the domain boundary.
    pub fn is_cut(&self, k: usize) -> bool {
        let full = self.h * self.h;
        self.weights[k] < full * (1.0 - 1e-12)
    }

    pub fn same_as(&self, other: &Grid2D) -> bool {
        self.shape == other.shape && self.n == other.n
    }
}

/// Samples on every node of a [`Grid2D`], including nodes outside the domain
/// (those carry an extension of the field and only enter through cut cells).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField2D {
    grid: Arc<Grid2D>,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn new(grid: Arc<Grid2D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(
                "values",
                format!("length {} does not match grid size {}", values.len(), grid.len()),
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite sample at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid2D>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.position(k);
                f(x, y)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn radial(grid: Arc<Grid2D>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x, y| f(x.hypot(y)))
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?}/{} vs {:?}/{}",
                self.grid.shape(),
                self.grid.resolution(),
                other.grid.shape(),
                other.grid.resolution()
            )))
        }
    }

    /// Extremes over nodes inside the domain.
    pub fn range_inside(&self) -> (f64, f64) {
        self.values
            .iter()
            .zip(self.grid.inside())
            .filter(|(_, &ins)| ins)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Central-difference nodal gradient (one-sided on the grid frame).
    pub fn gradient(&self) -> Vec<(f64, f64)> {
        let n = self.grid.resolution();
        let h = self.grid.spacing();
        let v = &self.values;
        let diff = |km: usize, k0: usize, kp: usize, at_lo: bool, at_hi: bool| {
            if at_lo {
                (-3.0 * v[k0] + 4.0 * v[kp] - v[kp + (kp - k0)]) / (2.0 * h)
            } else if at_hi {
                (3.0 * v[k0] - 4.0 * v[km] + v[km - (k0 - km)]) / (2.0 * h)
            } else {
                (v[kp] - v[km]) / (2.0 * h)
            }
        };
        (0..n * n)
            .map(|k| {
                let (i, j) = (k % n, k / n);
                let gx = diff(
                    k.wrapping_sub(1),
                    k,
                    k + 1,
                    i == 0,
                    i == n - 1,
                );
                let gy = diff(
                    k.wrapping_sub(n),
                    k,
                    k + n,
                    j == 0,
                    j == n - 1,
                );
                (gx, gy)
            })
            .collect()
    }

    /// Bilinear interpolation of the samples at `(x, y)` (clamped to the grid).
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        bilinear(&self.grid, &self.values, x, y)
    }

    /// ∫ e^u over the domain.
    pub fn weighted_mass(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(&u, &w)| w * u.exp())
            .sum()
    }

    /// ∫ e^u over the nodes selected by `mask`.
    pub fn weighted_mass_masked(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|((&u, &w), _)| w * u.exp())
            .sum()
    }
}

pub(crate) fn bilinear(grid: &Grid2D, values: &[f64], x: f64, y: f64) -> f64 {
    let n = grid.resolution();
    let h = grid.spacing();
    let r0 = -grid.shape().outer();
    let fx = ((x - r0) / h).clamp(0.0, (n - 1) as f64);
    let fy = ((y - r0) / h).clamp(0.0, (n - 1) as f64);
    let i = (fx.floor() as usize).min(n - 2);
    let j = (fy.floor() as usize).min(n - 2);
    let tx = fx - i as f64;
    let ty = fy - j as f64;
    let k = j * n + i;
    (1.0 - tx) * (1.0 - ty) * values[k]
        + tx * (1.0 - ty) * values[k + 1]
        + (1.0 - tx) * ty * values[k + n]
        + tx * ty * values[k + n + 1]
}

/// Fraction of an `h × h` square on which the linear function
/// `c + gx·x + gy·y` (origin at the square's centre) is positive.
pub fn square_fraction_above(c: f64, gx: f64, gy: f64, h: f64) -> f64 {
    // P(aX + bY < c) with X, Y ~ U(−½, ½): trapezoidal CDF.
    let (mut a, mut b) = ((gx * h).abs(), (gy * h).abs());
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    if a == 0.0 {
        return if c > 0.0 { 1.0 } else { 0.0 };
    }
    let s = c;
    if b <= 1e-12 * a {
        return ((s + 0.5 * a) / a).clamp(0.0, 1.0);
    }
    let lo = -0.5 * (a + b);
    let mid = 0.5 * (a - b);
    if s <= lo {
        0.0
    } else if s <= -mid {
        (s - lo).powi(2) / (2.0 * a * b)
    } else if s <= mid {
        (s + 0.5 * a) / a
    } else if s < -lo {
        1.0 - (-lo - s).powi(2) / (2.0 * a * b)
    } else {
        1.0
    }
}

/// Area of `[x0, x1] × [y0, y1] ∩ {|y| < radius}`.
pub fn rect_disc_area(x0: f64, x1: f64, y0: f64, y1: f64, radius: f64) -> f64 {
    let s = |a: f64, b: f64| a.signum() * b.signum() * quadrant_area(a.abs(), b.abs(), radius);
    s(x1, y1) - s(x0, y1) - s(x1, y0) + s(x0, y0)
}

/// Area of `[0, a] × [0, b] ∩ {|y| < radius}` for `a, b ≥ 0`.
fn quadrant_area(a: f64, b: f64, radius: f64) -> f64 {
    let a = a.min(radius);
    let b = b.min(radius);
    let r2 = radius * radius;
    if a * a + b * b <= r2 {
        return a * b;
    }
    let xc = (r2 - b * b).max(0.0).sqrt();
    let prim = |x: f64| 0.5 * (x * (r2 - x * x).max(0.0).sqrt() + r2 * (x / radius).clamp(-1.0, 1.0).asin());
    b * xc + prim(a) - prim(xc)
}
