use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::spline::Hermite;
use crate::bubble::BubbleParam;
use crate::error::{invalid, Error, Result};

pub const MIN_RADIAL_NODES: usize = 16;

/// Radii sampling a disc (`inner = 0`), an annulus, or a truncated exterior
/// domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialMesh {
    nodes: Vec<f64>,
}

impl RadialMesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_RADIAL_NODES {
            return Err(invalid(
                "nodes",
                format!("need at least {MIN_RADIAL_NODES} radii, got {}", nodes.len()),
            ));
        }
        if nodes.iter().any(|r| !r.is_finite()) || nodes[0] < 0.0 {
            return Err(invalid("nodes", "radii must be finite and nonnegative"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("nodes", "radii must be strictly increasing"));
        }
        Ok(Self { nodes })
    }

    /// `n` equally spaced radii on `[inner, outer]`.
    pub fn uniform(inner: f64, outer: f64, n: usize) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(invalid("radii", format!("need 0 ≤ inner < outer, got ({inner}, {outer})")));
        }
        let h = (outer - inner) / (n.max(2) - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| inner + h * i as f64).collect();
        if let Some(last) = nodes.last_mut() {
            *last = outer;
        }
        Self::new(nodes)
    }

    /// `n` geometrically spaced radii on `[inner, outer]`, `inner > 0`.
    pub fn geometric(inner: f64, outer: f64, n: usize) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(invalid("radii", format!("need 0 < inner < outer, got ({inner}, {outer})")));
        }
        let ratio = (outer / inner).ln() / (n.max(2) - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| inner * (ratio * i as f64).exp()).collect();
        nodes[0] = inner;
        if let Some(last) = nodes.last_mut() {
            *last = outer;
        }
        Self::new(nodes)
    }

    /// Uniform on `[0, core]` with `n_core` nodes, then geometric out to `outer`
    /// with spacing continuous at `core`. Used for truncations of the whole plane.
    pub fn graded(core: f64, outer: f64, n_core: usize, n_outer: usize) -> Result<Self> {
        let inner = Self::uniform(0.0, core, n_core)?;
        let outer_part = Self::geometric(core, outer, n_outer + 1)?;
        let mut nodes = inner.nodes;
        nodes.extend_from_slice(&outer_part.nodes[1..]);
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn inner_radius(&self) -> f64 {
        self.nodes[0]
    }

    pub fn outer_radius(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn is_disc(&self) -> bool {
        self.nodes[0] == 0.0
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x < r);
        if k == 0 {
            0
        } else if k >= self.nodes.len() {
            self.nodes.len() - 1
        } else if (self.nodes[k] - r) < (r - self.nodes[k - 1]) {
            k
        } else {
            k - 1
        }
    }

    /// The part of the mesh on `[a, b]`, endpoints inserted when they are not nodes.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let tol = 1e-12 * self.outer_radius();
        let mut nodes: Vec<f64> = self
            .nodes
            .iter()
            .copied()
            .filter(|&r| r > a + tol && r < b - tol)
            .collect();
        nodes.insert(0, a);
        nodes.push(b);
        Self::new(nodes)
    }
}

/// Samples of a radial function on a [`RadialMesh`].
#[derive(Clone, Debug)]
pub struct RadialField {
    mesh: Arc<RadialMesh>,
    values: Vec<f64>,
    spline: Hermite,
}

impl PartialEq for RadialField {
    fn eq(&self, other: &Self) -> bool {
        self.mesh == other.mesh && self.values == other.values
    }
}

impl RadialField {
    pub fn new(mesh: Arc<RadialMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(invalid(
                "values",
                format!("length {} does not match mesh length {}", values.len(), mesh.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite sample at node {i}")));
        }
        let spline = Hermite::new(mesh.nodes(), &values);
        Ok(Self {
            mesh,
            values,
            spline,
        })
    }

    pub fn from_fn(mesh: Arc<RadialMesh>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&r| f(r)).collect();
        Self::new(mesh, values)
    }

    pub fn bubble(mesh: Arc<RadialMesh>, p: BubbleParam) -> Result<Self> {
        Self::from_fn(mesh, |r| p.value(r))
    }

    pub fn constant(mesh: Arc<RadialMesh>, c: f64) -> Result<Self> {
        Self::from_fn(mesh, |_| c)
    }

    pub fn mesh(&self) -> &Arc<RadialMesh> {
        &self.mesh
    }

    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spline(&self) -> &Hermite {
        &self.spline
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.spline.eval(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.spline.derivative(r)
    }

    /// Nodal slopes dψ/dr used by the interpolant.
    pub fn slopes(&self) -> &[f64] {
        self.spline.slopes()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        Self::new(self.mesh.clone(), values)
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_mesh(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.mesh.clone(), values)
    }

    pub fn same_mesh(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh == other.mesh
    }

    pub(crate) fn check_same_mesh(&self, other: &Self) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("radial meshes differ".into()))
        }
    }

    /// Strictly decreasing at the nodes.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }

    /// Spline of the annular mass density `2πr e^{u(r)}`.
    pub fn mass_density(&self) -> Hermite {
        let y: Vec<f64> = self
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &u)| 2.0 * PI * r * u.exp())
            .collect();
        Hermite::new(self.nodes(), &y)
    }

    /// ∫ e^u over `{a < |y| < b}`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.mass_density().integrate(a, b)
    }

    /// ∫ e^u over `{|y| < r_k}` for every node `r_k` (relative to the inner radius).
    pub fn cumulative_mass(&self) -> Vec<f64> {
        self.mass_density().running()
    }

    /// Restriction to the sub-mesh on `[a, b]`, interpolating new endpoints.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let mesh = Arc::new(self.mesh.restrict(a, b)?);
        let values = mesh.nodes().iter().map(|&r| self.eval(r)).collect();
        Self::new(mesh, values)
    }
}

/// How exterior integrals are continued past the truncation radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// Nothing beyond the last node.
    None,
    /// The field is the bubble `U_λ` past the last node.
    Bubble { lambda: f64 },
    /// `e^ψ ≈ A r^{−p}` fitted on the outer decade of the mesh; needs `p > 2`.
    PowerLaw,
}

/// Fitted decay exponent `p` of `e^{ψ} ~ r^{−p}` near the outer radius.
pub fn decay_exponent(field: &RadialField) -> f64 {
    let r = field.nodes();
    let n = r.len();
    let r_end = r[n - 1];
    // compare against the node nearest r_end / 2 (or the inner radius)
    let target = (0.5 * r_end).max(r[0]);
    let k = field.mesh().nearest(target).min(n - 2);
    -(field.values()[n - 1] - field.values()[k]) / (r_end / r[k]).ln()
}

/// ∫ e^ψ over `{|y| > R_max}` according to `tail`.
pub fn tail_mass(field: &RadialField, tail: Tail) -> Result<f64> {
    let r_max = field.mesh().outer_radius();
    match tail {
        Tail::None => Ok(0.0),
        Tail::Bubble { lambda } => Ok(BubbleParam::new(lambda)?.exterior_mass(r_max)),
        Tail::PowerLaw => {
            let p = decay_exponent(field);
            if !(p > 2.0 + 1e-6) {
                return Err(Error::Precondition(format!(
                    "e^ψ decays like r^-{p:.4}; the exterior mass diverges (need exponent > 2)"
                )));
            }
            Ok(2.0 * PI * field.last().exp() * r_max * r_max / (p - 2.0))
        }
    }
}
