//! Problem data: domain, coefficients, boundary values and the nonlinearity.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bubble::EIGHT_PI;
use crate::discretize::{Grid2D, RadialMesh};
use crate::error::{invalid, Result};

/// A coefficient given in closed form on the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `offset + amplitude · exp(−|y − center|² / width²)`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        offset: f64,
    },
    /// `Σ c_k |y|^{2k}`, smooth at the origin.
    RadialPolynomial { coefficients: Vec<f64> },
}

impl Coefficient {
    pub const ZERO: Coefficient = Coefficient::Constant { value: 0.0 };
    pub const ONE: Coefficient = Coefficient::Constant { value: 1.0 };

    pub fn constant(value: f64) -> Self {
        Coefficient::Constant { value }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Gaussian {
                amplitude,
                width,
                center,
                offset,
            } => {
                let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                offset + amplitude * (-d2 / (width * width)).exp()
            }
            Coefficient::RadialPolynomial { coefficients } => {
                let s = x * x + y * y;
                coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
        }
    }

    pub fn radial_value(&self, r: f64) -> f64 {
        self.value(r, 0.0)
    }

    pub fn is_radial(&self) -> bool {
        match self {
            Coefficient::Gaussian { center, .. } => center[0] == 0.0 && center[1] == 0.0,
            _ => true,
        }
    }

    /// `Δ ln(self)` by a fourth-order five-point difference of the closed form.
    pub fn laplacian_of_log(&self, x: f64, y: f64) -> f64 {
        if let Coefficient::Constant { .. } = self {
            return 0.0;
        }
        let d = 1e-3;
        let l = |x: f64, y: f64| self.value(x, y).ln();
        let second = |f: &dyn Fn(f64) -> f64| {
            (-f(2.0 * d) + 16.0 * f(d) - 30.0 * f(0.0) + 16.0 * f(-d) - f(-2.0 * d)) / (12.0 * d * d)
        };
        second(&|s| l(x + s, y)) + second(&|s| l(x, y + s))
    }
}

/// Dirichlet data, constant on each boundary circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Boundary {
    Constant(f64),
    Rings { inner: f64, outer: f64 },
}

impl Boundary {
    pub fn outer(self) -> f64 {
        match self {
            Boundary::Constant(g) => g,
            Boundary::Rings { outer, .. } => outer,
        }
    }

    pub fn inner(self) -> f64 {
        match self {
            Boundary::Constant(g) => g,
            Boundary::Rings { inner, .. } => inner,
        }
    }
}

impl Default for Boundary {
    fn default() -> Self {
        Boundary::Constant(0.0)
    }
}

/// Which equation is solved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// `Δu + ρ K e^u / ∫K e^u = f`.
    MeanField { rho: f64 },
    /// `Δu + K e^u = f`.
    Liouville,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Radial(Arc<RadialMesh>),
    Grid(Arc<Grid2D>),
}

impl Domain {
    pub fn inner_radius(&self) -> f64 {
        match self {
            Domain::Radial(m) => m.inner_radius(),
            Domain::Grid(g) => g.shape().inner(),
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match self {
            Domain::Radial(m) => m.outer_radius(),
            Domain::Grid(g) => g.shape().outer(),
        }
    }

    pub fn is_disc(&self) -> bool {
        self.inner_radius() == 0.0
    }

    pub fn area(&self) -> f64 {
        PI * (self.outer_radius().powi(2) - self.inner_radius().powi(2))
    }
}

/// Discretisation of radial problems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialMethod {
    /// Shooting on discs, finite differences on annuli.
    #[default]
    Auto,
    Shooting,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub domain: Domain,
    /// K, must be positive.
    pub weight: Coefficient,
    /// f.
    pub source: Coefficient,
    pub boundary: Boundary,
    pub mode: Mode,
    pub method: RadialMethod,
    /// Max-norm residual target; `None` selects the solver default.
    pub tolerance: Option<f64>,
    pub max_iterations: usize,
}

/// Whether `f ≥ −Δ ln K` holds at the sampled nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub holds: bool,
    /// `min (f + Δ ln K)` over the nodes.
    pub worst_margin: f64,
}

impl ProblemSpec {
    /// K ≡ 1, f ≡ 0, g ≡ 0.
    pub fn new(domain: Domain, mode: Mode) -> Self {
        Self {
            domain,
            weight: Coefficient::ONE,
            source: Coefficient::ZERO,
            boundary: Boundary::default(),
            mode,
            method: RadialMethod::Auto,
            tolerance: None,
            max_iterations: 60,
        }
    }

    pub fn mean_field(domain: Domain, rho: f64) -> Self {
        Self::new(domain, Mode::MeanField { rho })
    }

    pub fn liouville(domain: Domain) -> Self {
        Self::new(domain, Mode::Liouville)
    }

    pub fn radial_disc(radius: f64, nodes: usize, rho: f64) -> Result<Self> {
        let mesh = RadialMesh::uniform(0.0, radius, nodes)?;
        Ok(Self::mean_field(Domain::Radial(Arc::new(mesh)), rho))
    }

    pub fn grid_disc(radius: f64, n: usize, rho: f64) -> Result<Self> {
        Ok(Self::mean_field(Domain::Grid(Arc::new(Grid2D::disc(radius, n)?)), rho))
    }

    pub fn with_weight(mut self, k: Coefficient) -> Self {
        self.weight = k;
        self
    }

    pub fn with_source(mut self, f: Coefficient) -> Self {
        self.source = f;
        self
    }

    pub fn with_boundary(mut self, g: Boundary) -> Self {
        self.boundary = g;
        self
    }

    pub fn with_method(mut self, m: RadialMethod) -> Self {
        self.method = m;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        let mut s = self.clone();
        s.mode = Mode::MeanField { rho };
        s
    }

    pub fn rho(&self) -> Option<f64> {
        match self.mode {
            Mode::MeanField { rho } => Some(rho),
            Mode::Liouville => None,
        }
    }

    /// Sample points `(x, y)` of the discretisation inside the closed domain.
    pub(crate) fn sample_points(&self) -> Vec<(f64, f64)> {
        match &self.domain {
            Domain::Radial(m) => m.nodes().iter().map(|&r| (r, 0.0)).collect(),
            Domain::Grid(g) => (0..g.len())
                .filter(|&k| g.weights()[k] > 0.0)
                .map(|k| g.position(k))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(rho) = self.rho() {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(invalid("rho", format!("must be positive and finite, got {rho}")));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("tolerance", format!("must be positive, got {t}")));
            }
        }
        if let Domain::Radial(_) = self.domain {
            if !self.weight.is_radial() || !self.source.is_radial() {
                return Err(invalid("coefficients", "radial problems need radial K and f"));
            }
        }
        for (x, y) in self.sample_points() {
            let k = self.weight.value(x, y);
            if !(k.is_finite() && k > 0.0) {
                return Err(invalid("weight", format!("K({x}, {y}) = {k} is not positive")));
            }
            if !self.source.value(x, y).is_finite() {
                return Err(invalid("source", format!("f({x}, {y}) is not finite")));
            }
        }
        Ok(())
    }

    pub fn compatibility(&self) -> Compatibility {
        let worst = self
            .sample_points()
            .into_iter()
            .map(|(x, y)| self.source.value(x, y) + self.weight.laplacian_of_log(x, y))
            .fold(f64::INFINITY, f64::min);
        Compatibility {
            holds: worst >= -1e-6,
            worst_margin: worst,
        }
    }

    /// Relation of ρ to the critical mass 8π.
    pub fn branch(&self) -> Branch {
        match self.mode {
            Mode::Liouville => Branch::Liouville,
            Mode::MeanField { rho } => {
                if rho < EIGHT_PI {
                    Branch::Subcritical
                } else if rho == EIGHT_PI {
                    Branch::Critical
                } else {
                    Branch::Supercritical
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Subcritical,
    Critical,
    Supercritical,
    Liouville,
}
