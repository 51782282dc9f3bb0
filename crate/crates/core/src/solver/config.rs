//! TOML configuration for problems and experiments.
//!
//! ```toml
//! [domain]
//! shape = "disc"            # or "annulus" with inner/outer
//! radius = 1.0
//! discretization = "radial" # or "grid"
//! nodes = 4096              # radial nodes, or grid nodes per side
//!
//! [equation]
//! mode = "mean_field"       # or "liouville"
//! rho = "4pi"
//! boundary = 0.0
//! weight = { kind = "constant", value = 1.0 }
//! source = { kind = "constant", value = 0.0 }
//!
//! [solver]
//! tolerance = 1e-10
//! max_iterations = 60
//! ```

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};

use super::problem::{Boundary, Coefficient, Domain, Mode, ProblemSpec, RadialMethod};
use crate::discretize::{Grid2D, RadialMesh, Shape};
use crate::error::{Error, Result};

/// Parse reals such as `12.5`, `4pi`, `4*pi`, `7π`, `pi/2` or `8pi/3`.
pub fn parse_real(text: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("cannot read {text:?} as a number (examples: 2.5, 4pi, pi/2)"));
    let s: String = text.trim().replace('π', "pi").replace(' ', "").to_lowercase();
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (s.clone(), 1.0),
    };
    let value = if let Some(prefix) = num.strip_suffix("pi") {
        let prefix = prefix.strip_suffix('*').unwrap_or(prefix);
        let coef = match prefix {
            "" | "+" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|_| bad())?,
        };
        coef * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// A real that may be written as a number or as an expression like `"4pi"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Real(v)),
            Raw::Text(s) => parse_real(&s).map(Real).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    Radial,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub shape: String,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub inner: Option<f64>,
    #[serde(default)]
    pub outer: Option<f64>,
    pub discretization: Discretization,
    pub nodes: usize,
    #[serde(default)]
    pub method: RadialMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    MeanField,
    Liouville,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    pub mode: ModeName,
    #[serde(default)]
    pub rho: Option<Real>,
    #[serde(default)]
    pub boundary: Option<Boundary>,
    #[serde(default = "one")]
    pub weight: Coefficient,
    #[serde(default = "zero")]
    pub source: Coefficient,
}

fn one() -> Coefficient {
    Coefficient::ONE
}

fn zero() -> Coefficient {
    Coefficient::ZERO
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

/// Settings used by the rearrangement, Bol and experiment drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    pub thresholds: usize,
    pub r_max_factor: f64,
    pub seed: u64,
    pub starts: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            thresholds: 512,
            r_max_factor: 1e3,
            seed: 7,
            starts: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub domain: DomainConfig,
    pub equation: EquationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub harness: HarnessConfig,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("configuration: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn shape(&self) -> Result<Shape> {
        let d = &self.domain;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Parse(format!("[domain] {} needs `{name}`", d.shape)))
        };
        match d.shape.as_str() {
            "disc" => Ok(Shape::Disc {
                radius: d.radius.unwrap_or(1.0),
            }),
            "annulus" => Ok(Shape::Annulus {
                inner: need(d.inner, "inner")?,
                outer: need(d.outer, "outer")?,
            }),
            other => Err(Error::Parse(format!(
                "[domain] shape {other:?} is not one of \"disc\", \"annulus\""
            ))),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let shape = self.shape()?;
        let domain = match self.domain.discretization {
            Discretization::Radial => Domain::Radial(Arc::new(RadialMesh::uniform(
                shape.inner(),
                shape.outer(),
                self.domain.nodes,
            )?)),
            Discretization::Grid => Domain::Grid(Arc::new(Grid2D::new(shape, self.domain.nodes)?)),
        };
        let mode = match self.equation.mode {
            ModeName::Liouville => Mode::Liouville,
            ModeName::MeanField => Mode::MeanField {
                rho: self
                    .equation
                    .rho
                    .ok_or_else(|| Error::Parse("[equation] mean_field mode needs `rho`".into()))?
                    .0,
            },
        };
        let mut spec = ProblemSpec::new(domain, mode)
            .with_weight(self.equation.weight.clone())
            .with_source(self.equation.source.clone())
            .with_boundary(self.equation.boundary.unwrap_or_default())
            .with_method(self.domain.method);
        spec.tolerance = self.solver.tolerance;
        if let Some(m) = self.solver.max_iterations {
            spec.max_iterations = m;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reals_with_pi() {
        assert_relative_eq!(parse_real("4pi").unwrap(), 4.0 * PI);
        assert_relative_eq!(parse_real("4*pi").unwrap(), 4.0 * PI);
        assert_relative_eq!(parse_real("7π").unwrap(), 7.0 * PI);
        assert_relative_eq!(parse_real("pi/2").unwrap(), PI / 2.0);
        assert_relative_eq!(parse_real(" -2.5 ").unwrap(), -2.5);
        assert_relative_eq!(parse_real("8pi/3").unwrap(), 8.0 * PI / 3.0);
        assert!(parse_real("four pi").is_err());
        assert!(parse_real("1/0").is_err());
    }

    #[test]
    fn full_config() {
        let cfg = Config::from_toml_str(
            r#"
            [domain]
            shape = "annulus"
            inner = 0.5
            outer = 1.0
            discretization = "grid"
            nodes = 33

            [equation]
            mode = "mean_field"
            rho = "4pi"
            boundary = { inner = 0.0, outer = 0.5 }
            weight = { kind = "gaussian", amplitude = 1.0, width = 0.3, offset = 1.0 }

            [harness]
            seed = 11
            "#,
        )
        .unwrap();
        let spec = cfg.problem().unwrap();
        assert_relative_eq!(spec.rho().unwrap(), 4.0 * PI);
        assert_eq!(spec.boundary.outer(), 0.5);
        assert_eq!(cfg.harness.seed, 11);
        assert_eq!(cfg.harness.thresholds, 512);
    }

    #[test]
    fn errors_name_the_field() {
        let err = Config::from_toml_str(
            "[domain]\nshape = \"disc\"\ndiscretization = \"radial\"\nnodes = 64\n[equation]\nmode = \"mean_field\"\nrho = \"lots\"\n",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("lots"), "{err}");
        let err = Config::from_toml_str(
            "[domain]\nshape = \"disc\"\ndiscretization = \"radial\"\nnodes = 64\n[equation]\nmode = \"mean_field\"\n",
        )
        .unwrap()
        .problem()
        .unwrap_err()
        .to_string();
        assert!(err.contains("rho"), "{err}");
        assert!(Config::from_toml_str("[domain]\nshape = 3\n").is_err());
    }
}
