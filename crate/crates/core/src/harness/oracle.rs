//! Closed-form checks on the bubble family, runnable as a self-test.
//!
//! Every value is compared against something computed another way: masses
//! by Gauss–Legendre quadrature of the explicit density, identities by
//! direct substitution, solver output by the exact centre value.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bol::{check_radial_exterior, check_radial_interior, decay_levels, decay_limit_check};
use crate::bubble::{conjugate_lambda, mass_roots, BubbleParam, EIGHT_PI};
use crate::discretize::{RadialField, RadialMesh, Tail};
use crate::error::Result;
use crate::solver::{exact_center_value, solve_radial, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    /// Worst observed error (or margin, see `detail`).
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl OracleCheck {
    fn new(name: &str, error: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            error,
            tolerance,
            pass: error.is_finite() && error <= tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// `(λ, r)` samples on a log grid: λ in `[0.1, 20]`, r in `[0.05, 5]`.
pub fn sample_pairs(n_side: usize) -> Vec<(f64, f64)> {
    let lg = |lo: f64, hi: f64, k: usize| lo * (hi / lo).powf(k as f64 / (n_side - 1) as f64);
    (0..n_side)
        .flat_map(|i| (0..n_side).map(move |j| (lg(0.1, 20.0, i), lg(0.05, 5.0, j))))
        .collect()
}

fn quadrature_ball_mass(lambda: f64, r: f64) -> f64 {
    // In s = λ|y| the density is 2π s / (1 + s²/8)², independent of λ.
    let s_max = lambda * r;
    gauss_legendre(|s| 2.0 * PI * s / (1.0 + s * s / 8.0).powi(2), 0.0, s_max, 128)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Run the full suite. The radial solves dominate the cost (well under a
/// second in an optimised build).
pub fn run_oracle_suite() -> Result<OracleReport> {
    let pairs = sample_pairs(10);
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    let mut ext = 0.0f64;
    let mut bw = 0.0f64;
    let mut bol = 0.0f64;
    for &(l, r) in &pairs {
        let p = BubbleParam::new(l)?;
        let m = p.ball_mass(r);
        worst = worst.max(rel(m, quadrature_ball_mass(l, r)));
        ext = ext.max(rel(m + p.exterior_mass(r), EIGHT_PI));
        let direct = 2.0 * PI * r * (0.5 * (-2.0 * (1.0 + l * l * r * r / 8.0).ln() + 2.0 * l.ln())).exp();
        bw = bw.max(rel(p.boundary_weight(r), direct));
        let lhs = p.boundary_weight(r).powi(2);
        bol = bol.max((lhs - 0.5 * m * (EIGHT_PI - m)).abs() / lhs.max(1e-300));
    }
    let n = pairs.len();
    checks.push(OracleCheck::new("ball_mass_vs_quadrature", worst, 1e-8, format!("{n} (λ, r) samples, relative")));
    checks.push(OracleCheck::new("ball_plus_exterior_is_8pi", ext, 1e-12, "relative"));
    checks.push(OracleCheck::new("boundary_weight_closed_form", bw, 1e-12, "relative"));
    checks.push(OracleCheck::new("bol_equality_on_bubbles", bol, 1e-12, "relative defect"));

    let mut roots = 0.0f64;
    for k in 0..=50 {
        let beta = 8.0 * PI * PI * k as f64 / 50.0;
        let mp = mass_roots(beta)?;
        roots = roots
            .max(rel(mp.m1 + mp.m2, EIGHT_PI))
            .max((mp.m1 * mp.m2 - 2.0 * beta).abs() / (8.0 * PI * PI));
    }
    checks.push(OracleCheck::new("mass_roots_identities", roots, 1e-12, "sum 8π and product 2β"));

    let mut conj = 0.0f64;
    for &(l, r) in &pairs {
        let p = BubbleParam::new(l)?;
        let q = conjugate_lambda(p, r)?.lambda;
        conj = conj.max((p.value(r) - q.value(r)).abs() / p.value(r).abs().max(1.0));
    }
    checks.push(OracleCheck::new("conjugate_agrees_on_circle", conj, 1e-12, "U_λ(r0) = U_λ′(r0)"));

    let mut centre = 0.0f64;
    for k in [2.0, 4.0, 6.0, 7.0] {
        let rho = k * PI;
        let rep = solve_radial(&ProblemSpec::radial_disc(1.0, 4096, rho)?)?;
        let c = rep.center_value().unwrap_or(f64::NAN);
        let err = if rep.converged { (c - exact_center_value(rho)).abs() } else { f64::INFINITY };
        centre = centre.max(err);
    }
    checks.push(OracleCheck::new(
        "radial_solver_exact_centre",
        centre,
        1e-6,
        "ρ ∈ {2π, 4π, 6π, 7π}, 4096 nodes",
    ));

    let p = BubbleParam::new(2.0)?;
    let disc = RadialField::bubble(Arc::new(RadialMesh::uniform(0.0, 1.0, 4097)?), p)?;
    let interior = check_radial_interior(&disc)?;
    checks.push(OracleCheck::new(
        "radial_interior_equality",
        interior.defect.abs() / interior.lhs,
        1e-6,
        format!("verdict {:?}", interior.verdict),
    ));
    let outside = RadialField::bubble(Arc::new(RadialMesh::geometric(1.0, 1e3, 4097)?), p)?;
    let exterior = check_radial_exterior(&outside, Tail::Bubble { lambda: 2.0 })?;
    checks.push(OracleCheck::new(
        "radial_exterior_equality",
        exterior.defect.abs() / exterior.lhs,
        1e-6,
        format!("verdict {:?}", exterior.verdict),
    ));
    let seq = decay_limit_check(&outside, &decay_levels(&outside, 12))?;
    checks.push(OracleCheck::new(
        "decay_sequence_to_zero",
        if seq.tends_to_zero() { 0.0 } else { seq.final_ratio },
        0.0,
        format!("final ratio {:.3e}", seq.final_ratio),
    ));

    Ok(OracleReport {
        schema_version: crate::discretize::io::SCHEMA_VERSION,
        checks,
    })
}
