//! The comparison argument for two solutions of equal mass, run end to end.
//!
//! Given `w₁, w₂` with `Δwᵢ + e^{wᵢ} = fᵢ`, `f₂ ≥ f₁ ≥ 0`, equal masses ρ and
//! `w₂ − w₁` constant on ∂Ω, the argument rearranges `φ = w₂ − w₁` with
//! respect to `e^{w₁}` onto a bubble ball, forms `ψ = U_λ + φ*` and compares
//! `ψ(R)` with `U_λ(R)`. Since `ψ(R) − U_λ(R) = φ*(R) = min φ`, two distinct
//! pairs (which force φ to change sign) always produce `ψ(R) < U_λ(R)`; the
//! report shows whether the differential condition needed to turn that into a
//! contradiction actually holds for the assembled ψ.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bol::{boundary_comparison, differential_profile, BolReport, DifferentialSummary, Side};
use crate::bubble::{lambda_from_ball_mass, BubbleParam, EIGHT_PI};
use crate::discretize::levels::uniform_thresholds;
use crate::discretize::{LevelField, RadialField, Tail};
use crate::error::{invalid, Result};
use crate::rearrange::{
    gradient_comparison, rearrange_with, supersolution_assemble, FluxComparison, RearrangeOptions,
};

/// A named hypothesis and whether the inputs satisfy it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Hypothesis {
    pub(crate) fn new(name: &str, holds: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            holds,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub thresholds: usize,
    /// Relative tolerance for `∫e^{w₁} = ∫e^{w₂}`.
    pub mass_rtol: f64,
    /// Radius of the target ball; λ is matched to ρ at this radius.
    pub radius: f64,
    /// Levels sampled for the gradient comparison table.
    pub flux_levels: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            thresholds: 512,
            mass_rtol: 1e-4,
            radius: 1.0,
            flux_levels: 32,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub rho1: f64,
    pub rho2: f64,
    /// Mean of `w₂ − w₁` on ∂Ω.
    pub boundary_constant: f64,
    /// `max |w₂ − w₁|`.
    pub separation: f64,
    pub hypotheses: Vec<Hypothesis>,
    /// All hypotheses hold.
    pub applicable: bool,
    pub lambda: Option<f64>,
    pub radius: f64,
    pub rearrangement_defect: Option<f64>,
    pub differential: Option<DifferentialSummary>,
    /// `ψ(R) − U_λ(R)`.
    pub boundary_defect: Option<f64>,
    pub tolerance: f64,
    /// Direct check of `ψ(R) ≥ U_λ(R)`, gated on the differential condition.
    pub boundary: Option<BolReport>,
    pub contradiction: bool,
    pub flux_table: Vec<FluxComparison>,
    /// Fraction of sampled levels where `∫_{φ=t}|∇φ| ≥ ∫_{φ*=t}|∇φ*|` up to tolerance.
    pub flux_ok_fraction: f64,
    #[serde(skip)]
    pub psi: Option<RadialField>,
}

impl PipelineReport {
    pub fn failed_hypotheses(&self) -> Vec<&str> {
        self.hypotheses
            .iter()
            .filter(|h| !h.holds)
            .map(|h| h.name.as_str())
            .collect()
    }

    /// Rows `(r, ψ, U_λ)` for plotting.
    pub fn write_profile_csv(&self, path: &Path) -> Result<()> {
        let (Some(psi), Some(lam)) = (&self.psi, self.lambda) else {
            return Err(invalid("report", "no ψ was assembled"));
        };
        let bubble = BubbleParam::new(lam)?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "psi", "bubble"])?;
        for (&r, &v) in psi.nodes().iter().zip(psi.values()) {
            w.write_record([r.to_string(), v.to_string(), bubble.value(r).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run the comparison argument on `(w₁, w₂)` with the default options.
pub fn theorem_pipeline<F: LevelField>(w1: &F, w2: &F) -> Result<PipelineReport> {
    theorem_pipeline_with(w1, w2, &PipelineOptions::default())
}

pub fn theorem_pipeline_with<F: LevelField>(w1: &F, w2: &F, opts: &PipelineOptions) -> Result<PipelineReport> {
    let phi = w2.combine(w1, |b, a| b - a)?;
    let rho1 = w1.weighted_mass();
    let rho2 = w2.weighted_mass();
    let trace = phi.boundary_trace();
    let c = trace.iter().sum::<f64>() / trace.len() as f64;
    let spread = trace.iter().fold(0.0f64, |m, v| m.max((v - c).abs()));
    let btol = phi.boundary_tolerance();
    let separation = phi.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let gap = (rho1 - rho2).abs() / rho1.max(rho2);
    let mut hyps = vec![
        Hypothesis::new(
            "equal_mass",
            gap <= opts.mass_rtol,
            format!("∫e^w1 = {rho1:.10}, ∫e^w2 = {rho2:.10}, relative gap {gap:.2e}"),
        ),
        Hypothesis::new(
            "subcritical_mass",
            rho1 < EIGHT_PI,
            format!("ρ = {rho1:.10} against 8π = {EIGHT_PI:.10}"),
        ),
        Hypothesis::new(
            "boundary_constant",
            2.0 * spread <= btol,
            format!("w2 − w1 on ∂Ω: mean {c:.6e}, spread {:.3e}, tolerance {btol:.3e}", 2.0 * spread),
        ),
    ];
    let f = ordered_sources(w1, w2, &phi);
    hyps.push(Hypothesis::new(
        "f2_ge_f1",
        f.violations <= 1 || f.violations * 100 <= f.nodes,
        format!(
            "Δ(w2 − w1) + e^w2 − e^w1 below −truncation at {} of {} nodes (worst {:.3e})",
            f.violations, f.nodes, f.worst
        ),
    ));
    let applicable = hyps.iter().all(|h| h.holds);
    let mut report = PipelineReport {
        schema_version: crate::discretize::io::SCHEMA_VERSION,
        rho1,
        rho2,
        boundary_constant: c,
        separation,
        hypotheses: hyps,
        applicable,
        lambda: None,
        radius: opts.radius,
        rearrangement_defect: None,
        differential: None,
        boundary_defect: None,
        tolerance: 0.0,
        boundary: None,
        contradiction: false,
        flux_table: Vec::new(),
        flux_ok_fraction: 1.0,
        psi: None,
    };
    if !applicable {
        return Ok(report);
    }

    let r = opts.radius;
    let lam = lambda_from_ball_mass(rho1, r)?;
    let ropts = RearrangeOptions {
        thresholds: opts.thresholds,
        boundary_tolerance: Some(btol.max(2.0 * spread)),
        ..Default::default()
    };
    let result = rearrange_with(&phi, w1, lam, r, &ropts)?;
    let psi = supersolution_assemble(&result)?;
    let diff = differential_profile(&psi, Side::Interior, Tail::None)?.summary();
    let boundary = boundary_comparison(&psi, rho1)?;
    let defect = psi.last() - lam.value(r);
    let tol = boundary.tolerance + btol;

    let mut table = Vec::new();
    if !result.degenerate {
        let levels = uniform_thresholds(&phi.level_samples(), opts.flux_levels);
        for t in levels {
            if phi.is_plateau(t) {
                continue;
            }
            table.push(gradient_comparison(&phi, w1, &result, t)?);
        }
    }
    let ok = table
        .iter()
        .filter(|fc| fc.source_flux >= fc.target_flux - flux_tolerance(fc))
        .count();

    report.lambda = Some(lam.lambda());
    report.rearrangement_defect = Some(result.defect);
    report.differential = Some(diff);
    report.boundary_defect = Some(defect);
    report.tolerance = tol;
    report.contradiction = defect < -tol;
    report.boundary = Some(boundary);
    report.flux_ok_fraction = if table.is_empty() { 1.0 } else { ok as f64 / table.len() as f64 };
    report.flux_table = table;
    report.psi = Some(psi);
    Ok(report)
}

/// Discretisation allowance for one row of the flux table.
pub fn flux_tolerance(fc: &FluxComparison) -> f64 {
    1e-3 * fc.source_flux.max(fc.target_flux) + 1e-9
}

struct SourceOrder {
    nodes: usize,
    violations: usize,
    worst: f64,
}

/// Test `Δφ + e^{w₂} − e^{w₁} ≥ 0` node by node.
fn ordered_sources<F: LevelField>(w1: &F, w2: &F, phi: &F) -> SourceOrder {
    let (a, b) = (w1.samples(), w2.samples());
    let mut out = SourceOrder {
        nodes: 0,
        violations: 0,
        worst: f64::INFINITY,
    };
    for s in phi.laplacian() {
        let (e1, e2) = (a[s.index].exp(), b[s.index].exp());
        let v = s.value + e2 - e1;
        out.nodes += 1;
        out.worst = out.worst.min(v);
        if v < -(s.truncation + 1e-10 * (1.0 + e1 + e2)) {
            out.violations += 1;
        }
    }
    out
}

/// Shift `w2` by a constant so that its mass equals that of `w1`.
///
/// The shift keeps `w₂ − w₁` constant on the boundary; it changes `f₂` by
/// `e^{w₂}(e^k − 1)`, so it should be small.
pub fn match_mass<F: LevelField>(w1: &F, w2: &F) -> Result<F> {
    let k = (w1.weighted_mass() / w2.weighted_mass()).ln();
    w2.combine(w2, |v, _| v + k)
}

/// A pair of distinct functions on the unit disc meeting every hypothesis at
/// mass ρ: `w₁ = U_{λ(ρ)}` solves the Liouville equation, and
/// `w₂ = U_μ + ln(ρ / ball_mass(μ, 1))` has `f₂ = e^{U_μ}(e^k − 1) ≥ 0`.
///
/// Requires `μ ≤ λ(ρ)`; the pair coincides at `μ = λ(ρ)`.
pub fn distinct_pair<F: LevelField>(template: &F, rho: f64, mu: f64) -> Result<(F, F)> {
    let (r_in, r_out) = template.domain_radii();
    if r_in != 0.0 || (r_out - 1.0).abs() > 1e-14 {
        return Err(invalid("template", "the pair is built on the unit disc"));
    }
    let l1 = lambda_from_ball_mass(rho, 1.0)?;
    if !(mu > 0.0 && mu <= l1.lambda() * (1.0 + 1e-14)) {
        return Err(invalid("mu", format!("must lie in (0, λ(ρ)] = (0, {}]", l1.lambda())));
    }
    let m = BubbleParam::new(mu)?;
    let k = (rho / m.ball_mass(1.0)).ln();
    let w1 = template.radial_like(|r| l1.value(r))?;
    let w2 = template.radial_like(|r| m.value(r) + k)?;
    Ok((w1, w2))
}
