//! Executable Bol-type inequalities and the mass and decay checks built on them.
//!
//! Every checker returns a [`BolReport`] holding both sides of an inequality,
//! a signed margin (positive when the inequality holds) and a tolerance
//! estimated from the discretisation. The verdict is a pure function of margin
//! and tolerance, see [`Verdict::classify`].
//!
//! Radial profiles ψ on `B_R` (interior) or on `{|y| > R}` (exterior) are
//! screened by a *differential condition* before the inequality is evaluated:
//!
//! * interior: `∮_{∂B_r} |∇ψ| ≤ ∫_{B_r} e^ψ` for a.e. `r < R`;
//! * exterior: `∮_{∂B_r} |∇ψ| ≤ 8π − ∫_{|y|>r} e^ψ` for a.e. `r > R`.
//!
//! Both are equalities for the bubble `U_λ`. "Almost every" becomes "every
//! mesh node except isolated nodes that miss by at most ten tolerances".

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bubble::{lambda_from_ball_mass, mass_roots, BubbleParam, MassPair, EIGHT_PI};
use crate::discretize::levels::superlevel_intervals;
use crate::discretize::radial::{decay_exponent, tail_mass};
use crate::discretize::{LevelField, LevelQuery, RadialField, RadialMesh, Tail, Topology};
use crate::error::{invalid, Error, Result};

/// Margins above this many tolerances count as strict.
pub const STRICT_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsStrictly,
    ViolatedWithinTolerance,
    Violated,
    NotApplicable,
}

impl Verdict {
    /// `margin > 10·tol` is strict, `[0, 10·tol]` is indistinguishable from
    /// equality, `[−tol, 0)` is a violation explained by discretisation.
    pub fn classify(margin: f64, tolerance: f64) -> Self {
        if !margin.is_finite() {
            Verdict::Violated
        } else if margin > STRICT_FACTOR * tolerance {
            Verdict::HoldsStrictly
        } else if margin >= 0.0 {
            Verdict::Holds
        } else if margin >= -tolerance {
            Verdict::ViolatedWithinTolerance
        } else {
            Verdict::Violated
        }
    }

    /// Holds up to discretisation error.
    pub fn passes(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::HoldsStrictly | Verdict::ViolatedWithinTolerance)
    }

    pub fn is_strict(self) -> bool {
        self == Verdict::HoldsStrictly
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Context {
    Interior,
    Exterior,
    Differential,
    BoundaryComparison,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≥ rhs`
    GreaterEq,
    /// `lhs ≤ rhs`
    LessEq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BolReport {
    pub context: Context,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub defect: f64,
    /// Signed so that positive means the inequality holds.
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub differential: Option<DifferentialSummary>,
    pub notes: Vec<String>,
}

impl BolReport {
    fn new(context: Context, relation: Relation, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let defect = lhs - rhs;
        let margin = match relation {
            Relation::GreaterEq => defect,
            Relation::LessEq => -defect,
        };
        Self {
            context,
            relation,
            lhs,
            rhs,
            defect,
            margin,
            tolerance,
            verdict: Verdict::classify(margin, tolerance),
            topology: None,
            differential: None,
            notes: Vec::new(),
        }
    }

    fn not_applicable(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::NotApplicable;
        self.notes.push(why.into());
        self
    }
}

// ---------------------------------------------------------------------------
// differential conditions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Interior,
    Exterior,
}

/// Slack of the differential condition at every mesh node (positive is good).
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialProfile {
    pub side: Side,
    pub radii: Vec<f64>,
    pub slack: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentialSummary {
    pub worst: f64,
    pub worst_radius: f64,
    pub tolerance: f64,
    pub violations: usize,
    /// Every violation is a single node that misses by at most ten tolerances.
    pub isolated: bool,
    pub strict_nodes: usize,
    pub holds: bool,
    pub strict: bool,
}

impl DifferentialProfile {
    pub fn violations(&self) -> Vec<usize> {
        (0..self.slack.len())
            .filter(|&i| self.slack[i] < -self.tolerance)
            .collect()
    }

    pub fn summary(&self) -> DifferentialSummary {
        let bad = self.violations();
        let isolated = bad.windows(2).all(|w| w[1] > w[0] + 1)
            && bad.iter().all(|&i| self.slack[i] >= -STRICT_FACTOR * self.tolerance);
        let (wi, worst) = self
            .slack
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
        let strong: Vec<bool> = self
            .slack
            .iter()
            .map(|&s| s > STRICT_FACTOR * self.tolerance)
            .collect();
        DifferentialSummary {
            worst,
            worst_radius: self.radii[wi],
            tolerance: self.tolerance,
            violations: bad.len(),
            isolated,
            strict_nodes: strong.iter().filter(|&&s| s).count(),
            holds: bad.is_empty() || isolated,
            // strict on a set of positive measure: two neighbouring nodes
            strict: strong.windows(2).any(|w| w[0] && w[1]),
        }
    }
}

fn raw_slack(psi: &RadialField, side: Side, tail: Tail) -> Result<Vec<f64>> {
    let cum = psi.cumulative_mass();
    let d = psi.slopes();
    let flux = |i: usize| 2.0 * PI * psi.nodes()[i] * d[i].abs();
    Ok(match side {
        Side::Interior => (0..cum.len()).map(|i| cum[i] - flux(i)).collect(),
        Side::Exterior => {
            let total = cum[cum.len() - 1] + tail_mass(psi, tail)?;
            (0..cum.len())
                .map(|i| EIGHT_PI - (total - cum[i]) - flux(i))
                .collect()
        }
    })
}

/// Every other node of `psi` (always keeping the last one).
fn coarsen(psi: &RadialField) -> Result<(RadialField, Vec<usize>)> {
    let n = psi.nodes().len();
    let mut idx: Vec<usize> = (0..n).step_by(2).collect();
    if idx[idx.len() - 1] != n - 1 {
        idx.push(n - 1);
    }
    let mesh = RadialMesh::new(idx.iter().map(|&i| psi.nodes()[i]).collect())?;
    let field = RadialField::new(Arc::new(mesh), idx.iter().map(|&i| psi.values()[i]).collect())?;
    Ok((field, idx))
}

/// Total mass of `psi` and an error estimate from halving the mesh.
fn mass_with_error(psi: &RadialField, tail: Tail) -> Result<(f64, f64)> {
    let fine = psi.weighted_mass() + tail_mass(psi, tail)?;
    let err = match coarsen(psi) {
        Ok((c, _)) => match tail_mass(&c, tail) {
            Ok(t) => (c.weighted_mass() + t - fine).abs(),
            Err(_) => 0.0,
        },
        Err(_) => 0.0,
    };
    Ok((fine, err + 1e-13 * fine.abs().max(1.0)))
}

/// Bubble matched to the mass of `psi`, used to calibrate tolerances.
fn calibration_bubble(psi: &RadialField, side: Side, mass: f64) -> Option<BubbleParam> {
    let (r_in, r_out) = (psi.mesh().inner_radius(), psi.mesh().outer_radius());
    let m = mass.clamp(1e-6, EIGHT_PI * (1.0 - 1e-6));
    match side {
        Side::Interior => lambda_from_ball_mass(m, r_out).ok(),
        Side::Exterior => {
            // exterior_mass(λ, R) = 64π / (8 + λ²R²)
            let l2 = (64.0 * PI / m - 8.0) / (r_in * r_in);
            BubbleParam::new(l2.max(1e-12).sqrt()).ok()
        }
    }
}

/// Differential condition of `psi` on `B_R` (interior) or `{R < |y| < R_max}`
/// continued by `tail` (exterior).
pub fn differential_profile(psi: &RadialField, side: Side, tail: Tail) -> Result<DifferentialProfile> {
    match side {
        Side::Interior if !psi.mesh().is_disc() => {
            return Err(invalid("psi", "the interior condition needs a mesh starting at r = 0"))
        }
        Side::Exterior if psi.mesh().is_disc() => {
            return Err(invalid("psi", "the exterior condition needs a mesh starting at R > 0"))
        }
        _ => {}
    }
    let tail = if side == Side::Interior { Tail::None } else { tail };
    let slack = raw_slack(psi, side, tail)?;
    // discretisation error from the same quantity on the halved mesh
    let mut est = 0.0f64;
    if let Ok((c, idx)) = coarsen(psi) {
        if let Ok(cs) = raw_slack(&c, side, tail) {
            for (j, &i) in idx.iter().enumerate() {
                est = est.max((cs[j] - slack[i]).abs());
            }
        }
    }
    let mass = match side {
        Side::Interior => psi.weighted_mass(),
        Side::Exterior => psi.weighted_mass() + tail_mass(psi, tail)?,
    };
    let mut cal = 0.0f64;
    if let Some(b) = calibration_bubble(psi, side, mass) {
        let bf = RadialField::bubble(psi.mesh().clone(), b)?;
        let bt = if side == Side::Exterior {
            Tail::Bubble { lambda: b.lambda() }
        } else {
            Tail::None
        };
        cal = raw_slack(&bf, side, bt)?.iter().fold(0.0, |m, s| m.max(s.abs()));
    }
    Ok(DifferentialProfile {
        side,
        radii: psi.nodes().to_vec(),
        slack,
        tolerance: 2.0 * est.max(cal) + 1e-12 * mass.max(1.0),
    })
}

// ---------------------------------------------------------------------------
// interior inequality on level sets

/// `(∮_{∂ω} e^{u/2})² ≥ ½ m (8π − m)` with `m = ∫_ω e^u` and `ω = {φ > t}`.
///
/// Requires `ω ⋐ Ω`, so `φ < t` on the whole boundary. The supersolution
/// property `Δu + e^u ≥ 0` is checked on interior nodes and reported in the
/// notes; isolated misses within the stencil's truncation error do not
/// change the verdict.
pub fn check_interior_bol<F: LevelField>(u: &F, phi: &F, t: f64) -> Result<BolReport> {
    let trace = phi.boundary_trace();
    let reach = trace.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if reach >= t {
        return Err(Error::Precondition(format!(
            "ω = {{φ > {t}}} reaches the boundary (max of φ on ∂Ω is {reach}); ω ⋐ Ω is required"
        )));
    }
    let q = F::levels(u, phi)?;
    let (_, top) = q.range();
    if t >= top {
        return Err(invalid("t", format!("{{φ > {t}}} is empty (max φ = {top})")));
    }
    let contour = q.contour(t);
    let m = q.mass(t);
    let lhs = contour.weighted_length.powi(2);
    let rhs = 0.5 * m * (EIGHT_PI - m);

    let rel = interior_calibration(u)?;
    // floor: a few ulps per summand in the mass and contour sums
    let summation = (4.0 * f64::EPSILON * u.samples().len() as f64).max(1e-12);
    let tol = 4.0 * rel * lhs.max(rhs) + summation * lhs.max(rhs).max(1.0);
    let mut report = BolReport::new(Context::Interior, Relation::GreaterEq, lhs, rhs, tol);
    let topo = q.topology(t);
    report.topology = Some(topo);
    if !topo.simply_connected() {
        report.notes.push(format!(
            "ω has {} component(s) and {} hole(s); the inequality is strict when ω is not simply connected",
            topo.components, topo.holes
        ));
    }

    let total = u.weighted_mass();
    if total > EIGHT_PI * (1.0 + 1e-12) {
        return Ok(report.not_applicable(format!("∫_Ω e^u = {total} exceeds 8π")));
    }
    let sup = supersolution_check(u);
    if sup.violations > 0 {
        report.notes.push(format!(
            "Δu + e^u < 0 beyond truncation at {} of {} interior nodes (worst {:.3e})",
            sup.violations, sup.nodes, sup.worst
        ));
    }
    if sup.strict_nodes > 0 {
        report
            .notes
            .push(format!("Δu + e^u > 0 clearly at {} of {} interior nodes", sup.strict_nodes, sup.nodes));
    }
    if sup.violations > 1 && sup.violations * 100 > sup.nodes {
        return Ok(report.not_applicable("u is not a supersolution: Δu + e^u < 0 on a set of nodes"));
    }
    Ok(report)
}

/// Outcome of the discrete test `Δu + e^u ≥ 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionCheck {
    pub nodes: usize,
    pub violations: usize,
    pub strict_nodes: usize,
    pub worst: f64,
}

pub fn supersolution_check<F: LevelField>(u: &F) -> SupersolutionCheck {
    let v = u.samples();
    let mut out = SupersolutionCheck {
        worst: f64::INFINITY,
        ..Default::default()
    };
    for s in u.laplacian() {
        let e = v[s.index].exp();
        let r = s.value + e;
        let tol = s.truncation + 1e-10 * (1.0 + e);
        out.nodes += 1;
        out.worst = out.worst.min(r);
        if r < -tol {
            out.violations += 1;
        } else if r > STRICT_FACTOR * tol {
            out.strict_nodes += 1;
        }
    }
    out
}

/// Relative error of both sides measured on bubble configurations with
/// closed forms, on the mesh of `u`: a smooth bubble and, when `u` carries
/// less than 8π, the bubble with the same mass on the outer disc, whose
/// concentration matches that of `u`.
fn interior_calibration<F: LevelField>(u: &F) -> Result<f64> {
    let (_, r_out) = u.domain_radii();
    let mut scales = vec![BubbleParam::new(2.0 / r_out)?];
    let m = u.weighted_mass();
    if m > 0.0 && m < EIGHT_PI {
        if let Ok(b) = lambda_from_ball_mass(m, r_out) {
            scales.push(b);
        }
    }
    let mut worst = 0.0f64;
    for b in scales {
        worst = worst.max(calibrate_on(u, b)?);
    }
    Ok(worst)
}

fn calibrate_on<F: LevelField>(u: &F, b: BubbleParam) -> Result<f64> {
    let (r_in, r_out) = u.domain_radii();
    let ub = u.radial_like(|r| b.value(r))?;
    let mut worst = 0.0f64;
    for frac in [0.3, 0.5, 0.7] {
        let (phi_b, t, lo, hi) = if r_in == 0.0 {
            let rho = frac * r_out;
            (u.radial_like(|r| -r)?, -rho, 0.0, rho)
        } else {
            let mid = 0.5 * (r_in + r_out);
            let w = 0.5 * frac * (r_out - r_in);
            (u.radial_like(|r| -(r - mid) * (r - mid))?, -w * w, mid - w, mid + w)
        };
        let q = F::levels(&ub, &phi_b)?;
        let m_num = q.mass(t);
        let lhs_num = q.contour(t).weighted_length.powi(2);
        let m = b.ball_mass(hi) - b.ball_mass(lo);
        let mut len = b.boundary_weight(hi);
        if lo > 0.0 {
            len += b.boundary_weight(lo);
        }
        let lhs = len * len;
        let rhs = 0.5 * m * (EIGHT_PI - m);
        let rhs_num = 0.5 * m_num * (EIGHT_PI - m_num);
        let scale = lhs.max(rhs);
        worst = worst.max(((lhs_num - lhs).abs() + (rhs_num - rhs).abs()) / scale);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// radial inequalities

fn boundary_lhs(r: f64, value: f64) -> f64 {
    (2.0 * PI * r * (0.5 * value).exp()).powi(2)
}

/// `(∮_{∂B_R} e^{ψ/2})² ≥ ½ m (8π − m)` for a decreasing radial ψ on `B_R`
/// that satisfies the interior differential condition.
pub fn check_radial_interior(psi: &RadialField) -> Result<BolReport> {
    let diff = differential_profile(psi, Side::Interior, Tail::None)?;
    let r = psi.mesh().outer_radius();
    let (m, m_err) = mass_with_error(psi, Tail::None)?;
    let lhs = boundary_lhs(r, psi.last());
    let rhs = 0.5 * m * (EIGHT_PI - m);
    let tol = 2.0 * (4.0 * PI - m).abs() * m_err + 1e-12 * lhs.max(rhs).max(1.0);
    let mut report = BolReport::new(Context::Interior, Relation::GreaterEq, lhs, rhs, tol);
    let summary = diff.summary();
    report.differential = Some(summary);
    if !psi.is_strictly_decreasing() {
        return Ok(report.not_applicable("ψ is not strictly decreasing"));
    }
    if m >= EIGHT_PI {
        return Ok(report.not_applicable(format!("∫_{{B_R}} e^ψ = {m} is not below 8π")));
    }
    if !summary.holds {
        return Ok(report.not_applicable(format!(
            "differential condition fails: worst slack {:.3e} at r = {:.4} (tolerance {:.1e})",
            summary.worst, summary.worst_radius, summary.tolerance
        )));
    }
    if summary.strict && !report.verdict.is_strict() {
        report
            .notes
            .push("the differential condition is strict somewhere but the margin is within tolerance".into());
    }
    Ok(report)
}

/// `(∮_{∂B_R} e^{ψ/2})² ≤ ½ m (8π − m)` with `m = ∫_{|y|>R} e^ψ` for a
/// strictly decreasing radial ψ on `[R, R_max]` continued by `tail`.
pub fn check_radial_exterior(psi: &RadialField, tail: Tail) -> Result<BolReport> {
    if psi.mesh().is_disc() {
        return Err(invalid("psi", "an exterior profile lives on [R, R_max] with R > 0"));
    }
    if !psi.is_strictly_decreasing() {
        return Err(Error::Precondition("ψ is not strictly decreasing".into()));
    }
    let (m, m_err) = mass_with_error(psi, tail)?;
    let diff = differential_profile(psi, Side::Exterior, tail)?;
    let r = psi.mesh().inner_radius();
    let lhs = boundary_lhs(r, psi.first());
    let rhs = 0.5 * m * (EIGHT_PI - m);
    let tol = 2.0 * (4.0 * PI - m).abs() * m_err + 1e-12 * lhs.max(rhs).max(1.0);
    let mut report = BolReport::new(Context::Exterior, Relation::LessEq, lhs, rhs, tol);
    let summary = diff.summary();
    report.differential = Some(summary);
    if m >= EIGHT_PI {
        return Ok(report.not_applicable(format!("∫_{{|y|>R}} e^ψ = {m} is not below 8π")));
    }
    if !summary.holds {
        return Ok(report.not_applicable(format!(
            "exterior differential condition fails: worst slack {:.3e} at r = {:.4}",
            summary.worst, summary.worst_radius
        )));
    }
    Ok(report)
}

/// Quantities from the exterior argument: levels `s = ψ(r)` (decreasing),
/// `k(s) = 8π − ∫_{ψ<s} e^ψ` and `μ(s) = |{ψ > s}| + πR²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorProfile {
    pub s: Vec<f64>,
    pub k: Vec<f64>,
    pub mu: Vec<f64>,
    /// `β = ψ(R)`.
    pub beta: f64,
}

impl ExteriorProfile {
    pub fn new(psi: &RadialField, tail: Tail) -> Result<Self> {
        if psi.mesh().is_disc() || !psi.is_strictly_decreasing() {
            return Err(Error::Precondition(
                "the exterior profile needs a strictly decreasing ψ on [R, R_max] with R > 0".into(),
            ));
        }
        let cum = psi.cumulative_mass();
        let total = cum[cum.len() - 1] + tail_mass(psi, tail)?;
        Ok(Self {
            s: psi.values().to_vec(),
            k: cum.iter().map(|c| EIGHT_PI - (total - c)).collect(),
            mu: psi.nodes().iter().map(|r| PI * r * r).collect(),
            beta: psi.first(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub s: f64,
    /// `e^s · μ(s)`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySequence {
    pub points: Vec<DecayPoint>,
    /// Values are non-increasing over the last tenth of the sequence.
    pub monotone_tail: bool,
    /// Last value relative to the largest value.
    pub final_ratio: f64,
}

impl DecaySequence {
    /// Monotone over the final stretch and well below where it started.
    pub fn tends_to_zero(&self) -> bool {
        self.monotone_tail && self.final_ratio < 0.1
    }
}

/// Levels `s = ψ(r)` at `n` geometrically spaced radii between `R` and
/// `R_max`, in decreasing order.
pub fn decay_levels(psi: &RadialField, n: usize) -> Vec<f64> {
    let (a, b) = (psi.mesh().inner_radius().max(1e-12), psi.mesh().outer_radius());
    (0..n.max(2))
        .map(|k| psi.eval(a * (b / a).powf(k as f64 / (n.max(2) - 1) as f64)))
        .collect()
}

/// The sequence `e^s · |{ψ > s}|` (with the ball `B_R` added to the level
/// set) at the given levels.
pub fn decay_limit_check(psi: &RadialField, s_values: &[f64]) -> Result<DecaySequence> {
    if psi.mesh().is_disc() {
        return Err(invalid("psi", "an exterior profile lives on [R, R_max] with R > 0"));
    }
    let p = decay_exponent(psi);
    if !(p > 2.0 + 1e-6) {
        return Err(Error::Precondition(format!(
            "e^ψ decays like r^-{p:.4}: ∫ e^ψ over the exterior diverges"
        )));
    }
    let (r0, r1) = (psi.mesh().inner_radius(), psi.mesh().outer_radius());
    let floor = psi.values().iter().copied().fold(f64::INFINITY, f64::min);
    let mut points = Vec::with_capacity(s_values.len());
    for &s in s_values {
        if s < floor - 1e-12 * floor.abs().max(1.0) {
            return Err(invalid("s_values", format!("{s} is below ψ on the truncated exterior")));
        }
        let radius = superlevel_intervals(psi, s)
            .into_iter()
            .map(|(_, b)| b)
            .fold(r0, f64::max)
            .min(r1);
        points.push(DecayPoint {
            s,
            value: s.exp() * PI * radius * radius,
        });
    }
    let n = points.len();
    let start = n - (n / 10).max(2).min(n);
    let monotone_tail = points[start..].windows(2).all(|w| w[1].value <= w[0].value);
    let peak = points.iter().fold(0.0f64, |m, p| m.max(p.value));
    let final_ratio = if peak > 0.0 { points[n - 1].value / peak } else { 0.0 };
    Ok(DecaySequence {
        points,
        monotone_tail,
        final_ratio,
    })
}

// ---------------------------------------------------------------------------
// mass brackets

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// `m ≤ ball_mass(λ₁, R)`
    Below,
    /// `m ≥ ball_mass(λ₂, R)`
    Above,
    /// Strictly between the two, which the dichotomy forbids.
    Between,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub side: Side,
    pub mass: f64,
    pub lower: f64,
    pub upper: f64,
    /// Roots of `x² − 8πx + 2β` with `β = (∮_{∂B_R} e^{ψ/2})²`.
    pub roots: MassPair,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative: Option<Alternative>,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub differential: DifferentialSummary,
    pub notes: Vec<String>,
}

fn boundary_agreement(value: f64, r: f64, lam1: BubbleParam, lam2: BubbleParam) -> Result<()> {
    if lam2.lambda() <= lam1.lambda() {
        return Err(invalid("lam2", "must exceed lam1"));
    }
    let tol = 1e-8 * value.abs().max(1.0);
    for l in [lam1, lam2] {
        let gap = value - l.value(r);
        if gap.abs() > tol {
            return Err(Error::Precondition(format!(
                "boundary mismatch: ψ(R) − U_λ(R) = {gap:.3e} for λ = {} (tolerance {tol:.1e})",
                l.lambda()
            )));
        }
    }
    Ok(())
}

/// `ext(λ₂, R) ≤ ∫_{|y|>R} e^ψ ≤ ext(λ₁, R)` when ψ agrees with both bubbles
/// on `∂B_R` and satisfies the exterior differential condition.
pub fn mass_bracket_exterior(
    psi: &RadialField,
    tail: Tail,
    lam1: BubbleParam,
    lam2: BubbleParam,
) -> Result<BracketReport> {
    if psi.mesh().is_disc() {
        return Err(invalid("psi", "an exterior profile lives on [R, R_max] with R > 0"));
    }
    let r = psi.mesh().inner_radius();
    boundary_agreement(psi.first(), r, lam1, lam2)?;
    let (m, m_err) = mass_with_error(psi, tail)?;
    let diff = differential_profile(psi, Side::Exterior, tail)?.summary();
    let (lower, upper) = (lam2.exterior_mass(r), lam1.exterior_mass(r));
    let margin = (m - lower).min(upper - m);
    let tolerance = 2.0 * m_err;
    let mut out = BracketReport {
        side: Side::Exterior,
        mass: m,
        lower,
        upper,
        roots: mass_roots(boundary_lhs(r, psi.first()))?,
        alternative: None,
        margin,
        tolerance,
        verdict: Verdict::classify(margin, tolerance),
        differential: diff,
        notes: Vec::new(),
    };
    if !psi.is_strictly_decreasing() {
        out.verdict = Verdict::NotApplicable;
        out.notes.push("ψ is not strictly decreasing".into());
    } else if !diff.holds {
        out.verdict = Verdict::NotApplicable;
        out.notes.push(format!("exterior differential condition fails (worst slack {:.3e})", diff.worst));
    }
    Ok(out)
}

/// Either `∫_{B_R} e^ψ ≤ ball_mass(λ₁, R)` or `≥ ball_mass(λ₂, R)`; the
/// report says which, and flags a mass strictly in between as a violation.
pub fn mass_bracket_interior(psi: &RadialField, lam1: BubbleParam, lam2: BubbleParam) -> Result<BracketReport> {
    let diff = differential_profile(psi, Side::Interior, Tail::None)?.summary();
    let r = psi.mesh().outer_radius();
    boundary_agreement(psi.last(), r, lam1, lam2)?;
    let (m, m_err) = mass_with_error(psi, Tail::None)?;
    let (lower, upper) = (lam1.ball_mass(r), lam2.ball_mass(r));
    let tolerance = 2.0 * m_err;
    let (alternative, margin) = if m <= lower + tolerance {
        (Alternative::Below, lower - m)
    } else if m >= upper - tolerance {
        (Alternative::Above, m - upper)
    } else {
        (Alternative::Between, -(m - lower).min(upper - m))
    };
    let mut out = BracketReport {
        side: Side::Interior,
        mass: m,
        lower,
        upper,
        roots: mass_roots(boundary_lhs(r, psi.last()))?,
        alternative: Some(alternative),
        margin,
        tolerance,
        verdict: Verdict::classify(margin, tolerance),
        differential: diff,
        notes: Vec::new(),
    };
    if !psi.is_strictly_decreasing() {
        out.verdict = Verdict::NotApplicable;
        out.notes.push("ψ is not strictly decreasing".into());
    } else if !diff.holds {
        out.verdict = Verdict::NotApplicable;
        out.notes.push(format!("interior differential condition fails (worst slack {:.3e})", diff.worst));
    }
    Ok(out)
}

/// `ψ(R) ≥ U_λ(R)` with λ chosen so that `ball_mass(λ, R) = ρ`.
///
/// A negative margin beyond tolerance is the contradiction used by the
/// uniqueness argument.
pub fn boundary_comparison(psi: &RadialField, rho: f64) -> Result<BolReport> {
    let diff = differential_profile(psi, Side::Interior, Tail::None)?;
    let r = psi.mesh().outer_radius();
    let (m, m_err) = mass_with_error(psi, Tail::None)?;
    let lhs = psi.last();
    let mut report = if rho > 0.0 && rho < EIGHT_PI {
        let lam = lambda_from_ball_mass(rho, r)?;
        // dU_λ(R)/dρ = 1/ρ − 1/(8π − ρ) along the matched family
        let slope = (1.0 / rho - 1.0 / (EIGHT_PI - rho)).abs();
        let tol = 2.0 * slope * m_err + 1e-12 * lhs.abs().max(1.0);
        let mut rep = BolReport::new(Context::BoundaryComparison, Relation::GreaterEq, lhs, lam.value(r), tol);
        if (m - rho).abs() > 1e-6 * rho {
            rep.notes.push(format!("∫ e^ψ = {m} differs from ρ = {rho}"));
        }
        rep
    } else {
        return Ok(BolReport::new(Context::BoundaryComparison, Relation::GreaterEq, lhs, f64::NAN, 0.0)
            .not_applicable(format!("ρ = {rho} is outside (0, 8π)")));
    };
    let summary = diff.summary();
    report.differential = Some(summary);
    if !psi.is_strictly_decreasing() {
        return Ok(report.not_applicable("ψ is not strictly decreasing"));
    }
    if !summary.holds {
        return Ok(report.not_applicable(format!(
            "differential condition fails: worst slack {:.3e} at r = {:.4}",
            summary.worst, summary.worst_radius
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// output

#[derive(Serialize)]
struct ReportRow<'a> {
    context: Context,
    relation: Relation,
    lhs: f64,
    rhs: f64,
    defect: f64,
    margin: f64,
    tolerance: f64,
    verdict: Verdict,
    notes: &'a str,
}

/// One CSV row per report.
pub fn write_reports_csv(reports: &[BolReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        let notes = r.notes.join("; ");
        w.serialize(ReportRow {
            context: r.context,
            relation: r.relation,
            lhs: r.lhs,
            rhs: r.rhs,
            defect: r.defect,
            margin: r.margin,
            tolerance: r.tolerance,
            verdict: r.verdict,
            notes: &notes,
        })?;
    }
    w.flush()?;
    Ok(())
}
