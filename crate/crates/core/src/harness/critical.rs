//! Total mass 8π on the plane: cut ψ where it crosses a bubble and bracket
//! the two pieces.
//!
//! If ψ crosses `U_{λ₁}` at `r₀`, it also meets the conjugate bubble `U_{λ₂}`
//! there (`λ₂ = 8/(λ₁ r₀²)`). The interior dichotomy on `B_{r₀}` and the
//! exterior bracket outside then force the total mass to one side of
//! `ball_mass(λ, r₀) + exterior_mass(λ, r₀) = 8π`, strictly unless both
//! pieces are bubbles.

use serde::{Deserialize, Serialize};

use super::pipeline::Hypothesis;
use crate::bol::{
    differential_profile, mass_bracket_exterior, mass_bracket_interior, Alternative, BracketReport, Side,
    STRICT_FACTOR,
};
use crate::bubble::{conjugate_lambda, BubbleParam, EIGHT_PI};
use crate::discretize::radial::tail_mass;
use crate::discretize::{LevelField, RadialField, Tail};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Forced {
    /// `∫ e^ψ ≤ 8π`
    AtMost8Pi,
    /// `∫ e^ψ ≥ 8π`
    AtLeast8Pi,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub total_mass: f64,
    pub preconditions: Vec<Hypothesis>,
    /// ψ coincides with `U_{λ₁}` on the mesh.
    pub degenerate: bool,
    pub crossing: Option<f64>,
    pub lambda1: f64,
    pub lambda2: Option<f64>,
    pub self_conjugate: bool,
    pub interior: Option<BracketReport>,
    pub exterior: Option<BracketReport>,
    pub forced: Forced,
    /// Signed distance of the total mass from 8π in the forced direction.
    pub forced_margin: f64,
    pub tolerance: f64,
    pub strict: bool,
    /// The brackets hold, the preconditions hold and the total is forced
    /// strictly away from 8π.
    pub excludes_critical: bool,
    pub notes: Vec<String>,
}

/// Sign change of `ψ − U_λ` located to `1e−12` by bisection on the spline.
pub fn crossing_radius(psi: &RadialField, lam: BubbleParam) -> Option<f64> {
    let g = |r: f64| psi.eval(r) - lam.value(r);
    let r = psi.nodes();
    let d: Vec<f64> = r.iter().zip(psi.values()).map(|(&r, &v)| v - lam.value(r)).collect();
    let i = (1..r.len()).find(|&i| d[i] == 0.0 || (d[i - 1] != 0.0 && (d[i - 1] > 0.0) != (d[i] > 0.0)))?;
    if d[i] == 0.0 {
        return Some(r[i]);
    }
    let (mut a, mut b) = (r[i - 1], r[i]);
    let ga = g(a);
    while b - a > 1e-12 * b.max(1.0) {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return Some(m);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Bracket a radial ψ on `[0, R_max]` (continued by `tail`) against `U_{λ₁}`.
pub fn critical_pair_analysis(psi: &RadialField, tail: Tail, lam1: BubbleParam) -> Result<CriticalReport> {
    if !psi.mesh().is_disc() {
        return Err(invalid("psi", "needs a mesh starting at r = 0"));
    }
    let total = psi.weighted_mass() + tail_mass(psi, tail)?;
    let diff = differential_profile(psi, Side::Interior, Tail::None)?.summary();
    let preconditions = vec![
        Hypothesis::new(
            "critical_mass",
            (total - EIGHT_PI).abs() <= 1e-3 * EIGHT_PI,
            format!("∫ e^ψ = {total:.10}, 8π = {EIGHT_PI:.10}"),
        ),
        Hypothesis::new(
            "strictly_decreasing",
            psi.is_strictly_decreasing(),
            "ψ decreases strictly at the nodes".into(),
        ),
        Hypothesis::new(
            "differential_condition",
            diff.holds,
            format!("worst slack {:.3e} at r = {:.4} (tolerance {:.1e})", diff.worst, diff.worst_radius, diff.tolerance),
        ),
    ];
    let mut report = CriticalReport {
        total_mass: total,
        preconditions,
        degenerate: false,
        crossing: None,
        lambda1: lam1.lambda(),
        lambda2: None,
        self_conjugate: false,
        interior: None,
        exterior: None,
        forced: Forced::Undetermined,
        forced_margin: 0.0,
        tolerance: 0.0,
        strict: false,
        excludes_critical: false,
        notes: Vec::new(),
    };

    let scale = psi.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let gap = psi
        .nodes()
        .iter()
        .zip(psi.values())
        .fold(0.0f64, |m, (&r, &v)| m.max((v - lam1.value(r)).abs()));
    if gap <= 1e-10 * scale {
        report.degenerate = true;
        report.lambda2 = Some(lam1.lambda());
        report.self_conjugate = true;
        report
            .notes
            .push("ψ = U_λ1 on the whole mesh: every radius is a crossing and λ2 = λ1".into());
        return Ok(report);
    }
    let Some(r0) = crossing_radius(psi, lam1) else {
        report
            .notes
            .push("ψ − U_λ1 does not change sign on the mesh; a precondition must fail".into());
        return Ok(report);
    };
    report.crossing = Some(r0);
    let conj = conjugate_lambda(lam1, r0)?;
    report.lambda2 = Some(conj.lambda.lambda());
    report.self_conjugate = conj.self_conjugate;
    if conj.self_conjugate {
        report
            .notes
            .push("λ1 r0² = 8: both bubbles coincide and the brackets collapse".into());
        return Ok(report);
    }
    let (la, lb) = if conj.lambda.lambda() > lam1.lambda() {
        (lam1, conj.lambda)
    } else {
        (conj.lambda, lam1)
    };
    let r_max = psi.mesh().outer_radius();
    let inner = psi.restrict(0.0, r0)?;
    let outer = psi.restrict(r0, r_max)?;
    let ib = mass_bracket_interior(&inner, la, lb)?;
    let eb = mass_bracket_exterior(&outer, tail, la, lb)?;
    let tol = ib.tolerance + eb.tolerance;
    let (forced, margin) = match ib.alternative {
        Some(Alternative::Below) => (Forced::AtMost8Pi, (ib.lower - ib.mass) + (eb.upper - eb.mass)),
        Some(Alternative::Above) => (Forced::AtLeast8Pi, (ib.mass - ib.upper) + (eb.mass - eb.lower)),
        _ => (Forced::Undetermined, 0.0),
    };
    report.forced = forced;
    report.forced_margin = margin;
    report.tolerance = tol;
    report.strict = forced != Forced::Undetermined && margin > STRICT_FACTOR * tol;
    report.excludes_critical = report.strict
        && ib.verdict.passes()
        && eb.verdict.passes()
        && report.preconditions.iter().all(|h| h.holds);
    report.interior = Some(ib);
    report.exterior = Some(eb);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::RadialMesh;
    use crate::solver::{integrate_initial_value, Coefficient, ProblemSpec};
    use crate::solver::Domain;
    use std::sync::Arc;

    fn plane() -> Arc<RadialMesh> {
        Arc::new(RadialMesh::graded(4.0, 1000.0, 4097, 2049).unwrap())
    }

    #[test]
    fn bubble_itself_is_degenerate() {
        let l1 = BubbleParam::new(1.0).unwrap();
        let psi = RadialField::bubble(plane(), l1).unwrap();
        let rep = critical_pair_analysis(&psi, Tail::Bubble { lambda: 1.0 }, l1).unwrap();
        assert!(rep.degenerate && rep.self_conjugate);
        assert!((rep.total_mass - EIGHT_PI).abs() < 1e-8);
    }

    #[test]
    fn conjugate_bubble_crosses_where_expected() {
        let l1 = BubbleParam::new(1.0).unwrap();
        let r0 = 1.5;
        let l2 = conjugate_lambda(l1, r0).unwrap().lambda;
        let psi = RadialField::bubble(plane(), l2).unwrap();
        let rep = critical_pair_analysis(&psi, Tail::Bubble { lambda: l2.lambda() }, l1).unwrap();
        assert!((rep.crossing.unwrap() - r0).abs() < 1e-8, "{:?}", rep.crossing);
        assert!((rep.lambda2.unwrap() - l2.lambda()).abs() < 1e-6);
        assert!(!rep.strict && rep.forced_margin.abs() < 10.0 * rep.tolerance.max(1e-9), "{rep:?}");
        let ib = rep.interior.unwrap();
        assert!(ib.verdict.passes() && !ib.verdict.is_strict());
    }

    #[test]
    fn small_source_is_caught_by_the_exterior_condition() {
        // Δψ + e^ψ = ε e^{−r²}: the interior side holds strictly, but the
        // total overshoots 8π and the exterior differential condition fails far out.
        let eps = 1e-3;
        let spec = ProblemSpec::liouville(Domain::Radial(plane())).with_source(Coefficient::Gaussian {
            amplitude: eps,
            width: 1.0,
            center: [0.0, 0.0],
            offset: 0.0,
        });
        let psi = integrate_initial_value(&spec, 0.0).unwrap().unwrap();
        let l1 = BubbleParam::new(1.01).unwrap();
        let rep = critical_pair_analysis(&psi, Tail::PowerLaw, l1).unwrap();
        assert!(rep.preconditions.iter().all(|h| h.holds), "{:?}", rep.preconditions);
        assert!(rep.total_mass > EIGHT_PI);
        assert_eq!(rep.forced, Forced::AtMost8Pi);
        let ib = rep.interior.as_ref().unwrap();
        assert!(ib.verdict.is_strict());
        let eb = rep.exterior.as_ref().unwrap();
        assert_eq!(eb.verdict, crate::bol::Verdict::NotApplicable);
        assert!(!eb.differential.holds && eb.differential.worst < -eb.differential.tolerance);
        assert!(!rep.excludes_critical && rep.forced_margin < 0.0);
    }
}
