//! Closed forms for the standard bubble family
//!
//! ```text
//! U_λ(r) = −2 ln(1 + λ²r²/8) + 2 ln λ,      ΔU_λ + e^{U_λ} = 0 on ℝ²
//! ```
//!
//! and the mass algebra it induces. Everything here is evaluated from closed
//! forms; quadrature only appears in tests as an independent cross-check.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Total mass of every bubble over the plane.
pub const EIGHT_PI: f64 = 8.0 * PI;

/// Largest admissible β in `x² − 8πx + 2β = 0` (zero discriminant).
pub const EIGHT_PI_SQ: f64 = 8.0 * PI * PI;

/// Default distance from 8π below which ball masses are refused when solving for λ.
pub const DEFAULT_CRITICAL_MARGIN: f64 = 1e-9;

/// Scale λ > 0 of one standard bubble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BubbleParam {
    lambda: f64,
}

impl BubbleParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(invalid("lambda", format!("must be finite and positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(self) -> f64 {
        self.lambda
    }

    /// λ²r²/8, the quantity every closed form is built from.
    fn scaled(self, r: f64) -> f64 {
        self.lambda * self.lambda * r * r / 8.0
    }

    /// U_λ(r).
    pub fn value(self, r: f64) -> f64 {
        -2.0 * self.scaled(r).ln_1p() + 2.0 * self.lambda.ln()
    }

    /// e^{U_λ(r)} = λ² / (1 + λ²r²/8)², without an exp/log round trip.
    pub fn density(self, r: f64) -> f64 {
        let d = 1.0 + self.scaled(r);
        self.lambda * self.lambda / (d * d)
    }

    /// ∫_{B_r} e^{U_λ} = 8πλ²r² / (8 + λ²r²).
    pub fn ball_mass(self, r: f64) -> f64 {
        let x = self.lambda * self.lambda * r * r;
        EIGHT_PI * x / (8.0 + x)
    }

    /// ∫_{ℝ²∖B_r} e^{U_λ} = 64π / (8 + λ²r²).
    pub fn exterior_mass(self, r: f64) -> f64 {
        let x = self.lambda * self.lambda * r * r;
        8.0 * EIGHT_PI / (8.0 + x)
    }

    /// ∮_{∂B_r} e^{U_λ/2} = 2πrλ / (1 + λ²r²/8).
    pub fn boundary_weight(self, r: f64) -> f64 {
        2.0 * PI * r.abs() * self.lambda / (1.0 + self.scaled(r))
    }

    /// dU_λ/dr.
    pub fn radial_derivative(self, r: f64) -> f64 {
        -0.5 * self.lambda * self.lambda * r / (1.0 + self.scaled(r))
    }

    /// d²U_λ/dr².
    pub fn second_derivative(self, r: f64) -> f64 {
        let s = self.scaled(r);
        -0.5 * self.lambda * self.lambda * (1.0 - s) / ((1.0 + s) * (1.0 + s))
    }

    /// Radius at which U_λ takes the value `level` (`None` above the peak 2 ln λ).
    pub fn radius_at_value(self, level: f64) -> Option<f64> {
        let peak = 2.0 * self.lambda.ln();
        if level > peak {
            return None;
        }
        // 1 + λ²r²/8 = e^{(peak − level)/2}
        let s = ((peak - level) / 2.0).exp_m1();
        Some((8.0 * s).sqrt() / self.lambda)
    }

    /// Radius whose ball carries mass `m ∈ [0, 8π)`.
    pub fn radius_for_ball_mass(self, m: f64) -> Option<f64> {
        if !(0.0..EIGHT_PI).contains(&m) {
            return None;
        }
        Some((8.0 * m / (EIGHT_PI - m)).sqrt() / self.lambda)
    }
}

impl TryFrom<f64> for BubbleParam {
    type Error = Error;

    fn try_from(lambda: f64) -> Result<Self> {
        Self::new(lambda)
    }
}

impl From<BubbleParam> for f64 {
    fn from(p: BubbleParam) -> f64 {
        p.lambda
    }
}

pub fn bubble_value(p: BubbleParam, r: f64) -> f64 {
    p.value(r)
}

pub fn bubble_density(p: BubbleParam, r: f64) -> f64 {
    p.density(r)
}

pub fn ball_mass(p: BubbleParam, r: f64) -> f64 {
    p.ball_mass(r)
}

pub fn exterior_mass(p: BubbleParam, r: f64) -> f64 {
    p.exterior_mass(r)
}

pub fn boundary_weight(p: BubbleParam, r: f64) -> f64 {
    p.boundary_weight(r)
}

/// The unique λ with `ball_mass(λ, radius) = mass`, refusing masses within
/// [`DEFAULT_CRITICAL_MARGIN`] of 8π.
pub fn lambda_from_ball_mass(mass: f64, radius: f64) -> Result<BubbleParam> {
    lambda_from_ball_mass_with_margin(mass, radius, DEFAULT_CRITICAL_MARGIN)
}

pub fn lambda_from_ball_mass_with_margin(
    mass: f64,
    radius: f64,
    margin: f64,
) -> Result<BubbleParam> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    if !mass.is_finite() || mass <= 0.0 || mass > EIGHT_PI - margin {
        return Err(Error::CriticalMass {
            mass,
            limit: EIGHT_PI,
        });
    }
    let lambda_sq = 8.0 * mass / ((EIGHT_PI - mass) * radius * radius);
    BubbleParam::new(lambda_sq.sqrt())
}

/// The two roots `m1 ≤ m2` of `x² − 8πx + 2β = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassPair {
    pub m1: f64,
    pub m2: f64,
}

/// Roots of `x² − 8πx + 2β`, i.e. the two masses `m` with `½ m (8π − m) = β`.
pub fn mass_roots(beta: f64) -> Result<MassPair> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(invalid("beta", format!("must be finite and nonnegative, got {beta}")));
    }
    // β computed as ½·4π·4π may overshoot 8π² by an ulp or two.
    let slack = EIGHT_PI_SQ * 8.0 * f64::EPSILON;
    if beta > EIGHT_PI_SQ + slack {
        return Err(Error::ComplexRoots { beta });
    }
    let disc = (8.0 * (EIGHT_PI_SQ - beta)).max(0.0);
    // b = −8π < 0, so q = −(b − √disc)/2 has no cancellation.
    let q = 0.5 * (EIGHT_PI + disc.sqrt());
    let other = 2.0 * beta / q;
    Ok(MassPair {
        m1: other.min(q),
        m2: other.max(q),
    })
}

/// Second bubble scale agreeing with `p` on the circle of radius `r0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    pub lambda: BubbleParam,
    /// `λ r0² = 8`: the conjugate coincides with the input.
    pub self_conjugate: bool,
}

/// λ′ = 8 / (λ r0²), the other solution of `U_{λ′}(r0) = U_λ(r0)`.
pub fn conjugate_lambda(p: BubbleParam, r0: f64) -> Result<Conjugate> {
    if !r0.is_finite() || r0 <= 0.0 {
        return Err(invalid("r0", format!("must be positive, got {r0}")));
    }
    let lambda = BubbleParam::new(8.0 / (p.lambda * r0 * r0))?;
    let self_conjugate = (lambda.lambda - p.lambda).abs() <= 1e-12 * p.lambda;
    Ok(Conjugate {
        lambda,
        self_conjugate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::SQRT_2;

    fn b(l: f64) -> BubbleParam {
        BubbleParam::new(l).unwrap()
    }

    #[test]
    fn rejects_bad_lambda() {
        assert!(BubbleParam::new(0.0).is_err());
        assert!(BubbleParam::new(-1.0).is_err());
        assert!(BubbleParam::new(f64::NAN).is_err());
        assert!(BubbleParam::new(f64::INFINITY).is_err());
    }

    #[test]
    fn value_examples() {
        assert_eq!(b(1.0).value(0.0), 0.0);
        assert_relative_eq!(b(1.0).value(2.0), -2.0 * 1.5f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(b(2.0).value(2.0), -2.0 * 1.5f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(b(3.7).value(0.0), 2.0 * 3.7f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn density_examples() {
        assert_eq!(b(1.0).density(0.0), 1.0);
        assert_relative_eq!(b(1.0).density(2.0 * SQRT_2), 0.25, epsilon = 1e-15);
        assert_eq!(b(3.0).density(0.0), 9.0);
    }

    #[test]
    fn mass_examples() {
        let l = b(2.0 * SQRT_2);
        assert_relative_eq!(l.ball_mass(1.0), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(l.exterior_mass(1.0), 4.0 * PI, max_relative = 1e-15);
        assert_eq!(b(0.3).ball_mass(0.0), 0.0);
        assert_relative_eq!(b(0.3).exterior_mass(0.0), EIGHT_PI, max_relative = 1e-15);
        assert_relative_eq!(b(1.0).ball_mass(1e9), EIGHT_PI, max_relative = 1e-15);
        assert_relative_eq!(b(1.0).exterior_mass(4.0), EIGHT_PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn boundary_weight_examples() {
        let w = b(2.0 * SQRT_2).boundary_weight(1.0);
        assert_relative_eq!(w, 2.0 * SQRT_2 * PI, max_relative = 1e-15);
        assert_relative_eq!(w * w, 8.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(b(1.0).boundary_weight(2.0 * SQRT_2), 2.0 * SQRT_2 * PI, max_relative = 1e-15);
        let r = 1e-9;
        assert_relative_eq!(b(1.0).boundary_weight(r), 2.0 * PI * r, max_relative = 1e-15);
    }

    #[test]
    fn lambda_inversion() {
        assert_relative_eq!(lambda_from_ball_mass(4.0 * PI, 1.0).unwrap().lambda(), 2.0 * SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(lambda_from_ball_mass(4.0 * PI, 2.0).unwrap().lambda(), SQRT_2, max_relative = 1e-15);
        assert!(matches!(lambda_from_ball_mass(EIGHT_PI, 1.0), Err(Error::CriticalMass { .. })));
        assert!(matches!(lambda_from_ball_mass(EIGHT_PI - 1e-12, 1.0), Err(Error::CriticalMass { .. })));
        assert!(matches!(lambda_from_ball_mass(0.0, 1.0), Err(Error::CriticalMass { .. })));
        assert!(lambda_from_ball_mass(1.0, 0.0).is_err());
        // a smaller margin lets near-critical masses through
        let l = lambda_from_ball_mass_with_margin(EIGHT_PI - 1e-6, 1.0, 1e-9).unwrap();
        assert!(l.lambda() > 1e3);
    }

    #[test]
    fn quadratic_roots() {
        let r = mass_roots(0.0).unwrap();
        assert_eq!(r.m1, 0.0);
        assert_relative_eq!(r.m2, EIGHT_PI, max_relative = 1e-15);
        let r = mass_roots(EIGHT_PI_SQ).unwrap();
        assert_relative_eq!(r.m1, 4.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(r.m2, 4.0 * PI, max_relative = 1e-12);
        let r = mass_roots(0.5 * 4.0 * PI * 4.0 * PI).unwrap();
        assert_relative_eq!(r.m1, 4.0 * PI, max_relative = 1e-7);
        let r = mass_roots(6.0 * PI * PI).unwrap();
        assert_relative_eq!(r.m1, 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(r.m2, 6.0 * PI, max_relative = 1e-14);
        assert!(matches!(mass_roots(EIGHT_PI_SQ * 1.001), Err(Error::ComplexRoots { .. })));
        assert!(mass_roots(-1.0).is_err());
    }

    #[test]
    fn small_beta_has_no_cancellation() {
        let beta = 1e-20;
        let r = mass_roots(beta).unwrap();
        // m1 ≈ 2β / 8π to full precision
        assert_relative_eq!(r.m1, 2.0 * beta / EIGHT_PI, max_relative = 1e-14);
    }

    #[test]
    fn conjugates() {
        let c = conjugate_lambda(b(1.0), 2.0).unwrap();
        assert_relative_eq!(c.lambda.lambda(), 2.0, max_relative = 1e-15);
        assert!(!c.self_conjugate);
        assert_relative_eq!(c.lambda.value(2.0), -2.0 * 1.5f64.ln(), epsilon = 1e-15);
        let c = conjugate_lambda(b(2.0 * SQRT_2), 1.0).unwrap();
        assert!(c.self_conjugate);
        let c = conjugate_lambda(b(4.0), 1.0).unwrap();
        assert_relative_eq!(c.lambda.lambda(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(c.lambda.value(1.0), b(4.0).value(1.0), epsilon = 1e-14);
    }

    #[test]
    fn radius_inversions() {
        let p = b(1.7);
        for &r in &[0.0, 0.1, 1.0, 3.0, 40.0] {
            assert_relative_eq!(p.radius_at_value(p.value(r)).unwrap(), r, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(p.radius_for_ball_mass(p.ball_mass(r)).unwrap(), r, epsilon = 1e-12, max_relative = 1e-10);
        }
        assert!(p.radius_at_value(p.value(0.0) + 1e-3).is_none());
        assert!(p.radius_for_ball_mass(EIGHT_PI).is_none());
    }

    #[test]
    fn serde_round_trip_validates() {
        let p: BubbleParam = serde_json::from_str("2.5").unwrap();
        assert_eq!(p.lambda(), 2.5);
        assert!(serde_json::from_str::<BubbleParam>("-1.0").is_err());
    }
}
