use std::f64::consts::PI;
use std::sync::Arc;

use meanfield::bubble::{lambda_from_ball_mass, mass_roots, BubbleParam};
use meanfield::discretize::{RadialField, RadialMesh};
use meanfield::harness::{distinct_pair, theorem_pipeline};
use meanfield::rearrange::{equimeasurability_defect, rearrange};
use proptest::prelude::*;

const EIGHT_PI: f64 = 8.0 * PI;

fn mesh() -> Arc<RadialMesh> {
    Arc::new(RadialMesh::uniform(0.0, 1.0, 513).unwrap())
}

/// A smooth radial profile vanishing at r = 1, not necessarily monotone.
fn profile(a: f64, b: f64, c: f64) -> impl Fn(f64) -> f64 {
    move |r| (1.0 - r * r) * (a + b * r + c * (3.0 * r).cos())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roots_sum_to_eight_pi(beta in 0.0..(8.0 * PI * PI)) {
        let r = mass_roots(beta).unwrap();
        prop_assert!(r.m1 <= r.m2);
        prop_assert!((r.m1 + r.m2 - EIGHT_PI).abs() <= 1e-12 * EIGHT_PI);
        prop_assert!((r.m1 * r.m2 - 2.0 * beta).abs() <= 1e-12 * 8.0 * PI * PI);
    }

    #[test]
    fn lambda_round_trips_through_ball_mass(lam in 0.05f64..50.0, r in 0.1f64..3.0) {
        let p = BubbleParam::new(lam).unwrap();
        let back = lambda_from_ball_mass(p.ball_mass(r), r).unwrap();
        prop_assert!((back.lambda() - lam).abs() <= 1e-9 * lam);
    }

    #[test]
    fn rearrangement_is_radially_nonincreasing(a in 0.2f64..2.0, b in -1.0f64..1.0, c in -0.3f64..0.3, lam in 0.5f64..4.0) {
        let m = mesh();
        let u = RadialField::bubble(m.clone(), BubbleParam::new(lam).unwrap()).unwrap();
        let phi = RadialField::from_fn(m, profile(a, b, c)).unwrap();
        let res = rearrange(&phi, &u, BubbleParam::new(lam).unwrap(), 1.0).unwrap();
        let v = res.phi_star.values();
        let scale = v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        prop_assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale.max(1.0)));
    }

    #[test]
    fn rearrangement_preserves_level_masses(a in 0.2f64..2.0, b in -1.0f64..1.0, c in -0.3f64..0.3, lam in 0.5f64..4.0) {
        let m = mesh();
        let u = RadialField::bubble(m.clone(), BubbleParam::new(lam).unwrap()).unwrap();
        let phi = RadialField::from_fn(m, profile(a, b, c)).unwrap();
        let res = rearrange(&phi, &u, BubbleParam::new(lam).unwrap(), 1.0).unwrap();
        let d = equimeasurability_defect(&res, &phi, &u, 64).unwrap();
        prop_assert!(d <= 1e-3, "defect {d:e}");
        // the table's masses never decrease as the threshold drops
        prop_assert!(res.table.windows(2).all(|w| w[1].mass >= w[0].mass));
    }

    #[test]
    fn pipeline_null_never_fires(lam in 0.5f64..6.0) {
        let w = RadialField::bubble(mesh(), BubbleParam::new(lam).unwrap()).unwrap();
        let rep = theorem_pipeline(&w, &w).unwrap();
        prop_assert!(!rep.contradiction);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn distinct_pairs_are_separated(mu in 0.6f64..2.6) {
        let template = RadialField::constant(mesh(), 0.0).unwrap();
        let (w1, w2) = distinct_pair(&template, 4.0 * PI, mu).unwrap();
        let rep = theorem_pipeline(&w1, &w2).unwrap();
        let exact = ((8.0 + mu * mu) / 16.0f64).ln();
        let d = rep.boundary_defect.unwrap();
        prop_assert!((d - exact).abs() < 1e-5, "{d} vs {exact}");
        prop_assert_eq!(rep.contradiction, d.abs() > 10.0 * rep.tolerance);
    }
}
