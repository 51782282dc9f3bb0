//! Shooting for radial problems on discs.
//!
//! The Liouville form `w″ + w′/r + K e^w = f` with `w(0) = a`, `w′(0) = 0` is
//! integrated by classical RK4 together with the mass `m(r) = ∫_{B_r} K e^w`
//! and the variational equations for `∂/∂a`. Near the origin the regular
//! series `w ≈ a + (f(0) − K(0)e^a) r²/4` seeds the integration at a tiny
//! radius, and cells close to the origin are sub-stepped so that the `1/r`
//! coefficient never limits accuracy.

use std::f64::consts::PI;

/// Result of one initial-value integration.
#[derive(Clone, Debug)]
pub(crate) struct Shot {
    pub w: Vec<f64>,
    /// `∫_{B_R} K e^w`.
    pub mass: f64,
    /// `∂w(R)/∂a`.
    pub dw_end: f64,
    /// `∂ mass / ∂a`.
    pub dmass: f64,
}

const DIM: usize = 6;
type State = [f64; DIM];

/// Overflow guard on `w`.
const W_CEILING: f64 = 700.0;

struct Rhs<'a> {
    k: &'a dyn Fn(f64) -> f64,
    f: &'a dyn Fn(f64) -> f64,
}

impl Rhs<'_> {
    // state: w, w′, m, y = ∂w/∂a, y′, ∂m/∂a
    fn eval(&self, r: f64, s: &State) -> State {
        let ke = (self.k)(r) * s[0].exp();
        [
            s[1],
            (self.f)(r) - ke - s[1] / r,
            2.0 * PI * r * ke,
            s[4],
            -ke * s[3] - s[4] / r,
            2.0 * PI * r * ke * s[3],
        ]
    }

    fn rk4(&self, r: f64, h: f64, s: &State) -> State {
        let add = |s: &State, k: &State, c: f64| {
            let mut o = *s;
            for i in 0..DIM {
                o[i] += c * k[i];
            }
            o
        };
        let k1 = self.eval(r, s);
        let k2 = self.eval(r + 0.5 * h, &add(s, &k1, 0.5 * h));
        let k3 = self.eval(r + 0.5 * h, &add(s, &k2, 0.5 * h));
        let k4 = self.eval(r + h, &add(s, &k3, h));
        let mut o = *s;
        for i in 0..DIM {
            o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        o
    }
}

fn healthy(s: &State) -> bool {
    s.iter().all(|v| v.is_finite()) && s[0] < W_CEILING
}

/// Integrate from the centre value `a` across the mesh `nodes` (`nodes[0] = 0`).
pub(crate) fn shoot(
    nodes: &[f64],
    k: &dyn Fn(f64) -> f64,
    f: &dyn Fn(f64) -> f64,
    a: f64,
) -> Option<Shot> {
    debug_assert_eq!(nodes[0], 0.0);
    let rhs = Rhs { k, f };
    let n = nodes.len();
    let r1 = nodes[1];
    let rs = r1 / 64.0;
    let k0 = k(0.0);
    let ea = a.exp();
    let b = f(0.0) - k0 * ea;
    let by = -k0 * ea;
    let mut s: State = [
        a + 0.25 * b * rs * rs,
        0.5 * b * rs,
        PI * k0 * ea * rs * rs,
        1.0 + 0.25 * by * rs * rs,
        0.5 * by * rs,
        PI * k0 * ea * rs * rs,
    ];
    let mut w = Vec::with_capacity(n);
    w.push(a);

    // geometric sub-steps from rs to r1
    let steps = 48;
    let ratio = 64f64.powf(1.0 / steps as f64);
    let mut r = rs;
    for i in 0..steps {
        let next = if i + 1 == steps { r1 } else { r * ratio };
        s = rhs.rk4(r, next - r, &s);
        r = next;
        if !healthy(&s) {
            return None;
        }
    }
    w.push(s[0]);

    for i in 1..n - 1 {
        let (r0, r1) = (nodes[i], nodes[i + 1]);
        let h = r1 - r0;
        let m = ((16.0 * h / r0).ceil() as usize).max(1);
        let dh = h / m as f64;
        for j in 0..m {
            s = rhs.rk4(r0 + j as f64 * dh, dh, &s);
        }
        if !healthy(&s) {
            return None;
        }
        w.push(s[0]);
    }
    Some(Shot {
        w,
        mass: s[2],
        dw_end: s[3],
        dmass: s[5],
    })
}

#[derive(Clone, Debug)]
pub(crate) struct ScalarRoot {
    pub shot: Option<Shot>,
    pub mismatch: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The derivative of the mismatch vanished (fold point).
    pub singular: bool,
}

/// Safeguarded Newton on the centre value: `eval(a)` returns the mismatch and
/// its derivative. Brackets are kept whenever a sign change is observed.
pub(crate) fn find_center(
    mut eval: impl FnMut(f64) -> Option<(f64, f64, Shot)>,
    a0: f64,
    tol: f64,
    max_iter: usize,
) -> ScalarRoot {
    let mut lo: Option<f64> = None; // mismatch < 0
    let mut hi: Option<f64> = None; // mismatch > 0
    let mut a = a0;
    let mut best = ScalarRoot {
        shot: None,
        mismatch: f64::INFINITY,
        iterations: 0,
        converged: false,
        singular: false,
    };
    let mut current = eval(a);
    let mut step_limit = 4.0;
    while current.is_none() && step_limit > 1e-3 {
        // overflow at the initial guess: retreat towards small centre values
        a -= step_limit;
        step_limit *= 0.5;
        current = eval(a);
    }
    for it in 0..max_iter {
        let Some((g, dg, shot)) = current.take() else {
            break;
        };
        best = ScalarRoot {
            mismatch: g.abs(),
            shot: Some(shot),
            iterations: it,
            converged: false,
            singular: false,
        };
        if g.abs() <= tol {
            best.converged = true;
            return best;
        }
        if g < 0.0 {
            lo = Some(a);
        } else {
            hi = Some(a);
        }
        let mut next = if dg != 0.0 && dg.is_finite() {
            a - g / dg
        } else {
            f64::NAN
        };
        if !next.is_finite() {
            match (lo, hi) {
                (Some(l), Some(h)) => next = 0.5 * (l + h),
                _ => {
                    best.singular = true;
                    return best;
                }
            }
        }
        // keep inside a known bracket
        if let (Some(l), Some(h)) = (lo, hi) {
            let (x0, x1) = (l.min(h), l.max(h));
            if !(next > x0 && next < x1) {
                next = 0.5 * (l + h);
            }
        }
        // limit wild steps far from any bracket
        let max_step = 8.0;
        if (next - a).abs() > max_step {
            next = a + max_step * (next - a).signum();
        }
        if (next - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            best.converged = g.abs() <= 1e3 * tol;
            return best;
        }
        let mut trial = eval(next);
        let mut shrink = 0;
        while trial.is_none() && shrink < 60 {
            next = a + 0.5 * (next - a);
            trial = eval(next);
            shrink += 1;
        }
        if trial.is_none() {
            return best;
        }
        a = next;
        current = trial;
    }
    if let Some((g, _, shot)) = current {
        if g.abs() < best.mismatch {
            best = ScalarRoot {
                mismatch: g.abs(),
                shot: Some(shot),
                iterations: max_iter,
                converged: g.abs() <= tol,
                singular: false,
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::BubbleParam;

    #[test]
    fn bubble_is_reproduced() {
        let n = 513;
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let p = BubbleParam::new(3.0).unwrap();
        let shot = shoot(&nodes, &|_| 1.0, &|_| 0.0, 2.0 * 3f64.ln()).unwrap();
        let err = nodes
            .iter()
            .zip(&shot.w)
            .map(|(&r, &w)| (w - p.value(r)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!((shot.mass - p.ball_mass(1.0)).abs() < 1e-10);
        // ∂w(R)/∂a against a central difference of the closed form in a = 2 ln λ
        let d = 1e-5;
        let wr = |a: f64| BubbleParam::new((0.5 * a).exp()).unwrap().value(1.0);
        let a = 2.0 * 3f64.ln();
        let fd = (wr(a + d) - wr(a - d)) / (2.0 * d);
        assert!((shot.dw_end - fd).abs() < 1e-7);
    }

    #[test]
    fn blow_up_is_detected() {
        let nodes: Vec<f64> = (0..64).map(|i| i as f64 / 63.0).collect();
        // without the exponential term a huge source drives w past the ceiling
        assert!(shoot(&nodes, &|_| 0.0, &|_| 1e6, 0.0).is_none());
        assert!(shoot(&nodes, &|_| 1.0, &|_| 0.0, 0.0).is_some());
    }
}
