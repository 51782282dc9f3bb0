//! Damped Newton iteration for discrete systems whose Jacobian is sparse plus
//! rank one.

use super::linear::SparseRankOne;

pub(crate) trait NewtonSystem {
    fn residual(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> SparseRankOne;
    /// Size of residual entries attributable to round-off at `x`.
    fn roundoff_floor(&self, x: &[f64]) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum NewtonStatus {
    Converged,
    /// The residual stopped decreasing at the round-off floor of the stencil.
    ConvergedAtRoundoff,
    Stagnated,
    Singular,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub floor: f64,
    pub iterations: usize,
    pub status: NewtonStatus,
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn newton<S: NewtonSystem>(sys: &S, x0: Vec<f64>, opt: NewtonOptions) -> NewtonOutcome {
    let mut x = x0;
    let mut f = sys.residual(&x);
    let mut iterations = 0;
    loop {
        let res = max_norm(&f);
        let floor = sys.roundoff_floor(&x);
        let done = |status, iterations| NewtonOutcome {
            x: x.clone(),
            residual: res,
            floor,
            iterations,
            status,
        };
        if res <= opt.tolerance {
            return done(NewtonStatus::Converged, iterations);
        }
        if iterations >= opt.max_iterations {
            return done(NewtonStatus::MaxIterations, iterations);
        }
        let jac = sys.jacobian(&x);
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let Ok(dx) = jac.solve(&rhs) else {
            return done(NewtonStatus::Singular, iterations);
        };
        iterations += 1;
        let norm0 = l2(&f);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opt.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + alpha * d).collect();
            let ft = sys.residual(&trial);
            let nt = l2(&ft);
            if nt.is_finite() && nt < norm0 {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xt, ft)) => {
                let step = alpha * max_norm(&dx);
                x = xt;
                f = ft;
                let res = max_norm(&f);
                let floor = sys.roundoff_floor(&x);
                if res > opt.tolerance && res <= floor && step <= 1e-12 * (1.0 + max_norm(&x)) {
                    return NewtonOutcome {
                        x,
                        residual: res,
                        floor,
                        iterations,
                        status: NewtonStatus::ConvergedAtRoundoff,
                    };
                }
            }
            None => {
                let status = if res <= floor {
                    NewtonStatus::ConvergedAtRoundoff
                } else {
                    NewtonStatus::Stagnated
                };
                return done(status, iterations);
            }
        }
    }
}
