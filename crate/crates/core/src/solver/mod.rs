//! Solvers for the mean field equation `Δu + ρ K e^u / ∫K e^u = f` and its
//! Liouville form `Δu + K e^u = f` with constant Dirichlet data on discs and
//! annuli.
//!
//! Radial discs are solved by shooting on the centre value (fourth order),
//! radial annuli by finite-volume Newton, and planar grids by damped Newton
//! whose Jacobian carries the rank-one normalisation term exactly.

pub mod config;
mod linear;
mod newton;
mod planar;
mod problem;
mod radial_fd;
mod shooting;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use problem::{
    Boundary, Branch, Coefficient, Compatibility, Domain, Mode, ProblemSpec, RadialMethod,
};

use crate::bubble::EIGHT_PI;
use crate::discretize::io::AnyField;
use crate::discretize::{RadialField, RadialMesh, ScalarField2D};
use crate::error::{Error, Result};
use newton::{newton, NewtonOptions, NewtonStatus, NewtonSystem};
use planar::Planar;
use radial_fd::RadialFd;

pub const DEFAULT_RADIAL_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_GRID_TOLERANCE: f64 = 1e-8;
/// Mass mismatch accepted by the shooting iteration (relative).
const SHOOTING_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// The residual reached the round-off level of the stencil, which lies
    /// above the requested tolerance on very fine meshes.
    ConvergedAtRoundoff,
    Diverged { reason: String },
    /// The Jacobian (or shooting derivative) became singular, typically at a
    /// fold of the solution branch.
    SingularJacobian,
    /// Mean-field requests with ρ > 8π are outside the uniqueness regime.
    OutOfScope { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solution: AnyField,
    pub status: SolveStatus,
    pub converged: bool,
    /// Max-norm residual used by the convergence test (for shooting, the
    /// relative mismatch of the matched quantity).
    pub residual: f64,
    /// Tolerance the residual was held to.
    pub tolerance: f64,
    pub iterations: usize,
    /// `∫ K e^u`.
    pub mass: f64,
    /// `c = ln(ρ / ∫K e^u)`, so that `w = u + c` solves the Liouville form
    /// with mass ρ; 0 in Liouville mode.
    pub normalization: f64,
    pub branch: Branch,
    pub compatibility: Compatibility,
    pub method: String,
}

impl SolveReport {
    pub fn u_max(&self) -> f64 {
        match &self.solution {
            AnyField::Radial(f) => f.max(),
            AnyField::Grid(f) => f.range_inside().1,
        }
    }

    /// Value at the origin (radial solutions and grids with a centre node).
    pub fn center_value(&self) -> Option<f64> {
        match &self.solution {
            AnyField::Radial(f) if f.mesh().is_disc() => Some(f.first()),
            AnyField::Radial(_) => None,
            AnyField::Grid(f) => {
                let g = f.grid();
                let n = g.resolution();
                (n % 2 == 1 && g.inside()[g.index(n / 2, n / 2)])
                    .then(|| f.values()[g.index(n / 2, n / 2)])
            }
        }
    }

    /// `ρ K e^u / ∫K e^u` integrates to this value; equals ρ for mean-field solves.
    pub fn normalized_mass(&self) -> f64 {
        self.mass * self.normalization.exp()
    }

    pub fn radial(&self) -> Option<&RadialField> {
        self.solution.as_radial()
    }

    pub fn grid(&self) -> Option<&ScalarField2D> {
        self.solution.as_grid()
    }
}

/// Serializable summary of a [`SolveReport`] (without the field samples).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub schema_version: u32,
    pub status: SolveStatus,
    pub converged: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub mass: f64,
    pub normalization: f64,
    pub normalized_mass: f64,
    pub u_max: f64,
    pub center_value: Option<f64>,
    pub branch: Branch,
    pub compatibility: Compatibility,
    pub method: String,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        SolveSummary {
            schema_version: crate::discretize::io::SCHEMA_VERSION,
            status: r.status.clone(),
            converged: r.converged,
            residual: r.residual,
            tolerance: r.tolerance,
            iterations: r.iterations,
            mass: r.mass,
            normalization: r.normalization,
            normalized_mass: r.normalized_mass(),
            u_max: r.u_max(),
            center_value: r.center_value(),
            branch: r.branch,
            compatibility: r.compatibility,
            method: r.method.clone(),
        }
    }
}

/// Dispatch on the domain type.
pub fn solve(spec: &ProblemSpec, initial_guess: Option<&AnyField>) -> Result<SolveReport> {
    match spec.domain {
        Domain::Radial(_) => solve_radial_from(spec, initial_guess.and_then(AnyField::as_radial)),
        Domain::Grid(_) => solve_2d(spec, initial_guess.and_then(AnyField::as_grid)),
    }
}

fn out_of_scope(spec: &ProblemSpec) -> Option<String> {
    match spec.mode {
        Mode::MeanField { rho } if rho > EIGHT_PI => Some(format!(
            "ρ = {rho} exceeds 8π; mean-field mode only covers 0 < ρ ≤ 8π (use Liouville mode)"
        )),
        _ => None,
    }
}

fn not_attempted(spec: &ProblemSpec, reason: String, tolerance: f64) -> Result<SolveReport> {
    let solution = match &spec.domain {
        Domain::Radial(m) => AnyField::Radial(RadialField::constant(m.clone(), spec.boundary.outer())?),
        Domain::Grid(g) => AnyField::Grid(ScalarField2D::from_fn(g.clone(), |_, _| spec.boundary.outer())?),
    };
    Ok(SolveReport {
        solution,
        status: SolveStatus::OutOfScope { reason },
        converged: false,
        residual: f64::INFINITY,
        tolerance,
        iterations: 0,
        mass: 0.0,
        normalization: 0.0,
        branch: spec.branch(),
        compatibility: spec.compatibility(),
        method: "none".into(),
    })
}

fn radial_mesh(spec: &ProblemSpec) -> Result<&Arc<RadialMesh>> {
    match &spec.domain {
        Domain::Radial(m) => Ok(m),
        Domain::Grid(_) => Err(Error::Precondition("expected a radial domain".into())),
    }
}

pub fn solve_radial(spec: &ProblemSpec) -> Result<SolveReport> {
    solve_radial_from(spec, None)
}

/// Radial solve with an optional warm start.
pub fn solve_radial_from(spec: &ProblemSpec, guess: Option<&RadialField>) -> Result<SolveReport> {
    spec.validate()?;
    let mesh = radial_mesh(spec)?.clone();
    let tol = spec.tolerance.unwrap_or(DEFAULT_RADIAL_TOLERANCE);
    if let Some(reason) = out_of_scope(spec) {
        return not_attempted(spec, reason, tol);
    }
    if let Some(g) = guess {
        if g.mesh().as_ref() != mesh.as_ref() {
            return Err(Error::GridMismatch("initial guess is on a different mesh".into()));
        }
    }
    let method = match spec.method {
        RadialMethod::Auto if mesh.is_disc() => RadialMethod::Shooting,
        RadialMethod::Auto => RadialMethod::FiniteDifference,
        m => m,
    };
    match method {
        RadialMethod::Shooting => {
            if !mesh.is_disc() {
                return Err(Error::Precondition(
                    "shooting needs a disc; use finite differences on annuli".into(),
                ));
            }
            solve_disc_shooting(spec, &mesh, guess)
        }
        _ => solve_radial_fd(spec, &mesh, guess, tol),
    }
}

fn radial_coefficients(spec: &ProblemSpec) -> (impl Fn(f64) -> f64 + '_, impl Fn(f64) -> f64 + '_) {
    (
        move |r: f64| spec.weight.radial_value(r),
        move |r: f64| spec.source.radial_value(r),
    )
}

fn solve_disc_shooting(
    spec: &ProblemSpec,
    mesh: &Arc<RadialMesh>,
    guess: Option<&RadialField>,
) -> Result<SolveReport> {
    let nodes = mesh.nodes();
    let radius = mesh.outer_radius();
    let (k, f) = radial_coefficients(spec);
    let g = spec.boundary.outer();
    let max_iter = spec.max_iterations.max(60);
    let k0 = k(0.0);

    let (root, normalization) = match spec.mode {
        Mode::MeanField { rho } => {
            // initial centre value from the bubble carrying mass ρ on B_R
            let a0 = match guess {
                Some(u) => {
                    let z = u.map(|r, v| v + k(r).ln())?.mass_density().total();
                    u.first() + (rho / z).ln()
                }
                None if rho < EIGHT_PI => {
                    let lam2 = 8.0 * rho / ((EIGHT_PI - rho) * radius * radius);
                    (lam2 / k0).ln()
                }
                None => 0.0,
            };
            let ln_rho = rho.ln();
            let root = shooting::find_center(
                |a| {
                    let s = shooting::shoot(nodes, &k, &f, a)?;
                    (s.mass > 0.0).then(|| (s.mass.ln() - ln_rho, s.dmass / s.mass, s))
                },
                a0,
                SHOOTING_TOLERANCE,
                max_iter,
            );
            let c = root.shot.as_ref().map_or(0.0, |s| s.w[s.w.len() - 1] - g);
            (root, c)
        }
        Mode::Liouville => {
            let a0 = guess.map_or(g, |u| u.first());
            let root = shooting::find_center(
                |a| {
                    let s = shooting::shoot(nodes, &k, &f, a)?;
                    Some((s.w[s.w.len() - 1] - g, s.dw_end, s))
                },
                a0,
                SHOOTING_TOLERANCE,
                max_iter,
            );
            (root, 0.0)
        }
    };

    let status = if root.converged {
        SolveStatus::Converged
    } else if root.singular {
        SolveStatus::SingularJacobian
    } else {
        SolveStatus::Diverged {
            reason: if spec.branch() != Branch::Subcritical && spec.branch() != Branch::Liouville {
                "no centre value reproduces the requested mass (critical or supercritical ρ)".into()
            } else {
                format!("shooting mismatch {:.3e} after {} iterations", root.mismatch, root.iterations)
            },
        }
    };
    let values: Vec<f64> = match &root.shot {
        Some(s) => s.w.iter().map(|w| w - normalization).collect(),
        None => vec![g; nodes.len()],
    };
    let u = RadialField::new(mesh.clone(), values)?;
    let mass = match &root.shot {
        Some(s) => s.mass * (-normalization).exp(),
        None => 0.0,
    };
    Ok(SolveReport {
        solution: AnyField::Radial(u),
        converged: root.converged,
        status,
        residual: root.mismatch,
        tolerance: SHOOTING_TOLERANCE,
        iterations: root.iterations,
        mass,
        normalization,
        branch: spec.branch(),
        compatibility: spec.compatibility(),
        method: "shooting".into(),
    })
}

/// Integrate `Δw + K e^w = f`, `w(0) = a`, `w′(0) = 0` across a disc mesh.
/// Returns `None` if the solution overflows.
pub fn integrate_initial_value(spec: &ProblemSpec, a: f64) -> Result<Option<RadialField>> {
    let mesh = radial_mesh(spec)?;
    if !mesh.is_disc() {
        return Err(Error::Precondition("initial-value integration starts at the origin".into()));
    }
    let (k, f) = radial_coefficients(spec);
    match shooting::shoot(mesh.nodes(), &k, &f, a) {
        Some(s) => Ok(Some(RadialField::new(mesh.clone(), s.w)?)),
        None => Ok(None),
    }
}

fn status_from(outcome: NewtonStatus, spec: &ProblemSpec, residual: f64, iterations: usize) -> SolveStatus {
    match outcome {
        NewtonStatus::Converged => SolveStatus::Converged,
        NewtonStatus::ConvergedAtRoundoff => SolveStatus::ConvergedAtRoundoff,
        NewtonStatus::Singular => SolveStatus::SingularJacobian,
        NewtonStatus::Stagnated => SolveStatus::Diverged {
            reason: format!(
                "line search stagnated at residual {residual:.3e} after {iterations} iterations{}",
                if spec.branch() == Branch::Critical { " (critical ρ = 8π)" } else { "" }
            ),
        },
        NewtonStatus::MaxIterations => SolveStatus::Diverged {
            reason: format!("no convergence in {iterations} iterations (residual {residual:.3e})"),
        },
    }
}

fn converged(s: &SolveStatus) -> bool {
    matches!(s, SolveStatus::Converged | SolveStatus::ConvergedAtRoundoff)
}

fn radial_fd_system(spec: &ProblemSpec, mesh: &RadialMesh) -> RadialFd {
    let r = mesh.nodes();
    let k = r.iter().map(|&r| spec.weight.radial_value(r)).collect();
    let f = r.iter().map(|&r| spec.source.radial_value(r)).collect();
    RadialFd::new(r, k, f, spec.rho(), spec.boundary.inner(), spec.boundary.outer())
}

fn solve_radial_fd(
    spec: &ProblemSpec,
    mesh: &Arc<RadialMesh>,
    guess: Option<&RadialField>,
    tol: f64,
) -> Result<SolveReport> {
    let sys = radial_fd_system(spec, mesh);
    let x0 = match guess {
        Some(u) => sys.restrict(u.values()),
        None => vec![spec.boundary.outer(); sys.unknowns()],
    };
    let out = newton(
        &sys,
        x0,
        NewtonOptions {
            tolerance: tol,
            max_iterations: spec.max_iterations,
            max_halvings: 30,
        },
    );
    let u = sys.expand(&out.x);
    let z = sys.normalisation(&u);
    let status = status_from(out.status, spec, out.residual, out.iterations);
    Ok(SolveReport {
        solution: AnyField::Radial(RadialField::new(mesh.clone(), u)?),
        converged: converged(&status),
        status,
        residual: out.residual,
        tolerance: tol.max(out.floor),
        iterations: out.iterations,
        mass: z,
        normalization: spec.rho().map_or(0.0, |rho| (rho / z).ln()),
        branch: spec.branch(),
        compatibility: spec.compatibility(),
        method: "finite_difference".into(),
    })
}

fn planar_system(spec: &ProblemSpec) -> Result<Planar> {
    let Domain::Grid(grid) = &spec.domain else {
        return Err(Error::Precondition("expected a grid domain".into()));
    };
    let k = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.position(i);
            spec.weight.value(x, y)
        })
        .collect();
    let f = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.position(i);
            spec.source.value(x, y)
        })
        .collect();
    Ok(Planar::new(
        grid.clone(),
        k,
        f,
        spec.rho(),
        spec.boundary.inner(),
        spec.boundary.outer(),
    ))
}

/// Damped Newton on the planar grid.
pub fn solve_2d(spec: &ProblemSpec, initial_guess: Option<&ScalarField2D>) -> Result<SolveReport> {
    spec.validate()?;
    let tol = spec.tolerance.unwrap_or(DEFAULT_GRID_TOLERANCE);
    if let Some(reason) = out_of_scope(spec) {
        return not_attempted(spec, reason, tol);
    }
    let sys = planar_system(spec)?;
    let x0 = match initial_guess {
        Some(u) => {
            let Domain::Grid(grid) = &spec.domain else { unreachable!() };
            if !u.grid().same_as(grid) {
                return Err(Error::GridMismatch("initial guess is on a different grid".into()));
            }
            sys.restrict(u.values())
        }
        None => vec![spec.boundary.outer(); sys.unknowns()],
    };
    let out = newton(
        &sys,
        x0,
        NewtonOptions {
            tolerance: tol,
            max_iterations: spec.max_iterations,
            max_halvings: 30,
        },
    );
    let u = sys.expand(&out.x);
    let z = sys.normalisation(&u);
    let status = status_from(out.status, spec, out.residual, out.iterations);
    Ok(SolveReport {
        solution: AnyField::Grid(sys.field(&out.x)),
        converged: converged(&status),
        status,
        residual: out.residual,
        tolerance: tol.max(out.floor),
        iterations: out.iterations,
        mass: z,
        normalization: spec.rho().map_or(0.0, |rho| (rho / z).ln()),
        branch: spec.branch(),
        compatibility: spec.compatibility(),
        method: "newton_2d".into(),
    })
}

/// Max-norm of the discrete operator applied to `u`.
///
/// Radial fields are measured with the second-order finite-volume operator
/// (trapezoid normalisation); grid fields with the planar stencil. Dirichlet
/// rows contribute `|u − g|`.
pub fn residual(spec: &ProblemSpec, u: &AnyField) -> Result<f64> {
    match (&spec.domain, u) {
        (Domain::Radial(mesh), AnyField::Radial(f)) => {
            if f.mesh().as_ref() != mesh.as_ref() {
                return Err(Error::GridMismatch("field is on a different mesh".into()));
            }
            let sys = radial_fd_system(spec, mesh);
            Ok(newton::max_norm(&sys.full_residual(f.values())))
        }
        (Domain::Grid(grid), AnyField::Grid(f)) => {
            if !f.grid().same_as(grid) {
                return Err(Error::GridMismatch("field is on a different grid".into()));
            }
            let sys = planar_system(spec)?;
            Ok(newton::max_norm(&sys.residual(&sys.restrict(f.values()))))
        }
        _ => Err(Error::GridMismatch("field and domain kinds differ".into())),
    }
}

/// Result of a continuation run; `reports` stops at the first failure.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub rho: Vec<f64>,
    pub reports: Vec<SolveReport>,
    pub truncated: bool,
}

impl Sweep {
    pub fn u_max(&self) -> Vec<f64> {
        self.reports.iter().map(SolveReport::u_max).collect()
    }
}

/// Solve along increasing ρ, warm-starting each solve from the previous one.
pub fn continuation_sweep(template: &ProblemSpec, rho_values: &[f64]) -> Result<Sweep> {
    if rho_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(crate::error::invalid("rho_values", "must be strictly increasing"));
    }
    let mut reports: Vec<SolveReport> = Vec::new();
    let mut truncated = false;
    for &rho in rho_values {
        let spec = template.with_rho(rho);
        let guess = reports.last().map(|r| r.solution.clone());
        let rep = solve(&spec, guess.as_ref())?;
        let ok = rep.converged;
        reports.push(rep);
        if !ok {
            truncated = true;
            break;
        }
    }
    Ok(Sweep {
        rho: rho_values[..reports.len()].to_vec(),
        reports,
        truncated,
    })
}

/// Exact centre value on the unit disc with K ≡ 1, f ≡ 0, g ≡ 0:
/// `u(0) = 2 ln(1 + λ²/8)` with `λ² = 8ρ/(8π − ρ)`.
pub fn exact_center_value(rho: f64) -> f64 {
    let lam2 = 8.0 * rho / (EIGHT_PI - rho);
    2.0 * (1.0 + lam2 / 8.0).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::BubbleParam;
    use std::f64::consts::PI;

    /// Exact disc solution `U_λ(r) − U_λ(1)` with `λ² = 8ρ/(8π − ρ)`.
    fn exact(rho: f64, r: f64) -> f64 {
        let p = BubbleParam::new((8.0 * rho / (EIGHT_PI - rho)).sqrt()).unwrap();
        p.value(r) - p.value(1.0)
    }

    #[test]
    fn shooting_recovers_exact_family() {
        for rho in [2.0 * PI, 4.0 * PI, 7.0 * PI] {
            let spec = ProblemSpec::radial_disc(1.0, 1025, rho).unwrap();
            let rep = solve_radial(&spec).unwrap();
            assert!(rep.converged, "{:?}", rep.status);
            let u = rep.radial().unwrap();
            let err = u
                .nodes()
                .iter()
                .zip(u.values())
                .map(|(&r, &v)| (v - exact(rho, r)).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "rho {rho}: {err}");
            assert!((rep.normalized_mass() - rho).abs() < 1e-9 * rho);
        }
    }

    #[test]
    fn supercritical_mean_field_is_out_of_scope() {
        let spec = ProblemSpec::radial_disc(1.0, 64, 9.0 * PI).unwrap();
        let rep = solve_radial(&spec).unwrap();
        assert!(!rep.converged);
        assert!(matches!(rep.status, SolveStatus::OutOfScope { .. }));
        assert_eq!(rep.branch, Branch::Supercritical);
    }

    #[test]
    fn critical_disc_does_not_converge() {
        let spec = ProblemSpec::radial_disc(1.0, 256, EIGHT_PI).unwrap();
        let rep = solve_radial(&spec).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.branch, Branch::Critical);
    }

    #[test]
    fn finite_differences_agree_with_shooting() {
        let spec = ProblemSpec::radial_disc(1.0, 801, 4.0 * PI).unwrap();
        let fd = solve_radial(&spec.clone().with_method(RadialMethod::FiniteDifference)).unwrap();
        assert!(fd.converged, "{:?}", fd.status);
        let u = fd.radial().unwrap();
        let err = u
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(&r, &v)| (v - exact(4.0 * PI, r)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert!(residual(&spec, &fd.solution).unwrap() <= fd.tolerance);
    }

    #[test]
    fn residual_of_zero_field() {
        let spec = ProblemSpec::radial_disc(1.0, 200, 4.0 * PI).unwrap();
        let mesh = radial_mesh(&spec).unwrap().clone();
        let zero = AnyField::Radial(RadialField::constant(mesh, 0.0).unwrap());
        let r = residual(&spec, &zero).unwrap();
        // trapezoid on 2πr is exact for the area of the disc
        assert!((r - 4.0).abs() < 1e-12, "{r}");

        let grid = ProblemSpec::grid_disc(1.0, 33, 4.0 * PI).unwrap();
        let Domain::Grid(g) = &grid.domain else { unreachable!() };
        let zero = AnyField::Grid(ScalarField2D::from_fn(g.clone(), |_, _| 0.0).unwrap());
        assert!((residual(&grid, &zero).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn liouville_initial_value_is_the_bubble() {
        let spec = ProblemSpec::liouville(Domain::Radial(Arc::new(
            RadialMesh::uniform(0.0, 2.0, 800).unwrap(),
        )));
        let p = BubbleParam::new(2.5).unwrap();
        let w = integrate_initial_value(&spec, 2.0 * 2.5f64.ln()).unwrap().unwrap();
        for (&r, &v) in w.nodes().iter().zip(w.values()) {
            assert!((v - p.value(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn liouville_boundary_problem_picks_small_branch() {
        // Δu + e^u = 0, u(1) = 0 has the two solutions U_λ − U_λ(1) with λ = 4 ∓ 2√2
        let spec = ProblemSpec::liouville(Domain::Radial(Arc::new(
            RadialMesh::uniform(0.0, 1.0, 513).unwrap(),
        )));
        let rep = solve_radial(&spec).unwrap();
        assert!(rep.converged);
        let lam = 4.0 - 2.0 * 2f64.sqrt();
        assert!((rep.center_value().unwrap() - 2.0 * lam.ln()).abs() < 1e-9);
    }

    #[test]
    fn small_planar_solve_converges() {
        let spec = ProblemSpec::grid_disc(1.0, 33, 2.0 * PI).unwrap();
        let rep = solve_2d(&spec, None).unwrap();
        assert!(rep.converged, "{:?}", rep.status);
        assert!(rep.residual <= rep.tolerance);
        assert!((rep.normalized_mass() - 2.0 * PI).abs() < 1e-10);
        let c = rep.center_value().unwrap();
        assert!((c - exact_center_value(2.0 * PI)).abs() < 2e-2, "{c}");
    }

    #[test]
    fn sweep_tracks_exact_branch() {
        let spec = ProblemSpec::radial_disc(1.0, 513, PI).unwrap();
        let rhos: Vec<f64> = (1..=7).map(|k| k as f64 * PI).collect();
        let sweep = continuation_sweep(&spec, &rhos).unwrap();
        assert!(!sweep.truncated);
        for (rho, umax) in sweep.rho.iter().zip(sweep.u_max()) {
            assert!((umax - exact_center_value(*rho)).abs() < 1e-8);
        }
        assert!(continuation_sweep(&spec, &[2.0, 1.0]).is_err());
    }
}
