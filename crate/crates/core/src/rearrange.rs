//! Equimeasurable rearrangement onto balls measured by a bubble.
//!
//! Given a source density `e^u` on Ω and a function φ that is constant on ∂Ω,
//! the rearrangement φ* is the radial non-increasing function on `B_R` whose
//! superlevel balls carry, under `e^{U_λ} dy`, the same mass as the superlevel
//! sets of φ under `e^u dy`. With `a(t) = ∫_{φ>t} e^u` the ball `{φ* > t}` has
//! radius `r(t)` solving `ball_mass(λ, r) = a(t)` in closed form, and
//! `φ*(r) = sup{t : a(t) > ball_mass(λ, r)}` is the generalised inverse.
//!
//! The result keeps a table `(t_k, a_k, r_k)` at plateau-free thresholds and
//! samples φ* on a uniform mesh of `[0, R]`. Between table rows φ* is the
//! piecewise-linear interpolant of `(r_k, t_k)`; when the source is cheap to
//! query, each mesh value is then refined by solving `a(t) = ball_mass(λ, r)`
//! inside the bracketing rows, which makes the map exact on radial inputs.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bubble::BubbleParam;
use crate::discretize::levels::{plateau_free_thresholds, superlevel_intervals, uniform_thresholds};
use crate::discretize::{LevelField, LevelQuery, RadialField, RadialMesh};
use crate::error::{invalid, Error, Result};

/// Default number of tabulated thresholds.
pub const DEFAULT_THRESHOLDS: usize = 512;

/// Refinement is skipped when `samples × mesh nodes` exceeds this.
const REFINE_BUDGET: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RearrangeOptions {
    pub thresholds: usize,
    /// Allowed relative gap between `∫ e^u` and `ball_mass(λ, R)`.
    pub mass_rtol: f64,
    /// Allowed spread of φ on ∂Ω; `None` uses the field's sampling tolerance.
    pub boundary_tolerance: Option<f64>,
    /// Nodes of the mesh carrying φ*; `None` picks one from the input.
    pub nodes: Option<usize>,
    /// Solve for φ* at every node instead of interpolating the table; `None` decides by cost.
    pub refine: Option<bool>,
}

impl Default for RearrangeOptions {
    fn default() -> Self {
        Self {
            thresholds: DEFAULT_THRESHOLDS,
            mass_rtol: 1e-6,
            boundary_tolerance: None,
            nodes: None,
            refine: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub t: f64,
    /// `a(t) = ∫_{φ>t} e^u`.
    pub mass: f64,
    /// Radius of `{φ* > t}`.
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct RearrangementResult {
    pub phi_star: RadialField,
    /// Rows ordered by decreasing `t` (increasing radius), including the
    /// endpoints `(max φ, 0, 0)` and `(min φ, ∫e^u, R)`.
    pub table: Vec<ThresholdRow>,
    pub lambda: BubbleParam,
    pub radius: f64,
    /// Largest `|∫_{φ*>t_k} e^{U_λ} − a_k|` over the table, relative to `ball_mass(λ, R)`.
    pub defect: f64,
    pub source_mass: f64,
    /// Mean of φ on ∂Ω and the spread of its samples there.
    pub boundary_value: f64,
    pub boundary_spread: f64,
    pub boundary_tolerance: f64,
    pub refined: bool,
    /// φ is constant, so φ* is that constant.
    pub degenerate: bool,
}

/// Serializable summary of a [`RearrangementResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RearrangementMeta {
    pub schema_version: u32,
    pub lambda: f64,
    pub radius: f64,
    pub defect: f64,
    pub thresholds: usize,
    pub source_mass: f64,
    pub boundary_value: f64,
    pub boundary_spread: f64,
    pub boundary_tolerance: f64,
    pub refined: bool,
    pub degenerate: bool,
}

impl RearrangementResult {
    pub fn meta(&self) -> RearrangementMeta {
        RearrangementMeta {
            schema_version: crate::discretize::io::SCHEMA_VERSION,
            lambda: self.lambda.lambda(),
            radius: self.radius,
            defect: self.defect,
            thresholds: self.table.len(),
            source_mass: self.source_mass,
            boundary_value: self.boundary_value,
            boundary_spread: self.boundary_spread,
            boundary_tolerance: self.boundary_tolerance,
            refined: self.refined,
            degenerate: self.degenerate,
        }
    }

    /// `∫_{φ*>t} e^{U_λ}`, summed over the superlevel intervals of φ*.
    pub fn target_mass(&self, t: f64) -> f64 {
        superlevel_intervals(&self.phi_star, t)
            .into_iter()
            .map(|(a, b)| self.lambda.ball_mass(b) - self.lambda.ball_mass(a))
            .sum()
    }

    /// Radius of the ball `{φ* > t}` (0 above the maximum, `R` below the minimum).
    pub fn level_radius(&self, t: f64) -> f64 {
        superlevel_intervals(&self.phi_star, t)
            .last()
            .map_or(0.0, |&(_, b)| b)
    }
}

/// Rearrange `phi` with respect to `e^u dy` and `e^{U_λ} dy` on `B_R`.
pub fn rearrange<F: LevelField>(
    phi: &F,
    u: &F,
    lambda: BubbleParam,
    radius: f64,
) -> Result<RearrangementResult> {
    rearrange_with(phi, u, lambda, radius, &RearrangeOptions::default())
}

pub fn rearrange_with<F: LevelField>(
    phi: &F,
    u: &F,
    lambda: BubbleParam,
    radius: f64,
    opts: &RearrangeOptions,
) -> Result<RearrangementResult> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius", format!("must be positive and finite, got {radius}")));
    }
    if opts.thresholds < 2 {
        return Err(invalid("thresholds", "need at least 2"));
    }
    let source_mass = u.weighted_mass();
    let target = lambda.ball_mass(radius);
    let gap = (source_mass - target).abs() / target;
    if gap > opts.mass_rtol {
        return Err(Error::Precondition(format!(
            "∫e^u = {source_mass:.10} but ball_mass(λ={}, R={radius}) = {target:.10} \
             (relative gap {gap:.2e} > {:.1e}); choose λ with lambda_from_ball_mass",
            lambda.lambda(),
            opts.mass_rtol
        )));
    }
    let trace = phi.boundary_trace();
    let (b_lo, b_hi) = trace
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let boundary_spread = b_hi - b_lo;
    let boundary_tolerance = opts.boundary_tolerance.unwrap_or_else(|| phi.boundary_tolerance());
    if boundary_spread > boundary_tolerance {
        return Err(Error::Precondition(format!(
            "φ is not constant on the boundary: spread {boundary_spread:.3e} exceeds {boundary_tolerance:.3e}"
        )));
    }
    let boundary_value = trace.iter().sum::<f64>() / trace.len() as f64;

    let q = F::levels(u, phi)?;
    let (lo, hi) = q.range();
    let samples = phi.level_samples();
    let nodes = opts.nodes.unwrap_or_else(|| default_nodes(samples.len()));
    let mesh = std::sync::Arc::new(RadialMesh::uniform(0.0, radius, nodes)?);
    let thresholds = plateau_free_thresholds(&samples, opts.thresholds);

    if thresholds.is_empty() {
        let phi_star = RadialField::constant(mesh, hi)?;
        return Ok(RearrangementResult {
            phi_star,
            table: vec![ThresholdRow {
                t: hi,
                mass: source_mass,
                radius,
            }],
            lambda,
            radius,
            defect: 0.0,
            source_mass,
            boundary_value,
            boundary_spread,
            boundary_tolerance,
            refined: false,
            degenerate: true,
        });
    }

    let radius_of = |a: f64| -> f64 {
        lambda
            .radius_for_ball_mass(a.clamp(0.0, target))
            .map_or(radius, |r| r.min(radius))
    };
    let mut table = Vec::with_capacity(thresholds.len() + 2);
    table.push(ThresholdRow {
        t: hi,
        mass: 0.0,
        radius: 0.0,
    });
    let mut running = 0.0f64;
    for &t in &thresholds {
        running = running.max(q.mass(t));
        table.push(ThresholdRow {
            t,
            mass: running,
            radius: radius_of(running),
        });
    }
    table.push(ThresholdRow {
        t: lo,
        mass: source_mass,
        radius,
    });

    let refined = opts
        .refine
        .unwrap_or(samples.len() as f64 * nodes as f64 <= REFINE_BUDGET);
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let mut values: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|&r| {
            if r <= 0.0 {
                return hi;
            }
            if r >= radius {
                return lo;
            }
            let m = lambda.ball_mass(r);
            // rows k, k+1 with radius_k ≤ r ≤ radius_{k+1}
            let k = table.partition_point(|row| row.radius <= r).clamp(1, table.len() - 1) - 1;
            let (a, b) = (table[k], table[k + 1]);
            let pl = if b.radius > a.radius {
                a.t + (r - a.radius) * (b.t - a.t) / (b.radius - a.radius)
            } else {
                a.t
            };
            if refined {
                invert_mass(&q, m, b.t, a.t, source_mass, scale).unwrap_or(pl)
            } else {
                pl
            }
        })
        .collect();
    for i in 1..values.len() {
        values[i] = values[i].min(values[i - 1]);
    }
    let phi_star = RadialField::new(mesh, values)?;

    let mut result = RearrangementResult {
        phi_star,
        table,
        lambda,
        radius,
        defect: 0.0,
        source_mass,
        boundary_value,
        boundary_spread,
        boundary_tolerance,
        refined,
        degenerate: false,
    };
    result.defect = result
        .table
        .iter()
        .map(|row| (result.target_mass(row.t) - row.mass).abs())
        .fold(0.0, f64::max)
        / target;
    Ok(result)
}

fn default_nodes(samples: usize) -> usize {
    // radial inputs keep their resolution; planar ones get about 4 nodes per grid line
    if samples <= 20_000 {
        samples.clamp(257, 8193)
    } else {
        4 * (samples as f64).sqrt() as usize + 1
    }
}

/// Solve `a(t) = m` for `t` in `[t_lo, t_hi]`, where `a(t_lo) ≥ m ≥ a(t_hi)`.
///
/// Returns the generalised inverse `sup{t : a(t) > m}`: where `a` jumps
/// across `m` the jump location is returned.
fn invert_mass<Q: LevelQuery>(q: &Q, m: f64, t_lo: f64, t_hi: f64, total: f64, scale: f64) -> Option<f64> {
    let g = |t: f64| q.mass(t) - m;
    let (mut a, mut b) = (t_lo, t_hi);
    let (mut ga, mut gb) = (g(a), g(b));
    if ga < 0.0 || gb > 0.0 {
        return None;
    }
    let f_tol = 1e-15 * total;
    let t_tol = 4.0 * f64::EPSILON * scale;
    if ga.abs() <= f_tol {
        return Some(a);
    }
    if gb.abs() <= f_tol {
        return Some(b);
    }
    // Illinois regula falsi with a bisection guard
    let mut side = 0i8;
    for _ in 0..100 {
        if b - a <= t_tol {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c);
        if gc.abs() <= f_tol {
            return Some(c);
        }
        if gc > 0.0 {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
        // fall back to bisection when the bracket shrinks slowly
        if (b - a) > 0.5 * (t_hi - t_lo) && side != 0 {
            let mid = 0.5 * (a + b);
            let gm = g(mid);
            if gm > 0.0 {
                a = mid;
                ga = gm;
            } else {
                b = mid;
                gb = gm;
            }
        }
    }
    Some(0.5 * (a + b))
}

/// Largest relative gap between source and target superlevel masses at `n`
/// uniformly spaced thresholds of φ (fresh ones, not the tabulated levels).
pub fn equimeasurability_defect<F: LevelField>(
    result: &RearrangementResult,
    phi: &F,
    u: &F,
    n: usize,
) -> Result<f64> {
    let q = F::levels(u, phi)?;
    let target = result.lambda.ball_mass(result.radius);
    Ok(uniform_thresholds(&phi.level_samples(), n)
        .into_iter()
        .map(|t| (result.target_mass(t) - q.mass(t)).abs() / target)
        .fold(0.0, f64::max))
}

/// Largest difference quotient of φ* between consecutive mesh nodes inside `[ε, R − ε]`.
pub fn lipschitz_diagnostic(result: &RearrangementResult, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5 * result.radius) {
        return Err(invalid(
            "epsilon",
            format!("must lie in (0, R/2) = (0, {}), got {epsilon}", 0.5 * result.radius),
        ));
    }
    let r = result.phi_star.nodes();
    let v = result.phi_star.values();
    let hi = result.radius - epsilon;
    Ok((0..r.len() - 1)
        .filter(|&i| r[i] >= epsilon && r[i + 1] <= hi)
        .map(|i| ((v[i + 1] - v[i]) / (r[i + 1] - r[i])).abs())
        .fold(0.0, f64::max))
}

/// Contour fluxes on `{φ = t}` and `{φ* = t}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxComparison {
    pub t: f64,
    /// `∫_{φ=t} |∇φ| ds`.
    pub source_flux: f64,
    /// `∫_{φ*=t} |∇φ*| ds`.
    pub target_flux: f64,
}

impl FluxComparison {
    pub fn gap(&self) -> f64 {
        self.source_flux - self.target_flux
    }

    pub fn as_pair(&self) -> (f64, f64) {
        (self.source_flux, self.target_flux)
    }
}

/// Compare `∫_{φ=t}|∇φ|` with `∫_{φ*=t}|∇φ*|`.
///
/// On the circle `{φ* = t}` of radius ρ the gradient of φ* is fixed by the
/// co-area formula for the common distribution function:
/// `−a'(t) = 2πρ e^{U_λ(ρ)} / |φ*'(ρ)|`, and `−a'(t) = ∫_{φ=t} e^u/|∇φ|` is
/// measured on the source contour. Hence the target flux is
/// `(2πρ)² e^{U_λ(ρ)} / (−a'(t))`.
pub fn gradient_comparison<F: LevelField>(
    phi: &F,
    u: &F,
    result: &RearrangementResult,
    t: f64,
) -> Result<FluxComparison> {
    if phi.is_plateau(t) {
        return Err(invalid("t", format!("{t} is a plateau value of φ")));
    }
    let q = F::levels(u, phi)?;
    let contour = q.contour(t);
    let rho = result.level_radius(t);
    let target_flux = if contour.inverse_flux > 0.0 && rho > 0.0 && rho < result.radius {
        (2.0 * PI * rho).powi(2) * result.lambda.density(rho) / contour.inverse_flux
    } else {
        0.0
    };
    Ok(FluxComparison {
        t,
        source_flux: contour.flux,
        target_flux,
    })
}

/// `ψ = U_λ + φ*` on the mesh of φ*.
pub fn supersolution_assemble(result: &RearrangementResult) -> Result<RadialField> {
    result.phi_star.map(|r, v| result.lambda.value(r) + v)
}

/// Write the threshold table as CSV with columns `t,mass,radius`.
pub fn write_table_csv(result: &RearrangementResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in &result.table {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_meta_json(result: &RearrangementResult, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&result.meta())?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::lambda_from_ball_mass;
    use crate::discretize::{Grid2D, ScalarField2D};
    use std::sync::Arc;

    fn mesh(n: usize) -> Arc<RadialMesh> {
        Arc::new(RadialMesh::uniform(0.0, 1.0, n).unwrap())
    }

    #[test]
    fn constant_phi_rearranges_to_the_constant() {
        let p = BubbleParam::new(1.0).unwrap();
        let u = RadialField::bubble(mesh(513), p).unwrap();
        let phi = RadialField::constant(mesh(513), 0.7).unwrap();
        let res = rearrange(&phi, &u, p, 1.0).unwrap();
        assert!(res.degenerate);
        assert!(res.phi_star.values().iter().all(|&v| v == 0.7));
        assert_eq!(lipschitz_diagnostic(&res, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn radial_decreasing_input_is_reproduced() {
        let p = BubbleParam::new(1.0).unwrap();
        let m = mesh(2049);
        let u = RadialField::bubble(m.clone(), p).unwrap();
        let phi = u.map(|_, v| v - p.value(1.0)).unwrap();
        let res = rearrange(&phi, &u, p, 1.0).unwrap();
        assert!(res.refined);
        let err = res
            .phi_star
            .values()
            .iter()
            .zip(phi.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        assert!(res.defect < 1e-9, "{}", res.defect);
    }

    #[test]
    fn table_and_interpolation_modes_agree() {
        let p = BubbleParam::new(1.5).unwrap();
        let m = mesh(1025);
        let u = RadialField::bubble(m.clone(), p).unwrap();
        let phi = RadialField::from_fn(m, |r| (3.0 * r).cos()).unwrap();
        let exact = rearrange(&phi, &u, p, 1.0).unwrap();
        let opts = RearrangeOptions {
            refine: Some(false),
            ..Default::default()
        };
        let table = rearrange_with(&phi, &u, p, 1.0, &opts).unwrap();
        let diff = exact
            .phi_star
            .values()
            .iter()
            .zip(table.phi_star.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-3, "{diff}");
        // φ has its maximum at the centre here and is already decreasing
        for w in exact.phi_star.values().windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn increasing_phi_is_reversed() {
        // φ = r² increases outward; φ* must put the top level at the centre
        let p = BubbleParam::new(2.0).unwrap();
        let m = mesh(1025);
        let u = RadialField::bubble(m.clone(), p).unwrap();
        let phi = RadialField::from_fn(m, |r| r * r).unwrap();
        let res = rearrange_with(
            &phi,
            &u,
            p,
            1.0,
            &RearrangeOptions {
                boundary_tolerance: Some(1e-9),
                ..Default::default()
            },
        )
        .unwrap();
        assert!((res.phi_star.first() - 1.0).abs() < 1e-12);
        assert!(res.phi_star.last().abs() < 1e-12);
        // {r² > t} = {√t < r < 1}, mass = ball(1) − ball(√t)
        for t in [0.1f64, 0.4, 0.8] {
            let exact = p.ball_mass(1.0) - p.ball_mass(t.sqrt());
            assert!((res.target_mass(t) - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn mass_mismatch_and_boundary_are_rejected() {
        let p = BubbleParam::new(1.0).unwrap();
        let m = mesh(257);
        let u = RadialField::bubble(m.clone(), p).unwrap();
        let phi = RadialField::from_fn(m.clone(), |r| -r).unwrap();
        let wrong = BubbleParam::new(1.01).unwrap();
        assert!(matches!(rearrange(&phi, &u, wrong, 1.0), Err(Error::Precondition(_))));

        let annulus = Arc::new(RadialMesh::uniform(0.5, 1.0, 257).unwrap());
        let ua = RadialField::bubble(annulus.clone(), p).unwrap();
        let lam = lambda_from_ball_mass(ua.weighted_mass(), 1.0).unwrap();
        let tilted = RadialField::from_fn(annulus, |r| r).unwrap();
        let err = rearrange(&tilted, &ua, lam, 1.0).unwrap_err().to_string();
        assert!(err.contains("boundary"), "{err}");
    }

    #[test]
    fn planar_rearrangement_matches_closed_form_masses() {
        // u constant with ∫e^u = ball_mass(λ,1), φ = 1 − |y|²: {φ>t} = B_{√(1−t)}
        let p = BubbleParam::new(2.0).unwrap();
        let grid = Arc::new(Grid2D::disc(1.0, 129).unwrap());
        let area: f64 = grid.weights().iter().sum();
        let c = (p.ball_mass(1.0) / area).ln();
        let u = ScalarField2D::from_fn(grid.clone(), |_, _| c).unwrap();
        let phi = ScalarField2D::radial(grid, |r| 1.0 - r * r).unwrap();
        let res = rearrange(&phi, &u, p, 1.0).unwrap();
        for k in 1..50 {
            let t = k as f64 / 50.0;
            let exact = PI * (1.0 - t) * c.exp();
            let rel = (res.target_mass(t) - exact).abs() / p.ball_mass(1.0);
            assert!(rel < 1e-3, "t={t} rel={rel}");
        }
        assert!(equimeasurability_defect(&res, &phi, &u, 200).unwrap() < 1e-3);
    }

    #[test]
    fn flux_comparison_is_tight_for_the_identity() {
        let p = BubbleParam::new(1.0).unwrap();
        let m = mesh(2049);
        let u = RadialField::bubble(m.clone(), p).unwrap();
        let phi = u.map(|_, v| v - p.value(1.0)).unwrap();
        let res = rearrange(&phi, &u, p, 1.0).unwrap();
        for t in [0.05, 0.1, 0.2] {
            let fc = gradient_comparison(&phi, &u, &res, t).unwrap();
            assert!(fc.source_flux > 0.0);
            assert!(fc.gap().abs() < 1e-4 * fc.source_flux, "{fc:?}");
        }
        let near_top = gradient_comparison(&phi, &u, &res, phi.max() - 1e-9).unwrap();
        assert!(near_top.source_flux < 1e-3 && near_top.target_flux < 1e-3);
    }

    #[test]
    fn assembled_supersolution_shifts_the_bubble() {
        let p = BubbleParam::new(1.0).unwrap();
        let m = mesh(257);
        let u = RadialField::bubble(m.clone(), p).unwrap();
        let phi = RadialField::constant(m, 0.0).unwrap();
        let res = rearrange(&phi, &u, p, 1.0).unwrap();
        let psi = supersolution_assemble(&res).unwrap();
        for (&r, &v) in psi.nodes().iter().zip(psi.values()) {
            assert!((v - p.value(r)).abs() < 1e-15);
        }
    }
}
