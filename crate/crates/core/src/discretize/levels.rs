//! Superlevel-set quantities shared by radial and planar fields.
//!
//! For a pair `(u, φ)` and a threshold `t` we need the weighted mass
//! `a(t) = ∫_{φ>t} e^u`, the gradient integrals `J(t) = ∫_{φ>t} |∇φ|` and
//! `j(t) = ∫_{φ>t} |∇φ|²`, line integrals over `{φ = t}` and the topology of
//! `{φ > t}`. [`LevelField`] abstracts over the two discretisations so that
//! profiles, rearrangements and Bol checks can be written once.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::contour::{grid_contour, Contour};
use super::grid::{square_fraction_above, ScalarField2D};
use super::operators::{self, LaplacianSample};
use super::radial::RadialField;
use super::spline::Hermite;
use super::topology::{grid_topology, Topology};
use crate::error::{invalid, Result};

/// Per-threshold queries on a prepared `(u, φ)` pair.
pub trait LevelQuery {
    /// `a(t) = ∫_{φ>t} e^u`.
    fn mass(&self, t: f64) -> f64;
    fn contour(&self, t: f64) -> Contour;
    /// `(J(t), j(t))`.
    fn gradient_integrals(&self, t: f64) -> (f64, f64);
    fn topology(&self, t: f64) -> Topology;
    /// `(min φ, max φ)` over the closed domain.
    fn range(&self) -> (f64, f64);
}

pub trait LevelField: Sized {
    type Levels: LevelQuery;

    /// Prepare `(u, φ)` for repeated threshold queries; fails on mismatched meshes.
    fn levels(u: &Self, phi: &Self) -> Result<Self::Levels>;

    /// `∫ e^u` over the whole domain.
    fn weighted_mass(&self) -> f64;

    /// Node values that lie in the domain, used to place thresholds.
    fn level_samples(&self) -> Vec<f64>;

    /// Every stored sample, indexed as [`LaplacianSample::index`].
    fn samples(&self) -> &[f64];

    /// Characteristic mesh spacing.
    fn spacing(&self) -> f64;

    /// Discrete Laplacian wherever the stencil fits inside the domain.
    fn laplacian(&self) -> Vec<LaplacianSample>;

    /// Samples of the field on ∂Ω.
    fn boundary_trace(&self) -> Vec<f64>;

    /// Spread of [`boundary_trace`](Self::boundary_trace) that still counts as constant.
    fn boundary_tolerance(&self) -> f64;

    /// Whether `{φ = t}` contains a whole mesh edge.
    fn is_plateau(&self, t: f64) -> bool;

    /// Pointwise combination of two fields on the same mesh.
    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self>;

    /// A field on the same mesh with value `f(|y|)`.
    fn radial_like(&self, f: impl Fn(f64) -> f64) -> Result<Self>;

    /// Inner and outer radius of the domain (inner is 0 on a disc).
    fn domain_radii(&self) -> (f64, f64);
}

pub fn weighted_mass<F: LevelField>(u: &F) -> f64 {
    u.weighted_mass()
}

pub fn superlevel_mass<F: LevelField>(u: &F, phi: &F, t: f64) -> Result<f64> {
    Ok(F::levels(u, phi)?.mass(t))
}

/// `(∫_{φ=t} e^{u/2} ds, ∫_{φ=t} |∇φ| ds)`; both vanish outside the range of φ.
pub fn contour_integrals<F: LevelField>(u: &F, phi: &F, t: f64) -> Result<(f64, f64)> {
    let c = F::levels(u, phi)?.contour(t);
    Ok((c.weighted_length, c.flux))
}

pub fn level_topology<F: LevelField>(phi: &F, t: f64) -> Result<Topology> {
    Ok(F::levels(phi, phi)?.topology(t))
}

// ---------------------------------------------------------------------------
// radial fields

/// Radial `(u, φ)` pair with the splines needed for level queries.
#[derive(Clone, Debug)]
pub struct RadialLevels {
    u: RadialField,
    phi: RadialField,
    mass_density: Hermite,
    grad_density: Hermite,
    grad2_density: Hermite,
}

impl RadialLevels {
    /// Maximal intervals of `{φ > t}` in `[r_0, R]`.
    pub fn intervals(&self, t: f64) -> Vec<(f64, f64)> {
        superlevel_intervals(&self.phi, t)
    }

    pub fn u(&self) -> &RadialField {
        &self.u
    }

    pub fn phi(&self) -> &RadialField {
        &self.phi
    }
}

/// Maximal intervals of `{φ > t}` for a radial field, located on its spline.
pub fn superlevel_intervals(phi: &RadialField, t: f64) -> Vec<(f64, f64)> {
    let r = phi.nodes();
    let mut out = Vec::new();
    let mut open = if phi.first() > t { Some(r[0]) } else { None };
    for c in phi.spline().crossings(t) {
        match open.take() {
            Some(a) => out.push((a, c.radius)),
            None => open = Some(c.radius),
        }
    }
    if let Some(a) = open {
        out.push((a, r[r.len() - 1]));
    }
    out
}

impl LevelQuery for RadialLevels {
    fn mass(&self, t: f64) -> f64 {
        self.intervals(t)
            .into_iter()
            .map(|(a, b)| self.mass_density.integrate(a, b))
            .sum()
    }

    fn contour(&self, t: f64) -> Contour {
        let mut c = Contour::default();
        let (r0, r1) = (self.phi.nodes()[0], *self.phi.nodes().last().unwrap());
        for x in self.phi.spline().crossings(t) {
            let r = x.radius;
            if r <= r0 || r >= r1 {
                continue;
            }
            let len = 2.0 * PI * r;
            let uu = self.u.spline().eval_in(x.cell, r);
            let g = self.phi.spline().derivative_in(x.cell, r).abs();
            c.length += len;
            c.weighted_length += len * (0.5 * uu).exp();
            c.flux += len * g;
            if g > 0.0 {
                c.inverse_flux += len * uu.exp() / g;
            }
        }
        c
    }

    fn gradient_integrals(&self, t: f64) -> (f64, f64) {
        self.intervals(t).into_iter().fold((0.0, 0.0), |(j1, j2), (a, b)| {
            (
                j1 + self.grad_density.integrate(a, b),
                j2 + self.grad2_density.integrate(a, b),
            )
        })
    }

    /// An interval reaching the centre of a disc is a ball; every other
    /// interval is an annulus and encloses one hole.
    fn topology(&self, t: f64) -> Topology {
        let disc = self.phi.mesh().is_disc();
        let iv = self.intervals(t);
        let balls = iv.iter().filter(|(a, _)| disc && *a == 0.0).count();
        Topology {
            components: iv.len(),
            holes: iv.len() - balls,
        }
    }

    fn range(&self) -> (f64, f64) {
        (self.phi.min(), self.phi.max())
    }
}

impl LevelField for RadialField {
    type Levels = RadialLevels;

    fn levels(u: &Self, phi: &Self) -> Result<RadialLevels> {
        u.check_same_mesh(phi)?;
        let r = phi.nodes();
        let d = phi.slopes();
        let g1: Vec<f64> = r.iter().zip(d).map(|(&r, &d)| 2.0 * PI * r * d.abs()).collect();
        let g2: Vec<f64> = r.iter().zip(d).map(|(&r, &d)| 2.0 * PI * r * d * d).collect();
        Ok(RadialLevels {
            u: u.clone(),
            phi: phi.clone(),
            mass_density: u.mass_density(),
            grad_density: Hermite::new(r, &g1),
            grad2_density: Hermite::new(r, &g2),
        })
    }

    fn weighted_mass(&self) -> f64 {
        self.mass_density().total()
    }

    fn level_samples(&self) -> Vec<f64> {
        self.values().to_vec()
    }

    fn samples(&self) -> &[f64] {
        self.values()
    }

    fn spacing(&self) -> f64 {
        self.mesh().max_spacing()
    }

    fn laplacian(&self) -> Vec<LaplacianSample> {
        operators::radial_laplacian(self)
    }

    fn boundary_trace(&self) -> Vec<f64> {
        operators::radial_boundary_trace(self)
    }

    fn boundary_tolerance(&self) -> f64 {
        operators::radial_boundary_tolerance(self)
    }

    fn is_plateau(&self, t: f64) -> bool {
        operators::radial_is_plateau(self, t)
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.zip_map(other, f)
    }

    fn radial_like(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        RadialField::from_fn(self.mesh().clone(), f)
    }

    fn domain_radii(&self) -> (f64, f64) {
        (self.mesh().inner_radius(), self.mesh().outer_radius())
    }
}

// ---------------------------------------------------------------------------
// planar fields

#[derive(Clone, Debug)]
pub struct GridLevels {
    u: ScalarField2D,
    phi: ScalarField2D,
    grad: Vec<(f64, f64)>,
}

impl GridLevels {
    /// Fraction of node `k`'s dual cell on which the linearised φ exceeds `t`.
    fn fraction(&self, k: usize, t: f64) -> f64 {
        let (gx, gy) = self.grad[k];
        square_fraction_above(self.phi.values()[k] - t, gx, gy, self.phi.grid().spacing())
    }

    fn accumulate(&self, t: f64, integrand: impl Fn(usize) -> f64) -> f64 {
        let w = self.phi.grid().weights();
        (0..w.len())
            .filter(|&k| w[k] > 0.0)
            .map(|k| {
                let f = self.fraction(k, t);
                if f > 0.0 {
                    w[k] * f * integrand(k)
                } else {
                    0.0
                }
            })
            .sum()
    }
}

impl LevelQuery for GridLevels {
    fn mass(&self, t: f64) -> f64 {
        let u = self.u.values();
        self.accumulate(t, |k| u[k].exp())
    }

    fn contour(&self, t: f64) -> Contour {
        grid_contour(&self.u, &self.phi, t)
    }

    fn gradient_integrals(&self, t: f64) -> (f64, f64) {
        let g = |k: usize| self.grad[k].0.hypot(self.grad[k].1);
        (self.accumulate(t, g), self.accumulate(t, |k| g(k).powi(2)))
    }

    fn topology(&self, t: f64) -> Topology {
        grid_topology(&self.phi, t)
    }

    fn range(&self) -> (f64, f64) {
        self.phi.range_inside()
    }
}

impl LevelField for ScalarField2D {
    type Levels = GridLevels;

    fn levels(u: &Self, phi: &Self) -> Result<GridLevels> {
        u.check_same_grid(phi)?;
        Ok(GridLevels {
            u: u.clone(),
            phi: phi.clone(),
            grad: phi.gradient(),
        })
    }

    fn weighted_mass(&self) -> f64 {
        ScalarField2D::weighted_mass(self)
    }

    fn level_samples(&self) -> Vec<f64> {
        self.values()
            .iter()
            .zip(self.grid().weights())
            .filter(|(_, &w)| w > 0.0)
            .map(|(&v, _)| v)
            .collect()
    }

    fn samples(&self) -> &[f64] {
        self.values()
    }

    fn spacing(&self) -> f64 {
        self.grid().spacing()
    }

    fn laplacian(&self) -> Vec<LaplacianSample> {
        operators::grid_laplacian(self)
    }

    fn boundary_trace(&self) -> Vec<f64> {
        operators::grid_boundary_trace(self)
    }

    fn boundary_tolerance(&self) -> f64 {
        operators::grid_boundary_tolerance(self)
    }

    fn is_plateau(&self, t: f64) -> bool {
        operators::grid_is_plateau(self, t)
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.zip_map(other, f)
    }

    fn radial_like(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        ScalarField2D::radial(self.grid().clone(), f)
    }

    fn domain_radii(&self) -> (f64, f64) {
        let shape = self.grid().shape();
        (shape.inner(), shape.outer())
    }
}

// ---------------------------------------------------------------------------
// thresholds and profiles

/// Up to `n` thresholds strictly between the smallest and largest sample,
/// each placed halfway between two consecutive distinct sample values so that
/// no threshold coincides with a sampled plateau. Returned in decreasing order;
/// empty when the samples are constant.
pub fn plateau_free_thresholds(samples: &[f64], n: usize) -> Vec<f64> {
    let mut s: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 2 || n == 0 {
        return Vec::new();
    }
    let gaps = s.len() - 1;
    let mut idx: Vec<usize> = (0..n)
        .map(|k| {
            let q = (k as f64 + 0.5) / n as f64;
            ((q * gaps as f64).floor() as usize).min(gaps - 1)
        })
        .collect();
    idx.dedup();
    let mut t: Vec<f64> = idx.into_iter().map(|i| 0.5 * (s[i] + s[i + 1])).collect();
    t.reverse();
    t
}

/// Uniformly spaced thresholds strictly inside `(lo, hi)`, decreasing, nudged
/// off any sample value they land on.
pub fn uniform_thresholds(samples: &[f64], n: usize) -> Vec<f64> {
    let mut s: Vec<f64> = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 2 || n == 0 {
        return Vec::new();
    }
    let (lo, hi) = (s[0], s[s.len() - 1]);
    (0..n)
        .rev()
        .map(|k| {
            let t = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
            // move off a sample onto the midpoint of the adjacent gap
            match s.binary_search_by(|v| v.total_cmp(&t)) {
                Ok(i) if i + 1 < s.len() => 0.5 * (s[i] + s[i + 1]),
                Ok(i) => 0.5 * (s[i - 1] + s[i]),
                Err(_) => t,
            }
        })
        .collect()
}

/// One threshold's worth of level-set data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub t: f64,
    pub mass: f64,
    pub big_j: f64,
    pub small_j: f64,
    pub contour: Contour,
    pub topology: Topology,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    /// Decreasing thresholds.
    pub levels: Vec<LevelRecord>,
    /// φ is constant; `levels` then holds the single value of φ with full mass.
    pub degenerate: bool,
}

impl LevelProfile {
    pub fn thresholds(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.t).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.mass).collect()
    }

    /// Largest violation of the monotonicity of `a`, `J` and `j` along the
    /// decreasing threshold array (0 when all three are non-decreasing).
    pub fn monotonicity_defect(&self) -> f64 {
        self.levels
            .windows(2)
            .map(|w| {
                (w[0].mass - w[1].mass)
                    .max(w[0].big_j - w[1].big_j)
                    .max(w[0].small_j - w[1].small_j)
                    .max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

pub fn evaluate_level<Q: LevelQuery>(q: &Q, t: f64) -> LevelRecord {
    let (big_j, small_j) = q.gradient_integrals(t);
    LevelRecord {
        t,
        mass: q.mass(t),
        big_j,
        small_j,
        contour: q.contour(t),
        topology: q.topology(t),
    }
}

/// Level data at `n_levels` plateau-free thresholds of φ.
pub fn build_profile<F: LevelField>(u: &F, phi: &F, n_levels: usize) -> Result<LevelProfile> {
    if n_levels < 2 {
        return Err(invalid("n_levels", format!("need at least 2 levels, got {n_levels}")));
    }
    let q = F::levels(u, phi)?;
    let thresholds = plateau_free_thresholds(&phi.level_samples(), n_levels);
    if thresholds.is_empty() {
        let (_, hi) = q.range();
        return Ok(LevelProfile {
            levels: vec![LevelRecord {
                t: hi,
                mass: u.weighted_mass(),
                big_j: 0.0,
                small_j: 0.0,
                contour: Contour::default(),
                topology: Topology::default(),
            }],
            degenerate: true,
        });
    }
    let mut levels: Vec<LevelRecord> = thresholds.iter().map(|&t| evaluate_level(&q, t)).collect();
    // Quadrature noise can break monotonicity by round-off; the defined
    // quantities are monotone, so clamp running maxima.
    for k in 1..levels.len() {
        let prev = levels[k - 1];
        let cur = &mut levels[k];
        cur.mass = cur.mass.max(prev.mass);
        cur.big_j = cur.big_j.max(prev.big_j);
        cur.small_j = cur.small_j.max(prev.small_j);
    }
    Ok(LevelProfile {
        levels,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::BubbleParam;
    use crate::discretize::grid::Grid2D;
    use crate::discretize::radial::RadialMesh;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn disc_mesh(n: usize) -> Arc<RadialMesh> {
        Arc::new(RadialMesh::uniform(0.0, 1.0, n).unwrap())
    }

    #[test]
    fn radial_superlevel_mass_of_a_ball() {
        let m = disc_mesh(2049);
        let p = BubbleParam::new(1.0).unwrap();
        let u = RadialField::bubble(m.clone(), p).unwrap();
        let phi = RadialField::from_fn(m, |r| -r).unwrap();
        let a = superlevel_mass(&u, &phi, -0.5).unwrap();
        assert_relative_eq!(a, p.ball_mass(0.5), max_relative = 1e-10);
        assert_eq!(superlevel_mass(&u, &phi, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            superlevel_mass(&u, &phi, -2.0).unwrap(),
            weighted_mass(&u),
            max_relative = 1e-14
        );
    }

    #[test]
    fn radial_contour_matches_boundary_weight() {
        let m = disc_mesh(4096);
        let p = BubbleParam::new(3.0).unwrap();
        let u = RadialField::bubble(m, p).unwrap();
        for r in [0.1, 0.37, 0.8] {
            let (wl, flux) = contour_integrals(&u, &u, p.value(r)).unwrap();
            assert_relative_eq!(wl, p.boundary_weight(r), epsilon = 1e-8);
            // equality case of the differential condition
            assert_relative_eq!(flux, p.ball_mass(r), max_relative = 1e-7);
        }
        assert_eq!(contour_integrals(&u, &u, 100.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn radial_topology_of_intervals() {
        let m = disc_mesh(201);
        let ball = RadialField::from_fn(m.clone(), |r| -r).unwrap();
        assert_eq!(level_topology(&ball, -0.3).unwrap(), Topology { components: 1, holes: 0 });
        let ring = RadialField::from_fn(m, |r| -(r - 0.5).abs()).unwrap();
        assert_eq!(level_topology(&ring, -0.2).unwrap(), Topology { components: 1, holes: 1 });
    }

    #[test]
    fn thresholds_avoid_samples() {
        let s = [0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 5.0];
        let t = plateau_free_thresholds(&s, 10);
        assert!(t.windows(2).all(|w| w[0] > w[1]));
        for x in &t {
            assert!(!s.contains(x));
            assert!(*x > 0.0 && *x < 5.0);
        }
        assert!(plateau_free_thresholds(&[3.0; 8], 5).is_empty());
        let u = uniform_thresholds(&s, 4);
        assert_eq!(u.len(), 4);
        assert!(u.iter().all(|x| !s.contains(x)));
    }

    #[test]
    fn constant_phi_profile_is_degenerate() {
        let m = disc_mesh(64);
        let u = RadialField::constant(m.clone(), 0.0).unwrap();
        let phi = RadialField::constant(m, 2.0).unwrap();
        let p = build_profile(&u, &phi, 10).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.levels.len(), 1);
        assert_relative_eq!(p.levels[0].mass, PI, max_relative = 1e-12);
        assert!(build_profile(&u, &phi, 1).is_err());
    }

    #[test]
    fn grid_superlevel_mass_and_gradients() {
        let g = Arc::new(Grid2D::disc(1.0, 201).unwrap());
        let u = ScalarField2D::from_fn(g.clone(), |_, _| 0.0).unwrap();
        let phi = ScalarField2D::radial(g.clone(), |r| 1.0 - r * r).unwrap();
        let q = ScalarField2D::levels(&u, &phi).unwrap();
        // {1 − r² > 0.75} is the disc of radius 1/2
        assert_relative_eq!(q.mass(0.75), PI / 4.0, max_relative = 2e-3);
        let (big_j, small_j) = q.gradient_integrals(0.75);
        // ∫_{B_½} 2r = 2π/12 and ∫ 4r² = π/8
        assert_relative_eq!(big_j, PI / 6.0, max_relative = 5e-3);
        assert_relative_eq!(small_j, PI / 8.0, max_relative = 5e-3);
        let five = ScalarField2D::from_fn(g, |_, _| 5.0).unwrap();
        assert_relative_eq!(superlevel_mass(&u, &five, 4.0).unwrap(), PI, max_relative = 1e-12);
        assert_eq!(superlevel_mass(&u, &five, 6.0).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_meshes_are_rejected() {
        let u = RadialField::constant(disc_mesh(32), 0.0).unwrap();
        let phi = RadialField::constant(disc_mesh(33), 0.0).unwrap();
        assert!(superlevel_mass(&u, &phi, 0.0).is_err());
    }
}
