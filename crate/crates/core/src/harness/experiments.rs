//! Randomised uniqueness runs and continuation toward the critical mass.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bubble::{lambda_from_ball_mass, EIGHT_PI};
use crate::discretize::io::AnyField;
use crate::discretize::levels::superlevel_intervals;
use crate::discretize::{RadialField, ScalarField2D};
use crate::error::{invalid, Error, Result};
use crate::solver::{continuation_sweep, solve, Coefficient, Domain, Mode, ProblemSpec, SolveReport};

/// Sup-distance under which two converged solutions are the same.
pub const CLUSTER_TOLERANCE: f64 = 1e-5;

/// Highest mode index of the random initial fields.
const NOISE_MODES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: usize,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub cluster: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub schema_version: u32,
    pub rho: f64,
    pub seed: u64,
    pub starts: usize,
    pub converged: usize,
    /// Number of clusters among converged solutions.
    pub distinct: usize,
    /// Largest sup-distance between any two converged solutions.
    pub max_pairwise_distance: f64,
    pub cluster_tolerance: f64,
    pub outcomes: Vec<StartOutcome>,
}

/// Smooth random field of sup-norm 1 built from low cosine modes.
fn noise(rng: &mut ChaCha8Rng, domain: &Domain) -> Result<AnyField> {
    let r_out = domain.outer_radius();
    let n = NOISE_MODES + 1;
    let mut coef = vec![[0.0f64; 3]; n * n];
    for (k, c) in coef.iter_mut().enumerate() {
        let (p, q) = (k / n, k % n);
        let decay = 1.0 / (1.0 + (p + q) as f64);
        *c = [
            decay * rng.gen_range(-1.0..1.0),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..2.0 * PI),
        ];
    }
    let eval = |x: f64, y: f64| -> f64 {
        coef.iter()
            .enumerate()
            .map(|(k, c)| {
                let (p, q) = ((k / n) as f64, (k % n) as f64);
                c[0] * (p * PI * x / r_out + c[1]).cos() * (q * PI * y / r_out + c[2]).cos()
            })
            .sum()
    };
    match domain {
        Domain::Grid(g) => {
            let f = ScalarField2D::from_fn(g.clone(), eval)?;
            let peak = (0..g.len())
                .filter(|&k| g.inside()[k])
                .fold(0.0f64, |m, k| m.max(f.values()[k].abs()));
            Ok(AnyField::Grid(f.map(|v| v / peak.max(1e-300))?))
        }
        Domain::Radial(m) => {
            let f = RadialField::from_fn(m.clone(), |r| eval(r, 0.0))?;
            let peak = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(AnyField::Radial(f.map(|_, v| v / peak.max(1e-300))?))
        }
    }
}

/// Sup-distance over the samples that lie in the domain.
pub fn sup_distance(a: &AnyField, b: &AnyField) -> Result<f64> {
    match (a, b) {
        (AnyField::Radial(x), AnyField::Radial(y)) => Ok(x
            .values()
            .iter()
            .zip(y.values())
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))),
        (AnyField::Grid(x), AnyField::Grid(y)) => {
            let g = x.grid();
            Ok((0..g.len())
                .filter(|&k| g.inside()[k])
                .fold(0.0f64, |m, k| m.max((x.values()[k] - y.values()[k]).abs())))
        }
        _ => Err(Error::GridMismatch("cannot compare radial and planar fields".into())),
    }
}

/// Solve from `n_starts` seeded random initial fields and cluster the results.
///
/// Start `k` draws from its own ChaCha8 stream `k` under `seed`, so the
/// outcome does not depend on thread scheduling.
pub fn uniqueness_experiment(spec: &ProblemSpec, n_starts: usize, seed: u64) -> Result<UniquenessReport> {
    let rho = match spec.mode {
        Mode::MeanField { rho } if rho > 0.0 && rho < EIGHT_PI => rho,
        Mode::MeanField { rho } => return Err(invalid("rho", format!("{rho} is outside (0, 8π)"))),
        Mode::Liouville => return Err(invalid("spec", "the experiment runs in mean-field mode")),
    };
    if n_starts < 2 {
        return Err(invalid("n_starts", "need at least 2 starts"));
    }
    let g = spec.boundary.outer();
    let mut guesses = Vec::with_capacity(n_starts);
    for k in 0..n_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let eta = noise(&mut rng, &spec.domain)?;
        guesses.push(match eta {
            AnyField::Grid(f) => AnyField::Grid(f.map(|v| v + g)?),
            AnyField::Radial(f) => AnyField::Radial(f.map(|_, v| v + g)?),
        });
    }
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get()).min(n_starts);
    let mut results: Vec<Option<Result<SolveReport>>> = (0..n_starts).map(|_| None).collect();
    std::thread::scope(|s| {
        let chunks: Vec<_> = results
            .chunks_mut(n_starts.div_ceil(workers))
            .enumerate()
            .map(|(c, slot)| {
                let guesses = &guesses;
                s.spawn(move || {
                    let base = c * n_starts.div_ceil(workers);
                    for (j, out) in slot.iter_mut().enumerate() {
                        *out = Some(solve(spec, Some(&guesses[base + j])));
                    }
                })
            })
            .collect();
        for h in chunks {
            let _ = h.join();
        }
    });

    let mut reps: Vec<AnyField> = Vec::new();
    let mut solutions: Vec<(usize, AnyField)> = Vec::new();
    let mut outcomes = Vec::with_capacity(n_starts);
    for (k, res) in results.into_iter().enumerate() {
        let res = res.unwrap_or_else(|| Err(Error::Precondition("worker panicked".into())));
        match res {
            Ok(rep) if rep.converged => {
                let mut cluster = None;
                for (c, r) in reps.iter().enumerate() {
                    if sup_distance(r, &rep.solution)? <= CLUSTER_TOLERANCE {
                        cluster = Some(c);
                        break;
                    }
                }
                if cluster.is_none() {
                    reps.push(rep.solution.clone());
                    cluster = Some(reps.len() - 1);
                }
                outcomes.push(StartOutcome {
                    start: k,
                    converged: true,
                    iterations: rep.iterations,
                    residual: rep.residual,
                    cluster,
                    failure: None,
                });
                solutions.push((k, rep.solution));
            }
            Ok(rep) => outcomes.push(StartOutcome {
                start: k,
                converged: false,
                iterations: rep.iterations,
                residual: rep.residual,
                cluster: None,
                failure: Some(format!("{:?}", rep.status)),
            }),
            Err(e) => outcomes.push(StartOutcome {
                start: k,
                converged: false,
                iterations: 0,
                residual: f64::INFINITY,
                cluster: None,
                failure: Some(e.to_string()),
            }),
        }
    }
    let mut max_pairwise_distance = 0.0f64;
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            max_pairwise_distance = max_pairwise_distance.max(sup_distance(&solutions[i].1, &solutions[j].1)?);
        }
    }
    Ok(UniquenessReport {
        schema_version: crate::discretize::io::SCHEMA_VERSION,
        rho,
        seed,
        starts: n_starts,
        converged: solutions.len(),
        distinct: reps.len(),
        max_pairwise_distance,
        cluster_tolerance: CLUSTER_TOLERANCE,
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub rho: f64,
    pub u_max: f64,
    /// `2 ln(1 + λ²R²/8)` when the template is the plain disc problem.
    pub exact_u_max: Option<f64>,
    pub relative_error: Option<f64>,
    /// Radius of `{e^u > ½ max e^u}` (area-equivalent on grids).
    pub concentration_radius: f64,
    pub exact_concentration_radius: Option<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema_version: u32,
    pub rows: Vec<SweepRow>,
    /// A solve failed and later ε values were skipped.
    pub truncated: bool,
    pub u_max_increasing: bool,
}

impl SweepTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn plain_disc(spec: &ProblemSpec) -> bool {
    spec.domain.is_disc()
        && spec.weight == Coefficient::ONE
        && spec.source == Coefficient::ZERO
        && spec.boundary.outer() == 0.0
}

fn concentration_radius(u: &AnyField) -> f64 {
    match u {
        AnyField::Radial(f) => {
            let level = f.max() - 2f64.ln();
            superlevel_intervals(f, level).last().map_or(0.0, |&(_, b)| b)
        }
        AnyField::Grid(f) => {
            let g = f.grid();
            let level = f.range_inside().1 - 2f64.ln();
            let area: f64 = (0..g.len())
                .filter(|&k| g.inside()[k] && f.values()[k] > level)
                .map(|_| g.spacing() * g.spacing())
                .sum();
            (area / PI).sqrt()
        }
    }
}

/// Solve at `ρ = 8π(1 − ε)` for decreasing ε by continuation.
pub fn critical_sweep(template: &ProblemSpec, eps: &[f64]) -> Result<SweepTable> {
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(invalid("eps", "values must lie in (0, 1)"));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps", "values must be strictly decreasing"));
    }
    let rho: Vec<f64> = eps.iter().map(|e| EIGHT_PI * (1.0 - e)).collect();
    let sweep = continuation_sweep(template, &rho)?;
    let r_out = template.domain.outer_radius();
    let exact_ok = plain_disc(template);
    let mut rows = Vec::with_capacity(sweep.reports.len());
    for (k, rep) in sweep.reports.iter().enumerate() {
        if !rep.converged {
            break;
        }
        let lam = lambda_from_ball_mass(rho[k], r_out)?;
        let l = lam.lambda();
        let exact = exact_ok.then(|| 2.0 * (1.0 + l * l * r_out * r_out / 8.0).ln());
        let exact_conc = exact_ok.then(|| (8.0 * (2f64.sqrt() - 1.0)).sqrt() / l);
        let u_max = rep.u_max();
        rows.push(SweepRow {
            eps: eps[k],
            rho: rho[k],
            u_max,
            exact_u_max: exact,
            relative_error: exact.map(|e| (u_max - e).abs() / e),
            concentration_radius: concentration_radius(&rep.solution),
            exact_concentration_radius: exact_conc,
            iterations: rep.iterations,
        });
    }
    let u_max_increasing = rows.windows(2).all(|w| w[1].u_max > w[0].u_max);
    Ok(SweepTable {
        schema_version: crate::discretize::io::SCHEMA_VERSION,
        truncated: sweep.truncated || rows.len() < eps.len(),
        rows,
        u_max_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Grid2D, RadialMesh};
    use std::sync::Arc;

    #[test]
    fn noise_is_seeded_and_normalised() {
        let d = Domain::Grid(Arc::new(Grid2D::disc(1.0, 33).unwrap()));
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = (noise(&mut a, &d).unwrap(), noise(&mut b, &d).unwrap());
        assert_eq!(x, y);
        let AnyField::Grid(f) = x else { unreachable!() };
        let (lo, hi) = f.range_inside();
        assert!((lo.abs().max(hi.abs()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_mass_has_one_near_zero_solution() {
        let spec = ProblemSpec::grid_disc(1.0, 33, 0.1).unwrap();
        let rep = uniqueness_experiment(&spec, 5, 11).unwrap();
        assert_eq!(rep.converged, 5);
        assert_eq!(rep.distinct, 1);
        assert!(rep.max_pairwise_distance < CLUSTER_TOLERANCE);
    }

    #[test]
    fn reports_are_deterministic() {
        let spec = ProblemSpec::grid_disc(1.0, 33, 4.0 * PI).unwrap();
        let a = uniqueness_experiment(&spec, 4, 5).unwrap();
        let b = uniqueness_experiment(&spec, 4, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.distinct, 1);
    }

    #[test]
    fn experiment_preconditions() {
        let spec = ProblemSpec::grid_disc(1.0, 33, 9.0 * PI).unwrap();
        assert!(uniqueness_experiment(&spec, 4, 0).is_err());
        let spec = ProblemSpec::grid_disc(1.0, 33, PI).unwrap();
        assert!(uniqueness_experiment(&spec, 1, 0).is_err());
    }

    #[test]
    fn sweep_tracks_the_exact_family() {
        let spec = ProblemSpec::radial_disc(1.0, 4097, PI).unwrap();
        let table = critical_sweep(&spec, &[0.5, 0.25, 0.125, 0.0625]).unwrap();
        assert!(!table.truncated && table.u_max_increasing);
        assert!((table.rows[0].u_max - 2.0 * 2f64.ln()).abs() < 1e-6);
        assert!((table.rows[2].u_max - 6.0 * 2f64.ln()).abs() < 1e-6);
        for row in &table.rows {
            assert!(row.relative_error.unwrap() < 1e-3);
            let c = row.exact_concentration_radius.unwrap();
            assert!((row.concentration_radius - c).abs() < 1e-3 * c.max(1.0), "{row:?}");
        }
        assert!(critical_sweep(&spec, &[0.25, 0.5]).is_err());
        let _ = RadialMesh::uniform(0.0, 1.0, 9);
    }
}
