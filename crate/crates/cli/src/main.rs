//! `meanfield`: solve, check and compare mean-field / Liouville solutions from
//! the command line.
//!
//! Exit status: 0 when the run succeeds and every verdict holds, 2 when a
//! checked inequality is violated (or a solve or experiment gives a negative
//! answer), 1 for usage, input and precondition errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use meanfield::bol::{
    boundary_comparison, check_interior_bol, check_radial_exterior, check_radial_interior, BolReport, Verdict,
};
use meanfield::bubble::{BubbleParam, EIGHT_PI};
use meanfield::discretize::io::{load_field, save_field, AnyField};
use meanfield::discretize::{Grid2D, LevelField, RadialField, RadialMesh, Tail};
use meanfield::harness::{
    critical_sweep, run_oracle_suite, theorem_pipeline_with, uniqueness_experiment, PipelineOptions,
};
use meanfield::rearrange::{rearrange_with, write_meta_json, write_table_csv, RearrangeOptions};
use meanfield::solver::config::{parse_real, Config};
use meanfield::solver::{solve, Domain, ProblemSpec, SolveSummary};

#[derive(Parser, Debug)]
#[command(name = "meanfield", version, about = "Mean field equations, Bol inequalities and bubble rearrangements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a problem and write the solution, its Liouville shift and a report.
    Solve(SolveArgs),
    /// Check a Bol-type inequality on a stored field.
    VerifyBol(VerifyArgs),
    /// Rearrange φ against e^u into a radial profile φ* on B_R.
    Rearrange(RearrangeArgs),
    /// Run the two-solution comparison on a pair of Liouville solutions.
    Pipeline(PipelineArgs),
    /// Solve from seeded random starts and count distinct solutions.
    Uniqueness(UniquenessArgs),
    /// Continue a solution branch toward ρ = 8π.
    Sweep(SweepArgs),
    /// Run the closed-form bubble checks.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DomainKind {
    Disc,
    Annulus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mesh {
    Radial,
    Grid,
}

/// A problem given either as a TOML file or through flags.
#[derive(Args, Debug)]
struct ProblemArgs {
    /// TOML configuration; when present the problem flags below are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Total mass, e.g. 12.5, 4pi, 7π, 8pi/3.
    #[arg(long, value_parser = real)]
    rho: Option<f64>,
    #[arg(long, value_enum, default_value = "disc")]
    domain: DomainKind,
    /// Outer radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Inner radius of an annulus.
    #[arg(long, default_value_t = 0.5)]
    inner: f64,
    #[arg(long, value_enum, default_value = "radial")]
    mesh: Mesh,
    /// Radial nodes, or grid nodes per side (default 4096 and 129).
    #[arg(long)]
    nodes: Option<usize>,
}

fn real(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

struct Problem {
    spec: ProblemSpec,
    config: Option<Config>,
}

impl ProblemArgs {
    /// `rho_required` is false when the caller supplies its own ρ values.
    fn build(&self, rho_required: bool) -> Result<Problem> {
        if let Some(path) = &self.config {
            let config = Config::from_path(path)?;
            let mut spec = config.problem()?;
            if let Some(rho) = self.rho {
                spec = spec.with_rho(rho);
            }
            return Ok(Problem {
                spec,
                config: Some(config),
            });
        }
        let rho = match (self.rho, rho_required) {
            (Some(r), _) => r,
            (None, false) => 0.5 * EIGHT_PI,
            (None, true) => bail!("give --rho or --config"),
        };
        let domain = match self.mesh {
            Mesh::Radial => {
                let n = self.nodes.unwrap_or(4096);
                let inner = if self.domain == DomainKind::Disc { 0.0 } else { self.inner };
                Domain::Radial(Arc::new(RadialMesh::uniform(inner, self.radius, n)?))
            }
            Mesh::Grid => {
                let n = self.nodes.unwrap_or(129);
                Domain::Grid(Arc::new(match self.domain {
                    DomainKind::Disc => Grid2D::disc(self.radius, n)?,
                    DomainKind::Annulus => Grid2D::annulus(self.inner, self.radius, n)?,
                }))
            }
        };
        let spec = ProblemSpec::mean_field(domain, rho);
        spec.validate()?;
        Ok(Problem { spec, config: None })
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Output prefix: writes PREFIX.csv, PREFIX_liouville.csv and PREFIX_report.json.
    #[arg(long, default_value = "solution")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BolMode {
    /// Level sets {φ > t} of a field (φ defaults to the field itself).
    Interior,
    /// Decreasing radial profile outside B_R.
    Exterior,
    /// Decreasing radial profile on B_R.
    RadialInterior,
    /// ψ(R) against the bubble matched to the mass of ψ.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TailKind {
    None,
    PowerLaw,
    Bubble,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Field CSV (u, or ψ for the radial modes).
    #[arg(long)]
    field: PathBuf,
    #[arg(long, value_enum)]
    mode: BolMode,
    /// Level-set function for interior mode.
    #[arg(long)]
    phi: Option<PathBuf>,
    /// Explicit levels t for interior mode (comma separated).
    #[arg(long, value_parser = real, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Number of evenly spaced levels when --levels is absent.
    #[arg(long, default_value_t = 8)]
    count: usize,
    /// Continuation of the profile past the last node (exterior mode).
    #[arg(long, value_enum, default_value = "power-law")]
    tail: TailKind,
    /// λ of the bubble tail.
    #[arg(long)]
    tail_lambda: Option<f64>,
    /// Mass for boundary mode (defaults to ∫ e^ψ on the mesh).
    #[arg(long, value_parser = real)]
    rho: Option<f64>,
    /// Write the reports as JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RearrangeArgs {
    #[arg(long)]
    phi: PathBuf,
    #[arg(long)]
    u: PathBuf,
    #[arg(long, value_parser = real)]
    lambda: f64,
    #[arg(long, value_parser = real)]
    radius: f64,
    #[arg(long, default_value_t = 512)]
    thresholds: usize,
    /// Output prefix: PREFIX_phi_star.csv, PREFIX_table.csv, PREFIX_meta.json.
    #[arg(long, default_value = "rearranged")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    w1: PathBuf,
    #[arg(long)]
    w2: PathBuf,
    #[arg(long, default_value_t = 512)]
    thresholds: usize,
    /// Relative tolerance on the equal-mass hypothesis.
    #[arg(long, default_value_t = 1e-4)]
    mass_rtol: f64,
    #[arg(long, default_value = "pipeline.json")]
    out: PathBuf,
    /// Optional (r, ψ, U_λ) plot data.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct UniquenessArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of random starts (default: config value or 10).
    #[arg(long)]
    starts: Option<usize>,
    /// Seed (default: config value or 7).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "uniqueness.json")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Masses to visit, increasing and below 8π (comma separated).
    #[arg(long = "rho-list", value_parser = real, value_delimiter = ',', conflicts_with = "eps")]
    rho_list: Option<Vec<f64>>,
    /// Distances ε to criticality, ρ = 8π(1 − ε), decreasing.
    #[arg(long, value_parser = real, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a successful run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Holds,
    Violated,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::VerifyBol(a) => cmd_verify(a),
        Command::Rearrange(a) => cmd_rearrange(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Uniqueness(a) => cmd_uniqueness(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn shift(field: &AnyField, c: f64) -> Result<AnyField> {
    Ok(match field {
        AnyField::Radial(f) => AnyField::Radial(f.map(|_, v| v + c)?),
        AnyField::Grid(f) => AnyField::Grid(f.map(|v| v + c)?),
    })
}

fn cmd_solve(a: SolveArgs) -> Result<Outcome> {
    let problem = a.problem.build(true)?;
    let rep = solve(&problem.spec, None)?;
    let u_path = with_suffix(&a.out, ".csv");
    let w_path = with_suffix(&a.out, "_liouville.csv");
    let r_path = with_suffix(&a.out, "_report.json");
    save_field(&rep.solution, "u", &u_path)?;
    save_field(&shift(&rep.solution, rep.normalization)?, "w", &w_path)?;
    let summary = SolveSummary::from(&rep);
    write_json(&summary, &r_path)?;
    println!(
        "converged={} iterations={} residual={:.3e} u_max={:.12}{}",
        rep.converged,
        rep.iterations,
        rep.residual,
        rep.u_max(),
        rep.center_value().map_or(String::new(), |c| format!(" u(0)={c:.12}")),
    );
    println!("wrote {}, {}, {}", u_path.display(), w_path.display(), r_path.display());
    Ok(if rep.converged { Outcome::Holds } else { Outcome::Violated })
}

fn tail_of(a: &VerifyArgs) -> Result<Tail> {
    Ok(match a.tail {
        TailKind::None => Tail::None,
        TailKind::PowerLaw => Tail::PowerLaw,
        TailKind::Bubble => Tail::Bubble {
            lambda: a.tail_lambda.context("--tail bubble needs --tail-lambda")?,
        },
    })
}

fn radial(field: AnyField, what: &str) -> Result<RadialField> {
    match field {
        AnyField::Radial(f) => Ok(f),
        AnyField::Grid(_) => bail!("{what} needs a radial field (r,value columns)"),
    }
}

/// Levels strictly between the boundary maximum of φ and its maximum.
fn interior_levels<F: LevelField>(phi: &F, count: usize) -> Result<Vec<f64>> {
    let low = phi.boundary_trace().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let high = phi.level_samples().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !(high > low) {
        bail!("φ does not rise above its boundary values; no level set is compactly inside");
    }
    Ok((1..=count).map(|k| low + (high - low) * k as f64 / (count + 1) as f64).collect())
}

fn interior_reports<F: LevelField>(u: &F, phi: &F, levels: Option<&[f64]>, count: usize) -> Result<Vec<BolReport>> {
    let levels = match levels {
        Some(l) => l.to_vec(),
        None => interior_levels(phi, count)?,
    };
    levels
        .iter()
        .map(|&t| check_interior_bol(u, phi, t).with_context(|| format!("level t = {t}")))
        .collect()
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    let field = load_field(&a.field).with_context(|| format!("reading {}", a.field.display()))?;
    let reports = match a.mode {
        BolMode::Interior => {
            let phi = match &a.phi {
                Some(p) => load_field(p).with_context(|| format!("reading {}", p.display()))?,
                None => field.clone(),
            };
            match (&field, &phi) {
                (AnyField::Radial(u), AnyField::Radial(p)) => interior_reports(u, p, a.levels.as_deref(), a.count)?,
                (AnyField::Grid(u), AnyField::Grid(p)) => interior_reports(u, p, a.levels.as_deref(), a.count)?,
                _ => bail!("u and φ must both be radial or both planar"),
            }
        }
        BolMode::Exterior => {
            let tail = tail_of(&a)?;
            vec![check_radial_exterior(&radial(field, "exterior mode")?, tail)?]
        }
        BolMode::RadialInterior => vec![check_radial_interior(&radial(field, "radial-interior mode")?)?],
        BolMode::Boundary => {
            let psi = radial(field, "boundary mode")?;
            let rho = a.rho.unwrap_or_else(|| psi.weighted_mass());
            vec![boundary_comparison(&psi, rho)?]
        }
    };
    match &a.out {
        Some(p) => write_json(&reports, p)?,
        None => println!("{}", serde_json::to_string_pretty(&reports)?),
    }
    for r in &reports {
        eprintln!(
            "{:?} lhs={:.10e} rhs={:.10e} margin={:.3e} tol={:.1e} verdict={:?}",
            r.context, r.lhs, r.rhs, r.margin, r.tolerance, r.verdict
        );
    }
    if let Some(r) = reports.iter().find(|r| r.verdict == Verdict::NotApplicable) {
        bail!("precondition failed: {}", r.notes.join("; "));
    }
    Ok(if reports.iter().all(|r| r.verdict.passes()) {
        Outcome::Holds
    } else {
        Outcome::Violated
    })
}

fn cmd_rearrange(a: RearrangeArgs) -> Result<Outcome> {
    let phi = load_field(&a.phi).with_context(|| format!("reading {}", a.phi.display()))?;
    let u = load_field(&a.u).with_context(|| format!("reading {}", a.u.display()))?;
    let lambda = BubbleParam::new(a.lambda)?;
    let opts = RearrangeOptions {
        thresholds: a.thresholds,
        ..RearrangeOptions::default()
    };
    let result = match (&phi, &u) {
        (AnyField::Radial(p), AnyField::Radial(u)) => rearrange_with(p, u, lambda, a.radius, &opts)?,
        (AnyField::Grid(p), AnyField::Grid(u)) => rearrange_with(p, u, lambda, a.radius, &opts)?,
        _ => bail!("φ and u must both be radial or both planar"),
    };
    let star = with_suffix(&a.out, "_phi_star.csv");
    save_field(&AnyField::Radial(result.phi_star.clone()), "phi_star", &star)?;
    write_table_csv(&result, &with_suffix(&a.out, "_table.csv"))?;
    write_meta_json(&result, &with_suffix(&a.out, "_meta.json"))?;
    println!(
        "defect={:.3e} thresholds={} refined={} wrote {}",
        result.defect,
        result.table.len(),
        result.refined,
        star.display()
    );
    Ok(Outcome::Holds)
}

fn cmd_pipeline(a: PipelineArgs) -> Result<Outcome> {
    let w1 = load_field(&a.w1).with_context(|| format!("reading {}", a.w1.display()))?;
    let w2 = load_field(&a.w2).with_context(|| format!("reading {}", a.w2.display()))?;
    let opts = PipelineOptions {
        thresholds: a.thresholds,
        mass_rtol: a.mass_rtol,
        ..PipelineOptions::default()
    };
    let report = match (&w1, &w2) {
        (AnyField::Radial(x), AnyField::Radial(y)) => theorem_pipeline_with(x, y, &opts)?,
        (AnyField::Grid(x), AnyField::Grid(y)) => theorem_pipeline_with(x, y, &opts)?,
        _ => bail!("w1 and w2 must both be radial or both planar"),
    };
    write_json(&report, &a.out)?;
    if let Some(p) = &a.profile {
        report.write_profile_csv(p)?;
    }
    println!(
        "applicable={} contradiction={} boundary_defect={} tolerance={:.1e} failed_hypotheses={:?}",
        report.applicable,
        report.contradiction,
        report.boundary_defect.map_or("n/a".into(), |d| format!("{d:.6e}")),
        report.tolerance,
        report.failed_hypotheses()
    );
    Ok(if report.contradiction { Outcome::Violated } else { Outcome::Holds })
}

fn cmd_uniqueness(a: UniquenessArgs) -> Result<Outcome> {
    let problem = a.problem.build(true)?;
    let h = problem.config.as_ref().map(|c| c.harness.clone()).unwrap_or_default();
    let report = uniqueness_experiment(&problem.spec, a.starts.unwrap_or(h.starts), a.seed.unwrap_or(h.seed))?;
    write_json(&report, &a.out)?;
    println!(
        "rho={:.10} starts={} converged={} distinct={} max_pairwise_distance={:.3e}",
        report.rho, report.starts, report.converged, report.distinct, report.max_pairwise_distance
    );
    Ok(if report.distinct == 1 && report.converged == report.starts {
        Outcome::Holds
    } else {
        Outcome::Violated
    })
}

fn cmd_sweep(a: SweepArgs) -> Result<Outcome> {
    let problem = a.problem.build(false)?;
    let eps = match (&a.rho_list, &a.eps) {
        (Some(rho), None) => rho.iter().map(|r| 1.0 - r / EIGHT_PI).collect(),
        (None, Some(e)) => e.clone(),
        _ => vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
    };
    let table = critical_sweep(&problem.spec, &eps)?;
    table.write_csv(&a.out)?;
    for r in &table.rows {
        println!(
            "rho={:.10} u_max={:.10}{}",
            r.rho,
            r.u_max,
            r.relative_error.map_or(String::new(), |e| format!(" rel_err={e:.2e}"))
        );
    }
    println!("wrote {} (truncated={})", a.out.display(), table.truncated);
    Ok(if table.truncated || !table.u_max_increasing {
        Outcome::Violated
    } else {
        Outcome::Holds
    })
}

fn cmd_oracle(a: OracleArgs) -> Result<Outcome> {
    let report = run_oracle_suite()?;
    for c in &report.checks {
        println!(
            "{} {:<32} error={:.3e} tol={:.0e}  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.error,
            c.tolerance,
            c.detail
        );
    }
    if let Some(p) = &a.out {
        write_json(&report, p)?;
    }
    Ok(if report.all_pass() { Outcome::Holds } else { Outcome::Violated })
}
