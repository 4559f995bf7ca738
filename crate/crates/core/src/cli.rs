//! Batch interface: configuration documents, the `solve`, `sweep` and
//! `verify` commands, and their JSON/CSV outputs.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{
    build_grid, cartesian_gradient, field_to_csv, integrate, multiply, sample_analytic,
    AnalyticSpec, GaussBump, Grid, ScalarField, SeedData, DEFAULT_DELTA,
};
use crate::geometry::{
    asymptotic_charges, charges_at, cone_angle, reconstruct_physical, rescaled_fields,
};
use crate::picard::{solve_constraints, SolutionBundle, SolverOptions};

mod verify;

pub use verify::{run_checks, Check};

/// Exit statuses of the binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NO_CONVERGENCE: i32 = 2;
    pub const VERIFY_FAILED: i32 = 3;
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k_max: usize,
    pub n_r: usize,
    pub r_max: f64,
    pub delta: f64,
    pub udot: AnalyticSpec,
    pub u: AnalyticSpec,
    pub tau: AnalyticSpec,
    pub b: f64,
    pub solver: SolverOptions,
    pub output_dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    grid: GridSection,
    #[serde(default)]
    seed: SeedSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    k_max: usize,
    n_r: usize,
    r_max: f64,
    #[serde(default = "default_delta")]
    delta: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedSection {
    #[serde(default)]
    udot: Vec<String>,
    #[serde(default)]
    u: Vec<String>,
    #[serde(default)]
    tau: Vec<String>,
    #[serde(default)]
    b: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolverSection {
    tol_fixed_point: f64,
    max_iter: usize,
    epsilon_threshold: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tol_fixed_point: d.tol_fixed_point,
            max_iter: d.max_iter,
            epsilon_threshold: d.epsilon_threshold,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn parse_bumps(list: &[String], what: &str) -> Result<AnalyticSpec> {
    list.iter()
        .map(|s| {
            s.parse::<GaussBump>()
                .map_err(|e| Error::Validation(format!("{what} bump `{s}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(AnalyticSpec::new)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Document = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        Error::Parse {
            line,
            message: e.message().to_string(),
        }
    })?;
    let cfg = RunConfig {
        k_max: doc.grid.k_max,
        n_r: doc.grid.n_r,
        r_max: doc.grid.r_max,
        delta: doc.grid.delta,
        udot: parse_bumps(&doc.seed.udot, "udot")?,
        u: parse_bumps(&doc.seed.u, "u")?,
        tau: parse_bumps(&doc.seed.tau, "tau")?,
        b: doc.seed.b,
        solver: SolverOptions {
            tol_fixed_point: doc.solver.tol_fixed_point,
            max_iter: doc.solver.max_iter,
            epsilon_threshold: doc.solver.epsilon_threshold,
        },
        output_dir: doc.output.dir,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |e: Error| Error::Validation(e.to_string());
        build_grid(self.k_max, self.n_r, self.r_max, self.delta).map_err(invalid)?;
        let s = &self.solver;
        if !s.tol_fixed_point.is_finite() || s.tol_fixed_point <= 0.0 {
            return Err(Error::Validation("tol_fixed_point must be positive".into()));
        }
        if s.max_iter == 0 {
            return Err(Error::Validation("max_iter must be at least 1".into()));
        }
        if !s.epsilon_threshold.is_finite() || s.epsilon_threshold <= 0.0 {
            return Err(Error::Validation(
                "epsilon_threshold must be positive".into(),
            ));
        }
        if !self.b.is_finite() {
            return Err(Error::Validation("b must be finite".into()));
        }
        Ok(())
    }

    /// Applies `SOLVER_MAX_ITER` and `SOLVER_TOL` as returned by `var`.
    pub fn apply_env_overrides(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(v) = var("SOLVER_MAX_ITER") {
            self.solver.max_iter = v
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("SOLVER_MAX_ITER=`{v}` is not a count")))?;
        }
        if let Some(v) = var("SOLVER_TOL") {
            self.solver.tol_fixed_point = v
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("SOLVER_TOL=`{v}` is not a number")))?;
        }
        self.validate()
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        build_grid(self.k_max, self.n_r, self.r_max, self.delta)
    }

    /// Seed with `u̇, u` scaled by `a` and `τ̃, b` by `a²`.
    pub fn seed_scaled(&self, grid: &Arc<Grid>, a: f64) -> Result<SeedData> {
        SeedData::new(
            sample_analytic(&self.udot.scaled(a), grid)?,
            sample_analytic(&self.u.scaled(a), grid)?,
            sample_analytic(&self.tau.scaled(a * a), grid)?,
            self.b * a * a,
        )
    }

    pub fn seed(&self, grid: &Arc<Grid>) -> Result<SeedData> {
        self.seed_scaled(grid, 1.0)
    }

    fn document(&self) -> Document {
        let strings = |s: &AnalyticSpec| s.bumps.iter().map(ToString::to_string).collect();
        Document {
            grid: GridSection {
                k_max: self.k_max,
                n_r: self.n_r,
                r_max: self.r_max,
                delta: self.delta,
            },
            seed: SeedSection {
                udot: strings(&self.udot),
                u: strings(&self.u),
                tau: strings(&self.tau),
                b: self.b,
            },
            solver: SolverSection {
                tol_fixed_point: self.solver.tol_fixed_point,
                max_iter: self.solver.max_iter,
                epsilon_threshold: self.solver.epsilon_threshold,
            },
            output: OutputSection {
                dir: self.output_dir.clone(),
            },
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = toml::to_string(&self.document()).map_err(|_| fmt::Error)?;
        f.write_str(&text)
    }
}

/// Status code for a solver error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DeltaOutOfRange(_)
        | Error::InvalidResolution(_)
        | Error::UnresolvedSpec { .. }
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::Io(_) => exit::CONFIG,
        _ => exit::NO_CONVERGENCE,
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    write(dir, name, &(text + "\n"))
}

fn bundle_json(b: &SolutionBundle, seed: &SeedData) -> Result<Value> {
    let (_, _, tau) = rescaled_fields(b, seed);
    let grid = seed.grid();
    let (bh, ph, qh) = asymptotic_charges(&tau, grid)?;
    let half = charges_at(&tau, grid.nearest_node(grid.r_max() / 2.0));
    Ok(json!({
        "alpha": b.alpha,
        "rho": b.rho,
        "eta": b.eta,
        "p": b.p,
        "q": b.q,
        "b": seed.b,
        "epsilon": seed.epsilon,
        "cone_angle": cone_angle(b.alpha).ok(),
        "iterations": b.iterations,
        "contraction_ratios": b.contraction_ratios,
        "residuals": b.residuals,
        "charges_at_r_max": { "b": bh, "p": ph, "q": qh },
        "charges_at_half_r_max": { "b": half.0, "p": half.1, "q": half.2 },
    }))
}

/// Runs one solve and writes `solution.json` and the field dumps.
pub fn cmd_solve(cfg: &RunConfig) -> i32 {
    let dir = &cfg.output_dir;
    let setup = cfg.grid().and_then(|g| cfg.seed(&g).map(|s| (g, s)));
    let (_, seed) = match setup {
        Ok(v) => v,
        Err(e) => {
            log::error!("{e}");
            return exit::CONFIG;
        }
    };
    match solve_constraints(&seed, &cfg.solver).and_then(|b| write_solution(dir, &b, &seed)) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            let code = exit_code(&e);
            let diag =
                json!({ "status": "failed", "error": e.to_string(), "epsilon": seed.epsilon });
            if let Err(w) = write_json(dir, "solution.json", &diag) {
                log::error!("{w}");
            }
            code
        }
    }
}

fn write_solution(dir: &Path, b: &SolutionBundle, seed: &SeedData) -> Result<()> {
    let mut summary = bundle_json(b, seed)?;
    let phys = reconstruct_physical(b, seed)?;
    let defect = phys.trace_defect()?.max_abs_coefficient();
    let min_metric = phys
        .metric_factor
        .cos_mode(0)
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    summary["status"] = json!("converged");
    summary["physical"] = json!({
        "trace_identity_defect": defect,
        "min_mean_metric_factor": min_metric,
    });
    write_json(dir, "solution.json", &summary)?;
    let (_, _, tau) = rescaled_fields(b, seed);
    write(dir, "lambda_tilde.csv", &field_to_csv(&b.lambda_tilde))?;
    write(dir, "H11_tilde.csv", &field_to_csv(&b.h_tilde.h11))?;
    write(dir, "H12_tilde.csv", &field_to_csv(&b.h_tilde.h12))?;
    write(dir, "tau_rescaled.csv", &field_to_csv(&tau))?;
    for (name, text) in phys.field_csvs() {
        write(&dir.join("physical"), &format!("{name}.csv"), &text)?;
    }
    Ok(())
}

/// Leading-order constants of the unit seed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LeadingOrder {
    /// `(1/4π)∫(Ů² + |∇U|²)`.
    pub alpha: f64,
    /// `(1/π)∫Ů∂ⱼU`.
    pub p: f64,
    pub q: f64,
    /// `½∫(Ů² + |∇U|²)`, as the constant is printed with an unnormalized Green function.
    pub alpha_unnormalized: f64,
    /// `4/(1+2π)·∫Ů∂ⱼU`, same convention.
    pub p_unnormalized: f64,
    pub q_unnormalized: f64,
}

pub fn leading_order(unit: &SeedData) -> Result<LeadingOrder> {
    let (ux, uy) = cartesian_gradient(&unit.u);
    let energy = integrate(&ScalarField::pointwise(&[&unit.udot, &ux, &uy], |v| {
        v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    })?);
    let jx = integrate(&multiply(&unit.udot, &ux)?);
    let jy = integrate(&multiply(&unit.udot, &uy)?);
    let c = 4.0 / (1.0 + 2.0 * PI);
    Ok(LeadingOrder {
        alpha: energy / (4.0 * PI),
        p: jx / PI,
        q: jy / PI,
        alpha_unnormalized: 0.5 * energy,
        p_unnormalized: c * jx,
        q_unnormalized: c * jy,
    })
}

/// One sweep row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub momentum_residual: f64,
    pub hamiltonian_residual: f64,
    pub iterations: usize,
    pub status: String,
}

impl SweepRow {
    fn over_a2(&self, v: f64) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            v / (self.a * self.a)
        }
    }
}

/// `c + d a²` through the two smallest nonzero amplitudes, returned as
/// `(c, |c − value at the smallest amplitude|)`.
pub fn richardson(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0).collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    match pts.as_slice() {
        [] => None,
        [(_, v)] => Some((*v, f64::NAN)),
        [(a1, v1), (a2, v2), ..] => {
            let (s1, s2) = (a1 * a1, a2 * a2);
            let c = (s2 * v1 - s1 * v2) / (s2 - s1);
            Some((c, (c - v1).abs()))
        }
    }
}

/// Solves at each amplitude and writes `sweep.csv` and `sweep.json`.
pub fn cmd_sweep(cfg: &RunConfig, amplitudes: &[f64]) -> i32 {
    if amplitudes.is_empty() {
        log::error!("the amplitude list is empty");
        return exit::CONFIG;
    }
    if amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0)
        || amplitudes.windows(2).any(|w| w[0] > w[1])
    {
        log::error!("amplitudes must be finite, non-negative and sorted");
        return exit::CONFIG;
    }
    let grid = match cfg.grid() {
        Ok(g) => g,
        Err(e) => {
            log::error!("{e}");
            return exit::CONFIG;
        }
    };
    let rows = sweep_rows(cfg, &grid, amplitudes);
    let failed = rows.iter().any(|r| r.status != "converged");
    let result = write_sweep(cfg, &grid, &rows);
    match result {
        Err(e) => {
            log::error!("{e}");
            exit_code(&e)
        }
        Ok(()) if failed => exit::NO_CONVERGENCE,
        Ok(()) => exit::SUCCESS,
    }
}

pub fn sweep_rows(cfg: &RunConfig, grid: &Arc<Grid>, amplitudes: &[f64]) -> Vec<SweepRow> {
    amplitudes
        .iter()
        .map(|&a| {
            let out = cfg
                .seed_scaled(grid, a)
                .and_then(|s| solve_constraints(&s, &cfg.solver));
            match out {
                Ok(b) => SweepRow {
                    a,
                    alpha: b.alpha,
                    p: b.p,
                    q: b.q,
                    momentum_residual: b.residuals.momentum_residual_norm,
                    hamiltonian_residual: b.residuals.hamiltonian_residual_norm,
                    iterations: b.iterations,
                    status: "converged".into(),
                },
                Err(e) => {
                    log::warn!("amplitude {a}: {e}");
                    SweepRow {
                        a,
                        alpha: f64::NAN,
                        p: f64::NAN,
                        q: f64::NAN,
                        momentum_residual: f64::NAN,
                        hamiltonian_residual: f64::NAN,
                        iterations: 0,
                        status: e.to_string(),
                    }
                }
            }
        })
        .collect()
}

fn write_sweep(cfg: &RunConfig, grid: &Arc<Grid>, rows: &[SweepRow]) -> Result<()> {
    let mut csv = String::from(
        "a,alpha,rho_cos_eta,rho_sin_eta,alpha_over_a2,p_over_a2,q_over_a2,\
         momentum_residual,hamiltonian_residual,iterations,status\n",
    );
    for r in rows {
        csv += &format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},\"{}\"\n",
            r.a,
            r.alpha,
            r.p,
            r.q,
            r.over_a2(r.alpha),
            r.over_a2(r.p),
            r.over_a2(r.q),
            r.momentum_residual,
            r.hamiltonian_residual,
            r.iterations,
            r.status.replace('"', "'")
        );
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.status == "converged").collect();
    let fit = |f: &dyn Fn(&SweepRow) -> f64| {
        richardson(
            &ok.iter()
                .map(|r| (r.a, r.over_a2(f(r))))
                .collect::<Vec<_>>(),
        )
    };
    let (fa, fp, fq) = (fit(&|r| r.alpha), fit(&|r| r.p), fit(&|r| r.q));
    for (name, v) in [("alpha", fa), ("p", fp), ("q", fq)] {
        if let Some((c, rem)) = v {
            csv += &format!("# extrapolated {name}/a^2 = {c:?} (Richardson remainder {rem:?})\n");
        }
    }
    write(&cfg.output_dir, "sweep.csv", &csv)?;
    let reference = leading_order(&cfg.seed(grid)?)?;
    let pack = |v: Option<(f64, f64)>| v.map(|(c, r)| json!({ "coefficient": c, "remainder": r }));
    write_json(
        &cfg.output_dir,
        "sweep.json",
        &json!({
            "rows": rows,
            "extrapolated": { "alpha": pack(fa), "p": pack(fp), "q": pack(fq) },
            "leading_order": reference,
        }),
    )
}

/// Runs the identity and oracle checks and writes `verify.json`.
pub fn cmd_verify(cfg: &RunConfig) -> i32 {
    let checks = match run_checks(cfg) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return exit::CONFIG;
        }
    };
    for c in &checks {
        let tag = if c.pass { "pass" } else { "FAIL" };
        log::info!(
            "[{tag}] {}: {:.3e} (tolerance {:.1e})",
            c.name,
            c.value,
            c.tolerance
        );
    }
    let all = checks.iter().all(|c| c.pass);
    let doc = json!({ "all_pass": all, "checks": checks });
    if let Err(e) = write_json(&cfg.output_dir, "verify.json", &doc) {
        log::error!("{e}");
        return exit::CONFIG;
    }
    if all {
        exit::SUCCESS
    } else {
        exit::VERIFY_FAILED
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "s1c",
    about = "Small-data constraint solver for S1-symmetric vacuum initial data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the constraints for the configured seed.
    Solve { config: PathBuf },
    /// Solve over a list of seed amplitudes.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        amplitudes: Vec<f64>,
    },
    /// Run the identity and oracle checks on the configured grid.
    Verify { config: PathBuf },
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    cfg.apply_env_overrides(|k| std::env::var(k).ok())?;
    Ok(cfg)
}

/// Entry point shared by the binary and the tests.
pub fn run(cli: Cli) -> i32 {
    let path = match &cli.command {
        Command::Solve { config } | Command::Sweep { config, .. } | Command::Verify { config } => {
            config
        }
    };
    let cfg = match load(path) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{}: {e}", path.display());
            return exit::CONFIG;
        }
    };
    match &cli.command {
        Command::Solve { .. } => cmd_solve(&cfg),
        Command::Sweep { amplitudes, .. } => cmd_sweep(&cfg, amplitudes),
        Command::Verify { .. } => cmd_verify(&cfg),
    }
}
