//! The three subcommands.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use qwgauge::dirac::{convergence_study, ConvergenceSetup};
use qwgauge::gauge::{
    field_tensor, gauge_transform_with, sample_phases, DerivativeNormalization, GaugePhases,
    LatticeGaugeField, PotentialSpec,
};
use qwgauge::lattice::{Dimension, LatticeGeom, Mat2, WalkerState};
use qwgauge::observables::{continuity_residual, continuity_residual_1d, m_set, ContinuityReport};
use qwgauge::walk::{evolve, WalkParams};
use qwgauge::C64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{io_err, CliError};
use crate::output::{observables_header, write_observables, write_snapshot, Csv};

pub const UNITARITY_TOL: f64 = 1e-12;
pub const EQUIVARIANCE_TOL: f64 = 1e-12;
pub const TENSOR_TOL: f64 = 1e-13;
pub const CONTINUITY_TOL: f64 = 1e-12;
pub const LAMBDA_TOL: f64 = 1e-13;
pub const SUM_TOL: f64 = 1e-15;

pub struct Context {
    pub cfg: RunConfig,
    pub base: PathBuf,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Context {
    fn log(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        std::fs::create_dir_all(&self.out).map_err(io_err(&self.out))?;
        Ok(&self.out)
    }
}

struct Run {
    geom: LatticeGeom,
    spec: PotentialSpec,
    phases: GaugePhases,
    params: WalkParams,
    traj: Vec<WalkerState>,
}

fn run(cfg: &RunConfig, base: &Path) -> Result<Run, CliError> {
    let geom = cfg.geom()?;
    let spec = cfg.potential_spec(base)?;
    let n = cfg.time_indices();
    let phases = sample_phases(&spec, &geom, n.max(1))?;
    let params = cfg.walk_params();
    let traj = evolve(&cfg.initial(geom)?, n, &phases, &params)?;
    Ok(Run {
        geom,
        spec,
        phases,
        params,
        traj,
    })
}

/// Continuity reports at every time index where the residual is defined.
fn continuity(run: &Run) -> Result<Vec<ContinuityReport>, CliError> {
    let t = &run.traj;
    let mut out = Vec::new();
    match run.params {
        WalkParams::One(p) => {
            for w in t.windows(2) {
                out.push(continuity_residual_1d(&w[0], &w[1], &p)?);
            }
        }
        WalkParams::Two(p) => {
            let mut j = 2;
            while j + 2 < t.len() {
                out.push(continuity_residual([&t[j - 2], &t[j], &t[j + 2]], &run.phases, &p)?);
                j += 2;
            }
        }
    }
    Ok(out)
}

/// Indices into the trajectory of the states after each whole step.
fn step_states(run: &Run) -> impl Iterator<Item = (u64, &WalkerState)> {
    let stride = match run.geom.dim() {
        Dimension::One => 1,
        Dimension::Two => 2,
    };
    run.traj.iter().step_by(stride).enumerate().map(|(k, s)| (k as u64, s))
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let run = run(&ctx.cfg, &ctx.base)?;
    let dir = ctx.out_dir()?;
    let last = ctx.cfg.n_steps;

    let mut prob = Csv::create(&dir.join("probability.csv"), &["step", "t", "total_probability"])?;
    for (k, s) in step_states(&run) {
        prob.row(&[k as f64, run.geom.time_of(s.time_index()), s.norm_sqr()])?;
        let snap = k == 0 || k == last || ctx.cfg.snapshot_every.is_some_and(|e| k % e == 0);
        if snap {
            write_snapshot(&dir.join(format!("snapshot_{k:06}.csv")), s)?;
        }
    }
    prob.finish()?;

    let reports = continuity(&run)?;
    let mut obs = Csv::create(&dir.join("observables.csv"), observables_header(run.geom.dim()))?;
    for rep in &reports {
        write_observables(&mut obs, &run.traj[rep.time_index], rep)?;
    }
    obs.finish()?;
    let worst = reports.iter().map(|r| r.max_abs).fold(0.0, f64::max);
    ctx.log(format!(
        "simulated {} steps on {} sites, max continuity residual {worst:.3e}",
        ctx.cfg.n_steps,
        run.geom.sites()
    ));
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// `"pass"`, `"fail"` or `"insufficient steps"`.
    pub status: &'static str,
    pub max_deviation: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &'static str, dev: f64, tol: f64, detail: String) -> Self {
        CheckResult {
            name,
            status: if dev <= tol { "pass" } else { "fail" },
            max_deviation: Some(dev),
            tolerance: tol,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub fn run_checks(cfg: &RunConfig, base: &Path) -> Result<CheckReport, CliError> {
    let run = run(cfg, base)?;
    let geom = run.geom;
    let q = cfg.charge;
    let mut checks = Vec::new();

    let n0 = run.traj[0].norm_sqr();
    let drift = run.traj.iter().map(|s| (s.norm_sqr() - n0).abs()).fold(0.0, f64::max);
    checks.push(CheckResult::measured(
        "unitarity",
        drift,
        UNITARITY_TOL,
        format!("norm drift over {} time indices", run.traj.len() - 1),
    ));

    let norm = if cfg.corrupt_gauge_transform {
        DerivativeNormalization::Plain
    } else {
        DerivativeNormalization::Averaged
    };
    let chi = cfg.gauge_function(&geom)?;
    let chi_s = chi.sample(&geom, run.phases.n_labels() + 1)?;
    let transformed = gauge_transform_with(&run.phases, &chi, q, norm)?;
    let start = run.traj[0].with_local_phase(chi_s.slice(0), q)?;
    let other = evolve(&start, run.traj.len() - 1, &transformed, &run.params)?;
    let mut defect = 0.0f64;
    for (j, (a, b)) in run.traj.iter().zip(&other).enumerate() {
        defect = defect.max(a.with_local_phase(chi_s.slice(j), q)?.max_abs_diff(b));
    }
    checks.push(CheckResult::measured(
        "gauge_equivariance",
        defect,
        EQUIVARIANCE_TOL,
        format!("max |psi' - e^(iq chi) psi|, {norm:?} stencils"),
    ));

    // F carries two inverse powers of eps_A
    let eps_a = cfg.eps_a();
    let tol = TENSOR_TOL * (1.0 / (eps_a * eps_a)).max(1.0);
    let n_slices = cfg.time_indices().max(2);
    let field = LatticeGaugeField::from_potential(&run.spec, &geom, n_slices)?;
    let f = field_tensor(&field)?;
    let f2 = field_tensor(&field.gauge_transformed(&chi)?)?;
    let pure = field_tensor(&LatticeGaugeField::pure_gauge(&chi.sample(&geom, n_slices + 1)?, eps_a)?)?;
    checks.push(CheckResult::measured(
        "field_tensor_invariance",
        f.max_abs_diff(&f2).max(pure.max_abs()),
        tol,
        format!("max |F' - F| and max |F[pure gauge]| over {n_slices} slices"),
    ));

    let reports = continuity(&run)?;
    checks.push(if reports.is_empty() {
        CheckResult {
            name: "continuity",
            status: "insufficient steps",
            max_deviation: None,
            tolerance: CONTINUITY_TOL,
            detail: "the residual needs at least one step in 1D and two in 2D".into(),
        }
    } else {
        let worst = reports.iter().map(|r| r.max_abs).fold(0.0, f64::max);
        CheckResult::measured(
            "continuity",
            worst,
            CONTINUITY_TOL,
            format!("max |residual| over {} time indices", reports.len()),
        )
    });

    let (t1, t2) = match run.params {
        WalkParams::Two(p) => (p.theta1, p.theta2),
        WalkParams::One(p) => (FRAC_PI_2 + p.theta / 2.0, -FRAC_PI_2 + p.theta / 2.0),
    };
    checks.push(match m_set(t1, t2) {
        Ok(m) => CheckResult::measured(
            "lambda_relations",
            m.lambda_residual(),
            LAMBDA_TOL,
            format!("angles ({t1}, {t2})"),
        ),
        Err(e) => CheckResult {
            name: "lambda_relations",
            status: "fail",
            max_deviation: None,
            tolerance: LAMBDA_TOL,
            detail: e.to_string(),
        },
    });
    checks.push(CheckResult::measured(
        "massless_sums",
        massless_sum_defect()?,
        SUM_TOL,
        "Mx and My sums at angles (pi/2, -pi/2)".into(),
    ));

    Ok(CheckReport {
        passed: checks.iter().all(|c| c.status != "fail"),
        checks,
    })
}

/// Deviation of the massless `Mx`, `My` sums from `-sigma_y` and `sigma_z`.
pub fn massless_sum_defect() -> Result<f64, CliError> {
    let m = m_set(FRAC_PI_2, -FRAC_PI_2)?;
    let c = |re, im| C64::new(re, im);
    let gx = Mat2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0));
    let gy = Mat2::diag(c(1.0, 0.0), c(-1.0, 0.0));
    Ok(m.mx_sum().max_abs_diff(&gx).max(m.my_sum().max_abs_diff(&gy)))
}

pub fn check(ctx: &Context) -> Result<(), CliError> {
    let report = run_checks(&ctx.cfg, &ctx.base)?;
    let path = ctx.out_dir()?.join("checks.json");
    let text = serde_json::to_string_pretty(&report).expect("serializable report");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))?;
    for c in &report.checks {
        let dev = c.max_deviation.map_or("-".to_string(), |d| format!("{d:.3e}"));
        ctx.log(format!("{:<24} {:<18} {dev} (tol {:.0e})", c.name, c.status, c.tolerance));
    }
    let failed = report.checks.iter().filter(|c| c.status == "fail").count();
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed });
    }
    Ok(())
}

pub fn converge(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let conv = cfg
        .convergence
        .as_ref()
        .ok_or_else(|| CliError::Validation("convergence: section is required for `converge`".into()))?;
    let packet = cfg
        .packet()
        .ok_or_else(|| CliError::Validation("initial_state: `converge` needs a gaussian packet".into()))?;
    if cfg.dimension == 2 && cfg.extents[0] != cfg.extents[1] {
        return Err(CliError::Validation("extents: `converge` needs a square box".into()));
    }
    let setup = ConvergenceSetup {
        dim: cfg.dim(),
        length: cfg.extents[0] as f64 * cfg.spacing,
        mass: cfg.mass,
        charge: cfg.charge,
        potential: cfg.potential_spec(&ctx.base)?,
        packet,
        t_final: conv.t_final,
        epsilons: conv.epsilons.clone(),
        reference_points: conv.reference_points,
        reference_dt: conv.reference_dt,
    };
    let report = convergence_study(&setup)?;
    let path = ctx.out_dir()?.join("convergence.csv");
    let mut csv = Csv::create(&path, &["epsilon", "l2_error"])?;
    for r in &report.rows {
        csv.row(&[r.epsilon, r.l2_error])?;
        ctx.log(format!("eps {:<10} sites {:<5} steps {:<6} error {:.4e}", r.epsilon, r.sites_per_axis, r.steps, r.l2_error));
    }
    csv.finish()?;
    println!("slope: {:.4}", report.slope);
    if !report.monotone {
        ctx.log("warning: error did not decrease at every refinement");
    }
    Ok(())
}
