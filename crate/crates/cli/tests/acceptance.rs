//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p qwgauge-cli --test acceptance -- --nocapture` to see the table.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use qwgauge::dirac::{convergence_study, gammas, ConvergenceReport, ConvergenceSetup};
use qwgauge::expr::parse;
use qwgauge::field::{shared, zero_fn};
use qwgauge::gauge::{
    field_tensor, gauge_transform_with, sample_phases, DerivativeNormalization, GaugeFunction,
    LatticeGaugeField, PotentialSpec,
};
use qwgauge::lattice::{Dimension, GaussianPacket, LatticeGeom};
use qwgauge::observables::{continuity_residual, m_set};
use qwgauge::random::{random_field, random_smooth_potential, random_state, FourierField};
use qwgauge::walk::{evolve, evolve_with, WalkParams, WalkParams1D, WalkParams2D};
use qwgauge_oracle::cases::compare_all;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.2} s]", o.detail, took.as_secs_f64());
    if let Some(b) = budget {
        if took > b {
            o.pass = false;
            o.detail += &format!(" over budget {:.0} s", b.as_secs_f64());
        }
    }
    o
}

fn unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let g = LatticeGeom::one_d(64, 0.1).unwrap();
    let spec = random_smooth_potential(&g, 2.0, 1.0, &mut rng);
    let phases = sample_phases(&spec, &g, 1000).unwrap();
    let p = WalkParams::One(WalkParams1D::continuum(1.0, 1.0, 0.1));
    let mut worst = 0.0f64;
    evolve_with(&random_state(g, &mut rng), 1000, &phases, &p, |s| {
        worst = worst.max((s.norm() - 1.0).abs());
    })
    .unwrap();
    outcome(worst <= 1e-12, format!("max |norm - 1| = {worst:.2e}"))
}

/// `max_j |psi'_j - e^{i q chi_j} psi_j|`.
fn equivariance(geom: LatticeGeom, n: usize, params: WalkParams, norm: DerivativeNormalization, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = params.charge();
    let spec = random_smooth_potential(&geom, 2.0, q, &mut rng);
    let phases = sample_phases(&spec, &geom, n).unwrap();
    let chi = GaugeFunction::Analytic(Arc::new(FourierField::random(&geom, 3, 6, 3.0, &mut rng)));
    let chi_s = chi.sample(&geom, n + 1).unwrap();
    let moved = gauge_transform_with(&phases, &chi, q, norm).unwrap();
    let s = random_state(geom, &mut rng);
    let a = evolve(&s, n, &phases, &params).unwrap();
    let b = evolve(&s.with_local_phase(chi_s.slice(0), q).unwrap(), n, &moved, &params).unwrap();
    a.iter()
        .zip(&b)
        .enumerate()
        .map(|(j, (x, y))| x.with_local_phase(chi_s.slice(j), q).unwrap().max_abs_diff(y))
        .fold(0.0, f64::max)
}

fn equivariance_1d() -> Outcome {
    let g = LatticeGeom::one_d(64, 0.1).unwrap();
    let p = WalkParams::One(WalkParams1D::continuum(1.0, 0.8, 0.1));
    let good = equivariance(g, 200, p, DerivativeNormalization::Averaged, 102);
    let bad = equivariance(g, 200, p, DerivativeNormalization::Plain, 102);
    outcome(
        good <= 1e-12 && bad >= 1e-2,
        format!("defect {good:.2e}, without the 1/2 factor {bad:.2e}"),
    )
}

fn equivariance_2d() -> Outcome {
    let g = LatticeGeom::two_d(32, 32, 0.1).unwrap();
    let p = WalkParams::Two(WalkParams2D::continuum(1.0, 0.8, 0.1));
    let good = equivariance(g, 100, p, DerivativeNormalization::Averaged, 103);
    let bad = equivariance(g, 100, p, DerivativeNormalization::Plain, 103);
    outcome(
        good <= 1e-12 && bad >= 1e-2,
        format!("defect {good:.2e}, without the 1/2 factor {bad:.2e}"),
    )
}

fn tensor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    // lattice units: eps_A = 1
    let g = LatticeGeom::two_d(16, 16, 1.0).unwrap();
    let mut worst_pure = 0.0f64;
    let mut worst_inv = 0.0f64;
    for _ in 0..5 {
        let chi = random_field(g, 17, 3.0, &mut rng);
        let pure = LatticeGaugeField::pure_gauge(&chi, 1.0).unwrap();
        worst_pure = worst_pure.max(field_tensor(&pure).unwrap().max_abs());
        let spec = random_smooth_potential(&g, 2.0, 1.0, &mut rng);
        let a = LatticeGaugeField::from_potential(&spec, &g, 16).unwrap();
        let b = a.gauge_transformed(&GaugeFunction::Sampled(chi)).unwrap();
        let d = field_tensor(&a).unwrap().max_abs_diff(&field_tensor(&b).unwrap());
        worst_inv = worst_inv.max(d);
    }
    outcome(
        worst_pure <= 1e-13 && worst_inv <= 1e-13,
        format!("pure gauge {worst_pure:.2e}, invariance {worst_inv:.2e}"),
    )
}

fn continuity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst = 0.0f64;
    let mut drift = 0.0f64;
    for eps in [0.25, 0.1] {
        for mass in [0.0, 1.0] {
            let g = LatticeGeom::two_d(64, 64, eps).unwrap();
            let spec = random_smooth_potential(&g, 2.0, 1.0, &mut rng).with_eps_a(eps);
            let phases = sample_phases(&spec, &g, 100).unwrap();
            let p2 = WalkParams2D::continuum(mass, 1.0, eps);
            let traj = evolve(&random_state(g, &mut rng), 100, &phases, &WalkParams::Two(p2)).unwrap();
            for j in (2..=98).step_by(2) {
                let r = continuity_residual([&traj[j - 2], &traj[j], &traj[j + 2]], &phases, &p2).unwrap();
                worst = worst.max(r.max_abs);
            }
            let n0 = traj[0].norm_sqr();
            drift = traj.iter().map(|s| (s.norm_sqr() - n0).abs()).fold(drift, f64::max);
        }
    }
    outcome(
        worst <= 1e-12 && drift <= 1e-12,
        format!("residual {worst:.2e}, probability drift {drift:.2e}"),
    )
}

fn identities() -> Outcome {
    let mut lambda = 0.0f64;
    for eps in [0.25, 0.1, 0.01] {
        for mass in [0.0, 1.0, 3.0] {
            let p = WalkParams2D::continuum(mass, 1.0, eps);
            lambda = lambda.max(m_set(p.theta1, p.theta2).unwrap().lambda_residual());
        }
    }
    let g = gammas(Dimension::Two);
    let m = m_set(FRAC_PI_2, -FRAC_PI_2).unwrap();
    let sums = m
        .mx_sum()
        .max_abs_diff(&(g[0] * g[1]))
        .max(m.my_sum().max_abs_diff(&(g[0] * g[2])));
    outcome(
        lambda <= 1e-13 && sums <= 1e-15,
        format!("lambda relations {lambda:.2e}, sums {sums:.2e}"),
    )
}

fn dense_oracle() -> Outcome {
    let results = compare_all(100, 107);
    let worst = results.iter().map(|r| r.worst).fold(0.0, f64::max);
    let cases: usize = results.iter().map(|r| r.cases).sum();
    outcome(worst <= 1e-14, format!("{cases} operator applications, worst {worst:.2e}"))
}

fn study_1d() -> ConvergenceSetup {
    let l = 4.0;
    ConvergenceSetup {
        dim: Dimension::One,
        length: l,
        mass: 1.0,
        charge: 1.0,
        potential: PotentialSpec::new(
            zero_fn(),
            shared(move |_, x: f64, _| (TAU * x / l).sin()),
            zero_fn(),
            1.0,
        ),
        packet: GaussianPacket {
            center: [l / 2.0, 0.0],
            width: 0.25,
            momentum: [2.0 * TAU / l, 0.0],
            polarization: [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)],
        },
        t_final: 1.0,
        epsilons: (4..=7).map(|k| 0.5f64.powi(k)).collect(),
        reference_points: 512,
        reference_dt: 0.5f64.powi(10),
    }
}

fn study_2d() -> ConvergenceSetup {
    let l = 2.0;
    ConvergenceSetup {
        dim: Dimension::Two,
        length: l,
        mass: 1.0,
        charge: 1.0,
        potential: PotentialSpec::new(
            shared(move |_, x: f64, _| 0.5 * (TAU * x / l).cos()),
            shared(move |_, _, y: f64| (TAU * y / l).sin()),
            shared(move |_, x: f64, _| 0.5 * (TAU * x / l).cos()),
            1.0,
        ),
        packet: GaussianPacket {
            center: [l / 2.0, l / 2.0],
            width: 0.15,
            momentum: [TAU / l, TAU / l],
            polarization: [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)],
        },
        t_final: 0.5,
        epsilons: (4..=7).map(|k| 0.5f64.powi(k)).collect(),
        reference_points: 256,
        reference_dt: 0.5f64.powi(9),
    }
}

fn describe(r: &ConvergenceReport) -> String {
    let errs: Vec<String> = r.rows.iter().map(|row| format!("{:.3e}", row.l2_error)).collect();
    format!("slope {:.4}, errors [{}]", r.slope, errs.join(", "))
}

fn convergence() -> Outcome {
    let a = convergence_study(&study_1d()).unwrap();
    let b = convergence_study(&study_2d()).unwrap();
    let ok = |r: &ConvergenceReport| r.monotone && (0.8..=1.2).contains(&r.slope);
    outcome(ok(&a) && ok(&b), format!("1D {}; 2D {}", describe(&a), describe(&b)))
}

fn parser() -> Outcome {
    let golden: [(&str, f64); 10] = [
        ("1+2*3", 7.0),
        ("2^3^2", 512.0),
        ("1-2-3", -4.0),
        ("2/4/2", 0.25),
        ("-2^2", 4.0),
        ("-(2^2)", -4.0),
        ("(1+2)*3", 9.0),
        ("2*-3", -6.0),
        ("x - -y", 3.0),
        ("cos(pi)", -1.0),
    ];
    let mut failures = Vec::new();
    for (src, want) in golden {
        match parse(src).and_then(|e| Ok(e.eval(0.0, 1.0, 2.0))) {
            Ok(Ok(v)) if v == want => {}
            other => failures.push(format!("{src} -> {other:?}")),
        }
    }
    for (src, offset) in [("sin(", 4), ("(1", 2), ("1)", 1), ("foo", 0), ("x +* y", 3), ("2 3", 2)] {
        match parse(src) {
            Err(e) if e.offset == offset => {}
            other => failures.push(format!("{src} -> {other:?}")),
        }
    }
    // fuzz: raw bytes and grammar-token soup; a panic aborts the test
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let tokens = [
        "x", "y", "t", "pi", "1", "0", "2.5", "1e308", "1e-5", "+", "-", "*", "/", "^", "(", ")", "sin",
        "cos", "exp", "tanh", " ", ".", "e", "E",
    ];
    let mut parsed = 0usize;
    for i in 0..100_000 {
        let src: String = if i % 2 == 0 {
            let len = rng.gen_range(0..24);
            (0..len).map(|_| rng.gen_range(0u8..128) as char).collect()
        } else {
            let len = rng.gen_range(0..16);
            (0..len).map(|_| tokens[rng.gen_range(0..tokens.len())]).collect()
        };
        if let Ok(e) = parse(&src) {
            parsed += 1;
            let _ = e.eval(rng.gen(), rng.gen(), rng.gen());
            let _ = parse(&e.to_string()).expect("display output reparses");
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("golden cases ok, 100000 fuzz inputs ({parsed} parsed) without a crash")
        } else {
            failures.join("; ")
        },
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{
  "dimension": 2, "extents": [16, 16], "spacing": 0.25, "mass": 1.0, "charge": 1.0,
  "coin": "continuum-family",
  "potential": {"A0": "0.5*cos(pi*x/2)", "A1": "sin(pi*y/2 + t)", "A2": "0.3*sin(pi*x/2)"},
  "initial_state": {"random": {}}, "n_steps": 20, "snapshot_every": 5
}"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qwgauge"))
            .args(["simulate", "--quiet", "--seed", "42", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        files(&out)
    };
    let (a, b) = (run("a"), run("b"));
    let bytes: usize = a.iter().map(|(_, d)| d.len()).sum();
    outcome(
        !a.is_empty() && a == b,
        format!("{} files, {bytes} bytes compared", a.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("unitarity", Some(Duration::from_secs(1)), unitarity),
        ("1D gauge equivariance", None, equivariance_1d),
        ("2D gauge equivariance", None, equivariance_2d),
        ("field tensor", None, tensor),
        ("continuity", Some(Duration::from_secs(10)), continuity),
        ("coin identities", None, identities),
        ("dense oracle", None, dense_oracle),
        ("continuum limit", Some(Duration::from_secs(60)), convergence),
        ("parser", None, parser),
        ("determinism", None, determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let o = timed(budget, run);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
