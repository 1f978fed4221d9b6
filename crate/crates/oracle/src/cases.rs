//! Random kernel-versus-matrix comparisons on lattices with at most 32 amplitudes.

use num_complex::Complex64 as C64;
use qwgauge::gauge::GaugePhases;
use qwgauge::lattice::{Axis, LatticeGeom, WalkerState};
use qwgauge::random::{random_phases, random_state};
use qwgauge::walk::{self, WalkParams2D, WalkParams1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Dense;

/// Largest kernel-versus-matrix deviation seen for one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorResult {
    pub operator: &'static str,
    pub cases: usize,
    pub worst: f64,
}

fn random_geom(rng: &mut ChaCha8Rng) -> LatticeGeom {
    if rng.gen_bool(0.5) {
        LatticeGeom::one_d(rng.gen_range(2..=16), 1.0).unwrap()
    } else {
        loop {
            let (nx, ny) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
            if nx * ny <= 16 {
                return LatticeGeom::two_d(nx, ny, 1.0).unwrap();
            }
        }
    }
}

fn random_2d(rng: &mut ChaCha8Rng) -> LatticeGeom {
    let (nx, ny) = loop {
        let p = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        if p.0 * p.1 <= 16 {
            break p;
        }
    };
    LatticeGeom::two_d(nx, ny, 1.0).unwrap()
}

fn deviation(kernel: &WalkerState, matrix: &Dense, input: &WalkerState) -> f64 {
    let expected = matrix.apply(input.amplitudes());
    kernel
        .amplitudes()
        .iter()
        .zip(&expected)
        .map(|(a, b): (&C64, &C64)| (a - b).norm())
        .fold(0.0, f64::max)
}

fn phase_slices(p: &GaugePhases, label: usize, axis: Axis) -> (Vec<f64>, Vec<f64>) {
    (p.alpha(label).unwrap().to_vec(), p.xi(axis, label).unwrap().to_vec())
}

/// Runs `cases` random inputs through every evolution operator.
pub fn compare_all(cases: usize, seed: u64) -> Vec<OperatorResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = vec![
        OperatorResult { operator: "coin", cases: 0, worst: 0.0 },
        OperatorResult { operator: "gauged_shift", cases: 0, worst: 0.0 },
        OperatorResult { operator: "step_1d", cases: 0, worst: 0.0 },
        OperatorResult { operator: "substep_2d", cases: 0, worst: 0.0 },
        OperatorResult { operator: "step_2d", cases: 0, worst: 0.0 },
    ];
    let mut record = |k: usize, d: f64| {
        results[k].cases += 1;
        results[k].worst = results[k].worst.max(d);
    };
    for _ in 0..cases {
        // coin and shift on any geometry
        let g = random_geom(&mut rng);
        let s = random_state(g, &mut rng);
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let c = qwgauge::lattice::coin_matrix(theta).unwrap();
        record(0, deviation(&s.apply_coin(&c), &crate::coin(&g, theta), &s));

        let axis = if g.dim() == qwgauge::lattice::Dimension::Two && rng.gen_bool(0.5) {
            Axis::Y
        } else {
            Axis::X
        };
        let bm: Vec<f64> = (0..g.sites()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let bp: Vec<f64> = (0..g.sites()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let out = walk::gauged_shift(&s, &bm, &bp, axis).unwrap();
        record(1, deviation(&out, &crate::shift(&g, &bm, &bp, axis), &s));

        // 1D step
        let g1 = LatticeGeom::one_d(rng.gen_range(2..=16), 1.0).unwrap();
        let phases = random_phases(&g1, 3, &mut rng);
        let mut s1 = random_state(g1, &mut rng);
        let label = rng.gen_range(1..=3);
        s1.set_time_index(label - 1);
        let theta = rng.gen_range(-3.0..3.0);
        let out = walk::step_1d(&s1, &phases, &WalkParams1D::with_angle(theta, 1.0)).unwrap();
        let (a, x) = phase_slices(&phases, label, Axis::X);
        record(2, deviation(&out, &crate::step_1d(&g1, &a, &x, theta), &s1));

        // 2D substeps and steps
        let g2 = random_2d(&mut rng);
        let phases = random_phases(&g2, 4, &mut rng);
        let params = WalkParams2D::with_angles(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 1.0);
        let mut s2 = random_state(g2, &mut rng);
        let j = rng.gen_range(0..4usize);
        s2.set_time_index(j);
        let axis = qwgauge::gauge::substep_axis(j);
        let out = walk::substep_2d(&s2, axis, &phases, &params).unwrap();
        let (a, x) = phase_slices(&phases, j + 1, axis);
        let m = crate::substep_2d(&g2, &a, &x, axis, params.angle(axis));
        record(3, deviation(&out, &m, &s2));

        let j = 2 * rng.gen_range(0..2usize);
        s2.set_time_index(j);
        let out = walk::step_2d(&s2, &phases, &params).unwrap();
        let (a1, x1) = phase_slices(&phases, j + 1, Axis::X);
        let (a2, x2) = phase_slices(&phases, j + 2, Axis::Y);
        let m = crate::step_2d(&g2, (&a1, &x1), (&a2, &x2), params.theta1, params.theta2);
        record(4, deviation(&out, &m, &s2));
    }
    results
}
