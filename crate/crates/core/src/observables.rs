//! Probability density, lattice currents and the continuity residual.
//!
//! In 2D the currents are defined at even time indices `j` (whole steps). `J^x` couples
//! the amplitudes at `y - 1` and `y + 1` through the `y`-substep phases of label `j`;
//! `J^y` couples `x - 1` and `x + 1` through the `x`-substep phases of label `j + 1`.
//! The residual
//!
//! ```text
//! 1/2 [J0_{j+2} - J0_{j-2}] + 1/2 [Jx(x+1) - Jx(x-1)] + 1/2 [Jy(y+1) - Jy(y-1)]
//! ```
//!
//! vanishes identically along any trajectory of the 2D walk.
//!
//! In 1D the walk has an exact one-step conservation law with the link flux
//! `J(p) = |(C psi_j)_R(p)|^2 - |(C psi_j)_L(p+1)|^2` through the link `p -> p+1`:
//! `J0_{j+1}(p) - J0_j(p) + J(p) - J(p-1) = 0`.

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::gauge::GaugePhases;
use crate::lattice::{coin_matrix, Axis, Dimension, LatticeGeom, Mat2, WalkerState};
use crate::walk::{WalkParams1D, WalkParams2D};
use crate::C64;

/// Largest imaginary part tolerated in a current before it is reported as a stencil bug.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// `J0(s) = |psi_R(s)|^2 + |psi_L(s)|^2`.
pub fn probability_density(state: &WalkerState) -> Vec<f64> {
    state
        .amplitudes()
        .chunks_exact(2)
        .map(|p| p[0].norm_sqr() + p[1].norm_sqr())
        .collect()
}

pub fn total_probability(state: &WalkerState) -> f64 {
    probability_density(state).iter().sum()
}

/// Change of total probability between two states.
pub fn probability_drift(before: &WalkerState, after: &WalkerState) -> f64 {
    (total_probability(after) - total_probability(before)).abs()
}

/// Coin-space matrices entering the 2D currents, for angles `(theta1, theta2)`.
///
/// `m_rx = Lambda_R C(theta1)`, `m_ly = Lambda_L C(theta2)` and so on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MSet {
    pub theta1: f64,
    pub theta2: f64,
    pub m_rx: Mat2,
    pub m_lx: Mat2,
    pub m_ry: Mat2,
    pub m_ly: Mat2,
    pub mx: [Mat2; 4],
    pub my: [Mat2; 4],
    pub m_lambda: [Mat2; 4],
}

/// Assembles every matrix of the current stencils and checks the four linear relations
/// tying `m_lambda` to the third and fourth `mx`/`my` matrices.
pub fn m_set(theta1: f64, theta2: f64) -> Result<MSet> {
    let cx = *coin_matrix(theta1)?.matrix();
    let cy = *coin_matrix(theta2)?.matrix();
    let (lr, ll) = (Mat2::proj_r(), Mat2::proj_l());
    let (m_rx, m_lx, m_ry, m_ly) = (lr * cx, ll * cx, lr * cy, ll * cy);
    let d = |m: Mat2| m.dagger();

    let mx = [
        m_ry * m_rx * d(m_rx) * d(m_ly),
        m_ly * m_rx * d(m_rx) * d(m_ry),
        ll * cy * lr * d(cy) * ll,
        lr * cy * lr * d(cy) * lr - d(cx) * ll * cx,
    ];
    let my = [
        d(m_lx) * d(m_ry) * m_ry * m_rx,
        d(m_rx) * d(m_ry) * m_ry * m_lx,
        d(cx) * ll * d(cy) * lr * cy * ll * cx,
        d(cx) * lr * d(cy) * lr * cy * lr * cx - ll,
    ];
    let m_lambda = [
        d(m_lx) * d(m_ry) * m_ry * m_lx - m_ly * m_rx * d(m_rx) * d(m_ly),
        d(m_lx) * d(m_ly) * m_ly * m_lx - m_ry * m_rx * d(m_rx) * d(m_ry),
        d(m_rx) * d(m_ry) * m_ry * m_rx - m_ly * m_lx * d(m_lx) * d(m_ly),
        d(m_rx) * d(m_ly) * m_ly * m_rx - m_ry * m_lx * d(m_lx) * d(m_ry),
    ];
    let set = MSet {
        theta1,
        theta2,
        m_rx,
        m_lx,
        m_ry,
        m_ly,
        mx,
        my,
        m_lambda,
    };
    let r = set.lambda_residual();
    if !(r <= 1e-12) {
        return Err(Error::Consistency(format!(
            "Lambda relations violated by {r:e} at angles ({theta1}, {theta2})"
        )));
    }
    Ok(set)
}

impl MSet {
    /// Largest entry deviation in
    /// `ML1 = My3 - Mx3`, `ML2 = -My3 - Mx4`, `ML3 = My4 + Mx3`, `ML4 = -My4 + Mx4`.
    pub fn lambda_residual(&self) -> f64 {
        let (mx, my, ml) = (&self.mx, &self.my, &self.m_lambda);
        [
            ml[0].max_abs_diff(&(my[2] - mx[2])),
            ml[1].max_abs_diff(&(-my[2] - mx[3])),
            ml[2].max_abs_diff(&(my[3] + mx[2])),
            ml[3].max_abs_diff(&(-my[3] + mx[3])),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn mx_sum(&self) -> Mat2 {
        self.mx[0] + self.mx[1] + self.mx[2] + self.mx[3]
    }

    pub fn my_sum(&self) -> Mat2 {
        self.my[0] + self.my[1] + self.my[2] + self.my[3]
    }
}

/// Probability density and currents at one (even) time index of a 2D walk.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub geom: LatticeGeom,
    pub time_index: usize,
    pub t: f64,
    pub j0: Vec<f64>,
    pub jx: Vec<f64>,
    pub jy: Vec<f64>,
}

fn current_label_check(state: &WalkerState, phases: &GaugePhases, label: usize) -> Result<()> {
    let j = state.time_index();
    if state.geom().dim() != Dimension::Two {
        return Err(Error::InvalidArgument("2D currents need a 2D state".into()));
    }
    if j % 2 != 0 || j == 0 {
        return Err(Error::Contract(format!(
            "currents are defined at even time indices >= 2, got {j}"
        )));
    }
    if state.geom() != phases.geom() {
        return Err(Error::InvalidArgument("phases live on a different lattice".into()));
    }
    if !phases.has_label(label) {
        return Err(Error::Domain(format!(
            "current at time index {j} needs phase label {label}"
        )));
    }
    Ok(())
}

fn take_real(values: Vec<C64>, what: &str, j: usize) -> Result<Vec<f64>> {
    let worst = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if worst > IMAGINARY_TOL {
        return Err(Error::Consistency(format!(
            "{what} at time index {j} has imaginary residue {worst:e}"
        )));
    }
    Ok(values.into_iter().map(|v| v.re).collect())
}

/// Two-sided current stencil along `axis` (the axis whose amplitudes are coupled):
///
/// `e^{i phase} a+^dag M1 a- + e^{-i phase} a-^dag M2 a+ + a3^dag M3 a3 + a4^dag M4 a4`,
/// where `a3` is the `+` neighbour when `m3_on_plus` and the `-` one otherwise.
fn stencil(
    state: &WalkerState,
    axis: Axis,
    phase: impl Fn(usize) -> f64,
    m: &[Mat2; 4],
    m3_on_plus: bool,
) -> Vec<C64> {
    let geom = state.geom();
    (0..geom.sites())
        .map(|s| {
            let up = state.spinor(geom.neighbor(s, axis, 1));
            let dn = state.spinor(geom.neighbor(s, axis, -1));
            let ph = C64::from_polar(1.0, phase(s));
            let cross = ph * m[0].sandwich(up, dn) + ph.conj() * m[1].sandwich(dn, up);
            let (a3, a4) = if m3_on_plus { (up, dn) } else { (dn, up) };
            cross + m[2].sandwich(a3, a3) + m[3].sandwich(a4, a4)
        })
        .collect()
}

/// `J^x` at the state's (even) time index `j`, using the `y`-substep phases of label `j`.
pub fn current_x(state: &WalkerState, phases: &GaugePhases, m: &MSet) -> Result<Vec<f64>> {
    let j = state.time_index();
    current_label_check(state, phases, j)?;
    let geom = *state.geom();
    let (bm, bp) = phases.betas(j, Axis::Y)?;
    let values = stencil(
        state,
        Axis::Y,
        |s| bm[s] + bp[geom.neighbor(s, Axis::Y, -1)],
        &m.mx,
        false,
    );
    take_real(values, "J^x", j)
}

/// `J^y` at the state's (even) time index `j`, using the `x`-substep phases of label `j + 1`.
pub fn current_y(state: &WalkerState, phases: &GaugePhases, m: &MSet) -> Result<Vec<f64>> {
    let j = state.time_index();
    current_label_check(state, phases, j + 1)?;
    let geom = *state.geom();
    let (bm, bp) = phases.betas(j + 1, Axis::X)?;
    let values = stencil(
        state,
        Axis::X,
        |s| bp[s] + bm[geom.neighbor(s, Axis::X, -1)],
        &m.my,
        true,
    );
    take_real(values, "J^y", j)
}

/// `J0`, `J^x` and `J^y` at the state's time index.
pub fn currents(state: &WalkerState, phases: &GaugePhases, params: &WalkParams2D) -> Result<CurrentField> {
    let m = m_set(params.theta1, params.theta2)?;
    Ok(CurrentField {
        geom: *state.geom(),
        time_index: state.time_index(),
        t: state.geom().time_of(state.time_index()),
        j0: probability_density(state),
        jx: current_x(state, phases, &m)?,
        jy: current_y(state, phases, &m)?,
    })
}

/// Symmetric half-difference. Along time, slice `k` of the result is
/// `(f_{k+2} - f_k) / 2` (centred on input slice `k + 1`); in space it is
/// `(f(p+1) - f(p-1)) / 2` with periodic wrap.
pub fn symmetric_difference(field: &SpaceTimeField, axis: Axis) -> Result<SpaceTimeField> {
    let geom = *field.geom();
    if axis == Axis::T {
        let n = field.n_slices();
        if n < 3 {
            return Err(Error::Domain(format!(
                "symmetric time difference needs 3 slices, got {n}"
            )));
        }
        let slices = (0..n - 2)
            .map(|k| {
                field
                    .slice(k + 2)
                    .iter()
                    .zip(field.slice(k))
                    .map(|(a, b)| 0.5 * (a - b))
                    .collect()
            })
            .collect();
        return SpaceTimeField::new(geom, slices);
    }
    if !geom.has_axis(axis) {
        return Err(Error::InvalidArgument(format!("no axis {axis} on this lattice")));
    }
    let slices = field
        .slices()
        .iter()
        .map(|f| spatial_half_difference(&geom, f, axis))
        .collect();
    SpaceTimeField::new(geom, slices)
}

fn spatial_half_difference(geom: &LatticeGeom, f: &[f64], axis: Axis) -> Vec<f64> {
    (0..geom.sites())
        .map(|s| 0.5 * (f[geom.neighbor(s, axis, 1)] - f[geom.neighbor(s, axis, -1)]))
        .collect()
}

/// Outcome of a continuity check at one time index.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub time_index: usize,
    pub t: f64,
    pub j0: Vec<f64>,
    pub jx: Vec<f64>,
    /// Empty in 1D.
    pub jy: Vec<f64>,
    pub residual: Vec<f64>,
    pub max_abs: f64,
    pub probability_drift: f64,
}

/// 2D residual from the states at `j - 2`, `j`, `j + 2` (`j` even).
pub fn continuity_residual(
    window: [&WalkerState; 3],
    phases: &GaugePhases,
    params: &WalkParams2D,
) -> Result<ContinuityReport> {
    let [prev, cur, next] = window;
    let j = cur.time_index();
    if j < 2 || prev.time_index() + 2 != j || next.time_index() != j + 2 {
        return Err(Error::Contract(format!(
            "continuity window must hold time indices j-2, j, j+2; got {}, {}, {}",
            prev.time_index(),
            j,
            next.time_index()
        )));
    }
    let geom = *cur.geom();
    let c = currents(cur, phases, params)?;
    let before = probability_density(prev);
    let after = probability_density(next);
    let dx = spatial_half_difference(&geom, &c.jx, Axis::X);
    let dy = spatial_half_difference(&geom, &c.jy, Axis::Y);
    let residual: Vec<f64> = (0..geom.sites())
        .map(|s| 0.5 * (after[s] - before[s]) + dx[s] + dy[s])
        .collect();
    Ok(report(j, geom.time_of(j), c.j0, c.jx, c.jy, residual, prev, next))
}

#[allow(clippy::too_many_arguments)]
fn report(
    time_index: usize,
    t: f64,
    j0: Vec<f64>,
    jx: Vec<f64>,
    jy: Vec<f64>,
    residual: Vec<f64>,
    before: &WalkerState,
    after: &WalkerState,
) -> ContinuityReport {
    let max_abs = residual.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    ContinuityReport {
        time_index,
        t,
        j0,
        jx,
        jy,
        residual,
        max_abs,
        probability_drift: probability_drift(before, after),
    }
}

/// 1D link flux `J(p)` through `p -> p+1` during the step leaving `state`.
pub fn link_current_1d(state: &WalkerState, params: &WalkParams1D) -> Result<Vec<f64>> {
    let geom = *state.geom();
    if geom.dim() != Dimension::One {
        return Err(Error::InvalidArgument("link current is defined for 1D states".into()));
    }
    let coined = state.apply_coin(&coin_matrix(params.theta)?);
    Ok((0..geom.sites())
        .map(|p| {
            let right = coined.spinor(p)[0].norm_sqr();
            let left = coined.spinor(geom.neighbor(p, Axis::X, 1))[1].norm_sqr();
            right - left
        })
        .collect())
}

/// 1D one-step residual `J0_{j+1} - J0_j + J(p) - J(p-1)` from `psi_j`, `psi_{j+1}`.
pub fn continuity_residual_1d(
    cur: &WalkerState,
    next: &WalkerState,
    params: &WalkParams1D,
) -> Result<ContinuityReport> {
    if next.time_index() != cur.time_index() + 1 {
        return Err(Error::Contract(format!(
            "1D continuity needs consecutive time indices, got {} and {}",
            cur.time_index(),
            next.time_index()
        )));
    }
    let geom = *cur.geom();
    let flux = link_current_1d(cur, params)?;
    let j0 = probability_density(cur);
    let after = probability_density(next);
    let residual = (0..geom.sites())
        .map(|p| after[p] - j0[p] + flux[p] - flux[geom.neighbor(p, Axis::X, -1)])
        .collect();
    let j = cur.time_index();
    Ok(report(j, geom.time_of(j), j0, flux, Vec::new(), residual, cur, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{gauge_transform, sample_phases, GaugeFunction};
    use crate::lattice::Coin;
    use crate::random::{random_field, random_phases, random_smooth_potential, random_state};
    use crate::walk::{evolve, WalkParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn density_examples() {
        let g = LatticeGeom::two_d(3, 4, 1.0).unwrap();
        let amp = vec![c(1.0, 0.0); 24];
        let mut s = WalkerState::from_amplitudes(g, amp, 0).unwrap();
        s.normalize().unwrap();
        for v in probability_density(&s) {
            assert!((v - 1.0 / 12.0).abs() < 1e-15);
        }
        let s = WalkerState::localized(g, 1, 2, Coin::R).unwrap();
        let d = probability_density(&s);
        assert_eq!(d[g.site(1, 2)], 1.0);
        assert_eq!(d.iter().sum::<f64>(), 1.0);
        let s = random_state(g, &mut ChaCha8Rng::seed_from_u64(1));
        assert!((total_probability(&s) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn m_sums_at_quarter_angles() {
        let m = m_set(FRAC_PI_2, -FRAC_PI_2).unwrap();
        let gx = Mat2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0));
        let gy = Mat2::diag(c(1.0, 0.0), c(-1.0, 0.0));
        assert!(m.mx_sum().max_abs_diff(&gx) <= 1e-15);
        assert!(m.my_sum().max_abs_diff(&gy) <= 1e-15);
    }

    #[test]
    fn lambda_relations_for_many_angles() {
        for (a, b) in [(FRAC_PI_2 - 0.3, -FRAC_PI_2 - 0.3), (0.4, 1.3), (-2.0, 0.1)] {
            assert!(m_set(a, b).unwrap().lambda_residual() < 1e-13);
        }
    }

    #[test]
    fn zero_state_gives_zero_currents() {
        let g = LatticeGeom::two_d(4, 4, 1.0).unwrap();
        let mut s = WalkerState::zeros(g);
        s.set_time_index(2);
        let phases = GaugePhases::zero(g, 4);
        let m = m_set(FRAC_PI_2, -FRAC_PI_2).unwrap();
        assert!(current_x(&s, &phases, &m).unwrap().iter().all(|&v| v == 0.0));
        assert!(current_y(&s, &phases, &m).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn currents_need_even_time() {
        let g = LatticeGeom::two_d(4, 4, 1.0).unwrap();
        let mut s = WalkerState::zeros(g);
        s.set_time_index(3);
        let phases = GaugePhases::zero(g, 6);
        let m = m_set(FRAC_PI_2, -FRAC_PI_2).unwrap();
        assert!(matches!(current_x(&s, &phases, &m), Err(Error::Contract(_))));
    }

    #[test]
    fn symmetric_difference_examples() {
        let g = LatticeGeom::one_d(5, 0.1).unwrap();
        let constant = SpaceTimeField::from_indices(g, 4, |_, _, _| 3.0);
        assert_eq!(symmetric_difference(&constant, Axis::T).unwrap().max_abs(), 0.0);
        assert_eq!(symmetric_difference(&constant, Axis::X).unwrap().max_abs(), 0.0);
        // f(t) = t sampled every eps: half difference is eps
        let eps = 0.1;
        let linear = SpaceTimeField::from_indices(g, 3, |j, _, _| j as f64 * eps);
        let d = symmetric_difference(&linear, Axis::T).unwrap();
        assert!(d.slice(0).iter().all(|v| (v - eps).abs() < 1e-15));
        assert!(symmetric_difference(&SpaceTimeField::zeros(g, 2), Axis::T).is_err());
    }

    #[test]
    fn symmetric_difference_is_second_order() {
        // f = t^2: (f(t+h) - f(t-h)) / 2 = 2 t h exactly; use exp to see O(h^3) truncation
        let g = LatticeGeom::one_d(2, 1.0).unwrap();
        let err = |h: f64| {
            let t0 = 0.7;
            let f = SpaceTimeField::from_indices(g, 3, |j, _, _| (t0 + (j as f64 - 1.0) * h).exp());
            let d = symmetric_difference(&f, Axis::T).unwrap().get(0, 0) / h;
            (d - t0.exp()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    fn run_2d(seed: u64, free: bool, mass: f64) -> (Vec<WalkerState>, GaugePhases, WalkParams2D) {
        let g = LatticeGeom::two_d(7, 6, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 12;
        let phases = if free {
            GaugePhases::zero(g, n + 1)
        } else {
            sample_phases(&random_smooth_potential(&g, 2.0, 1.0, &mut rng), &g, n + 1).unwrap()
        };
        let p = WalkParams2D::continuum(mass, 1.0, 0.25);
        let s = random_state(g, &mut rng);
        (evolve(&s, n, &phases, &WalkParams::Two(p)).unwrap(), phases, p)
    }

    #[test]
    fn two_d_continuity_is_exact() {
        for (free, mass) in [(true, 0.0), (false, 1.0), (false, 0.0)] {
            let (traj, phases, p) = run_2d(5, free, mass);
            for j in (2..=10).step_by(2) {
                let r = continuity_residual([&traj[j - 2], &traj[j], &traj[j + 2]], &phases, &p)
                    .unwrap();
                assert!(r.max_abs < 1e-14, "j={j} residual {}", r.max_abs);
                assert!(r.probability_drift < 1e-13);
            }
        }
    }

    #[test]
    fn continuity_holds_for_unstructured_phases_and_angles() {
        let g = LatticeGeom::two_d(5, 4, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let phases = random_phases(&g, 9, &mut rng);
        let p = WalkParams2D::with_angles(0.4, 1.3, 1.0);
        let traj = evolve(&random_state(g, &mut rng), 8, &phases, &WalkParams::Two(p)).unwrap();
        let r = continuity_residual([&traj[2], &traj[4], &traj[6]], &phases, &p).unwrap();
        assert!(r.max_abs < 1e-14);
    }

    #[test]
    fn window_misalignment_is_rejected() {
        let (traj, phases, p) = run_2d(1, true, 1.0);
        assert!(matches!(
            continuity_residual([&traj[1], &traj[4], &traj[6]], &phases, &p),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn currents_are_gauge_invariant() {
        let (traj, phases, p) = run_2d(3, false, 1.0);
        let g = *phases.geom();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let chi = random_field(g, phases.n_labels() + 1, 2.0, &mut rng);
        let phases2 = gauge_transform(&phases, &GaugeFunction::Sampled(chi.clone()), p.charge).unwrap();
        let s0 = traj[0].with_local_phase(chi.slice(0), p.charge).unwrap();
        let traj2 = evolve(&s0, 12, &phases2, &WalkParams::Two(p)).unwrap();
        for j in [2, 4, 8] {
            let a = currents(&traj[j], &phases, &p).unwrap();
            let b = currents(&traj2[j], &phases2, &p).unwrap();
            for (u, v) in a.jx.iter().zip(&b.jx).chain(a.jy.iter().zip(&b.jy)) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_d_link_flux_is_exact() {
        let g = LatticeGeom::one_d(17, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phases = sample_phases(&random_smooth_potential(&g, 3.0, 1.0, &mut rng), &g, 10).unwrap();
        let p = WalkParams1D::continuum(1.0, 1.0, 0.1);
        let traj = evolve(&random_state(g, &mut rng), 10, &phases, &WalkParams::One(p)).unwrap();
        for j in 0..10 {
            let r = continuity_residual_1d(&traj[j], &traj[j + 1], &p).unwrap();
            assert!(r.max_abs < 1e-15);
        }
    }
}
