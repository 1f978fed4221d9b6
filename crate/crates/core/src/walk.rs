//! Gauged walk steps: the 1D step, the alternating 2D substeps and trajectory evolution.
//!
//! Time indices count applications of [`advance`]: one per step in 1D, one per substep
//! in 2D. A state at index `j` is moved by the phases with label `j + 1`. In 2D the
//! substep leaving an even index is along `x` with angle `theta1`, the one leaving an
//! odd index along `y` with `theta2`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::gauge::{substep_axis, GaugePhases};
use crate::lattice::{Axis, CoinOperator, Dimension, WalkerState};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams1D {
    pub theta: f64,
    pub mass: f64,
    pub charge: f64,
    pub eps_m: f64,
}

impl WalkParams1D {
    /// Continuum-limit family: `theta = -2 eps_m m`.
    pub fn continuum(mass: f64, charge: f64, eps_m: f64) -> Self {
        WalkParams1D {
            theta: -2.0 * eps_m * mass,
            mass,
            charge,
            eps_m,
        }
    }

    /// Explicit coin angle; `mass` and `eps_m` are informational.
    pub fn with_angle(theta: f64, charge: f64) -> Self {
        WalkParams1D {
            theta,
            mass: 0.0,
            charge,
            eps_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams2D {
    pub theta1: f64,
    pub theta2: f64,
    pub mass: f64,
    pub charge: f64,
    pub eps_m: f64,
}

impl WalkParams2D {
    /// Continuum-limit family: `theta1 = pi/2 - eps_m m`, `theta2 = -pi/2 - eps_m m`.
    pub fn continuum(mass: f64, charge: f64, eps_m: f64) -> Self {
        WalkParams2D {
            theta1: FRAC_PI_2 - eps_m * mass,
            theta2: -FRAC_PI_2 - eps_m * mass,
            mass,
            charge,
            eps_m,
        }
    }

    pub fn with_angles(theta1: f64, theta2: f64, charge: f64) -> Self {
        WalkParams2D {
            theta1,
            theta2,
            mass: 0.0,
            charge,
            eps_m: 0.0,
        }
    }

    pub fn angle(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Y => self.theta2,
            _ => self.theta1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkParams {
    One(WalkParams1D),
    Two(WalkParams2D),
}

impl WalkParams {
    pub fn dim(&self) -> Dimension {
        match self {
            WalkParams::One(_) => Dimension::One,
            WalkParams::Two(_) => Dimension::Two,
        }
    }

    pub fn charge(&self) -> f64 {
        match self {
            WalkParams::One(p) => p.charge,
            WalkParams::Two(p) => p.charge,
        }
    }
}

impl From<WalkParams1D> for WalkParams {
    fn from(p: WalkParams1D) -> Self {
        WalkParams::One(p)
    }
}

impl From<WalkParams2D> for WalkParams {
    fn from(p: WalkParams2D) -> Self {
        WalkParams::Two(p)
    }
}

/// `out_R(p) = e^{i beta_-(p-1)} in_R(p-1)`, `out_L(p) = e^{-i beta_+(p)} in_L(p+1)`
/// along `axis`. Leaves the time index untouched.
pub fn gauged_shift(
    state: &WalkerState,
    beta_minus: &[f64],
    beta_plus: &[f64],
    axis: Axis,
) -> Result<WalkerState> {
    let geom = *state.geom();
    if !axis.is_spatial() || !geom.has_axis(axis) {
        return Err(Error::InvalidArgument(format!(
            "cannot shift along {axis} on this lattice"
        )));
    }
    if beta_minus.len() != geom.sites() || beta_plus.len() != geom.sites() {
        return Err(Error::InvalidArgument(format!(
            "shift phases must have {} entries",
            geom.sites()
        )));
    }
    let input = state.amplitudes();
    let mut out = vec![C64::new(0.0, 0.0); input.len()];
    for p in 0..geom.sites() {
        let back = geom.neighbor(p, axis, -1);
        let fwd = geom.neighbor(p, axis, 1);
        out[2 * p] = C64::from_polar(1.0, beta_minus[back]) * input[2 * back];
        out[2 * p + 1] = C64::from_polar(1.0, -beta_plus[p]) * input[2 * fwd + 1];
    }
    WalkerState::from_amplitudes(geom, out, state.time_index())
}

fn check_state(state: &WalkerState, phases: &GaugePhases, dim: Dimension) -> Result<usize> {
    if state.geom().dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "{dim:?} walk applied to a {:?} state",
            state.geom().dim()
        )));
    }
    if state.geom() != phases.geom() {
        return Err(Error::InvalidArgument(
            "phases were sampled on a different lattice".into(),
        ));
    }
    let label = state.time_index() + 1;
    if !phases.has_label(label) {
        return Err(Error::Contract(format!(
            "state at time index {} needs phase label {label}, phases cover 1..={}",
            state.time_index(),
            phases.n_labels()
        )));
    }
    Ok(label)
}

fn coin_then_shift(
    state: &WalkerState,
    phases: &GaugePhases,
    label: usize,
    axis: Axis,
    theta: f64,
) -> Result<WalkerState> {
    let coined = state.apply_coin(&CoinOperator::rotation(theta)?);
    let (minus, plus) = phases.betas(label, axis)?;
    let mut out = gauged_shift(&coined, &minus, &plus, axis)?;
    out.set_time_index(label);
    Ok(out)
}

/// One 1D step `S(alpha, xi) C(theta)` with the phases of label `j + 1`.
pub fn step_1d(
    state: &WalkerState,
    phases: &GaugePhases,
    params: &WalkParams1D,
) -> Result<WalkerState> {
    let label = check_state(state, phases, Dimension::One)?;
    coin_then_shift(state, phases, label, Axis::X, params.theta)
}

/// One 2D substep `S^(i)(alpha/2, xi^i) C(theta^i)` along `axis`, which must match the
/// parity of the state's time index.
pub fn substep_2d(
    state: &WalkerState,
    axis: Axis,
    phases: &GaugePhases,
    params: &WalkParams2D,
) -> Result<WalkerState> {
    let label = check_state(state, phases, Dimension::Two)?;
    let expected = substep_axis(state.time_index());
    if axis != expected {
        return Err(Error::Contract(format!(
            "time index {} is followed by a {expected} substep, not {axis}",
            state.time_index()
        )));
    }
    coin_then_shift(state, phases, label, axis, params.angle(axis))
}

/// Full 2D step: `x` substep then `y` substep, from an even time index.
pub fn step_2d(
    state: &WalkerState,
    phases: &GaugePhases,
    params: &WalkParams2D,
) -> Result<WalkerState> {
    if state.time_index() % 2 != 0 {
        return Err(Error::Contract(format!(
            "a full 2D step starts at an even time index, got {}",
            state.time_index()
        )));
    }
    let half = substep_2d(state, Axis::X, phases, params)?;
    substep_2d(&half, Axis::Y, phases, params)
}

/// Advances by one time index: a step in 1D, the substep selected by parity in 2D.
pub fn advance(state: &WalkerState, phases: &GaugePhases, params: &WalkParams) -> Result<WalkerState> {
    match params {
        WalkParams::One(p) => step_1d(state, phases, p),
        WalkParams::Two(p) => substep_2d(state, substep_axis(state.time_index()), phases, p),
    }
}

fn check_schedule(state0: &WalkerState, n: usize, phases: &GaugePhases) -> Result<()> {
    let needed = state0.time_index() + n;
    if phases.n_labels() < needed {
        return Err(Error::Domain(format!(
            "schedule underrun: {n} time indices from {} need labels up to {needed}, phases end at {}",
            state0.time_index(),
            phases.n_labels()
        )));
    }
    Ok(())
}

/// Trajectory `[psi_j0, ..., psi_{j0+n}]` over `n` time indices.
pub fn evolve(
    state0: &WalkerState,
    n: usize,
    phases: &GaugePhases,
    params: &WalkParams,
) -> Result<Vec<WalkerState>> {
    let mut out = Vec::with_capacity(n + 1);
    evolve_with(state0, n, phases, params, |s| out.push(s.clone()))?;
    Ok(out)
}

/// Streams every state of the trajectory (including `state0`) to `observe`
/// and returns the final state.
pub fn evolve_with(
    state0: &WalkerState,
    n: usize,
    phases: &GaugePhases,
    params: &WalkParams,
    mut observe: impl FnMut(&WalkerState),
) -> Result<WalkerState> {
    check_schedule(state0, n, phases)?;
    let mut state = state0.clone();
    observe(&state);
    for _ in 0..n {
        state = advance(&state, phases, params)?;
        observe(&state);
    }
    Ok(state)
}
