//! Reference solver for the Dirac equation minimally coupled to an external potential,
//! and convergence studies of the walks against it.
//!
//! The equation is integrated in Hamiltonian form `i d_t psi = H psi` with
//!
//! ```text
//! H = q A^0 + m g0 + sum_k g0 gk (-i d_k - q A^k)
//! ```
//!
//! (`A^k` contravariant), using classical RK4 in time and FFT derivatives in space on a
//! periodic grid. Gamma matrices: 1D `g0 = s1`, `g1 = -i s2`; 2D `g0 = s1`, `g1 = -i s3`,
//! `g2 = -i s2`. Spinor components map to the walk's coin basis as `R -> 0`, `L -> 1`.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::ScalarFn;
use crate::gauge::{sample_phases, PotentialSpec};
use crate::lattice::{Dimension, GaussianPacket, LatticeGeom, Mat2, WalkerState};
use crate::walk::{evolve_with, WalkParams, WalkParams1D, WalkParams2D};
use crate::C64;

/// Norm drift that aborts an integration.
pub const INSTABILITY_TOL: f64 = 1e-6;

/// `[g0, g1]` in 1D, `[g0, g1, g2]` in 2D.
pub fn gammas(dim: Dimension) -> Vec<Mat2> {
    let mi = C64::new(0.0, -1.0);
    match dim {
        Dimension::One => vec![Mat2::pauli_x(), Mat2::pauli_y().scale(mi)],
        Dimension::Two => vec![
            Mat2::pauli_x(),
            Mat2::pauli_z().scale(mi),
            Mat2::pauli_y().scale(mi),
        ],
    }
}

/// Largest deviation of `{g_mu, g_nu}` from `2 eta_{mu nu}`, signature `(+, -, ...)`.
pub fn anticommutator_defect(dim: Dimension) -> f64 {
    let g = gammas(dim);
    let mut worst: f64 = 0.0;
    for (mu, a) in g.iter().enumerate() {
        for (nu, b) in g.iter().enumerate() {
            let eta = match (mu == nu, mu) {
                (false, _) => 0.0,
                (true, 0) => 2.0,
                (true, _) => -2.0,
            };
            let target = Mat2::identity().scale(C64::new(eta, 0.0));
            worst = worst.max((*a * *b + *b * *a).max_abs_diff(&target));
        }
    }
    worst
}

/// `g0 g^k` for the spatial `k`.
fn alphas(dim: Dimension) -> Vec<Mat2> {
    let g = gammas(dim);
    g[1..].iter().map(|gk| g[0] * *gk).collect()
}

/// Two-component field on a periodic grid, stored like [`WalkerState`] (`psi[2 s + c]`),
/// normalized so that `sum |psi|^2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub geom: LatticeGeom,
    pub psi: Vec<C64>,
    pub t: f64,
}

impl SpinorField {
    pub fn from_state(state: &WalkerState, t: f64) -> Self {
        SpinorField {
            geom: *state.geom(),
            psi: state.amplitudes().to_vec(),
            t,
        }
    }

    pub fn gaussian(geom: LatticeGeom, packet: &GaussianPacket) -> Result<Self> {
        Ok(Self::from_state(&WalkerState::gaussian(geom, packet)?, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn spinor(&self, s: usize) -> [C64; 2] {
        [self.psi[2 * s], self.psi[2 * s + 1]]
    }

    /// Values at every `stride`-th grid point along each axis, rescaled so that the
    /// coarse field is normalized like a field sampled directly on the coarse grid.
    pub fn subsample(&self, stride: usize) -> Result<SpinorField> {
        let g = self.geom;
        if stride == 0 || g.nx() % stride != 0 || (g.dim() == Dimension::Two && g.ny() % stride != 0) {
            return Err(Error::InvalidArgument(format!(
                "stride {stride} does not divide the {}x{} grid",
                g.nx(),
                g.ny()
            )));
        }
        let coarse = match g.dim() {
            Dimension::One => LatticeGeom::one_d(g.nx() / stride, g.spacing() * stride as f64)?,
            Dimension::Two => LatticeGeom::two_d(
                g.nx() / stride,
                g.ny() / stride,
                g.spacing() * stride as f64,
            )?,
        };
        let factor = match g.dim() {
            Dimension::One => (stride as f64).sqrt(),
            Dimension::Two => stride as f64,
        };
        let mut psi = vec![C64::new(0.0, 0.0); 2 * coarse.sites()];
        for s in 0..coarse.sites() {
            let (ix, iy) = coarse.coords(s);
            let fine = g.site(ix * stride, iy * stride);
            psi[2 * s] = self.psi[2 * fine] * factor;
            psi[2 * s + 1] = self.psi[2 * fine + 1] * factor;
        }
        Ok(SpinorField {
            geom: coarse,
            psi,
            t: self.t,
        })
    }
}

#[derive(Clone)]
pub struct DiracConfig {
    pub mass: f64,
    pub charge: f64,
    pub dt: f64,
    pub potential: PotentialSpec,
}

/// Spectral derivatives on a periodic grid.
struct Spectral {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    column: Vec<C64>,
}

fn wave_numbers(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            // the Nyquist mode has no consistent derivative on a real grid
            if n % 2 == 0 && i == n / 2 {
                0.0
            } else {
                TAU * m / length
            }
        })
        .collect()
}

impl Spectral {
    fn new(geom: &LatticeGeom) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_y = match geom.dim() {
            Dimension::One => None,
            Dimension::Two => Some((
                planner.plan_fft_forward(geom.ny()),
                planner.plan_fft_inverse(geom.ny()),
            )),
        };
        Spectral {
            nx: geom.nx(),
            ny: geom.ny(),
            fwd_x: planner.plan_fft_forward(geom.nx()),
            inv_x: planner.plan_fft_inverse(geom.nx()),
            fwd_y,
            kx: wave_numbers(geom.nx(), geom.length_x()),
            ky: wave_numbers(geom.ny(), geom.length_y()),
            column: vec![C64::new(0.0, 0.0); geom.nx()],
        }
    }

    /// In-place transform of an x-major plane.
    fn transform(&mut self, plane: &mut [C64], forward: bool) {
        let (nx, ny) = (self.nx, self.ny);
        if let Some((fy, iy)) = &self.fwd_y {
            let plan = if forward { fy } else { iy };
            plan.process(plane);
        }
        let plan = if forward { &self.fwd_x } else { &self.inv_x };
        if ny == 1 {
            plan.process(plane);
        } else {
            for iy in 0..ny {
                for ix in 0..nx {
                    self.column[ix] = plane[ix * ny + iy];
                }
                plan.process(&mut self.column);
                for ix in 0..nx {
                    plane[ix * ny + iy] = self.column[ix];
                }
            }
        }
        if !forward {
            let inv = 1.0 / (nx * ny) as f64;
            plane.iter_mut().for_each(|v| *v *= inv);
        }
    }

    /// `-i d_k plane` for every spatial axis.
    fn momentum(&mut self, plane: &[C64]) -> Vec<Vec<C64>> {
        let mut spec = plane.to_vec();
        self.transform(&mut spec, true);
        let mut out = Vec::new();
        let axes = if self.fwd_y.is_some() { 2 } else { 1 };
        for axis in 0..axes {
            let mut d: Vec<C64> = spec
                .iter()
                .enumerate()
                .map(|(s, v)| {
                    let k = if axis == 0 { self.kx[s / self.ny] } else { self.ky[s % self.ny] };
                    v * k
                })
                .collect();
            self.transform(&mut d, false);
            out.push(d);
        }
        out
    }
}

/// RK4 integrator with spectral spatial derivatives.
pub struct DiracSolver {
    geom: LatticeGeom,
    config: DiracConfig,
    alphas: Vec<Mat2>,
    gamma0: Mat2,
    spectral: Spectral,
    cache: Option<(f64, Vec<Vec<f64>>)>,
}

impl DiracSolver {
    pub fn new(geom: LatticeGeom, config: DiracConfig) -> Result<Self> {
        if !(config.dt.is_finite() && config.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {}",
                config.dt
            )));
        }
        Ok(DiracSolver {
            geom,
            alphas: alphas(geom.dim()),
            gamma0: gammas(geom.dim())[0],
            spectral: Spectral::new(&geom),
            config,
            cache: None,
        })
    }

    pub fn geom(&self) -> &LatticeGeom {
        &self.geom
    }

    /// Potentials `A^0, A^1[, A^2]` at time `t` on the grid.
    fn potentials(&mut self, t: f64) -> Result<Vec<Vec<f64>>> {
        if let Some((tc, v)) = &self.cache {
            if *tc == t {
                return Ok(v.clone());
            }
        }
        let comps: Vec<&dyn ScalarFn> = match self.geom.dim() {
            Dimension::One => vec![self.config.potential.a0.as_ref(), self.config.potential.a1.as_ref()],
            Dimension::Two => vec![
                self.config.potential.a0.as_ref(),
                self.config.potential.a1.as_ref(),
                self.config.potential.a2.as_ref(),
            ],
        };
        let mut out = Vec::with_capacity(comps.len());
        for f in comps {
            let mut v = Vec::with_capacity(self.geom.sites());
            for s in 0..self.geom.sites() {
                let (ix, iy) = self.geom.coords(s);
                let (x, y) = self.geom.position(ix, iy);
                let val = f.value(t, x, y).map_err(|reason| Error::Sampling {
                    time_index: 0,
                    ix,
                    iy,
                    reason: format!("t = {t}: {reason}"),
                })?;
                v.push(val);
            }
            out.push(v);
        }
        self.cache = Some((t, out.clone()));
        Ok(out)
    }

    /// `H psi` at time `t`.
    pub fn hamiltonian(&mut self, t: f64, psi: &[C64]) -> Result<Vec<C64>> {
        let n = self.geom.sites();
        let a = self.potentials(t)?;
        let planes: Vec<Vec<C64>> = (0..2)
            .map(|c| (0..n).map(|s| psi[2 * s + c]).collect())
            .collect();
        let p0 = self.spectral.momentum(&planes[0]);
        let p1 = self.spectral.momentum(&planes[1]);
        let (m, q) = (self.config.mass, self.config.charge);
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        for s in 0..n {
            let v = [psi[2 * s], psi[2 * s + 1]];
            let mut h = self.gamma0.apply(v);
            h[0] = h[0] * m + v[0] * (q * a[0][s]);
            h[1] = h[1] * m + v[1] * (q * a[0][s]);
            for (k, alpha) in self.alphas.iter().enumerate() {
                let w = [
                    p0[k][s] - v[0] * (q * a[k + 1][s]),
                    p1[k][s] - v[1] * (q * a[k + 1][s]),
                ];
                let aw = alpha.apply(w);
                h[0] += aw[0];
                h[1] += aw[1];
            }
            out[2 * s] = h[0];
            out[2 * s + 1] = h[1];
        }
        Ok(out)
    }

    fn rhs(&mut self, t: f64, psi: &[C64]) -> Result<Vec<C64>> {
        let mi = C64::new(0.0, -1.0);
        Ok(self.hamiltonian(t, psi)?.into_iter().map(|v| v * mi).collect())
    }

    /// One RK4 step of size `dt`.
    pub fn step(&mut self, field: &mut SpinorField) -> Result<()> {
        let (t, dt) = (field.t, self.config.dt);
        let axpy = |a: &[C64], b: &[C64], h: f64| -> Vec<C64> {
            a.iter().zip(b).map(|(x, y)| x + y * h).collect()
        };
        let k1 = self.rhs(t, &field.psi)?;
        let k2 = self.rhs(t + 0.5 * dt, &axpy(&field.psi, &k1, 0.5 * dt))?;
        let k3 = self.rhs(t + 0.5 * dt, &axpy(&field.psi, &k2, 0.5 * dt))?;
        let k4 = self.rhs(t + dt, &axpy(&field.psi, &k3, dt))?;
        for (i, v) in field.psi.iter_mut().enumerate() {
            *v += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
        field.t = t + dt;
        Ok(())
    }

    /// Integrates up to `t_final`, which must be a whole number of steps away.
    pub fn evolve_to(&mut self, field: &mut SpinorField, t_final: f64) -> Result<()> {
        let span = (t_final - field.t) / self.config.dt;
        let n = span.round();
        if n < 0.0 || (span - n).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "cannot reach t = {t_final} from t = {} with dt = {}",
                field.t, self.config.dt
            )));
        }
        let t0 = field.t;
        let norm0 = field.norm_sqr();
        for i in 0..n as usize {
            self.step(field)?;
            // avoid accumulating rounding in the clock
            field.t = t0 + (i + 1) as f64 * self.config.dt;
            let drift = (field.norm_sqr() - norm0).abs();
            if !(drift <= INSTABILITY_TOL) {
                return Err(Error::Instability(format!(
                    "norm drifted by {drift:e} after {} steps (t = {}, dt = {}); reduce dt",
                    i + 1,
                    field.t,
                    self.config.dt
                )));
            }
        }
        Ok(())
    }

    /// `d_mu j^mu` for the field at its current time, with `d_t j0 = 2 Re(psi^dag d_t psi)`
    /// taken from the equation of motion and spatial derivatives done spectrally.
    pub fn current_divergence(&mut self, field: &SpinorField) -> Result<Vec<f64>> {
        let n = self.geom.sites();
        let dpsi = self.rhs(field.t, &field.psi)?;
        let (j0, js) = continuum_current(field);
        let mut out: Vec<f64> = (0..n)
            .map(|s| {
                let a = [field.psi[2 * s], field.psi[2 * s + 1]];
                2.0 * (a[0].conj() * dpsi[2 * s] + a[1].conj() * dpsi[2 * s + 1]).re
            })
            .collect();
        let _ = j0;
        for (k, jk) in js.iter().enumerate() {
            let plane: Vec<C64> = jk.iter().map(|&v| C64::new(v, 0.0)).collect();
            // -i d_k f  ->  d_k f = i * (-i d_k f)
            let d = &self.spectral.momentum(&plane)[k];
            for s in 0..n {
                out[s] += (C64::new(0.0, 1.0) * d[s]).re;
            }
        }
        Ok(out)
    }
}

/// `j^mu = psi^dag g0 g^mu psi`: returns `j0` and the spatial components.
pub fn continuum_current(field: &SpinorField) -> (Vec<f64>, Vec<Vec<f64>>) {
    let g = field.geom;
    let al = alphas(g.dim());
    let j0 = (0..g.sites())
        .map(|s| {
            let v = field.spinor(s);
            v[0].norm_sqr() + v[1].norm_sqr()
        })
        .collect();
    let js = al
        .iter()
        .map(|a| (0..g.sites()).map(|s| { let v = field.spinor(s); a.sandwich(v, v).re }).collect())
        .collect();
    (j0, js)
}

/// Inputs of a walk versus Dirac convergence study.
#[derive(Clone)]
pub struct ConvergenceSetup {
    pub dim: Dimension,
    /// Side of the periodic box.
    pub length: f64,
    pub mass: f64,
    pub charge: f64,
    pub potential: PotentialSpec,
    pub packet: GaussianPacket,
    pub t_final: f64,
    /// Descending lattice spacings; `length / eps` must be an integer dividing
    /// `reference_points`.
    pub epsilons: Vec<f64>,
    pub reference_points: usize,
    pub reference_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub sites_per_axis: usize,
    pub steps: usize,
    pub l2_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln error` against `ln eps`.
    pub slope: f64,
    /// Whether the error decreased at every refinement.
    pub monotone: bool,
}

fn grid(dim: Dimension, n: usize, h: f64) -> Result<LatticeGeom> {
    match dim {
        Dimension::One => LatticeGeom::one_d(n, h),
        Dimension::Two => LatticeGeom::two_d(n, n, h),
    }
}

fn points_for(length: f64, eps: f64) -> Result<usize> {
    let n = (length / eps).round();
    if !(n >= 2.0) || ((length / eps) - n).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "box length {length} is not a whole number of lattice spacings {eps}"
        )));
    }
    Ok(n as usize)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs the continuum-family walk for every `eps` and compares with one reference run.
///
/// The walk uses `eps_A = eps_m = eps`. The reference is sampled at the walk sites and
/// rescaled to the walk's normalization before taking the discrete L2 distance.
pub fn convergence_study(setup: &ConvergenceSetup) -> Result<ConvergenceReport> {
    if setup.epsilons.len() < 2 {
        return Err(Error::InvalidArgument("need at least two lattice spacings".into()));
    }
    if setup.epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("lattice spacings must be descending".into()));
    }
    let n_ref = setup.reference_points;
    let ref_geom = grid(setup.dim, n_ref, setup.length / n_ref as f64)?;
    let mut reference = SpinorField::gaussian(ref_geom, &setup.packet)?;
    let mut solver = DiracSolver::new(
        ref_geom,
        DiracConfig {
            mass: setup.mass,
            charge: setup.charge,
            dt: setup.reference_dt,
            potential: setup.potential.clone(),
        },
    )?;
    solver.evolve_to(&mut reference, setup.t_final)?;

    let mut rows = Vec::new();
    for &eps in &setup.epsilons {
        let n = points_for(setup.length, eps)?;
        if n_ref % n != 0 {
            return Err(Error::InvalidArgument(format!(
                "reference grid of {n_ref} points cannot be sampled on {n} points"
            )));
        }
        let geom = grid(setup.dim, n, eps)?;
        let steps_f = setup.t_final / geom.time_step();
        let steps = steps_f.round() as usize;
        if (steps_f - steps as f64).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "final time {} is not a whole number of walk steps for eps = {eps}",
                setup.t_final
            )));
        }
        let spec = setup.potential.clone().with_eps_a(eps);
        let spec = PotentialSpec { charge: setup.charge, ..spec };
        let phases = sample_phases(&spec, &geom, steps.max(1))?;
        let params = match setup.dim {
            Dimension::One => WalkParams::One(WalkParams1D::continuum(setup.mass, setup.charge, eps)),
            Dimension::Two => WalkParams::Two(WalkParams2D::continuum(setup.mass, setup.charge, eps)),
        };
        let start = WalkerState::gaussian(geom, &setup.packet)?;
        let last = evolve_with(&start, steps, &phases, &params, |_| {})?;
        let sampled = reference.subsample(n_ref / n)?;
        let l2_error = last
            .amplitudes()
            .iter()
            .zip(&sampled.psi)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        rows.push(ConvergenceRow {
            epsilon: eps,
            sites_per_axis: n,
            steps,
            l2_error,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.epsilon.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.l2_error.ln()).collect();
    let monotone = rows.windows(2).all(|w| w[1].l2_error < w[0].l2_error);
    Ok(ConvergenceReport {
        slope: fit_slope(&lx, &ly),
        rows,
        monotone,
    })
}
