//! Lattice geometry, coin-space algebra and walker state storage.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    One,
    Two,
}

/// Spacetime axis. `T` is the discrete time index, `X`/`Y` the spatial axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    T,
    X,
    Y,
}

impl Axis {
    pub fn is_spatial(self) -> bool {
        !matches!(self, Axis::T)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::T => "t",
            Axis::X => "x",
            Axis::Y => "y",
        };
        f.write_str(s)
    }
}

/// Periodic lattice of `nx * ny` sites with spacing `spacing` (shared by space and time).
///
/// Sites are stored x-major: site `s = ix * ny + iy`. In 1D `ny == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGeom {
    dim: Dimension,
    nx: usize,
    ny: usize,
    spacing: f64,
}

impl LatticeGeom {
    pub fn one_d(nx: usize, spacing: f64) -> Result<Self> {
        Self::validate_extent("extent_x", nx)?;
        Self::validate_spacing(spacing)?;
        Ok(LatticeGeom {
            dim: Dimension::One,
            nx,
            ny: 1,
            spacing,
        })
    }

    pub fn two_d(nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        Self::validate_extent("extent_x", nx)?;
        Self::validate_extent("extent_y", ny)?;
        Self::validate_spacing(spacing)?;
        Ok(LatticeGeom {
            dim: Dimension::Two,
            nx,
            ny,
            spacing,
        })
    }

    fn validate_extent(name: &str, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be at least 2, got {n}"
            )));
        }
        Ok(())
    }

    fn validate_spacing(spacing: f64) -> Result<()> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive and finite, got {spacing}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn sites(&self) -> usize {
        self.nx * self.ny
    }

    pub fn extent(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::T => panic!("time has no spatial extent"),
        }
    }

    /// Whether `axis` is a valid spatial axis for this lattice.
    pub fn has_axis(&self, axis: Axis) -> bool {
        match axis {
            Axis::T | Axis::X => true,
            Axis::Y => self.dim == Dimension::Two,
        }
    }

    #[inline]
    pub fn site(&self, ix: usize, iy: usize) -> usize {
        ix * self.ny + iy
    }

    #[inline]
    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s / self.ny, s % self.ny)
    }

    /// Site reached from `s` by moving `delta` links along the spatial `axis` (periodic).
    #[inline]
    pub fn neighbor(&self, s: usize, axis: Axis, delta: isize) -> usize {
        let (ix, iy) = self.coords(s);
        match axis {
            Axis::X => self.site(wrap(ix, delta, self.nx), iy),
            Axis::Y => self.site(ix, wrap(iy, delta, self.ny)),
            Axis::T => panic!("neighbor along time axis"),
        }
    }

    /// Physical position `(x, y) = (ix * eps, iy * eps)`.
    pub fn position(&self, ix: usize, iy: usize) -> (f64, f64) {
        (ix as f64 * self.spacing, iy as f64 * self.spacing)
    }

    pub fn length_x(&self) -> f64 {
        self.nx as f64 * self.spacing
    }

    pub fn length_y(&self) -> f64 {
        self.ny as f64 * self.spacing
    }

    /// Physical time elapsed per time index: `eps` in 1D, `eps / 2` in 2D (one substep).
    pub fn time_step(&self) -> f64 {
        match self.dim {
            Dimension::One => self.spacing,
            Dimension::Two => 0.5 * self.spacing,
        }
    }

    /// Physical time carried by time index / phase label `j`.
    pub fn time_of(&self, j: usize) -> f64 {
        j as f64 * self.time_step()
    }
}

#[inline]
pub(crate) fn wrap(i: usize, delta: isize, n: usize) -> usize {
    (i as isize + delta).rem_euclid(n as isize) as usize
}

/// Dense 2x2 complex matrix acting on coin space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn zero() -> Self {
        Mat2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        Self::diag(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn diag(a: C64, d: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2([[a, z], [z, d]])
    }

    pub fn pauli_x() -> Self {
        let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Mat2([[z, o], [o, z]])
    }

    pub fn pauli_y() -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2([[z, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), z]])
    }

    pub fn pauli_z() -> Self {
        Self::diag(C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
    }

    /// Projector onto `|R> = (1, 0)^T`.
    pub fn proj_r() -> Self {
        Self::diag(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Projector onto `|L> = (0, 1)^T`.
    pub fn proj_l() -> Self {
        Self::diag(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// `a^dagger M b`.
    #[inline]
    pub fn sandwich(&self, a: [C64; 2], b: [C64; 2]) -> C64 {
        let mb = self.apply(b);
        a[0].conj() * mb[0] + a[1].conj() * mb[1]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Largest entry deviation of `M^dagger M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Mat2::identity())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// A unitary coin rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOperator(Mat2);

impl CoinOperator {
    /// Wraps `m` after checking `m^dagger m = 1`.
    pub fn new(m: Mat2) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= UNITARY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "coin matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(CoinOperator(m))
    }

    /// Wraps `m` without the unitarity check; used for the non-unitary current stencil matrices.
    pub fn from_matrix_unchecked(m: Mat2) -> Self {
        CoinOperator(m)
    }

    /// `C(theta) = exp(i sigma^1 theta / 2)`.
    pub fn rotation(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coin angle must be finite, got {theta}"
            )));
        }
        let (s, c) = (0.5 * theta).sin_cos();
        Ok(CoinOperator(Mat2::new(
            C64::new(c, 0.0),
            C64::new(0.0, s),
            C64::new(0.0, s),
            C64::new(c, 0.0),
        )))
    }

    pub fn identity() -> Self {
        CoinOperator(Mat2::identity())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn dagger(&self) -> Self {
        CoinOperator(self.0.dagger())
    }
}

/// `C(theta) = [[cos theta/2, i sin theta/2], [i sin theta/2, cos theta/2]]`.
pub fn coin_matrix(theta: f64) -> Result<CoinOperator> {
    CoinOperator::rotation(theta)
}

/// Coin basis state. `R` is component 0, `L` component 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coin {
    R,
    L,
}

impl Coin {
    pub fn index(self) -> usize {
        match self {
            Coin::R => 0,
            Coin::L => 1,
        }
    }

    pub fn spinor(self) -> [C64; 2] {
        let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        match self {
            Coin::R => [o, z],
            Coin::L => [z, o],
        }
    }
}

/// Two-component amplitude field over a periodic lattice.
///
/// Storage is dense and site-major with the coin index fastest: `amp[2 * s + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    geom: LatticeGeom,
    amp: Vec<C64>,
    time_index: usize,
}

impl WalkerState {
    pub fn zeros(geom: LatticeGeom) -> Self {
        WalkerState {
            geom,
            amp: vec![C64::new(0.0, 0.0); 2 * geom.sites()],
            time_index: 0,
        }
    }

    /// Walker localized at one site with coin state `coin`.
    pub fn localized(geom: LatticeGeom, ix: usize, iy: usize, coin: Coin) -> Result<Self> {
        Self::localized_spinor(geom, ix, iy, coin.spinor())
    }

    /// Walker localized at one site with an arbitrary (normalized on output) spinor.
    pub fn localized_spinor(
        geom: LatticeGeom,
        ix: usize,
        iy: usize,
        spinor: [C64; 2],
    ) -> Result<Self> {
        if ix >= geom.nx() || iy >= geom.ny() {
            return Err(Error::InvalidArgument(format!(
                "site ({ix}, {iy}) outside a {}x{} lattice",
                geom.nx(),
                geom.ny()
            )));
        }
        let mut state = Self::zeros(geom);
        let s = geom.site(ix, iy);
        state.amp[2 * s] = spinor[0];
        state.amp[2 * s + 1] = spinor[1];
        state.normalize()?;
        Ok(state)
    }

    pub fn from_amplitudes(geom: LatticeGeom, amp: Vec<C64>, time_index: usize) -> Result<Self> {
        if amp.len() != 2 * geom.sites() {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes, got {}",
                2 * geom.sites(),
                amp.len()
            )));
        }
        if amp.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(WalkerState {
            geom,
            amp,
            time_index,
        })
    }

    /// Gaussian wavepacket sampled on the lattice sites and normalized.
    pub fn gaussian(geom: LatticeGeom, packet: &GaussianPacket) -> Result<Self> {
        packet.validate()?;
        let mut state = Self::zeros(geom);
        for ix in 0..geom.nx() {
            for iy in 0..geom.ny() {
                let (x, y) = geom.position(ix, iy);
                let v = packet.amplitude(x, y, geom.length_x(), geom.length_y(), geom.dim());
                let s = geom.site(ix, iy);
                state.amp[2 * s] = v[0];
                state.amp[2 * s + 1] = v[1];
            }
        }
        state.normalize()?;
        Ok(state)
    }

    pub fn geom(&self) -> &LatticeGeom {
        &self.geom
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn set_time_index(&mut self, j: usize) {
        self.time_index = j;
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amp
    }

    #[inline]
    pub fn spinor(&self, s: usize) -> [C64; 2] {
        [self.amp[2 * s], self.amp[2 * s + 1]]
    }

    #[inline]
    pub fn set_spinor(&mut self, s: usize, v: [C64; 2]) {
        self.amp[2 * s] = v[0];
        self.amp[2 * s + 1] = v[1];
    }

    /// Sum of `|amp|^2`, accumulated site-major with the coin index inner.
    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize a state of norm {n}"
            )));
        }
        let inv = 1.0 / n;
        self.amp.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &WalkerState) -> C64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &WalkerState) -> f64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply_coin(&self, coin: &CoinOperator) -> WalkerState {
        let mut out = self.clone();
        out.apply_coin_in_place(coin);
        out
    }

    pub fn apply_coin_in_place(&mut self, coin: &CoinOperator) {
        let m = coin.matrix();
        for pair in self.amp.chunks_exact_mut(2) {
            let v = m.apply([pair[0], pair[1]]);
            pair[0] = v[0];
            pair[1] = v[1];
        }
    }

    /// Local phase change `psi(s) -> exp(i charge chi(s)) psi(s)`.
    pub fn with_local_phase(&self, chi: &[f64], charge: f64) -> Result<WalkerState> {
        if chi.len() != self.geom.sites() {
            return Err(Error::InvalidArgument(format!(
                "phase field has {} sites, lattice has {}",
                chi.len(),
                self.geom.sites()
            )));
        }
        let mut out = self.clone();
        for (pair, &c) in out.amp.chunks_exact_mut(2).zip(chi) {
            let ph = C64::from_polar(1.0, charge * c);
            pair[0] *= ph;
            pair[1] *= ph;
        }
        Ok(out)
    }
}

/// `sqrt(sum |amp|^2)` in the fixed site-major order.
pub fn state_norm(state: &WalkerState) -> f64 {
    state.norm()
}

/// Site-diagonal action of a coin on every spinor.
pub fn apply_coin(state: &WalkerState, coin: &CoinOperator) -> WalkerState {
    state.apply_coin(coin)
}

/// Gaussian wavepacket `exp(-|r - r0|^2 / (4 w^2) + i k.r) * polarization`.
///
/// Displacements use the minimum image on the periodic domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub center: [f64; 2],
    pub width: f64,
    pub momentum: [f64; 2],
    pub polarization: [C64; 2],
}

impl GaussianPacket {
    pub fn validate(&self) -> Result<()> {
        let finite = self.center.iter().chain(&self.momentum).all(|v| v.is_finite())
            && self
                .polarization
                .iter()
                .all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("non-finite wavepacket parameter".into()));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wavepacket width must be positive, got {}",
                self.width
            )));
        }
        if self.polarization[0].norm_sqr() + self.polarization[1].norm_sqr() == 0.0 {
            return Err(Error::InvalidArgument("zero polarization spinor".into()));
        }
        Ok(())
    }

    /// Unnormalized continuum amplitude at `(x, y)` on a periodic box `lx * ly`.
    pub fn amplitude(&self, x: f64, y: f64, lx: f64, ly: f64, dim: Dimension) -> [C64; 2] {
        let dx = min_image(x - self.center[0], lx);
        let (dy, y_phase) = match dim {
            Dimension::One => (0.0, 0.0),
            Dimension::Two => (min_image(y - self.center[1], ly), self.momentum[1] * y),
        };
        let env = (-(dx * dx + dy * dy) / (4.0 * self.width * self.width)).exp();
        let ph = C64::from_polar(env, self.momentum[0] * x + y_phase);
        [self.polarization[0] * ph, self.polarization[1] * ph]
    }
}

fn min_image(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

/// Plane-wave quasimomentum compatible with a periodic box of length `l`.
pub fn periodic_momentum(n: i32, l: f64) -> f64 {
    2.0 * PI * n as f64 / l
}
