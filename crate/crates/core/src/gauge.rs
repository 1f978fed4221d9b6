//! Lattice gauge phases, one-link difference operators, gauge transformations and the
//! lattice field tensor.
//!
//! # Index conventions
//!
//! The walk step producing `psi_{j+1}` from `psi_j` reads the phases carrying label
//! `j + 1`. A gauge function `chi` is sampled on time indices `0..=T`, and the stencil
//! compensating the step with label `j + 1` is based at index `j`: it lives on the
//! temporal link `j -> j+1`. The covariant lattice potential [`LatticeGaugeField`] is
//! indexed by that base index, so its slice `j` holds the phases of label `j + 1`.
//!
//! In 2D the substep leaving an even index moves along `x`, the one leaving an odd index
//! along `y`; the temporal derivative follows the same parity (`Sigma_1` after even `j`,
//! `Sigma_2` after odd `j`).
//!
//! The discrete derivatives are normalized as `Delta (Sigma / 2) / h` where `h` is the
//! coordinate step along the differenced axis: `eps_A` in space and 1D time, `eps_A / 2`
//! for the 2D time axis (each substep lasts half a step). With this normalization
//! `A' = A - d chi` is exactly the transformation that keeps the walk covariant, and
//! `d_mu` tends to `partial_mu` for smooth fields.

use crate::error::{Error, Result};
use crate::field::{zero_fn, ScalarFn, SharedFn, SpaceTimeField};
use crate::lattice::{wrap, Axis, Dimension, LatticeGeom};

/// Continuum potentials `A^0, A^1, A^2` (contravariant), the charge `q` and the
/// coupling scale `eps_A` (defaults to the lattice spacing).
#[derive(Clone)]
pub struct PotentialSpec {
    pub a0: SharedFn,
    pub a1: SharedFn,
    pub a2: SharedFn,
    pub charge: f64,
    pub eps_a: Option<f64>,
}

impl std::fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("charge", &self.charge)
            .field("eps_a", &self.eps_a)
            .finish_non_exhaustive()
    }
}

impl PotentialSpec {
    pub fn new(a0: SharedFn, a1: SharedFn, a2: SharedFn, charge: f64) -> Self {
        PotentialSpec {
            a0,
            a1,
            a2,
            charge,
            eps_a: None,
        }
    }

    /// No external field.
    pub fn free(charge: f64) -> Self {
        Self::new(zero_fn(), zero_fn(), zero_fn(), charge)
    }

    pub fn with_eps_a(mut self, eps_a: f64) -> Self {
        self.eps_a = Some(eps_a);
        self
    }

    pub fn eps_a_for(&self, geom: &LatticeGeom) -> f64 {
        self.eps_a.unwrap_or_else(|| geom.spacing())
    }

    fn component(&self, mu: usize) -> &dyn ScalarFn {
        match mu {
            0 => self.a0.as_ref(),
            1 => self.a1.as_ref(),
            _ => self.a2.as_ref(),
        }
    }
}

/// Lattice phases `alpha`, `xi^1` (and `xi^2` in 2D) for phase labels `1..=n_labels`.
///
/// Only `alpha` and `xi` are stored; `beta_-` and `beta_+` are recomputed on demand.
/// In 2D each substep uses `alpha / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePhases {
    geom: LatticeGeom,
    alpha: Vec<Vec<f64>>,
    xi1: Vec<Vec<f64>>,
    xi2: Vec<Vec<f64>>,
}

impl GaugePhases {
    pub fn zero(geom: LatticeGeom, n_labels: usize) -> Self {
        let z = vec![vec![0.0; geom.sites()]; n_labels];
        let xi2 = match geom.dim() {
            Dimension::One => Vec::new(),
            Dimension::Two => z.clone(),
        };
        GaugePhases {
            geom,
            alpha: z.clone(),
            xi1: z,
            xi2,
        }
    }

    /// Builds phases from fields whose slice `k` holds label `k + 1`.
    /// `xi2` must be `None` in 1D and present in 2D.
    pub fn from_fields(
        alpha: SpaceTimeField,
        xi1: SpaceTimeField,
        xi2: Option<SpaceTimeField>,
    ) -> Result<Self> {
        let geom = *alpha.geom();
        let n = alpha.n_slices();
        if *xi1.geom() != geom || xi1.n_slices() != n {
            return Err(Error::InvalidArgument("alpha and xi1 disagree in shape".into()));
        }
        let xi2 = match (geom.dim(), xi2) {
            (Dimension::One, None) => Vec::new(),
            (Dimension::Two, Some(f)) if *f.geom() == geom && f.n_slices() == n => f.into_slices(),
            (Dimension::One, Some(_)) => {
                return Err(Error::InvalidArgument("xi2 given for a 1D lattice".into()))
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "2D phases need an xi2 field matching alpha".into(),
                ))
            }
        };
        Ok(GaugePhases {
            geom,
            alpha: alpha.into_slices(),
            xi1: xi1.into_slices(),
            xi2,
        })
    }

    pub fn geom(&self) -> &LatticeGeom {
        &self.geom
    }

    /// Number of labels; labels run over `1..=n_labels()`.
    pub fn n_labels(&self) -> usize {
        self.alpha.len()
    }

    pub fn has_label(&self, label: usize) -> bool {
        label >= 1 && label <= self.n_labels()
    }

    fn check_label(&self, label: usize) -> Result<usize> {
        if !self.has_label(label) {
            return Err(Error::Domain(format!(
                "phase label {label} outside the schedule 1..={}",
                self.n_labels()
            )));
        }
        Ok(label - 1)
    }

    /// Weight of `alpha` inside each shift: 1 in 1D, 1/2 for the 2D substeps.
    pub fn alpha_weight(&self) -> f64 {
        match self.geom.dim() {
            Dimension::One => 1.0,
            Dimension::Two => 0.5,
        }
    }

    pub fn alpha(&self, label: usize) -> Result<&[f64]> {
        Ok(&self.alpha[self.check_label(label)?])
    }

    pub fn xi(&self, axis: Axis, label: usize) -> Result<&[f64]> {
        let k = self.check_label(label)?;
        match axis {
            Axis::X => Ok(&self.xi1[k]),
            Axis::Y if self.geom.dim() == Dimension::Two => Ok(&self.xi2[k]),
            _ => Err(Error::InvalidArgument(format!(
                "no spatial phase along {axis} on this lattice"
            ))),
        }
    }

    /// `(beta_-, beta_+) = (xi - w alpha, xi + w alpha)` for the shift along `axis`,
    /// with `w` from [`alpha_weight`](Self::alpha_weight).
    pub fn betas(&self, label: usize, axis: Axis) -> Result<(Vec<f64>, Vec<f64>)> {
        let xi = self.xi(axis, label)?;
        let alpha = self.alpha(label)?;
        let w = self.alpha_weight();
        let minus = xi.iter().zip(alpha).map(|(x, a)| x - w * a).collect();
        let plus = xi.iter().zip(alpha).map(|(x, a)| x + w * a).collect();
        Ok((minus, plus))
    }

    /// Alpha as a field; slice `k` holds label `k + 1`.
    pub fn alpha_field(&self) -> SpaceTimeField {
        SpaceTimeField::new(self.geom, self.alpha.clone()).expect("consistent shape")
    }

    pub fn xi_field(&self, axis: Axis) -> Result<SpaceTimeField> {
        let slices = match axis {
            Axis::X => self.xi1.clone(),
            Axis::Y if self.geom.dim() == Dimension::Two => self.xi2.clone(),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "no spatial phase along {axis} on this lattice"
                )))
            }
        };
        SpaceTimeField::new(self.geom, slices)
    }

    pub fn max_abs_diff(&self, other: &GaugePhases) -> f64 {
        let a = self.alpha_field().max_abs_diff(&other.alpha_field());
        let x = self
            .xi_field(Axis::X)
            .unwrap()
            .max_abs_diff(&other.xi_field(Axis::X).unwrap());
        let y = match self.geom.dim() {
            Dimension::One => 0.0,
            Dimension::Two => self
                .xi_field(Axis::Y)
                .unwrap()
                .max_abs_diff(&other.xi_field(Axis::Y).unwrap()),
        };
        a.max(x).max(y)
    }
}

/// `alpha = eps_A q A^0`, `xi^i = eps_A q A^i`, label `l` sampled at `t = geom.time_of(l)`.
pub fn sample_phases(
    spec: &PotentialSpec,
    geom: &LatticeGeom,
    n_labels: usize,
) -> Result<GaugePhases> {
    if n_labels == 0 {
        return Err(Error::InvalidArgument("need at least one phase label".into()));
    }
    let coupling = spec.eps_a_for(geom) * spec.charge;
    let sample = |mu: usize| -> Result<SpaceTimeField> {
        Ok(SpaceTimeField::sample(*geom, 1, n_labels, spec.component(mu))?.scaled(coupling))
    };
    let xi2 = match geom.dim() {
        Dimension::One => None,
        Dimension::Two => Some(sample(2)?),
    };
    GaugePhases::from_fields(sample(0)?, sample(1)?, xi2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(Sigma Q)_n = Q_{n+1} + Q_n`
    Sum,
    /// `(Delta Q)_n = Q_{n+1} - Q_n`
    Difference,
}

/// One-link sum or difference along `axis`. Periodic in space; along time the result
/// has one slice fewer than the input.
pub fn sigma_delta(field: &SpaceTimeField, axis: Axis, kind: Stencil) -> Result<SpaceTimeField> {
    let geom = *field.geom();
    if !geom.has_axis(axis) {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} does not exist on a 1D lattice"
        )));
    }
    let sign = match kind {
        Stencil::Sum => 1.0,
        Stencil::Difference => -1.0,
    };
    if axis == Axis::T {
        let n = field.n_slices();
        if n < 2 {
            return Err(Error::Domain(format!(
                "time stencil needs at least 2 slices, got {n}"
            )));
        }
        let slices = (0..n - 1)
            .map(|j| {
                field
                    .slice(j + 1)
                    .iter()
                    .zip(field.slice(j))
                    .map(|(next, cur)| next + sign * cur)
                    .collect()
            })
            .collect();
        return SpaceTimeField::new(geom, slices);
    }
    let slices = field
        .slices()
        .iter()
        .map(|slice| {
            (0..geom.sites())
                .map(|s| slice[geom.neighbor(s, axis, 1)] + sign * slice[s])
                .collect()
        })
        .collect();
    SpaceTimeField::new(geom, slices)
}

/// How the `Delta Sigma` stencil is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeNormalization {
    /// `Delta (Sigma / 2) / h`; exact walk covariance and `d -> partial` in the limit.
    Averaged,
    /// `Delta Sigma / eps_A` for every axis. Breaks covariance; kept as a negative control.
    Plain,
}

/// Which discrete derivative to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    /// Temporal derivative. In 2D the summed axis follows the parity of each slice's
    /// absolute time index (`Sigma_1` for even, `Sigma_2` for odd).
    Time,
    /// 2D temporal derivative with a fixed summed axis: `d_0^1` (`X`) or `d_0^2` (`Y`).
    TimeAlong(Axis),
    /// Spatial derivative `d_i = Delta_i Sigma_0 / (2 eps_A)`.
    Space(Axis),
}

/// A gauge function `chi(t, x, y)`, either analytic or already sampled on time indices `0..`.
#[derive(Clone)]
pub enum GaugeFunction {
    Analytic(SharedFn),
    Sampled(SpaceTimeField),
}

impl std::fmt::Debug for GaugeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GaugeFunction::Analytic(_) => f.write_str("GaugeFunction::Analytic(..)"),
            GaugeFunction::Sampled(s) => write!(f, "GaugeFunction::Sampled({} slices)", s.n_slices()),
        }
    }
}

impl GaugeFunction {
    /// `chi_{j, site}` for time indices `0..n_slices`, with `t_j = geom.time_of(j)`.
    pub fn sample(&self, geom: &LatticeGeom, n_slices: usize) -> Result<SpaceTimeField> {
        match self {
            GaugeFunction::Analytic(f) => SpaceTimeField::sample(*geom, 0, n_slices, f.as_ref()),
            GaugeFunction::Sampled(field) => {
                if field.geom() != geom {
                    return Err(Error::InvalidArgument(
                        "sampled gauge function lives on a different lattice".into(),
                    ));
                }
                if field.n_slices() < n_slices {
                    return Err(Error::Domain(format!(
                        "gauge function has {} time slices, {n_slices} needed",
                        field.n_slices()
                    )));
                }
                field.window(0, n_slices)
            }
        }
    }
}

/// Discrete derivative of a field whose slice `j` sits at absolute time index `j`.
pub fn discrete_derivative(
    chi: &SpaceTimeField,
    which: Derivative,
    eps_a: f64,
) -> Result<SpaceTimeField> {
    discrete_derivative_with(chi, which, eps_a, DerivativeNormalization::Averaged)
}

pub fn discrete_derivative_with(
    chi: &SpaceTimeField,
    which: Derivative,
    eps_a: f64,
    norm: DerivativeNormalization,
) -> Result<SpaceTimeField> {
    if !(eps_a.is_finite() && eps_a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps_A must be positive, got {eps_a}"
        )));
    }
    let geom = *chi.geom();
    let dim = geom.dim();
    let temporal = |k: Axis| -> Result<SpaceTimeField> {
        let summed = sigma_delta(chi, k, Stencil::Sum)?;
        let stencil = sigma_delta(&summed, Axis::T, Stencil::Difference)?;
        let factor = match (norm, dim) {
            (DerivativeNormalization::Plain, _) => 1.0 / eps_a,
            (DerivativeNormalization::Averaged, Dimension::One) => 0.5 / eps_a,
            (DerivativeNormalization::Averaged, Dimension::Two) => 1.0 / eps_a,
        };
        Ok(stencil.scaled(factor))
    };
    match which {
        Derivative::Space(axis) => {
            if !axis.is_spatial() || !geom.has_axis(axis) {
                return Err(Error::InvalidArgument(format!(
                    "no spatial derivative along {axis} on this lattice"
                )));
            }
            let summed = sigma_delta(chi, Axis::T, Stencil::Sum)?;
            let stencil = sigma_delta(&summed, axis, Stencil::Difference)?;
            let factor = match norm {
                DerivativeNormalization::Averaged => 0.5 / eps_a,
                DerivativeNormalization::Plain => 1.0 / eps_a,
            };
            Ok(stencil.scaled(factor))
        }
        Derivative::TimeAlong(k) => {
            if dim != Dimension::Two || !k.is_spatial() {
                return Err(Error::InvalidArgument(
                    "d_0^k is only defined on 2D lattices with k in {x, y}".into(),
                ));
            }
            temporal(k)
        }
        Derivative::Time => match dim {
            Dimension::One => temporal(Axis::X),
            Dimension::Two => {
                let along_x = temporal(Axis::X)?;
                let along_y = temporal(Axis::Y)?;
                let slices = (0..along_x.n_slices())
                    .map(|j| {
                        if j % 2 == 0 {
                            along_x.slice(j).to_vec()
                        } else {
                            along_y.slice(j).to_vec()
                        }
                    })
                    .collect();
                SpaceTimeField::new(geom, slices)
            }
        },
    }
}

/// Axis moved by the 2D substep leaving time index `j`.
pub fn substep_axis(j: usize) -> Axis {
    if j % 2 == 0 {
        Axis::X
    } else {
        Axis::Y
    }
}

/// Transforms the phases so that `psi'_j = exp(i q chi_j) psi_j` solves the walk whenever
/// `psi_j` does. `chi` must cover time indices `0..=n_labels`.
pub fn gauge_transform(
    phases: &GaugePhases,
    chi: &GaugeFunction,
    charge: f64,
) -> Result<GaugePhases> {
    gauge_transform_with(phases, chi, charge, DerivativeNormalization::Averaged)
}

pub fn gauge_transform_with(
    phases: &GaugePhases,
    chi: &GaugeFunction,
    charge: f64,
    norm: DerivativeNormalization,
) -> Result<GaugePhases> {
    let geom = *phases.geom();
    let n = phases.n_labels();
    let chi = chi.sample(&geom, n + 1)?;
    // eps_A cancels between A = phase / (eps_A q) and the derivative normalization.
    let d0 = discrete_derivative_with(&chi, Derivative::Time, 1.0, norm)?;
    let shift = |axis: Axis| discrete_derivative_with(&chi, Derivative::Space(axis), 1.0, norm);
    let alpha = phases.alpha_field().combine(1.0, &d0, -charge);
    let xi1 = phases.xi_field(Axis::X)?.combine(1.0, &shift(Axis::X)?, charge);
    let xi2 = match geom.dim() {
        Dimension::One => None,
        Dimension::Two => Some(phases.xi_field(Axis::Y)?.combine(1.0, &shift(Axis::Y)?, charge)),
    };
    GaugePhases::from_fields(alpha, xi1, xi2)
}

/// Covariant lattice potential `A_mu` on base time indices `0..n_slices`
/// (slice `j` belongs to the step with phase label `j + 1`).
///
/// In 2D the temporal component is carried once per substep direction: `temporal[0]`
/// is the `A_0` seen by `x` substeps and transforms with `d_0^1`, `temporal[1]` the one
/// seen by `y` substeps, transforming with `d_0^2`. The walk reads `temporal[0]` after
/// even indices and `temporal[1]` after odd ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGaugeField {
    eps_a: f64,
    temporal: Vec<SpaceTimeField>,
    spatial: Vec<SpaceTimeField>,
}

impl LatticeGaugeField {
    pub fn new(
        eps_a: f64,
        temporal: Vec<SpaceTimeField>,
        spatial: Vec<SpaceTimeField>,
    ) -> Result<Self> {
        let geom = *spatial
            .first()
            .ok_or_else(|| Error::InvalidArgument("missing spatial components".into()))?
            .geom();
        let expected = match geom.dim() {
            Dimension::One => 1,
            Dimension::Two => 2,
        };
        if temporal.len() != expected || spatial.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} temporal and spatial components"
            )));
        }
        let n = spatial[0].n_slices();
        if temporal
            .iter()
            .chain(&spatial)
            .any(|f| *f.geom() != geom || f.n_slices() != n)
        {
            return Err(Error::InvalidArgument("gauge field components disagree in shape".into()));
        }
        Ok(LatticeGaugeField {
            eps_a,
            temporal,
            spatial,
        })
    }

    /// Samples `A_0 = A^0`, `A_i = -A^i` at the times of labels `1..=n_slices`.
    pub fn from_potential(spec: &PotentialSpec, geom: &LatticeGeom, n_slices: usize) -> Result<Self> {
        let sample = |mu: usize| SpaceTimeField::sample(*geom, 1, n_slices, spec.component(mu));
        let a0 = sample(0)?;
        let (temporal, spatial) = match geom.dim() {
            Dimension::One => (vec![a0], vec![sample(1)?.negated()]),
            Dimension::Two => (
                vec![a0.clone(), a0],
                vec![sample(1)?.negated(), sample(2)?.negated()],
            ),
        };
        Self::new(spec.eps_a_for(geom), temporal, spatial)
    }

    /// `A_0 = alpha / (eps_A q)`, `A_i = -xi^i / (eps_A q)`.
    pub fn from_phases(phases: &GaugePhases, charge: f64, eps_a: f64) -> Result<Self> {
        if charge == 0.0 || !charge.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cannot recover potentials from phases with charge {charge}"
            )));
        }
        let c = 1.0 / (eps_a * charge);
        let a0 = phases.alpha_field().scaled(c);
        let (temporal, spatial) = match phases.geom().dim() {
            Dimension::One => (vec![a0], vec![phases.xi_field(Axis::X)?.scaled(-c)]),
            Dimension::Two => (
                vec![a0.clone(), a0],
                vec![
                    phases.xi_field(Axis::X)?.scaled(-c),
                    phases.xi_field(Axis::Y)?.scaled(-c),
                ],
            ),
        };
        Self::new(eps_a, temporal, spatial)
    }

    /// `A_mu = d_mu chi` on the `chi.n_slices() - 1` links covered by `chi`.
    pub fn pure_gauge(chi: &SpaceTimeField, eps_a: f64) -> Result<Self> {
        let geom = *chi.geom();
        let (temporal, spatial) = match geom.dim() {
            Dimension::One => (
                vec![discrete_derivative(chi, Derivative::Time, eps_a)?],
                vec![discrete_derivative(chi, Derivative::Space(Axis::X), eps_a)?],
            ),
            Dimension::Two => (
                vec![
                    discrete_derivative(chi, Derivative::TimeAlong(Axis::X), eps_a)?,
                    discrete_derivative(chi, Derivative::TimeAlong(Axis::Y), eps_a)?,
                ],
                vec![
                    discrete_derivative(chi, Derivative::Space(Axis::X), eps_a)?,
                    discrete_derivative(chi, Derivative::Space(Axis::Y), eps_a)?,
                ],
            ),
        };
        Self::new(eps_a, temporal, spatial)
    }

    pub fn geom(&self) -> &LatticeGeom {
        self.spatial[0].geom()
    }

    pub fn eps_a(&self) -> f64 {
        self.eps_a
    }

    pub fn n_slices(&self) -> usize {
        self.spatial[0].n_slices()
    }

    /// `A_0`; in 2D `along` selects the substep direction (`X` or `Y`).
    pub fn temporal(&self, along: Axis) -> &SpaceTimeField {
        match along {
            Axis::Y => &self.temporal[1],
            _ => &self.temporal[0],
        }
    }

    pub fn spatial(&self, axis: Axis) -> &SpaceTimeField {
        match axis {
            Axis::Y => &self.spatial[1],
            _ => &self.spatial[0],
        }
    }

    /// `A'_mu = A_mu - d_mu chi`; `chi` must cover indices `0..=n_slices`.
    pub fn gauge_transformed(&self, chi: &GaugeFunction) -> Result<Self> {
        let chi = chi.sample(self.geom(), self.n_slices() + 1)?;
        let pure = Self::pure_gauge(&chi, self.eps_a)?;
        let sub = |a: &[SpaceTimeField], b: &[SpaceTimeField]| -> Vec<SpaceTimeField> {
            a.iter().zip(b).map(|(x, y)| x.combine(1.0, y, -1.0)).collect()
        };
        Self::new(
            self.eps_a,
            sub(&self.temporal, &pure.temporal),
            sub(&self.spatial, &pure.spatial),
        )
    }

    /// Phases consumed by the walk: `alpha` from the temporal component of the active
    /// substep direction, `xi^i = -eps_A q A_i`.
    pub fn to_phases(&self, charge: f64) -> Result<GaugePhases> {
        let c = self.eps_a * charge;
        let geom = *self.geom();
        let alpha = match geom.dim() {
            Dimension::One => self.temporal[0].scaled(c),
            Dimension::Two => {
                let slices = (0..self.n_slices())
                    .map(|j| {
                        let k = usize::from(substep_axis(j) == Axis::Y);
                        self.temporal[k].slice(j).iter().map(|v| c * v).collect()
                    })
                    .collect();
                SpaceTimeField::new(geom, slices)?
            }
        };
        let xi2 = match geom.dim() {
            Dimension::One => None,
            Dimension::Two => Some(self.spatial[1].scaled(-c)),
        };
        GaugePhases::from_fields(alpha, self.spatial[0].scaled(-c), xi2)
    }

    pub fn max_abs_diff(&self, other: &LatticeGaugeField) -> f64 {
        self.temporal
            .iter()
            .chain(&self.spatial)
            .zip(other.temporal.iter().chain(&other.spatial))
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// Antisymmetric lattice field tensor `F_{mu nu}`, defined on `n_slices - 1` base indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTensor {
    dim: Dimension,
    /// Upper-triangle components in the order (0,1), (0,2), (1,2).
    upper: Vec<SpaceTimeField>,
}

impl FieldTensor {
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    fn upper_index(&self, mu: usize, nu: usize) -> Option<usize> {
        match (self.dim, mu, nu) {
            (Dimension::One, 0, 1) => Some(0),
            (Dimension::Two, 0, 1) => Some(0),
            (Dimension::Two, 0, 2) => Some(1),
            (Dimension::Two, 1, 2) => Some(2),
            _ => None,
        }
    }

    /// `F_{mu nu}`. Lower components are the exact negation of the upper ones;
    /// the diagonal is zero. Returns `None` for indices outside the dimension.
    pub fn component(&self, mu: usize, nu: usize) -> Option<SpaceTimeField> {
        let size = match self.dim {
            Dimension::One => 2,
            Dimension::Two => 3,
        };
        if mu >= size || nu >= size {
            return None;
        }
        if mu == nu {
            let template = &self.upper[0];
            return Some(SpaceTimeField::zeros(*template.geom(), template.n_slices()));
        }
        if mu < nu {
            self.upper_index(mu, nu).map(|k| self.upper[k].clone())
        } else {
            self.upper_index(nu, mu).map(|k| self.upper[k].negated())
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().map(SpaceTimeField::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &FieldTensor) -> f64 {
        self.upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `F_{mu nu} = d_mu A_nu - d_nu A_mu`. In 2D, `F_{0i}` uses `d_0^i` and the temporal
/// component seen by substeps along `i`.
pub fn field_tensor(field: &LatticeGaugeField) -> Result<FieldTensor> {
    let eps = field.eps_a();
    let d = |f: &SpaceTimeField, which: Derivative| discrete_derivative(f, which, eps);
    let geom = *field.geom();
    let upper = match geom.dim() {
        Dimension::One => {
            let f01 = d(field.spatial(Axis::X), Derivative::Time)?
                .combine(1.0, &d(field.temporal(Axis::X), Derivative::Space(Axis::X))?, -1.0);
            vec![f01]
        }
        Dimension::Two => {
            let f0i = |i: Axis| -> Result<SpaceTimeField> {
                Ok(d(field.spatial(i), Derivative::TimeAlong(i))?
                    .combine(1.0, &d(field.temporal(i), Derivative::Space(i))?, -1.0))
            };
            let f12 = d(field.spatial(Axis::Y), Derivative::Space(Axis::X))?.combine(
                1.0,
                &d(field.spatial(Axis::X), Derivative::Space(Axis::Y))?,
                -1.0,
            );
            vec![f0i(Axis::X)?, f0i(Axis::Y)?, f12]
        }
    };
    Ok(FieldTensor {
        dim: geom.dim(),
        upper,
    })
}

/// Value of a periodic index shifted by `delta`; exposed for stencil-writing callers.
pub fn periodic(i: usize, delta: isize, n: usize) -> usize {
    wrap(i, delta, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::shared;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g1(n: usize) -> LatticeGeom {
        LatticeGeom::one_d(n, 1.0).unwrap()
    }

    fn random_field(geom: LatticeGeom, n: usize, seed: u64) -> SpaceTimeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpaceTimeField::from_indices(geom, n, |_, _, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn zero_potential_gives_zero_phases() {
        let g = LatticeGeom::two_d(3, 4, 0.5).unwrap();
        let p = sample_phases(&PotentialSpec::free(1.0), &g, 3).unwrap();
        assert_eq!(p.max_abs_diff(&GaugePhases::zero(g, 3)), 0.0);
    }

    #[test]
    fn constant_a0_gives_scaled_alpha() {
        let g = g1(5);
        let spec = PotentialSpec::new(shared(|_, _, _| 1.0), zero_fn(), zero_fn(), 2.0)
            .with_eps_a(0.1);
        let p = sample_phases(&spec, &g, 2).unwrap();
        for l in 1..=2 {
            for &a in p.alpha(l).unwrap() {
                assert!((a - 0.2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn linear_a1_samples_site_index() {
        let g = g1(4);
        let spec = PotentialSpec::new(zero_fn(), shared(|_, x, _| x), zero_fn(), 1.0).with_eps_a(1.0);
        let p = sample_phases(&spec, &g, 3).unwrap();
        for l in 1..=3 {
            assert_eq!(p.xi(Axis::X, l).unwrap(), &[0.0, 1.0, 2.0, 3.0]);
        }
    }

    #[test]
    fn phases_reject_missing_label() {
        let p = GaugePhases::zero(g1(4), 2);
        assert!(matches!(p.alpha(0), Err(Error::Domain(_))));
        assert!(matches!(p.alpha(3), Err(Error::Domain(_))));
        assert!(p.xi(Axis::Y, 1).is_err());
    }

    #[test]
    fn two_d_betas_use_half_alpha() {
        let g = LatticeGeom::two_d(2, 2, 1.0).unwrap();
        let spec = PotentialSpec::new(shared(|_, _, _| 1.0), shared(|_, _, _| 3.0), zero_fn(), 1.0)
            .with_eps_a(1.0);
        let p = sample_phases(&spec, &g, 1).unwrap();
        let (m, pl) = p.betas(1, Axis::X).unwrap();
        assert_eq!(m[0], 2.5);
        assert_eq!(pl[0], 3.5);
    }

    #[test]
    fn sigma_delta_on_constant_field() {
        let g = LatticeGeom::two_d(3, 3, 1.0).unwrap();
        let f = SpaceTimeField::from_indices(g, 3, |_, _, _| 1.5);
        for axis in [Axis::T, Axis::X, Axis::Y] {
            let d = sigma_delta(&f, axis, Stencil::Difference).unwrap();
            assert_eq!(d.max_abs(), 0.0);
            let s = sigma_delta(&f, axis, Stencil::Sum).unwrap();
            assert!(s.slices().iter().flatten().all(|&v| v == 3.0));
        }
    }

    #[test]
    fn delta_x_wraps_at_the_boundary() {
        let f = SpaceTimeField::from_indices(g1(4), 1, |_, ix, _| ix as f64);
        let d = sigma_delta(&f, Axis::X, Stencil::Difference).unwrap();
        assert_eq!(d.slice(0), &[1.0, 1.0, 1.0, -3.0]);
    }

    #[test]
    fn time_stencil_needs_two_slices() {
        let f = SpaceTimeField::zeros(g1(4), 1);
        assert!(matches!(
            sigma_delta(&f, Axis::T, Stencil::Sum),
            Err(Error::Domain(_))
        ));
        assert!(sigma_delta(&f, Axis::Y, Stencil::Sum).is_err());
    }

    #[test]
    fn derivatives_of_simple_fields() {
        let eps = 0.25;
        let constant = SpaceTimeField::from_indices(g1(5), 3, |_, _, _| 2.0);
        for which in [Derivative::Time, Derivative::Space(Axis::X)] {
            assert_eq!(discrete_derivative(&constant, which, eps).unwrap().max_abs(), 0.0);
        }
        let in_time = SpaceTimeField::from_indices(g1(5), 3, |j, _, _| j as f64);
        let d0 = discrete_derivative(&in_time, Derivative::Time, eps).unwrap();
        assert!(d0.slices().iter().flatten().all(|&v| v == 1.0 / eps));
        let in_space = SpaceTimeField::from_indices(g1(5), 3, |_, ix, _| ix as f64);
        let d1 = discrete_derivative(&in_space, Derivative::Space(Axis::X), eps).unwrap();
        for slice in d1.slices() {
            assert!(slice[..4].iter().all(|&v| v == 1.0 / eps));
        }
    }

    #[test]
    fn two_d_time_derivative_follows_parity() {
        let g = LatticeGeom::two_d(4, 4, 1.0).unwrap();
        let chi = random_field(g, 5, 3);
        let parity = discrete_derivative(&chi, Derivative::Time, 0.5).unwrap();
        let dx = discrete_derivative(&chi, Derivative::TimeAlong(Axis::X), 0.5).unwrap();
        let dy = discrete_derivative(&chi, Derivative::TimeAlong(Axis::Y), 0.5).unwrap();
        assert_eq!(parity.slice(0), dx.slice(0));
        assert_eq!(parity.slice(1), dy.slice(1));
        assert_eq!(parity.slice(2), dx.slice(2));
        assert!(discrete_derivative(&chi, Derivative::TimeAlong(Axis::T), 0.5).is_err());
    }

    #[test]
    fn gauge_transform_by_zero_or_constant_is_identity() {
        let g = LatticeGeom::two_d(3, 4, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rnd = |rng: &mut ChaCha8Rng| {
            SpaceTimeField::from_indices(g, 4, |_, _, _| rng.gen_range(-1.0..1.0))
        };
        let phases =
            GaugePhases::from_fields(rnd(&mut rng), rnd(&mut rng), Some(rnd(&mut rng))).unwrap();
        for c in [0.0, 1.7] {
            let chi = GaugeFunction::Analytic(shared(move |_, _, _| c));
            let out = gauge_transform(&phases, &chi, 0.8).unwrap();
            assert!(out.max_abs_diff(&phases) < 1e-15);
        }
    }

    #[test]
    fn gauge_transform_needs_enough_slices() {
        let phases = GaugePhases::zero(g1(4), 3);
        let chi = GaugeFunction::Sampled(SpaceTimeField::zeros(g1(4), 3));
        assert!(matches!(
            gauge_transform(&phases, &chi, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pure_gauge_has_vanishing_tensor() {
        for geom in [g1(9), LatticeGeom::two_d(5, 6, 1.0).unwrap()] {
            let chi = random_field(geom, 7, 11);
            let a = LatticeGaugeField::pure_gauge(&chi, 0.5).unwrap();
            let f = field_tensor(&a).unwrap();
            assert!(f.max_abs() < 1e-13, "{}", f.max_abs());
        }
    }

    #[test]
    fn zero_potential_has_zero_tensor() {
        let g = LatticeGeom::two_d(4, 4, 0.5).unwrap();
        let a = LatticeGaugeField::from_potential(&PotentialSpec::free(1.0), &g, 4).unwrap();
        assert_eq!(field_tensor(&a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn uniform_electric_field_tensor() {
        // A^1 = E0 t, so A_1 = -E0 t and d_0 A_1 = -E0 on every link.
        let e0 = 0.75;
        let g = LatticeGeom::one_d(6, 0.5).unwrap();
        let spec = PotentialSpec::new(zero_fn(), shared(move |t, _, _| e0 * t), zero_fn(), 1.0);
        let a = LatticeGaugeField::from_potential(&spec, &g, 5).unwrap();
        let f01 = field_tensor(&a).unwrap().component(0, 1).unwrap();
        for v in f01.slices().iter().flatten() {
            assert!((v + e0).abs() < 1e-14, "{v}");
        }
    }

    #[test]
    fn tensor_is_antisymmetric() {
        let g = LatticeGeom::two_d(4, 5, 1.0).unwrap();
        let spec = PotentialSpec::new(
            shared(|t, x, y| (t + x).sin() * y.cos()),
            shared(|t, x, y| (x * y).cos() + t),
            shared(|t, x, _| (2.0 * x - t).sin()),
            1.0,
        );
        let f = field_tensor(&LatticeGaugeField::from_potential(&spec, &g, 4).unwrap()).unwrap();
        for mu in 0..3 {
            for nu in 0..3 {
                let a = f.component(mu, nu).unwrap();
                let b = f.component(nu, mu).unwrap();
                assert_eq!(a.combine(1.0, &b, 1.0).max_abs(), 0.0);
            }
        }
        assert!(f.component(0, 3).is_none());
    }

    #[test]
    fn tensor_is_gauge_invariant() {
        for geom in [g1(8), LatticeGeom::two_d(5, 4, 1.0).unwrap()] {
            let chi = random_field(geom, 6, 5);
            let a = LatticeGaugeField::pure_gauge(&random_field(geom, 6, 9), 0.5).unwrap();
            // start from a generic (non pure-gauge) potential
            let spec = PotentialSpec::new(
                shared(|t, x, y| (t - x).sin() + y),
                shared(|t, x, y| (x + 0.3 * y).cos() * t),
                shared(|_, x, y| x * y),
                1.0,
            )
            .with_eps_a(0.5);
            let base = LatticeGaugeField::from_potential(&spec, &geom, 5).unwrap();
            for field in [a, base] {
                let transformed = field
                    .gauge_transformed(&GaugeFunction::Sampled(chi.clone()))
                    .unwrap();
                let f = field_tensor(&field).unwrap();
                let f2 = field_tensor(&transformed).unwrap();
                assert!(f.max_abs_diff(&f2) < 1e-13);
            }
        }
    }

    #[test]
    fn potential_and_phase_transforms_agree() {
        let g = LatticeGeom::two_d(4, 3, 0.5).unwrap();
        let spec = PotentialSpec::new(
            shared(|t, x, _| (t + x).cos()),
            shared(|_, x, y| (x - y).sin()),
            shared(|t, _, y| t * y),
            0.7,
        );
        let n = 5;
        let phases = sample_phases(&spec, &g, n).unwrap();
        let chi = GaugeFunction::Sampled(random_field(g, n + 1, 21));
        let via_phases = gauge_transform(&phases, &chi, 0.7).unwrap();
        let via_field = LatticeGaugeField::from_potential(&spec, &g, n)
            .unwrap()
            .gauge_transformed(&chi)
            .unwrap()
            .to_phases(0.7)
            .unwrap();
        assert!(via_phases.max_abs_diff(&via_field) < 1e-14);
    }

    #[test]
    fn derivatives_commute() {
        let g = LatticeGeom::two_d(5, 5, 1.0).unwrap();
        let chi = random_field(g, 6, 2);
        let ops = [
            Derivative::TimeAlong(Axis::X),
            Derivative::TimeAlong(Axis::Y),
            Derivative::Space(Axis::X),
            Derivative::Space(Axis::Y),
        ];
        for a in ops {
            for b in ops {
                let ab = discrete_derivative(&discrete_derivative(&chi, b, 0.3).unwrap(), a, 0.3).unwrap();
                let ba = discrete_derivative(&discrete_derivative(&chi, a, 0.3).unwrap(), b, 0.3).unwrap();
                assert!(ab.max_abs_diff(&ba) < 1e-13);
            }
        }
    }
}
