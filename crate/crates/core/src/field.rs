//! Real scalar fields on the spacetime lattice and the continuum functions they are sampled from.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::LatticeGeom;

/// A real function of `(t, x, y)`. Failures carry a human-readable reason.
pub trait ScalarFn: Send + Sync {
    fn value(&self, t: f64, x: f64, y: f64) -> std::result::Result<f64, String>;
}

impl<F> ScalarFn for F
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn value(&self, t: f64, x: f64, y: f64) -> std::result::Result<f64, String> {
        Ok(self(t, x, y))
    }
}

pub type SharedFn = Arc<dyn ScalarFn>;

/// Wraps a closure as a shareable field function.
pub fn shared<F>(f: F) -> SharedFn
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(f)
}

/// The identically-zero function.
pub fn zero_fn() -> SharedFn {
    shared(|_, _, _| 0.0)
}

/// Real lattice field over a run of time slices: `slices[j][site]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    geom: LatticeGeom,
    slices: Vec<Vec<f64>>,
}

impl SpaceTimeField {
    pub fn new(geom: LatticeGeom, slices: Vec<Vec<f64>>) -> Result<Self> {
        if let Some((j, bad)) = slices
            .iter()
            .enumerate()
            .find(|(_, s)| s.len() != geom.sites())
        {
            return Err(Error::InvalidArgument(format!(
                "slice {j} has {} sites, lattice has {}",
                bad.len(),
                geom.sites()
            )));
        }
        Ok(SpaceTimeField { geom, slices })
    }

    pub fn zeros(geom: LatticeGeom, n_slices: usize) -> Self {
        SpaceTimeField {
            geom,
            slices: vec![vec![0.0; geom.sites()]; n_slices],
        }
    }

    /// Builds a field from `f(j, ix, iy)`.
    pub fn from_indices(
        geom: LatticeGeom,
        n_slices: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let slices = (0..n_slices)
            .map(|j| {
                (0..geom.sites())
                    .map(|s| {
                        let (ix, iy) = geom.coords(s);
                        f(j, ix, iy)
                    })
                    .collect()
            })
            .collect();
        SpaceTimeField { geom, slices }
    }

    /// Samples `func` at `(t_j, x, y)` with `t_j = geom.time_of(first + j)`.
    pub fn sample(
        geom: LatticeGeom,
        first: usize,
        n_slices: usize,
        func: &dyn ScalarFn,
    ) -> Result<Self> {
        let mut slices = Vec::with_capacity(n_slices);
        for j in first..first + n_slices {
            let t = geom.time_of(j);
            let mut slice = Vec::with_capacity(geom.sites());
            for s in 0..geom.sites() {
                let (ix, iy) = geom.coords(s);
                let (x, y) = geom.position(ix, iy);
                let v = func.value(t, x, y).map_err(|reason| Error::Sampling {
                    time_index: j,
                    ix,
                    iy,
                    reason,
                })?;
                if !v.is_finite() {
                    return Err(Error::Sampling {
                        time_index: j,
                        ix,
                        iy,
                        reason: format!("non-finite value {v}"),
                    });
                }
                slice.push(v);
            }
            slices.push(slice);
        }
        Ok(SpaceTimeField { geom, slices })
    }

    pub fn geom(&self) -> &LatticeGeom {
        &self.geom
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        &self.slices[j]
    }

    pub fn slice_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.slices[j]
    }

    pub fn slices(&self) -> &[Vec<f64>] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<Vec<f64>> {
        self.slices
    }

    #[inline]
    pub fn get(&self, j: usize, s: usize) -> f64 {
        self.slices[j][s]
    }

    /// Keeps slices `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.slices.len() {
            return Err(Error::Domain(format!(
                "window [{start}, {}) exceeds {} slices",
                start + len,
                self.slices.len()
            )));
        }
        Ok(SpaceTimeField {
            geom: self.geom,
            slices: self.slices[start..start + len].to_vec(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.slices
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise difference over the common slice range.
    pub fn max_abs_diff(&self, other: &SpaceTimeField) -> f64 {
        self.slices
            .iter()
            .zip(&other.slices)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Pointwise `a * self + b * other` over the common slice range.
    pub fn combine(&self, a: f64, other: &SpaceTimeField, b: f64) -> SpaceTimeField {
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect())
            .collect();
        SpaceTimeField {
            geom: self.geom,
            slices,
        }
    }

    pub fn scaled(&self, a: f64) -> SpaceTimeField {
        SpaceTimeField {
            geom: self.geom,
            slices: self
                .slices
                .iter()
                .map(|s| s.iter().map(|v| a * v).collect())
                .collect(),
        }
    }

    pub fn negated(&self) -> SpaceTimeField {
        SpaceTimeField {
            geom: self.geom,
            slices: self
                .slices
                .iter()
                .map(|s| s.iter().map(|v| -v).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_uses_dimension_time_convention() {
        let g1 = LatticeGeom::one_d(4, 0.5).unwrap();
        let f = SpaceTimeField::sample(g1, 0, 3, &|t: f64, _x: f64, _y: f64| t).unwrap();
        assert_eq!(f.slice(2), &[1.0; 4]);
        let g2 = LatticeGeom::two_d(2, 2, 0.5).unwrap();
        let f = SpaceTimeField::sample(g2, 1, 2, &|t: f64, _x: f64, _y: f64| t).unwrap();
        assert_eq!(f.slice(0), &[0.25; 4]);
        assert_eq!(f.slice(1), &[0.5; 4]);
    }

    #[test]
    fn sampling_reports_the_failing_point() {
        let g = LatticeGeom::one_d(4, 1.0).unwrap();
        let f = |t: f64, x: f64, _y: f64| if t == 1.0 && x == 2.0 { f64::NAN } else { 0.0 };
        match SpaceTimeField::sample(g, 0, 3, &f) {
            Err(Error::Sampling { time_index, ix, .. }) => {
                assert_eq!((time_index, ix), (1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn new_checks_slice_lengths() {
        let g = LatticeGeom::one_d(3, 1.0).unwrap();
        assert!(SpaceTimeField::new(g, vec![vec![0.0; 3], vec![0.0; 2]]).is_err());
    }
}
