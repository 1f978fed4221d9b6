//! Brute-force dense-matrix references for the walk operators.
//!
//! Every operator is assembled entry by entry from its algebraic definition
//! (`S = T e^{i beta_-} Lambda_R + e^{-i beta_+} T^dag Lambda_L`, `C` block-diagonal)
//! on the full `2 * sites` dimensional space, without going through the kernels.
//! Only meant for tiny lattices.

pub mod cases;

use num_complex::Complex64 as C64;
use qwgauge::lattice::{Axis, LatticeGeom};

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    n: usize,
    data: Vec<C64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.n + c] = v;
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    pub fn dagger(&self) -> Dense {
        let mut out = Dense::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Dense) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |U^dag U - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.dagger().mul(self).max_abs_diff(&Dense::identity(self.n))
    }
}

fn index(site: usize, coin: usize) -> usize {
    2 * site + coin
}

/// Site reached by moving `delta` along `axis`, from explicit coordinates.
fn moved(geom: &LatticeGeom, site: usize, axis: Axis, delta: i64) -> usize {
    let (ix, iy) = (site / geom.ny(), site % geom.ny());
    let wrap = |i: usize, n: usize| ((i as i64 + delta).rem_euclid(n as i64)) as usize;
    match axis {
        Axis::X => wrap(ix, geom.nx()) * geom.ny() + iy,
        Axis::Y => ix * geom.ny() + wrap(iy, geom.ny()),
        Axis::T => panic!("no time shifts"),
    }
}

/// Translation `T` along `axis` acting on both coin components: `T|p> = |p + 1>`.
pub fn translation(geom: &LatticeGeom, axis: Axis) -> Dense {
    let n = 2 * geom.sites();
    let mut m = Dense::zeros(n);
    for p in 0..geom.sites() {
        for c in 0..2 {
            m.set(index(moved(geom, p, axis, 1), c), index(p, c), C64::new(1.0, 0.0));
        }
    }
    m
}

/// Coin-space projector `Lambda_c` on every site.
pub fn projector(geom: &LatticeGeom, coin: usize) -> Dense {
    let mut m = Dense::zeros(2 * geom.sites());
    for p in 0..geom.sites() {
        m.set(index(p, coin), index(p, coin), C64::new(1.0, 0.0));
    }
    m
}

/// Site-diagonal multiplication by `e^{i phase(p)}`.
pub fn diagonal_phase(geom: &LatticeGeom, phase: &[f64]) -> Dense {
    let mut m = Dense::zeros(2 * geom.sites());
    for p in 0..geom.sites() {
        for c in 0..2 {
            m.set(index(p, c), index(p, c), C64::from_polar(1.0, phase[p]));
        }
    }
    m
}

/// `S = T e^{i beta_-} Lambda_R + e^{-i beta_+} T^dag Lambda_L` as a product of
/// dense factors.
pub fn shift(geom: &LatticeGeom, beta_minus: &[f64], beta_plus: &[f64], axis: Axis) -> Dense {
    let t = translation(geom, axis);
    let neg_plus: Vec<f64> = beta_plus.iter().map(|b| -b).collect();
    let right = t
        .mul(&diagonal_phase(geom, beta_minus))
        .mul(&projector(geom, 0));
    let left = diagonal_phase(geom, &neg_plus)
        .mul(&t.dagger())
        .mul(&projector(geom, 1));
    let mut out = right;
    for (o, l) in out.data.iter_mut().zip(&left.data) {
        *o += l;
    }
    out
}

/// `C(theta) = [[cos, i sin], [i sin, cos]](theta / 2)` on every site.
pub fn coin(geom: &LatticeGeom, theta: f64) -> Dense {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let block = [
        [C64::new(c, 0.0), C64::new(0.0, s)],
        [C64::new(0.0, s), C64::new(c, 0.0)],
    ];
    let mut m = Dense::zeros(2 * geom.sites());
    for p in 0..geom.sites() {
        for r in 0..2 {
            for k in 0..2 {
                m.set(index(p, r), index(p, k), block[r][k]);
            }
        }
    }
    m
}

/// `beta_-`, `beta_+` from `alpha`, `xi` and the weight of `alpha` (1 in 1D, 1/2 in 2D).
pub fn betas(alpha: &[f64], xi: &[f64], weight: f64) -> (Vec<f64>, Vec<f64>) {
    (
        xi.iter().zip(alpha).map(|(x, a)| x - weight * a).collect(),
        xi.iter().zip(alpha).map(|(x, a)| x + weight * a).collect(),
    )
}

/// `S(alpha, xi) C(theta)` for a 1D step.
pub fn step_1d(geom: &LatticeGeom, alpha: &[f64], xi: &[f64], theta: f64) -> Dense {
    let (bm, bp) = betas(alpha, xi, 1.0);
    shift(geom, &bm, &bp, Axis::X).mul(&coin(geom, theta))
}

/// `S^(i)(alpha / 2, xi^i) C(theta^i)` for a 2D substep along `axis`.
pub fn substep_2d(geom: &LatticeGeom, alpha: &[f64], xi: &[f64], axis: Axis, theta: f64) -> Dense {
    let (bm, bp) = betas(alpha, xi, 0.5);
    shift(geom, &bm, &bp, axis).mul(&coin(geom, theta))
}

/// Full 2D step `U^(2) U^(1)` with independent phases for the two substeps.
pub fn step_2d(
    geom: &LatticeGeom,
    first: (&[f64], &[f64]),
    second: (&[f64], &[f64]),
    theta1: f64,
    theta2: f64,
) -> Dense {
    let ux = substep_2d(geom, first.0, first.1, Axis::X, theta1);
    let uy = substep_2d(geom, second.0, second.1, Axis::Y, theta2);
    uy.mul(&ux)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_is_a_permutation() {
        let g = LatticeGeom::two_d(3, 2, 1.0).unwrap();
        let t = translation(&g, Axis::Y);
        assert!(t.unitarity_defect() < 1e-15);
        // (0, 1) -> (0, 0) wraps
        assert_eq!(t.get(index(0, 0), index(1, 0)), C64::new(1.0, 0.0));
    }

    #[test]
    fn shift_and_coin_are_unitary() {
        let g = LatticeGeom::one_d(4, 1.0).unwrap();
        let bm = [0.1, -0.4, 2.0, 0.3];
        let bp = [1.1, 0.4, -2.0, 0.7];
        assert!(shift(&g, &bm, &bp, Axis::X).unitarity_defect() < 1e-14);
        assert!(coin(&g, 0.77).unitarity_defect() < 1e-14);
    }
}
