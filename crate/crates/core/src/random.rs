//! Seeded generators for test inputs: random states, phase schedules, gauge functions
//! and smooth periodic potentials.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;

use crate::field::{ScalarFn, SpaceTimeField};
use crate::gauge::{GaugePhases, PotentialSpec};
use crate::lattice::{Dimension, LatticeGeom, WalkerState};
use crate::C64;

/// Normalized state with independent uniform amplitudes.
pub fn random_state<R: Rng + ?Sized>(geom: LatticeGeom, rng: &mut R) -> WalkerState {
    let amp = (0..2 * geom.sites())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut s = WalkerState::from_amplitudes(geom, amp, 0).expect("finite amplitudes");
    s.normalize().expect("nonzero norm");
    s
}

/// Field with independent values uniform in `[-scale, scale]`.
pub fn random_field<R: Rng + ?Sized>(
    geom: LatticeGeom,
    n_slices: usize,
    scale: f64,
    rng: &mut R,
) -> SpaceTimeField {
    SpaceTimeField::from_indices(geom, n_slices, |_, _, _| rng.gen_range(-scale..=scale))
}

/// Unstructured phases uniform in `[-pi, pi]` for labels `1..=n_labels`.
pub fn random_phases<R: Rng + ?Sized>(geom: &LatticeGeom, n_labels: usize, rng: &mut R) -> GaugePhases {
    let alpha = random_field(*geom, n_labels, PI, rng);
    let xi1 = random_field(*geom, n_labels, PI, rng);
    let xi2 = match geom.dim() {
        Dimension::One => None,
        Dimension::Two => Some(random_field(*geom, n_labels, PI, rng)),
    };
    GaugePhases::from_fields(alpha, xi1, xi2).expect("consistent shapes")
}

/// A sum of a few plane-wave modes, periodic on an `lx` by `ly` box.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    lx: f64,
    ly: f64,
    /// `(kx, ky, omega, amplitude, phase)`
    modes: Vec<(i32, i32, f64, f64, f64)>,
}

impl FourierField {
    /// Random smooth field with wave numbers up to `kmax` and overall scale `amplitude`.
    /// In 1D only `ky = 0` modes are drawn.
    pub fn random<R: Rng + ?Sized>(
        geom: &LatticeGeom,
        kmax: i32,
        n_modes: usize,
        amplitude: f64,
        rng: &mut R,
    ) -> Self {
        let two_d = geom.dim() == Dimension::Two;
        let modes = (0..n_modes)
            .map(|_| {
                let kx = rng.gen_range(-kmax..=kmax);
                let ky = if two_d { rng.gen_range(-kmax..=kmax) } else { 0 };
                let omega = rng.gen_range(-2.0..2.0);
                let a = amplitude * rng.gen_range(-1.0..1.0) / n_modes as f64;
                (kx, ky, omega, a, rng.gen_range(0.0..TAU))
            })
            .collect();
        FourierField {
            lx: geom.length_x(),
            ly: if two_d { geom.length_y() } else { 1.0 },
            modes,
        }
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(kx, ky, w, a, phi)| {
                let arg = TAU * (kx as f64 * x / self.lx + ky as f64 * y / self.ly) + w * t + phi;
                a * arg.cos()
            })
            .sum()
    }
}

impl ScalarFn for FourierField {
    fn value(&self, t: f64, x: f64, y: f64) -> Result<f64, String> {
        Ok(self.eval(t, x, y))
    }
}

/// Smooth periodic `A^0, A^1, A^2` with the given charge.
pub fn random_smooth_potential<R: Rng + ?Sized>(
    geom: &LatticeGeom,
    amplitude: f64,
    charge: f64,
    rng: &mut R,
) -> PotentialSpec {
    let mut comp = || -> Arc<dyn ScalarFn> { Arc::new(FourierField::random(geom, 2, 4, amplitude, rng)) };
    let a0 = comp();
    let a1 = comp();
    let a2 = comp();
    PotentialSpec::new(a0, a1, a2, charge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_seeded() {
        let g = LatticeGeom::two_d(4, 4, 0.5).unwrap();
        let a = random_state(g, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_state(g, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fourier_field_is_periodic() {
        let g = LatticeGeom::two_d(8, 6, 0.25).unwrap();
        let f = FourierField::random(&g, 2, 5, 1.0, &mut ChaCha8Rng::seed_from_u64(9));
        let (lx, ly) = (g.length_x(), g.length_y());
        for &(x, y) in &[(0.1, 0.3), (0.7, 1.1)] {
            assert!((f.eval(0.4, x, y) - f.eval(0.4, x + lx, y + ly)).abs() < 1e-12);
        }
    }
}
