//! Run configuration: JSON schema, validation and conversion into library objects.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use qwgauge::expr::Expr;
use qwgauge::field::{zero_fn, SharedFn};
use qwgauge::gauge::{GaugeFunction, PotentialSpec};
use qwgauge::lattice::{Coin, Dimension, GaussianPacket, LatticeGeom, WalkerState};
use qwgauge::random::{random_state, FourierField};
use qwgauge::walk::{WalkParams, WalkParams1D, WalkParams2D};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::table::TabulatedPotential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: u8,
    /// `[nx]` in 1D, `[nx, ny]` in 2D.
    pub extents: Vec<usize>,
    pub spacing: f64,
    #[serde(default)]
    pub eps_a: Option<f64>,
    #[serde(default)]
    pub eps_m: Option<f64>,
    pub mass: f64,
    pub charge: f64,
    pub coin: CoinSpec,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub chi: Option<String>,
    pub initial_state: InitialState,
    pub n_steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Write a snapshot every this many steps (besides the first and last state).
    #[serde(default)]
    pub snapshot_every: Option<u64>,
    /// Use the unnormalized `Delta Sigma / eps_A` stencils in the gauge check.
    #[serde(default)]
    pub corrupt_gauge_transform: bool,
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoinSpec {
    /// `"continuum-family"`
    Family(String),
    OneD { theta: f64 },
    TwoD { theta1: f64, theta2: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(rename = "A0", default)]
    pub a0: Option<String>,
    #[serde(rename = "A1", default)]
    pub a1: Option<String>,
    #[serde(rename = "A2", default)]
    pub a2: Option<String>,
    /// CSV with header `t,x,y,A0,A1,A2`; exclusive with the expressions.
    #[serde(default)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Gaussian {
        center: Vec<f64>,
        width: f64,
        momentum: Vec<f64>,
        /// `[[re, im], [re, im]]` for the `R` and `L` components.
        polarization: [[f64; 2]; 2],
    },
    Point {
        site: Vec<usize>,
        coin: String,
    },
    /// Uniformly random amplitudes drawn from the seed.
    Random {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub epsilons: Vec<f64>,
    pub t_final: f64,
    pub reference_points: usize,
    pub reference_dt: f64,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

fn finite(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dim(&self) -> Dimension {
        if self.dimension == 1 {
            Dimension::One
        } else {
            Dimension::Two
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(invalid("dimension", format!("must be 1 or 2, got {}", self.dimension)));
        }
        if self.extents.len() != self.dimension as usize {
            return Err(invalid(
                "extents",
                format!("need {} entries, got {}", self.dimension, self.extents.len()),
            ));
        }
        if let Some(&n) = self.extents.iter().find(|&&n| n < 2) {
            return Err(invalid("extents", format!("every extent must be at least 2, got {n}")));
        }
        finite("spacing", self.spacing)?;
        if self.spacing <= 0.0 {
            return Err(invalid("spacing", "must be positive"));
        }
        for (name, v) in [("eps_a", self.eps_a), ("eps_m", self.eps_m)] {
            if let Some(v) = v {
                finite(name, v)?;
                if v <= 0.0 {
                    return Err(invalid(name, "must be positive"));
                }
            }
        }
        finite("mass", self.mass)?;
        finite("charge", self.charge)?;
        match &self.coin {
            CoinSpec::Family(s) if s == "continuum-family" => {}
            CoinSpec::Family(s) => {
                return Err(invalid("coin", format!("unknown coin `{s}`, expected \"continuum-family\"")))
            }
            CoinSpec::OneD { theta } => {
                finite("coin.theta", *theta)?;
                if self.dimension != 1 {
                    return Err(invalid("coin", "a 2D walk needs theta1 and theta2"));
                }
            }
            CoinSpec::TwoD { theta1, theta2 } => {
                finite("coin.theta1", *theta1)?;
                finite("coin.theta2", *theta2)?;
                if self.dimension != 2 {
                    return Err(invalid("coin", "a 1D walk takes a single theta"));
                }
            }
        }
        let p = &self.potential;
        if p.table.is_some() && (p.a0.is_some() || p.a1.is_some() || p.a2.is_some()) {
            return Err(invalid("potential", "give either expressions or a table, not both"));
        }
        for (name, e) in [("potential.A0", &p.a0), ("potential.A1", &p.a1), ("potential.A2", &p.a2)] {
            if let Some(src) = e {
                src.parse::<Expr>().map_err(|err| invalid(name, err))?;
            }
        }
        if self.dimension == 1 && p.a2.is_some() {
            return Err(invalid("potential.A2", "not used by a 1D walk"));
        }
        if let Some(src) = &self.chi {
            src.parse::<Expr>().map_err(|err| invalid("chi", err))?;
        }
        self.validate_initial()?;
        if self.snapshot_every == Some(0) {
            return Err(invalid("snapshot_every", "must be positive"));
        }
        if let Some(c) = &self.convergence {
            if c.epsilons.len() < 2 {
                return Err(invalid("convergence.epsilons", "need at least two values"));
            }
            for &e in &c.epsilons {
                finite("convergence.epsilons", e)?;
                if e <= 0.0 {
                    return Err(invalid("convergence.epsilons", "values must be positive"));
                }
            }
            if c.epsilons.windows(2).any(|w| w[1] >= w[0]) {
                return Err(invalid("convergence.epsilons", "must be strictly descending"));
            }
            finite("convergence.t_final", c.t_final)?;
            finite("convergence.reference_dt", c.reference_dt)?;
            if c.t_final <= 0.0 || c.reference_dt <= 0.0 {
                return Err(invalid("convergence", "t_final and reference_dt must be positive"));
            }
            if c.reference_points < 2 {
                return Err(invalid("convergence.reference_points", "must be at least 2"));
            }
        }
        Ok(())
    }

    fn validate_initial(&self) -> Result<(), CliError> {
        let d = self.dimension as usize;
        match &self.initial_state {
            InitialState::Gaussian {
                center,
                width,
                momentum,
                polarization,
            } => {
                if center.len() != d || momentum.len() != d {
                    return Err(invalid(
                        "initial_state.gaussian",
                        format!("center and momentum need {d} entries"),
                    ));
                }
                for &v in center.iter().chain(momentum).chain(polarization.iter().flatten()) {
                    finite("initial_state.gaussian", v)?;
                }
                finite("initial_state.gaussian.width", *width)?;
                if *width <= 0.0 {
                    return Err(invalid("initial_state.gaussian.width", "must be positive"));
                }
                if polarization.iter().flatten().all(|&v| v == 0.0) {
                    return Err(invalid("initial_state.gaussian.polarization", "must be nonzero"));
                }
            }
            InitialState::Point { site, coin } => {
                if site.len() != d {
                    return Err(invalid("initial_state.point.site", format!("need {d} entries")));
                }
                if site.iter().zip(&self.extents).any(|(i, n)| i >= n) {
                    return Err(invalid("initial_state.point.site", "outside the lattice"));
                }
                if coin != "R" && coin != "L" {
                    return Err(invalid("initial_state.point.coin", "must be \"R\" or \"L\""));
                }
            }
            InitialState::Random {} => {}
        }
        Ok(())
    }

    pub fn geom(&self) -> Result<LatticeGeom, CliError> {
        Ok(match self.dim() {
            Dimension::One => LatticeGeom::one_d(self.extents[0], self.spacing)?,
            Dimension::Two => LatticeGeom::two_d(self.extents[0], self.extents[1], self.spacing)?,
        })
    }

    pub fn eps_a(&self) -> f64 {
        self.eps_a.unwrap_or(self.spacing)
    }

    pub fn eps_m(&self) -> f64 {
        self.eps_m.unwrap_or(self.spacing)
    }

    pub fn walk_params(&self) -> WalkParams {
        self.walk_params_at(self.eps_m())
    }

    /// Walk parameters with `eps_m` replaced (the continuum family depends on it).
    pub fn walk_params_at(&self, eps_m: f64) -> WalkParams {
        match (&self.coin, self.dim()) {
            (CoinSpec::OneD { theta }, _) => WalkParams::One(WalkParams1D {
                theta: *theta,
                mass: self.mass,
                charge: self.charge,
                eps_m,
            }),
            (CoinSpec::TwoD { theta1, theta2 }, _) => WalkParams::Two(WalkParams2D {
                theta1: *theta1,
                theta2: *theta2,
                mass: self.mass,
                charge: self.charge,
                eps_m,
            }),
            (_, Dimension::One) => {
                WalkParams::One(WalkParams1D::continuum(self.mass, self.charge, eps_m))
            }
            (_, Dimension::Two) => {
                WalkParams::Two(WalkParams2D::continuum(self.mass, self.charge, eps_m))
            }
        }
    }

    /// Potentials with relative table paths resolved against `base`.
    pub fn potential_spec(&self, base: &Path) -> Result<PotentialSpec, CliError> {
        let p = &self.potential;
        let spec = if let Some(path) = &p.table {
            let path = if path.is_relative() { base.join(path) } else { path.clone() };
            let table = Arc::new(TabulatedPotential::load(&path)?);
            PotentialSpec::new(table.component(0), table.component(1), table.component(2), self.charge)
        } else {
            let expr = |src: &Option<String>| -> Result<SharedFn, CliError> {
                Ok(match src {
                    Some(s) => Arc::new(s.parse::<Expr>()?),
                    None => zero_fn(),
                })
            };
            PotentialSpec::new(expr(&p.a0)?, expr(&p.a1)?, expr(&p.a2)?, self.charge)
        };
        Ok(spec.with_eps_a(self.eps_a()))
    }

    /// The configured `chi`, or a smooth random one drawn from the seed.
    pub fn gauge_function(&self, geom: &LatticeGeom) -> Result<GaugeFunction, CliError> {
        Ok(match &self.chi {
            Some(src) => GaugeFunction::Analytic(Arc::new(src.parse::<Expr>()?)),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x6368_6921);
                GaugeFunction::Analytic(Arc::new(FourierField::random(geom, 3, 6, 3.0, &mut rng)))
            }
        })
    }

    pub fn packet(&self) -> Option<GaussianPacket> {
        match &self.initial_state {
            InitialState::Gaussian {
                center,
                width,
                momentum,
                polarization,
            } => {
                let two = |v: &[f64]| [v[0], v.get(1).copied().unwrap_or(0.0)];
                Some(GaussianPacket {
                    center: two(center),
                    width: *width,
                    momentum: two(momentum),
                    polarization: [
                        C64::new(polarization[0][0], polarization[0][1]),
                        C64::new(polarization[1][0], polarization[1][1]),
                    ],
                })
            }
            _ => None,
        }
    }

    pub fn initial(&self, geom: LatticeGeom) -> Result<WalkerState, CliError> {
        Ok(match &self.initial_state {
            InitialState::Gaussian { .. } => {
                WalkerState::gaussian(geom, &self.packet().expect("gaussian"))?
            }
            InitialState::Point { site, coin } => {
                let c = if coin == "R" { Coin::R } else { Coin::L };
                WalkerState::localized(geom, site[0], site.get(1).copied().unwrap_or(0), c)?
            }
            InitialState::Random {} => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                random_state(geom, &mut rng)
            }
        })
    }

    /// Time indices covered by `n_steps` (two per step in 2D).
    pub fn time_indices(&self) -> usize {
        let n = self.n_steps as usize;
        match self.dim() {
            Dimension::One => n,
            Dimension::Two => 2 * n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dimension": 1, "extents": [16], "spacing": 0.1, "mass": 1.0, "charge": 1.0,
        "coin": "continuum-family", "initial_state": {"point": {"site": [8], "coin": "R"}},
        "n_steps": 10
    }"#;

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.eps_a(), 0.1);
        assert!(matches!(c.walk_params(), WalkParams::One(p) if (p.theta + 0.2).abs() < 1e-15));
    }

    #[test]
    fn missing_mass_is_named() {
        let text = MINIMAL.replace("\"mass\": 1.0,", "");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("mass"), "{err}");
    }

    #[test]
    fn semantic_errors_name_fields() {
        for (from, to, field) in [
            ("\"extents\": [16]", "\"extents\": [1]", "extents"),
            ("\"spacing\": 0.1", "\"spacing\": -0.1", "spacing"),
            ("\"n_steps\": 10", "\"n_steps\": 10, \"chi\": \"sin(\"", "chi"),
            ("\"coin\": \"continuum-family\"", "\"coin\": {\"theta1\": 1, \"theta2\": 2}", "coin"),
        ] {
            let err = RunConfig::from_json(&MINIMAL.replace(from, to)).unwrap_err().to_string();
            assert!(err.contains(field), "{err}");
        }
    }
}
