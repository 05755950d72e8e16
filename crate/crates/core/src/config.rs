//! Run configuration: TOML with one table per module. Every key has a default and
//! unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convolve::TableConfig;
use crate::error::{Error, Result};
use crate::grid::{ConeSpec, GridSpec};
use crate::kernels::RayConfig;
use crate::seed::SeedSpec;
use crate::solver::SolveConfig;
use crate::weights::{auto_r_star, WeightFunction};

/// Default end of the radial transition. Wide transitions keep the seed resolvable on
/// desk-scale grids.
pub const DEFAULT_R1: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Label written into reports.
    pub label: String,
    /// Seed for randomized checks.
    pub rng_seed: u64,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { label: "default".into(), rng_seed: 20240611, threads: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub s: f64,
    pub q: usize,
    pub eps0: f64,
}

impl Default for SeedSection {
    fn default() -> Self {
        SeedSection { s: 1.0, q: 3, eps0: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeSection {
    pub axis: [f64; 3],
    pub theta: f64,
    /// Defaults to `theta / 2`.
    pub theta_inner: Option<f64>,
}

impl Default for ConeSection {
    fn default() -> Self {
        ConeSection { axis: [0.0, 0.0, 1.0], theta: 1.2, theta_inner: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSection {
    /// Depth of the iterated logarithm; must match `beta.len()` when given.
    pub m: Option<usize>,
    pub j0: usize,
    pub beta: Vec<f64>,
    /// Defaults to the smallest radius with `log_(j)(2+r) ≥ 2` for all levels.
    #[serde(rename = "R_star")]
    pub r_star: Option<f64>,
    /// End of the seed's radial transition; defaults to `max(R_star, 30)`.
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
}

impl Default for WeightSection {
    fn default() -> Self {
        WeightSection { m: None, j0: 1, beta: vec![1.0], r_star: None, r1: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub half_width: f64,
    pub fd_order: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 48, half_width: 6.0, fd_order: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSection {
    pub cap_polar: usize,
    pub cap_azimuth: usize,
    pub ray_points: usize,
    pub tail_tol: f64,
    /// Integral of the kernel profile; anything but 1 is a deliberate fault.
    pub kernel_mass: f64,
}

impl Default for QuadSection {
    fn default() -> Self {
        QuadSection { cap_polar: 24, cap_azimuth: 48, ray_points: 96, tail_tol: 1e-14, kernel_mass: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub guard: f64,
    /// Defaults to the norm of the sampled seed.
    pub ball_radius: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolveConfig::default();
        SolverSection { tol: d.tol, max_iter: d.max_iter, guard: d.guard, ball_radius: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub seed: SeedSection,
    pub cone: ConeSection,
    pub weight: WeightSection,
    pub grid: GridSection,
    pub quad: QuadSection,
    pub solver: SolverSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Invalid(e.message().to_string()))?;
        cfg.resolved()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Validate and fill derived defaults, so that the result serializes to an explicit config.
    pub fn resolved(mut self) -> Result<Self> {
        let m = self.weight.beta.len();
        if let Some(mm) = self.weight.m {
            if mm != m {
                return Err(Error::Invalid(format!("weight.m = {mm} but weight.beta has {m} entries")));
            }
        }
        self.weight.m = Some(m);
        if m == 0 {
            return Err(Error::Invalid("weight.beta must not be empty".into()));
        }
        let r_star = match self.weight.r_star {
            Some(r) => r,
            None => auto_r_star(m)?,
        };
        self.weight.r_star = Some(r_star);
        self.weight.r1.get_or_insert(r_star.max(DEFAULT_R1));
        self.cone.theta_inner.get_or_insert(self.cone.theta / 2.0);
        if !(self.seed.eps0 >= 0.0 && self.seed.eps0 <= 0.1) {
            return Err(Error::Invalid(format!("seed.eps0 must lie in [0, 0.1], got {}", self.seed.eps0)));
        }
        if !(self.seed.s >= 1.0 && self.seed.s < 3.0) {
            return Err(Error::Invalid(format!("seed.s must lie in [1, 3), got {}", self.seed.s)));
        }
        if self.seed.q > 10 {
            return Err(Error::Invalid(format!("seed.q must be at most 10, got {}", self.seed.q)));
        }
        if self.quad.cap_polar < 2 || self.quad.cap_azimuth < 3 || self.quad.ray_points < 8 {
            return Err(Error::Invalid("quad.cap_polar ≥ 2, quad.cap_azimuth ≥ 3 and quad.ray_points ≥ 8 are required".into()));
        }
        if !(self.quad.tail_tol > 0.0 && self.quad.tail_tol < 1.0) {
            return Err(Error::Invalid(format!("quad.tail_tol must lie in (0, 1), got {}", self.quad.tail_tol)));
        }
        if !(self.quad.kernel_mass > 0.0) {
            return Err(Error::Invalid(format!("quad.kernel_mass must be positive, got {}", self.quad.kernel_mass)));
        }
        self.cone_spec()?;
        self.weight_fn()?;
        self.grid_spec()?;
        self.solve_config().validate()?;
        Ok(self)
    }

    pub fn cone_spec(&self) -> Result<ConeSpec> {
        let a = self.cone.axis;
        let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if !(n > 0.0) {
            return Err(Error::Invalid("cone.axis must be nonzero".into()));
        }
        let theta_inner = self.cone.theta_inner.unwrap_or(self.cone.theta / 2.0);
        ConeSpec::new(a.map(|v| v / n), self.cone.theta, theta_inner)
    }

    pub fn weight_fn(&self) -> Result<WeightFunction> {
        let r_star = match self.weight.r_star {
            Some(r) => r,
            None => auto_r_star(self.weight.beta.len())?,
        };
        let w = WeightFunction::iterated_log(self.weight.beta.clone(), self.weight.j0, r_star, self.weight.r1.unwrap_or(r_star.max(DEFAULT_R1)));
        w.validate()?;
        if !(w.r1 > 1.0) {
            return Err(Error::Invalid(format!("weight.R1 must exceed 1 for the seed cutoff, got {}", w.r1)));
        }
        Ok(w)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        if self.grid.fd_order != 2 && self.grid.fd_order != 4 {
            return Err(Error::Invalid(format!("grid.fd_order must be 2 or 4, got {}", self.grid.fd_order)));
        }
        GridSpec::new(self.grid.n, self.grid.half_width)
    }

    pub fn seed_spec(&self) -> Result<SeedSpec> {
        SeedSpec::new(self.seed.eps0, self.seed.s, self.seed.q, self.cone_spec()?, self.weight_fn()?)
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            ball_radius: self.solver.ball_radius,
            guard: self.solver.guard,
            fd_order: self.grid.fd_order,
            ..SolveConfig::default()
        }
    }

    pub fn ray_config(&self) -> RayConfig {
        RayConfig::from_points(self.quad.ray_points)
    }

    pub fn table_config(&self) -> TableConfig {
        TableConfig::default()
    }

    /// The effective configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg.grid.n, 48);
        assert_eq!(cfg.weight.r1, Some(DEFAULT_R1));
        assert_eq!(cfg.cone.theta_inner, Some(0.6));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_toml("[seed]\nepsilon = 0.1\n").unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::from_toml("[seed]\ns = 1.5\n[weight]\nbeta = [2.0]\n").unwrap();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
