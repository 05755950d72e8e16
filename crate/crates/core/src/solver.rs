//! Picard iteration `x_{n+1} = S Φ(seed + x_n)` from `x₀ = 0`.
//!
//! The seed enters through exact pointwise derivatives; only the correction is
//! differentiated on the grid. `Φ` is evaluated at cone points and is zero elsewhere.

use rayon::prelude::*;

use crate::constraints::{point_data_fd, HPiData, PointData, VectorField};
use crate::convolve::{GridSolutionOperator, TableConfig};
use crate::diagnostics::{b_norm_lanes, BNormSpec, Domain};
use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, GridSpec, ScalarField};
use crate::seed::SeedSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Radius of the ball `X`; the norm of the sampled seed when `None`.
    pub ball_radius: Option<f64>,
    pub guard: f64,
    /// Consecutive guard violations that count as divergence.
    pub guard_count: usize,
    pub fd_order: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { tol: 1e-8, max_iter: 40, ball_radius: None, guard: 0.95, guard_count: 3, fd_order: 4 }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Invalid(format!("solver.tol must be positive, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::Invalid("solver.max_iter must be at least 1".into()));
        }
        if !(self.guard > 0.0) {
            return Err(Error::Invalid(format!("solver.guard must be positive, got {}", self.guard)));
        }
        if self.fd_order != 2 && self.fd_order != 4 {
            return Err(Error::Invalid(format!("grid.fd_order must be 2 or 4, got {}", self.fd_order)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub update_norm: f64,
    pub phi_norm: f64,
    /// Ratio of successive update norms; NaN on the first iteration.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct SolveState {
    pub correction: HPiData,
    pub history: Vec<IterRecord>,
    pub converged: bool,
    pub ball_radius: f64,
}

impl SolveState {
    /// Largest recorded ratio of successive update norms.
    pub fn estimate_contraction(&self) -> Result<f64> {
        estimate_contraction(&self.history)
    }
}

pub fn estimate_contraction(history: &[IterRecord]) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::Invalid("contraction estimate needs at least two iterations".into()));
    }
    Ok(history.iter().skip(1).map(|r| r.ratio).fold(0.0, f64::max))
}

/// The product norm `H_b^{q+1,(s-4)/2} × H_b^{q,(s-2)/2}` of `(h, π)`.
pub fn product_norm(hp: &HPiData, q: usize, s: f64, order: usize) -> Result<f64> {
    let grid = hp.grid();
    let nh = b_norm_lanes(&grid, &hp.h.values, &BNormSpec { k: q + 1, delta: (s - 4.0) / 2.0, order, domain: Domain::Box })?;
    let np = b_norm_lanes(&grid, &hp.p.values, &BNormSpec { k: q, delta: (s - 2.0) / 2.0, order, domain: Domain::Box })?;
    Ok(nh.hypot(np))
}

/// Norm of a source `(f, F)` in `H_b^{q-1,s/2}`.
pub fn source_norm(f: &ScalarField, fv: &VectorField, q: usize, s: f64, order: usize) -> Result<f64> {
    let lanes: Vec<[f64; 4]> = f.values.iter().zip(&fv.values).map(|(a, v)| [*a, v[0], v[1], v[2]]).collect();
    b_norm_lanes(&f.grid, &lanes, &BNormSpec { k: q.saturating_sub(1), delta: s / 2.0, order, domain: Domain::Box })
}

/// Everything the iteration needs for one seed on one grid.
pub struct FixedPointProblem {
    pub seed: SeedSpec,
    pub grid: GridSpec,
    pub op: GridSolutionOperator,
    pub seed_fields: HPiData,
    /// Exact seed derivatives, default outside the cone.
    seed_points: Vec<PointData>,
    mask: Vec<bool>,
}

impl FixedPointProblem {
    pub fn new(seed: &SeedSpec, grid: GridSpec, table: &TableConfig) -> Result<Self> {
        let op = GridSolutionOperator::new(&seed.cone, grid, table)?;
        let mask = op.in_cone();
        let seed_points: Vec<PointData> = (0..grid.len())
            .into_par_iter()
            .map(|i| if mask[i] { seed.point_data(grid.point(i)) } else { PointData::default() })
            .collect();
        let (h, p) = seed.to_grid(grid);
        Ok(FixedPointProblem { seed: seed.clone(), grid, op, seed_fields: HPiData { h, p }, seed_points, mask })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Pointwise data of `seed + x`: exact seed part plus finite differences of `x`.
    pub fn point_data(&self, x: &HPiData, order: usize) -> Result<Vec<PointData>> {
        let fd = point_data_fd(x, order)?;
        Ok(self.seed_points.par_iter().zip(fd).map(|(s, d)| s.add(&d)).collect())
    }

    /// `Φ(seed + x)` on the cone points.
    pub fn phi(&self, x: &HPiData, order: usize) -> Result<(ScalarField, VectorField)> {
        self.pointwise(x, order, |d| d.phi())
    }

    /// Nonlinear constraints `(H, M)` of the data reconstructed from `seed + x`.
    pub fn constraints(&self, x: &HPiData, order: usize) -> Result<(ScalarField, VectorField)> {
        self.pointwise(x, order, |d| d.constraints())
    }

    fn pointwise(
        &self,
        x: &HPiData,
        order: usize,
        f: impl Fn(&PointData) -> std::result::Result<(f64, [f64; 3]), f64> + Sync,
    ) -> Result<(ScalarField, VectorField)> {
        let pts = self.point_data(x, order)?;
        let out: Vec<std::result::Result<(f64, [f64; 3]), f64>> = pts
            .par_iter()
            .zip(&self.mask)
            .map(|(d, &m)| if m { f(d) } else { Ok((0.0, [0.0; 3])) })
            .collect();
        let mut sv = Vec::with_capacity(out.len());
        let mut vv = Vec::with_capacity(out.len());
        for (i, o) in out.into_iter().enumerate() {
            let (a, b) = o.map_err(|minor| Error::NotPositive { index: i, point: self.grid.point(i), minor })?;
            sv.push(a);
            vv.push(b);
        }
        Ok((ScalarField { grid: self.grid, values: sv }, VectorField { grid: self.grid, values: vv }))
    }

    /// Constraint norms over cone points at least `margin` points from the faces.
    pub fn residual(&self, x: &HPiData, order: usize, margin: usize) -> Result<(f64, f64)> {
        let (h, m) = self.constraints(x, order)?;
        Ok(crate::constraints::residual_norms(&h, &m, |i| self.mask[i] && self.grid.is_interior(i, margin)))
    }

    pub fn solve(&self, cfg: &SolveConfig) -> Result<SolveState> {
        self.solve_with(cfg, |_| {})
    }

    /// Iterate, reporting each record as it is produced.
    pub fn solve_with(&self, cfg: &SolveConfig, mut on_iter: impl FnMut(&IterRecord)) -> Result<SolveState> {
        cfg.validate()?;
        let (q, s, order) = (self.seed.q, self.seed.s, cfg.fd_order);
        let ball_radius = match cfg.ball_radius {
            Some(r) => r,
            None => product_norm(&self.seed_fields, q, s, order)?,
        };
        let mut x = HPiData::zeros(self.grid);
        let mut history: Vec<IterRecord> = Vec::new();
        let mut strikes = 0;
        let mut converged = false;
        for iter in 1..=cfg.max_iter {
            let (f, fv) = self.phi(&x, order)?;
            let phi_norm = source_norm(&f, &fv, q, s, order)?;
            let next = self.op.apply(&f, &fv);
            let update_norm = product_norm(&next.sub(&x), q, s, order)?;
            let size = product_norm(&next, q, s, order)?;
            let ratio = match history.last() {
                Some(prev) if prev.update_norm > 0.0 => update_norm / prev.update_norm,
                Some(_) => 0.0,
                None => f64::NAN,
            };
            let rec = IterRecord { iter, update_norm, phi_norm, ratio };
            on_iter(&rec);
            history.push(rec);
            if ratio >= cfg.guard {
                strikes += 1;
                if strikes >= cfg.guard_count {
                    return Err(Error::Divergence { iter, ratio });
                }
            } else {
                strikes = 0;
            }
            if size > ball_radius {
                return Err(Error::BallViolation { iter, norm: size, radius: ball_radius });
            }
            x = next;
            if update_norm == 0.0 || update_norm <= cfg.tol * size {
                converged = true;
                break;
            }
        }
        Ok(SolveState { correction: x, history, converged, ball_radius })
    }
}

/// `‖(a, b)‖` of two scalars of an `(H, M)` pair, as reported in residual tables.
pub fn combined(pair: (f64, f64)) -> f64 {
    pairwise_sum(&[pair.0 * pair.0, pair.1 * pair.1]).sqrt()
}
