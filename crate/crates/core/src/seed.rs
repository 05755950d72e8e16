//! Cone-supported seed `(h₀, π₀)` built from the scalar potentials
//! `φ = ε₀ η(r) ρ(r) χ(x/|x|)` with `ρ_h = r^{(5-s)/2}/L`, `ρ_π = r^{(3-s)/2}/L`.

use rayon::prelude::*;

use crate::constraints::PointData;
use crate::cutoff::{AngularProfile, RadialCutoff};
use crate::error::{Error, Result};
use crate::grid::{dot, fd_apply, fd_second, norm, pairwise_sum, sym_index, sym_norm, GridSpec, SymTensorField, ConeSpec, SYM_PAIRS};
use crate::jet::{Jet, Taylor1};
use crate::weights::WeightFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct SeedSpec {
    pub eps0: f64,
    pub s: f64,
    pub q: usize,
    pub cone: ConeSpec,
    pub weight: WeightFunction,
    /// End of the radial transition of η; η ≡ 1 beyond it.
    pub r1: f64,
}

/// Which potential: metric (`h`) or momentum (`π`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Potential {
    H,
    Pi,
}

impl SeedSpec {
    pub fn new(eps0: f64, s: f64, q: usize, cone: ConeSpec, weight: WeightFunction) -> Result<Self> {
        let r1 = weight.r1;
        let spec = SeedSpec { eps0, s, q, cone, weight, r1 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 >= 0.0 && self.eps0 <= 0.1) {
            return Err(Error::Invalid(format!("eps0 must lie in [0, 0.1], got {}", self.eps0)));
        }
        if !(self.s >= 1.0 && self.s < 3.0) {
            return Err(Error::Invalid(format!("s must lie in [1, 3), got {}", self.s)));
        }
        if !(self.r1 > 1.0) {
            return Err(Error::Invalid(format!("the cutoff radius R1 must exceed 1, got {}", self.r1)));
        }
        Ok(())
    }

    pub fn angular(&self) -> AngularProfile {
        AngularProfile { inner: self.cone.theta_inner, outer: self.cone.theta }
    }

    pub fn radial(&self) -> RadialCutoff {
        RadialCutoff { r1: self.r1 }
    }

    fn exponent(&self, which: Potential) -> f64 {
        match which {
            Potential::H => (5.0 - self.s) / 2.0,
            Potential::Pi => (3.0 - self.s) / 2.0,
        }
    }

    /// Series of `ε₀ η ρ` around `r0`.
    pub fn radial_series(&self, which: Potential, r0: f64, deg: usize) -> Taylor1 {
        let r = Taylor1::var(r0, deg);
        let eta = self.radial().series(&r);
        if eta.is_zero() {
            return eta;
        }
        let l = self.weight.series(r0, deg);
        eta.mul(&r.powf(self.exponent(which))).div(&l).scale(self.eps0)
    }

    /// `(φ_h, φ_π)` at a point.
    pub fn potentials(&self, x: [f64; 3]) -> (f64, f64) {
        let r = norm(x);
        if r <= 1.0 || !self.cone.contains(x) || self.eps0 == 0.0 {
            return (0.0, 0.0);
        }
        let chi = self.angular().value_cos(dot(x, self.cone.axis) / r);
        let base = self.eps0 * self.radial().value(r) * chi / self.weight.value(r);
        (base * r.powf(self.exponent(Potential::H)), base * r.powf(self.exponent(Potential::Pi)))
    }

    /// Jet of a potential at `x`, or `None` where it vanishes identically nearby.
    pub fn potential_jet(&self, which: Potential, x: [f64; 3], deg: usize) -> Option<Jet> {
        let r0 = norm(x);
        if r0 <= 1.0 || self.eps0 == 0.0 {
            return None;
        }
        let c0 = dot(x, self.cone.axis) / r0;
        if c0 <= self.cone.theta.cos() {
            return None;
        }
        let fr = self.radial_series(which, r0, deg);
        if fr.is_zero() {
            return None;
        }
        let [xj, yj, zj] = Jet::point(x, deg);
        let rj = xj.mul(&xj).add(&yj.mul(&yj)).add(&zj.mul(&zj)).sqrt();
        let a = self.cone.axis;
        let cj = xj.scale(a[0]).add(&yj.scale(a[1])).add(&zj.scale(a[2])).div(&rj);
        let g = self.angular().series_in_cos(&Taylor1::var(cj.value(), deg));
        if g.is_zero() {
            return None;
        }
        Some(rj.compose(&fr).mul(&cj.compose(&g)))
    }

    /// Jets of the six components of `∂∂φ - δΔφ`, of degree `deg - 2`.
    pub fn tensor_jets(&self, which: Potential, x: [f64; 3], deg: usize) -> Option<[Jet; 6]> {
        let phi = self.potential_jet(which, x, deg)?;
        let d1 = [phi.diff(0), phi.diff(1), phi.diff(2)];
        let hess = |i: usize, j: usize| d1[j].diff(i);
        let lap = hess(0, 0).add(&hess(1, 1)).add(&hess(2, 2));
        Some(std::array::from_fn(|k| {
            let (i, j) = SYM_PAIRS[k];
            let hij = hess(i, j);
            if i == j {
                hij.sub(&lap)
            } else {
                hij
            }
        }))
    }

    /// `(h₀, π₀)` at a point.
    pub fn seed(&self, x: [f64; 3]) -> ([f64; 6], [f64; 6]) {
        let h = self.tensor_jets(Potential::H, x, 2).map_or([0.0; 6], |j| j.map(|c| c.value()));
        let p = self.tensor_jets(Potential::Pi, x, 2).map_or([0.0; 6], |j| j.map(|c| c.value()));
        (h, p)
    }

    /// `|∂h₀|`: Frobenius norm over the three first derivatives.
    pub fn seed_gradient_norm(&self, x: [f64; 3]) -> f64 {
        let Some(j) = self.tensor_jets(Potential::H, x, 3) else { return 0.0 };
        let mut acc = 0.0;
        for a in 0..3 {
            let d: [f64; 6] = std::array::from_fn(|k| j[k].grad()[a]);
            acc += sym_norm(&d).powi(2);
        }
        acc.sqrt()
    }

    /// Exact `h₀, ∂h₀, ∂²h₀, π₀, ∂π₀` at a point.
    pub fn point_data(&self, x: [f64; 3]) -> PointData {
        let mut pd = PointData::default();
        if let Some(hj) = self.tensor_jets(Potential::H, x, 4) {
            for k in 0..6 {
                pd.h[k] = hj[k].value();
                let g = hj[k].grad();
                for a in 0..3 {
                    pd.dh[a][k] = g[a];
                }
                for (ab, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                    pd.ddh[ab][k] = hj[k].hess(a, b);
                }
            }
        }
        if let Some(pj) = self.tensor_jets(Potential::Pi, x, 3) {
            for k in 0..6 {
                pd.p[k] = pj[k].value();
                let g = pj[k].grad();
                for a in 0..3 {
                    pd.dp[a][k] = g[a];
                }
            }
        }
        pd
    }

    /// Sample `(h₀, π₀)` at grid points.
    pub fn to_grid(&self, grid: GridSpec) -> (SymTensorField, SymTensorField) {
        let both: Vec<([f64; 6], [f64; 6])> = (0..grid.len()).into_par_iter().map(|i| self.seed(grid.point(i))).collect();
        let (h, p): (Vec<_>, Vec<_>) = both.into_iter().unzip();
        (SymTensorField { grid, values: h }, SymTensorField { grid, values: p })
    }

    /// First sampled radius past R1 with `r L'/L ≤ ½ min((5-s)/2, (3-s)/2)`.
    pub fn onset_radius(&self) -> f64 {
        let level = 0.5 * self.exponent(Potential::H).min(self.exponent(Potential::Pi));
        self.weight.onset_radius(level).max(self.r1)
    }

    /// Rows `(r, |h0|, |dh0|, |pi0|, L(r))` along the axis.
    pub fn decay_samples(&self, radii: &[f64]) -> Vec<[f64; 5]> {
        radii
            .par_iter()
            .map(|&r| {
                let x = self.cone.axis.map(|a| a * r);
                let (h, p) = self.seed(x);
                [r, sym_norm(&h), self.seed_gradient_norm(x), sym_norm(&p), self.weight.value(r)]
            })
            .collect()
    }
}

/// Log-spaced radii, `per_decade` samples per decade, endpoints included.
pub fn log_radii(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=n).map(|k| lo * (hi / lo).powf(k as f64 / n as f64)).collect()
}

/// Normalized discrete residuals of `∂ᵢ∂ⱼh^{ij}` and `∂ᵢπ^{ij}` over points at least `margin` from the faces.
pub fn verify_linearized(h: &SymTensorField, p: &SymTensorField, order: usize, margin: usize) -> Result<(f64, f64)> {
    let grid = h.grid;
    if p.grid != grid {
        return Err(Error::Invalid("seed fields live on different grids".into()));
    }
    let interior: Vec<usize> = (0..grid.len()).filter(|&i| grid.is_interior(i, margin)).collect();
    // double divergence: Σ_ij ∂i∂j h_ij, each of the nine terms tracked separately
    let mut res_h = vec![0.0; interior.len()];
    let mut terms_h = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let comp: Vec<[f64; 1]> = h.values.iter().map(|v| [v[sym_index(i, j)]]).collect();
            let d = fd_second(&grid, &comp, i, j, order)?;
            let sq: Vec<f64> = interior.iter().map(|&k| d[k][0] * d[k][0]).collect();
            terms_h += pairwise_sum(&sq);
            for (r, &k) in res_h.iter_mut().zip(&interior) {
                *r += d[k][0];
            }
        }
    }
    let mut res_p = vec![[0.0; 3]; interior.len()];
    let mut terms_p = 0.0;
    for i in 0..3 {
        let d = fd_apply(&grid, &p.values, i, order, 1)?;
        for j in 0..3 {
            let sq: Vec<f64> = interior.iter().map(|&k| d[k][sym_index(i, j)].powi(2)).collect();
            terms_p += pairwise_sum(&sq);
            for (r, &k) in res_p.iter_mut().zip(&interior) {
                r[j] += d[k][sym_index(i, j)];
            }
        }
    }
    let nh = pairwise_sum(&res_h.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
    let np = pairwise_sum(&res_p.iter().map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).collect::<Vec<_>>()).sqrt();
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den.sqrt() };
    Ok((ratio(nh, terms_h), ratio(np, terms_p)))
}
