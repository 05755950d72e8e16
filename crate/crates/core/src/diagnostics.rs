//! Discrete b-Sobolev norms, decay fits, sharpness scans and support checks.
//!
//! `‖u‖²_{H_b^{k,δ}} = Σ_{i≤k} ‖⟨x⟩^{δ+i} ∂^i u‖²`, where `|∂^i u|²` sums over ordered
//! index tuples. Mixed partials commute exactly for composed first-derivative stencils, so
//! the tuple sum is a multinomial-weighted sum over multi-indices.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{fd_apply, pairwise_sum, sym_norm, ConeSpec, GridSpec, ScalarField};
use crate::quadrature::{gauss_interval, CapRule};
use crate::seed::SeedSpec;
use crate::weights::{fit_slope, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Box,
    Cone(ConeSpec),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BNormSpec {
    pub k: usize,
    pub delta: f64,
    pub order: usize,
    pub domain: Domain,
}

impl BNormSpec {
    pub fn new(k: usize, delta: f64) -> Self {
        BNormSpec { k, delta, order: 4, domain: Domain::Box }
    }
}

/// `⟨x⟩ = (1 + |x|²)^{1/2}`.
#[inline]
pub fn japanese(x: [f64; 3]) -> f64 {
    (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn multinomial(alpha: [usize; 3]) -> f64 {
    let f = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
    f(alpha[0] + alpha[1] + alpha[2]) / (f(alpha[0]) * f(alpha[1]) * f(alpha[2]))
}

/// Multi-indices of total order `i`, in a fixed order.
fn multi_indices(i: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in (0..=i).rev() {
        for b in (0..=i - a).rev() {
            out.push([a, b, i - a - b]);
        }
    }
    out
}

/// Per-point squared-norm density of `H_b^{k,δ}` (without the cell volume).
fn density<const L: usize>(grid: &GridSpec, values: &[[f64; L]], spec: &BNormSpec) -> Result<Vec<f64>> {
    if spec.order != 2 && spec.order != 4 {
        return Err(Error::Invalid(format!("derivative order must be 2 or 4, got {}", spec.order)));
    }
    let jx: Vec<f64> = (0..grid.len()).map(|i| japanese(grid.point(i))).collect();
    let mut dens = vec![0.0; grid.len()];
    let mut level: Vec<([usize; 3], Vec<[f64; L]>)> = vec![([0, 0, 0], values.to_vec())];
    for i in 0..=spec.k {
        if i > 0 {
            let next: Vec<([usize; 3], Vec<[f64; L]>)> = multi_indices(i)
                .into_iter()
                .map(|alpha| {
                    // differentiate the parent obtained by lowering the last nonzero entry
                    let axis = (0..3).rev().find(|&a| alpha[a] > 0).unwrap();
                    let mut parent = alpha;
                    parent[axis] -= 1;
                    let src = &level.iter().find(|(b, _)| *b == parent).unwrap().1;
                    Ok((alpha, fd_apply(grid, src, axis, spec.order, 1)?))
                })
                .collect::<Result<_>>()?;
            level = next;
        }
        let p = 2.0 * (spec.delta + i as f64);
        for (alpha, field) in &level {
            let m = multinomial(*alpha);
            dens.par_iter_mut().enumerate().for_each(|(idx, d)| {
                let v: f64 = field[idx].iter().map(|c| c * c).sum();
                *d += m * jx[idx].powf(p) * v;
            });
        }
    }
    if let Domain::Cone(cone) = spec.domain {
        for (idx, d) in dens.iter_mut().enumerate() {
            if !cone.contains(grid.point(idx)) {
                *d = 0.0;
            }
        }
    }
    Ok(dens)
}

/// Discrete `H_b^{k,δ}` norm of a multi-component field.
pub fn b_norm_lanes<const L: usize>(grid: &GridSpec, values: &[[f64; L]], spec: &BNormSpec) -> Result<f64> {
    let h = grid.spacing();
    Ok((pairwise_sum(&density(grid, values, spec)?) * h * h * h).sqrt())
}

pub fn b_norm_scalar(f: &ScalarField, spec: &BNormSpec) -> Result<f64> {
    let v: Vec<[f64; 1]> = f.values.iter().map(|&x| [x]).collect();
    b_norm_lanes(&f.grid, &v, spec)
}

/// `sup |⟨x⟩^{3/2+δ} u| / ‖u‖_{H_b^{k,δ}}`, zero for the zero field.
pub fn embedding_check(f: &ScalarField, spec: &BNormSpec) -> Result<f64> {
    if spec.k < 2 {
        return Err(Error::Invalid("the embedding needs k ≥ 2".into()));
    }
    let sup = (0..f.grid.len())
        .map(|i| (japanese(f.grid.point(i)).powf(1.5 + spec.delta) * f.values[i]).abs())
        .fold(0.0, f64::max);
    let n = b_norm_scalar(f, spec)?;
    Ok(if n == 0.0 { 0.0 } else { sup / n })
}

/// `‖uv‖_{H_b^{k,δ₁+δ₂+3/2}} / (‖u‖_{H_b^{k,δ₁}} ‖v‖_{H_b^{k,δ₂}})`, zero if either factor is zero.
pub fn product_check(u: &ScalarField, v: &ScalarField, k: usize, d1: f64, d2: f64, order: usize) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::Invalid("product factors live on different grids".into()));
    }
    let spec = |delta| BNormSpec { k, delta, order, domain: Domain::Box };
    let nu = b_norm_scalar(u, &spec(d1))?;
    let nv = b_norm_scalar(v, &spec(d2))?;
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    let uv = ScalarField { grid: u.grid, values: u.values.iter().zip(&v.values).map(|(a, b)| a * b).collect() };
    Ok(b_norm_scalar(&uv, &spec(d1 + d2 + 1.5))? / (nu * nv))
}

/// Least-squares slope of `log|f(r)|` (plus `log L(r)` when a weight is given) against `log r`.
pub fn decay_fit(f: impl Fn(f64) -> f64, radii: &[f64], weight: Option<&WeightFunction>) -> Result<f64> {
    let (lo, hi) = (radii.first().copied().unwrap_or(1.0), radii.last().copied().unwrap_or(1.0));
    if radii.len() < 3 || hi / lo < 1e3 * (1.0 - 1e-12) {
        return Err(Error::Invalid("decay fits need radii spanning at least three decades".into()));
    }
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &r in radii {
        let v = f(r).abs();
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Degenerate(format!("field vanishes along the ray at r = {r}")));
        }
        xs.push(r.ln());
        ys.push(v.ln() + weight.map_or(0.0, |w| w.value(r).ln()));
    }
    Ok(fit_slope(&xs, &ys))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessScan {
    pub s_prime: f64,
    pub radii: Vec<f64>,
    /// `∫ ⟨x⟩^{s′-4} |h₀|²` over `Ω_o` within each shell.
    pub increments: Vec<f64>,
}

impl SharpnessScan {
    pub fn strictly_decreasing(&self) -> bool {
        self.increments.windows(2).all(|w| w[1] < w[0])
    }

    pub fn growth(&self) -> f64 {
        match (self.increments.first(), self.increments.last()) {
            (Some(&a), Some(&b)) if a > 0.0 => b / a,
            _ => 0.0,
        }
    }
}

/// Shell increments by polar quadrature over the inner cone, with analytic seed values.
pub fn sharpness_scan(seed: &SeedSpec, s_prime: f64, radii: &[f64]) -> Result<SharpnessScan> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("sharpness radii must be strictly increasing".into()));
    }
    let inner = seed.cone.inner();
    let rule = CapRule::new(&inner, 8, 16);
    let increments = radii
        .par_windows(2)
        .map(|w| {
            let mut acc = Vec::new();
            for (lr, wl) in gauss_interval(16, w[0].ln(), w[1].ln()) {
                let r = lr.exp();
                let ang: f64 = rule
                    .nodes
                    .iter()
                    .map(|n| n.weight * sym_norm(&seed.seed(n.dir.map(|c| c * r)).0).powi(2))
                    .sum();
                // dx = r² dr dσ = r³ d(log r) dσ
                acc.push(wl * r.powi(3) * (1.0 + r * r).powf((s_prime - 4.0) / 2.0) * ang);
            }
            pairwise_sum(&acc)
        })
        .collect();
    Ok(SharpnessScan { s_prime, radii: radii.to_vec(), increments })
}

/// `max |field|` over grid points outside the closed cone.
pub fn support_check<const L: usize>(grid: &GridSpec, values: &[[f64; L]], cone: &ConeSpec) -> f64 {
    (0..grid.len())
        .filter(|&i| !cone.contains(grid.point(i)))
        .map(|i| values[i].iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .fold(0.0, f64::max)
}

/// Gaussian bump `a exp(-|x-c|²/(2σ²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn value(&self, x: [f64; 3]) -> f64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        self.amplitude * (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (2.0 * self.width * self.width)).exp()
    }

    pub fn sample(&self, grid: GridSpec) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.value(x))
    }
}

/// Reproducible random bumps well inside a box of half width `hw`.
pub fn bump_family(seed: u64, count: usize, hw: f64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let width = rng.gen_range(0.1 * hw..0.18 * hw);
            let reach = hw - 4.0 * width;
            let center = std::array::from_fn(|_| rng.gen_range(-reach..=reach));
            Bump { center, width, amplitude: rng.gen_range(0.5..2.0) }
        })
        .collect()
}
