//! Conical kernels `K^{ij}(y) = yⁱyʲ χ(ŷ)/|y|³`, `L^{ij}_v(y) = yⁱyʲ χ̃_v(ŷ)/|y|⁴`
//! and the solution operator `S(f, F) = (K ∗ f, L_{e_k} ∗ F^k)` by ray quadrature.
//!
//! Along rays, `∫ Kⁱʲ ∂ᵢ∂ⱼφ = ∫_{S²} χ ∫₀^∞ t ∂²_t φ(tω) dt dσ = φ(0) ∫χ`, and similarly
//! `∫ Lⁱʲ (-∂ᵢφ) = φ(0) ∫ χ̃ ωʲ`, which is what fixes the normalizations below.

use rayon::prelude::*;

use crate::cutoff::AngularProfile;
use crate::error::{Error, Result};
use crate::grid::{dot, norm, ConeSpec, SYM_PAIRS};
use crate::jet::Jet;
use crate::quadrature::{gauss_interval, CapRule};

/// Angular profile normalized to unit mass, with the sphere rule used to integrate it.
#[derive(Clone, Debug)]
pub struct KernelProfile {
    pub cone: ConeSpec,
    pub angular: AngularProfile,
    /// `∫ χ_seed` under the rule.
    pub seed_mass: f64,
    /// Target mass of `chi_ker`; 1 except in fault-injection runs.
    pub mass: f64,
    pub rule: CapRule,
}

impl KernelProfile {
    pub fn new(cone: ConeSpec, polar: usize, azimuth: usize) -> Self {
        Self::with_mass(cone, polar, azimuth, 1.0)
    }

    /// Profile whose integral is `mass` instead of 1.
    pub fn with_mass(cone: ConeSpec, polar: usize, azimuth: usize, mass: f64) -> Self {
        let angular = AngularProfile { inner: cone.theta_inner, outer: cone.theta };
        let rule = CapRule::new(&cone, polar, azimuth);
        let seed_mass = rule.integrate(|n| angular.value(n.u));
        KernelProfile { cone, angular, seed_mass, mass, rule }
    }

    /// `chi_ker` as a function of the polar angle from the axis.
    #[inline]
    pub fn chi_u(&self, u: f64) -> f64 {
        self.mass * self.angular.value(u) / self.seed_mass
    }

    /// `chi_ker` at a unit direction.
    #[inline]
    pub fn chi(&self, dir: [f64; 3]) -> f64 {
        self.mass * self.angular.value_cos(dot(dir, self.cone.axis)) / self.seed_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.rule.integrate(|n| self.chi_u(n.u))
    }
}

/// Coefficients of `χ̃_v = chi_ker · (α₀ + α₁ ω·u₁ + α₂ ω·u₂)` for `v = e₁, e₂, e₃`.
#[derive(Clone, Debug)]
pub struct MomentCoefficients {
    pub frame: [[f64; 3]; 3],
    /// `alpha[k]` belongs to `v = e_k`.
    pub alpha: [[f64; 3]; 3],
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl MomentCoefficients {
    pub fn solve(profile: &KernelProfile) -> Result<Self> {
        let frame = profile.cone.frame();
        let rule = &profile.rule;
        let c0 = rule.integrate(|n| profile.chi_u(n.u) * dot(n.dir, frame[0]));
        let c1 = rule.integrate(|n| profile.chi_u(n.u) * dot(n.dir, frame[1]).powi(2));
        let c2 = rule.integrate(|n| profile.chi_u(n.u) * dot(n.dir, frame[2]).powi(2));
        for (name, c) in [("c0", c0), ("c1", c1), ("c2", c2)] {
            if !(c.abs() > 1e-12) {
                return Err(Error::Degenerate(format!("moment {name} = {c:e}")));
            }
        }
        let alpha = std::array::from_fn(|k| {
            let v = unit(k);
            [dot(v, frame[0]) / c0, dot(v, frame[1]) / c1, dot(v, frame[2]) / c2]
        });
        Ok(MomentCoefficients { frame, alpha, c0, c1, c2 })
    }

    /// Coefficients for an arbitrary target vector.
    pub fn for_vector(&self, v: [f64; 3]) -> [f64; 3] {
        [dot(v, self.frame[0]) / self.c0, dot(v, self.frame[1]) / self.c1, dot(v, self.frame[2]) / self.c2]
    }

    /// Angular factor multiplying `chi_ker` in `χ̃_{e_k}`.
    #[inline]
    pub fn factor(&self, k: usize, dir: [f64; 3]) -> f64 {
        let a = &self.alpha[k];
        a[0] + a[1] * dot(dir, self.frame[1]) + a[2] * dot(dir, self.frame[2])
    }

    /// `max_k |∫ χ̃_{e_k} ω dσ - e_k|` under the profile's rule.
    pub fn residual(&self, profile: &KernelProfile) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..3 {
            let mut m = [0.0; 3];
            for n in &profile.rule.nodes {
                let w = n.weight * profile.chi_u(n.u) * self.factor(k, n.dir);
                for i in 0..3 {
                    m[i] += w * n.dir[i];
                }
            }
            let e = unit(k);
            for i in 0..3 {
                worst = worst.max((m[i] - e[i]).abs());
            }
        }
        worst
    }
}

fn unit(k: usize) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[k] = 1.0;
    e
}

fn outer6(y: [f64; 3], s: f64) -> [f64; 6] {
    std::array::from_fn(|k| {
        let (i, j) = SYM_PAIRS[k];
        y[i] * y[j] * s
    })
}

/// `K(y)`, homogeneous of degree -1.
pub fn eval_k(profile: &KernelProfile, y: [f64; 3]) -> Result<[f64; 6]> {
    let r = norm(y);
    if r == 0.0 {
        return Err(Error::Singular);
    }
    let chi = profile.chi(y.map(|v| v / r));
    if chi == 0.0 {
        return Ok([0.0; 6]);
    }
    Ok(outer6(y, chi / (r * r * r)))
}

/// `L_{e_k}(y)`, homogeneous of degree -2.
pub fn eval_lker(profile: &KernelProfile, coeffs: &MomentCoefficients, k: usize, y: [f64; 3]) -> Result<[f64; 6]> {
    let r = norm(y);
    if r == 0.0 {
        return Err(Error::Singular);
    }
    let d = y.map(|v| v / r);
    let chi = profile.chi(d);
    if chi == 0.0 {
        return Ok([0.0; 6]);
    }
    Ok(outer6(y, chi * coeffs.factor(k, d) / (r * r * r * r)))
}

/// Whether `|y| ≥ secθ |x|` (with `y ≠ 0`) guarantees `x - y ∉ Ω` for `x, y ∈ Ω`.
pub fn outgoing_check(cone: &ConeSpec, x: [f64; 3], y: [f64; 3]) -> bool {
    let ny = norm(y);
    ny > 0.0 && ny * cone.theta.cos() >= norm(x)
}

/// Parameter where the ray `x - tω` leaves the closed cone, for `x ∈ Ω` and `ω` in the cap.
pub fn cone_exit(cone: &ConeSpec, x: [f64; 3], w: [f64; 3]) -> f64 {
    // f(t) = (x - tω)·a - |x - tω| cos θ is concave, f(0) ≥ 0, f(t) → -∞.
    let a = cone.axis;
    let c = cone.theta.cos();
    let f = |t: f64| {
        let y = [x[0] - t * w[0], x[1] - t * w[1], x[2] - t * w[2]];
        dot(y, a) - norm(y) * c
    };
    let mut hi = norm(x).max(1e-300);
    while f(hi) >= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

/// Ray-quadrature settings for analytic sources.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayConfig {
    /// Gauss points per panel.
    pub points_per_panel: usize,
    /// Panel length relative to the distance from the vertex.
    pub grading: f64,
    /// Floor on the length scale, where sources are known to be smooth.
    pub min_scale: f64,
}

impl RayConfig {
    /// Settings for a total point budget per unit-scale ray.
    pub fn from_points(ray_points: usize) -> Self {
        let panels = (ray_points / 8).max(1);
        RayConfig { points_per_panel: 8, grading: 2.0 / panels as f64, min_scale: 0.5 }
    }
}

/// Panels covering `[0, t_end]` along `x - tω`, refined where the ray nears the vertex.
pub fn ray_panels(cfg: &RayConfig, x: [f64; 3], w: [f64; 3], t_end: f64) -> Vec<(f64, f64)> {
    let t_close = dot(x, w).clamp(0.0, t_end);
    let dist = |t: f64| norm([x[0] - t * w[0], x[1] - t * w[1], x[2] - t * w[2]]);
    let mut out = Vec::new();
    // march outward from the closest approach in both directions
    for (from, to) in [(t_close, 0.0), (t_close, t_end)] {
        let mut t = from;
        let sgn: f64 = if to > from { 1.0 } else { -1.0 };
        while (to - t) * sgn > 1e-14 * t_end.max(1.0) {
            let step = (cfg.grading * dist(t).max(cfg.min_scale)).min((to - t).abs());
            let next = t + sgn * step;
            out.push(if sgn > 0.0 { (t, next) } else { (next, t) });
            t = next;
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Source evaluable at arbitrary points: scalar `f` and vector `F`.
pub trait Source: Sync {
    fn eval(&self, y: [f64; 3]) -> (f64, [f64; 3]);
}

impl<T: Fn([f64; 3]) -> (f64, [f64; 3]) + Sync> Source for T {
    fn eval(&self, y: [f64; 3]) -> (f64, [f64; 3]) {
        self(y)
    }
}

/// `S(f, F)(x)` for a cone-supported analytic source. Exact zero outside Ω.
pub fn apply_s_point(
    profile: &KernelProfile,
    coeffs: &MomentCoefficients,
    src: &dyn Source,
    x: [f64; 3],
    ray: &RayConfig,
) -> ([f64; 6], [f64; 6]) {
    let mut h = [0.0; 6];
    let mut p = [0.0; 6];
    if !profile.cone.contains(x) || norm(x) == 0.0 {
        return (h, p);
    }
    for node in &profile.rule.nodes {
        let chi = profile.chi_u(node.u);
        if chi == 0.0 {
            continue;
        }
        let w = node.dir;
        let t_end = cone_exit(&profile.cone, x, w);
        let (mut sf, mut sv) = (0.0, [0.0; 3]);
        for (a, b) in ray_panels(ray, x, w, t_end) {
            for (t, wt) in gauss_interval(ray.points_per_panel, a, b) {
                let (f, fv) = src.eval([x[0] - t * w[0], x[1] - t * w[1], x[2] - t * w[2]]);
                sf += wt * t * f;
                for k in 0..3 {
                    sv[k] += wt * fv[k];
                }
            }
        }
        let lfac: f64 = (0..3).map(|k| coeffs.factor(k, w) * sv[k]).sum();
        let ww = node.weight * chi;
        for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            let o = w[i] * w[j] * ww;
            h[c] += o * sf;
            p[c] += o * lfac;
        }
    }
    (h, p)
}

/// Polar nodes `(u, weight)` for axis evaluation at radius `r`: panels doubling in `u`
/// from `scale / r` up to the plateau edge, so rays passing near the vertex are resolved,
/// then even panels over the transition.
pub fn graded_polar_rule(cone: &ConeSpec, r: f64, scale: f64, per_panel: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0];
    let mut u = (scale / r).min(cone.theta_inner);
    while u < cone.theta_inner {
        cuts.push(u);
        u *= 2.0;
    }
    cuts.push(cone.theta_inner);
    for k in 1..=4 {
        cuts.push(cone.theta_inner + (cone.theta - cone.theta_inner) * k as f64 / 4.0);
    }
    cuts.windows(2).flat_map(|w| gauss_interval(per_panel, w[0], w[1])).collect()
}

/// `K ∗ f` on the cone axis for a source invariant under rotations about the axis.
///
/// One ray integral per polar node; the azimuthal mean of `ω ⊗ ω` is
/// `cos²u a⊗a + ½ sin²u (I - a⊗a)`.
pub fn apply_k_on_axis(profile: &KernelProfile, f: &(dyn Fn([f64; 3]) -> f64 + Sync), r: f64, ray: &RayConfig) -> [f64; 6] {
    let cone = &profile.cone;
    let a = cone.axis;
    let x = a.map(|c| c * r);
    let [_, e1, _] = cone.frame();
    let rule = graded_polar_rule(cone, r, ray.min_scale, ray.points_per_panel);
    let rings: Vec<(f64, f64)> = rule
        .par_iter()
        .map(|&(u, wu)| {
            let chi = profile.chi_u(u);
            if chi == 0.0 {
                return (u, 0.0);
            }
            let w: [f64; 3] = std::array::from_fn(|i| u.cos() * a[i] + u.sin() * e1[i]);
            let t_end = cone_exit(cone, x, w);
            let mut s = 0.0;
            for (lo, hi) in ray_panels(ray, x, w, t_end) {
                for (t, wt) in gauss_interval(ray.points_per_panel, lo, hi) {
                    s += wt * t * f([x[0] - t * w[0], x[1] - t * w[1], x[2] - t * w[2]]);
                }
            }
            (u, 2.0 * std::f64::consts::PI * wu * u.sin() * chi * s)
        })
        .collect();
    let mut h = [0.0; 6];
    for (u, v) in rings {
        let (c2, s2) = (u.cos().powi(2), 0.5 * u.sin().powi(2));
        for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            let id = if i == j { 1.0 } else { 0.0 };
            h[c] += v * (c2 * a[i] * a[j] + s2 * (id - a[i] * a[j]));
        }
    }
    h
}

/// Weak-form errors of both delta identities for one test function.
#[derive(Clone, Copy, Debug)]
pub struct WeakIdentity {
    /// `|⟨K, ∂∂φ⟩ - φ(0)| / scale`
    pub k_error: f64,
    /// `max_k |⟨L_{e_k}, -∂φ⟩ - e_k φ(0)| / scale`
    pub l_error: f64,
    /// `⟨K, ∂∂φ⟩ / φ(0)`, NaN when `φ(0) = 0`.
    pub k_ratio: f64,
}

/// Evaluate both weak identities for `phi` (given by jets) integrated along rays to `t_max`.
pub fn weak_identities(
    profile: &KernelProfile,
    coeffs: &MomentCoefficients,
    phi: &(dyn Fn([f64; 3], usize) -> Jet + Sync),
    t_max: f64,
    ray_points: usize,
) -> WeakIdentity {
    let panels = (ray_points / 8).max(1);
    let phi0 = phi([0.0; 3], 0).value();
    let mut scale = phi0.abs();
    let nodes = &profile.rule.nodes;
    let rays = crate::quadrature::composite_gauss(8, panels, 0.0, t_max);
    // per node: (∫ t ∂²_t φ, -∫ ∂_t φ, sup |φ| on the ray)
    let per_node: Vec<(f64, f64, f64)> = nodes
        .par_iter()
        .map(|node| {
            let w = node.dir;
            let (mut sk, mut sl, mut peak) = (0.0, 0.0, 0.0f64);
            for &(t, wt) in &rays {
                let j = phi(w.map(|c| c * t), 2);
                let g = j.grad();
                let mut d2 = 0.0;
                let mut d1 = 0.0;
                for a in 0..3 {
                    d1 += w[a] * g[a];
                    for b in 0..3 {
                        d2 += w[a] * w[b] * j.hess(a, b);
                    }
                }
                sk += wt * t * d2;
                sl -= wt * d1;
                peak = peak.max(j.value().abs());
            }
            (sk, sl, peak)
        })
        .collect();
    let mut kval = 0.0;
    let mut lval = [[0.0; 3]; 3];
    for (node, &(sk, sl, peak)) in nodes.iter().zip(&per_node) {
        let chi = profile.chi_u(node.u);
        kval += node.weight * chi * sk;
        scale = scale.max(peak);
        for k in 0..3 {
            let c = node.weight * chi * coeffs.factor(k, node.dir) * sl;
            for j in 0..3 {
                lval[k][j] += c * node.dir[j];
            }
        }
    }
    let k_error = (kval - phi0).abs() / scale;
    let mut l_error = 0.0f64;
    for k in 0..3 {
        for j in 0..3 {
            let want = if j == k { phi0 } else { 0.0 };
            l_error = l_error.max((lval[k][j] - want).abs() / scale);
        }
    }
    let k_ratio = if phi0 == 0.0 { f64::NAN } else { kval / phi0 };
    WeakIdentity { k_error, l_error, k_ratio }
}

/// Gaussian test function `exp(-|x-c|²/(2σ²))` as jets.
pub fn gaussian_test(c: [f64; 3], sigma: f64) -> impl Fn([f64; 3], usize) -> Jet + Sync {
    move |x, deg| {
        let j = Jet::point(x, deg);
        let mut q = Jet::constant(0.0, deg);
        for a in 0..3 {
            let d = j[a].add_const(-c[a]);
            q = q.add(&d.mul(&d));
        }
        q.scale(-0.5 / (sigma * sigma)).map(|t| t.exp())
    }
}

/// Smooth bump `exp(1 - 1/(1-|x-c|²/ρ²))` supported in the ball of radius ρ, as jets.
pub fn bump_test(c: [f64; 3], rho: f64) -> impl Fn([f64; 3], usize) -> Jet + Sync {
    move |x, deg| {
        let s2: f64 = (0..3).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>() / (rho * rho);
        if s2 >= 1.0 - 1e-3 {
            return Jet::constant(0.0, deg);
        }
        let j = Jet::point(x, deg);
        let mut q = Jet::constant(0.0, deg);
        for a in 0..3 {
            let d = j[a].add_const(-c[a]);
            q = q.add(&d.mul(&d));
        }
        let u = q.scale(-1.0 / (rho * rho)).add_const(1.0);
        u.map(|t| t.recip().scale(-1.0).add_const(1.0).exp())
    }
}
