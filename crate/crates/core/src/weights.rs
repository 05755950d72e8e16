//! Borderline weights `L(r) = ∏ (log_(j)(2+r))^β_j` and their admissibility proxies.

use serde::Serialize;

use crate::cutoff::smooth_step_series;
use crate::error::{Error, Result};
use crate::jet::{Taylor1, TMAX};
use crate::quadrature::gauss_interval;

/// Highest derivative order `eval` supports.
pub const MAX_DERIV: usize = TMAX - 1;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    IteratedLog { beta: Vec<f64>, j0: usize },
    /// L ≡ 1, only for negative controls.
    Constant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub r_star: f64,
    pub r1: f64,
}

/// `log_(j)(x)` with `log_(1) = log`.
fn iter_log(x: f64, j: usize) -> f64 {
    (0..j).fold(x, |v, _| v.ln())
}

/// Smallest radius (at least 2) with `log_(j)(2+r) ≥ 2` for all j ≤ m.
pub fn auto_r_star(m: usize) -> Result<f64> {
    // log_(m)(2+r) ≥ 2 ⟺ 2+r ≥ exp^m(2); the deepest level is binding.
    let mut v: f64 = 2.0;
    for _ in 0..m {
        v = v.exp();
    }
    if !v.is_finite() {
        return Err(Error::Invalid(format!("weight.m = {m} puts R_star beyond floating-point range")));
    }
    Ok((v - 2.0).max(2.0) * (1.0 + 1e-12))
}

impl WeightFunction {
    /// `L(r) = log(2+r)^β` with default thresholds.
    pub fn log_power(beta: f64) -> Self {
        let r_star = auto_r_star(1).unwrap();
        WeightFunction { kind: WeightKind::IteratedLog { beta: vec![beta], j0: 1 }, r_star, r1: r_star }
    }

    /// Unvalidated iterated-log weight; call [`validate`](Self::validate) for checked use.
    pub fn iterated_log(beta: Vec<f64>, j0: usize, r_star: f64, r1: f64) -> Self {
        WeightFunction { kind: WeightKind::IteratedLog { beta, j0 }, r_star, r1 }
    }

    pub fn constant() -> Self {
        WeightFunction { kind: WeightKind::Constant, r_star: 2.0, r1: 1.0 }
    }

    pub fn depth(&self) -> usize {
        match &self.kind {
            WeightKind::IteratedLog { beta, .. } => beta.len(),
            WeightKind::Constant => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let WeightKind::IteratedLog { beta, j0 } = &self.kind else {
            return Ok(());
        };
        let m = beta.len();
        if m == 0 {
            return Err(Error::Invalid("weight.beta must not be empty (weight.m ≥ 1)".into()));
        }
        if *j0 < 1 || *j0 > m {
            return Err(Error::Invalid(format!("weight.j0 must lie in 1..={m}, got {j0}")));
        }
        for (j, b) in beta.iter().enumerate().take(j0 - 1) {
            if *b != 0.5 {
                return Err(Error::Invalid(format!("weight.beta[{}] must equal 1/2 below j0, got {b}", j + 1)));
            }
        }
        if beta[j0 - 1] <= 0.5 {
            return Err(Error::Invalid(format!("weight.beta[{j0}] must exceed 1/2, got {}", beta[j0 - 1])));
        }
        if !(self.r_star >= 2.0) {
            return Err(Error::Invalid(format!("weight.R_star must be at least 2, got {}", self.r_star)));
        }
        for j in 1..=m {
            let v = iter_log(2.0 + self.r_star, j);
            if !(v >= 2.0 - 1e-9) {
                return Err(Error::Invalid(format!(
                    "weight.R_star = {} gives log_({j})(2+R_star) = {v:.4} < 2",
                    self.r_star
                )));
            }
        }
        if !(self.r1 >= 1.0) {
            return Err(Error::Invalid(format!("weight.R1 must be at least 1, got {}", self.r1)));
        }
        if m > 1 && self.r1 < self.r_star {
            return Err(Error::Invalid(format!(
                "weight.R1 = {} lies below R_star = {} where the inner extension is in use",
                self.r1, self.r_star
            )));
        }
        // monotonicity of the closed form on [R_star, 1e12]
        let mut prev = self.value(self.r_star);
        for k in 1..=200 {
            let r = self.r_star * (1e12 / self.r_star).powf(k as f64 / 200.0);
            let v = self.value(r);
            if v < prev {
                return Err(Error::Invalid(format!("weight with beta = {beta:?} is not nondecreasing near r = {r:e}")));
            }
            prev = v;
        }
        Ok(())
    }

    /// Whether the closed form is used on all of [0, ∞).
    fn closed_form_everywhere(&self) -> bool {
        self.depth() <= 1
    }

    /// Closed-form series in the radius series `r`.
    fn formula_series(&self, r: &Taylor1) -> Taylor1 {
        match &self.kind {
            WeightKind::Constant => Taylor1::constant(1.0, r.deg),
            WeightKind::IteratedLog { beta, .. } => {
                let mut l = r.add_const(2.0);
                let mut out = Taylor1::constant(1.0, r.deg);
                for &b in beta {
                    l = l.ln();
                    if b != 0.0 {
                        out = out.mul(&l.powf(b));
                    }
                }
                out
            }
        }
    }

    /// Series of `L` in the displacement from `r0`.
    pub fn series(&self, r0: f64, deg: usize) -> Taylor1 {
        let r = Taylor1::var(r0, deg);
        if self.closed_form_everywhere() || r0 >= self.r_star {
            return self.formula_series(&r);
        }
        self.formula_series(&self.clamp_series(r0, deg))
    }

    /// Smooth clamp `σ` with `σ(r) = r` for r ≥ R_star and `σ' = S(r - R_star + 1) ≥ 0`,
    /// so `σ ≥ R_star - 1/2` and every derivative matches at R_star.
    fn clamp_series(&self, r0: f64, deg: usize) -> Taylor1 {
        let a = self.r_star - 1.0;
        let slope = |t: &Taylor1| smooth_step_series(&t.add_const(-a));
        let value = if r0 <= a {
            self.r_star - 0.5
        } else {
            // σ(r0) = R_star - ∫_{r0}^{R_star} S
            let rule = gauss_interval(24, r0, self.r_star);
            self.r_star - rule.iter().map(|&(t, w)| w * crate::cutoff::smooth_step(t - a)).sum::<f64>()
        };
        if deg == 0 {
            return Taylor1::constant(value, 0);
        }
        let s = slope(&Taylor1::var(r0, deg));
        s.integrate(value)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.series(r, 0).value()
    }

    /// `L^{(deriv)}(r)`.
    pub fn eval(&self, r: f64, deriv: usize) -> Result<f64> {
        if deriv > MAX_DERIV {
            return Err(Error::Invalid(format!("derivative order {deriv} exceeds {MAX_DERIV}")));
        }
        if !(r >= 0.0) {
            return Err(Error::Invalid(format!("radius must be nonnegative, got {r}")));
        }
        Ok(self.series(r, deriv).derivative(deriv))
    }

    /// `L^{(deriv)}(r)` for a given regularity order `q`, restricting `deriv ≤ q + 3`.
    pub fn eval_for_order(&self, r: f64, deriv: usize, q: usize) -> Result<f64> {
        if deriv > q + 3 {
            return Err(Error::Invalid(format!("derivative order {deriv} exceeds q+3 = {}", q + 3)));
        }
        self.eval(r, deriv)
    }

    /// `r L'(r) / L(r)`.
    pub fn log_slope(&self, r: f64) -> f64 {
        let s = self.series(r, 1);
        r * s.c[1] / s.c[0]
    }

    /// Admissibility proxies with thresholds named in the report.
    pub fn check_admissibility(&self, q: usize, delta_samples: &[f64]) -> AdmissibilityReport {
        AdmissibilityReport {
            r1: self.r1,
            r_star: self.r_star,
            convergence: self.proxy_convergence(),
            divergence: delta_samples.iter().map(|&d| (d, self.proxy_divergence(d))).collect(),
            symbol: self.proxy_symbol(q),
            slow_variation: self.proxy_slow_variation(),
        }
    }

    /// ∫ over [10^k, 10^(k+1)] ∩ [R1, ∞) of r^{δ-1}/L², integrated in log r.
    fn decade_integral(&self, k: i32, delta: f64) -> f64 {
        let lo = (10f64.powi(k)).max(self.r1).ln();
        let hi = 10f64.powi(k + 1).ln();
        if hi <= lo {
            return 0.0;
        }
        let rule = gauss_interval(20, lo, hi);
        rule.iter()
            .map(|&(x, w)| {
                let l = self.value(x.exp());
                w * (delta * x).exp() / (l * l)
            })
            .sum()
    }

    fn first_decade(&self) -> i32 {
        (self.r1.log10().ceil() as i32).max(3)
    }

    /// (a): increments of ∫ dr/(rL²) decrease and decay like k^{-p} with p > 1.
    fn proxy_convergence(&self) -> ProxyResult {
        let k0 = self.first_decade();
        let ks: Vec<i32> = (k0..k0 + 6).collect();
        let inc: Vec<f64> = ks.iter().map(|&k| self.decade_integral(k, 0.0)).collect();
        let decreasing = inc.windows(2).all(|w| w[1] < w[0] * (1.0 - 1e-9));
        let p = -fit_slope(
            &ks.iter().map(|&k| (k as f64).ln()).collect::<Vec<_>>(),
            &inc.iter().map(|v| v.ln()).collect::<Vec<_>>(),
        );
        let pass = decreasing && p > TAIL_EXPONENT_MIN;
        ProxyResult {
            pass,
            detail: format!(
                "increments over decades 10^{}..10^{}: decreasing = {decreasing}, tail exponent p = {p:.3} (need > {TAIL_EXPONENT_MIN})",
                k0,
                k0 + 6
            ),
        }
    }

    /// (b): increments of ∫ r^{δ-1}/L² eventually increase.
    fn proxy_divergence(&self, delta: f64) -> ProxyResult {
        if !(delta > 0.0) {
            return ProxyResult { pass: false, detail: format!("delta = {delta} must be positive") };
        }
        let k0 = self.first_decade();
        let kmax = ((3.0 / delta).ceil() as i32).max(9).min(300);
        let tail: Vec<f64> = (kmax - 3..kmax).map(|k| self.decade_integral(k, delta)).collect();
        let pass = tail.windows(2).all(|w| w[1] > w[0]) && tail.iter().all(|v| v.is_finite());
        ProxyResult {
            pass,
            detail: format!(
                "delta = {delta}: last increments over decades {}..{} (from 10^{k0}) = {:?}",
                kmax - 3,
                kmax,
                tail.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
            ),
        }
    }

    /// (c): r^k L |(1/L)^{(k)}| does not grow over [1e9, 1e12] relative to [R1, 1e9].
    fn proxy_symbol(&self, q: usize) -> ProxyResult {
        let kmax = (q + 3).min(MAX_DERIV);
        let mut worst = 0.0f64;
        let mut pass = true;
        let mut lines = Vec::new();
        for k in 1..=kmax {
            let (mut head, mut tail) = (0.0f64, 0.0f64);
            let lo = self.r1.max(1.0).log10();
            let samples = 240;
            for i in 0..=samples {
                let r = 10f64.powf(lo + (12.0 - lo) * i as f64 / samples as f64);
                let s = self.series(r, k);
                let inv = s.recip();
                let v = r.powi(k as i32) * s.value() * inv.derivative(k).abs();
                if !v.is_finite() {
                    pass = false;
                }
                if r >= 1e9 {
                    tail = tail.max(v);
                } else {
                    head = head.max(v);
                }
            }
            worst = worst.max(head).max(tail);
            if tail > head * (1.0 + 1e-9) {
                pass = false;
            }
            lines.push(format!("k={k}: sup={:.3e} tail={tail:.3e}", head.max(tail)));
        }
        ProxyResult { pass, detail: format!("max ratio {worst:.3e}; {}", lines.join(", ")) }
    }

    /// (d): r L'/L is eventually nonincreasing and drops below 1e-2.
    fn proxy_slow_variation(&self) -> ProxyResult {
        let vals: Vec<(f64, f64)> = (1..=300).map(|k| {
            let r = 10f64.powi(k);
            (r, self.log_slope(r))
        }).collect();
        let tail = &vals[vals.len() / 2..];
        let monotone = tail.windows(2).all(|w| w[1].1 <= w[0].1);
        let below = vals.iter().find(|(_, v)| *v < SLOW_VARIATION_LEVEL).map(|(r, _)| *r);
        let at_1e12 = self.log_slope(1e12);
        let pass = monotone && below.is_some() && vals.last().unwrap().1 < SLOW_VARIATION_LEVEL;
        ProxyResult {
            pass,
            detail: format!(
                "r L'/L at 1e6 = {:.3e}, at 1e12 = {at_1e12:.3e}; first below {SLOW_VARIATION_LEVEL} at r = {}; nonincreasing tail = {monotone}",
                self.log_slope(1e6),
                below.map_or("never".to_string(), |r| format!("{r:e}"))
            ),
        }
    }

    /// Radius where `r L'/L` first drops to `level`, scanning log-spaced radii from R1.
    pub fn onset_radius(&self, level: f64) -> f64 {
        let mut r = self.r1.max(1.0);
        while self.log_slope(r) > level {
            r *= 1.01;
            if r > 1e300 {
                return f64::INFINITY;
            }
        }
        r
    }
}

/// Minimum fitted decay exponent of the convergence increments.
pub const TAIL_EXPONENT_MIN: f64 = 1.0;
/// Level the slow-variation ratio must eventually undercut.
pub const SLOW_VARIATION_LEVEL: f64 = 1e-2;

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct ProxyResult {
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub r1: f64,
    pub r_star: f64,
    pub convergence: ProxyResult,
    pub divergence: Vec<(f64, ProxyResult)>,
    pub symbol: ProxyResult,
    pub slow_variation: ProxyResult,
}

impl AdmissibilityReport {
    pub fn pass(&self) -> bool {
        self.convergence.pass && self.divergence.iter().all(|(_, p)| p.pass) && self.symbol.pass && self.slow_variation.pass
    }

    /// Names of the violated conditions.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.convergence.pass {
            v.push("convergence of ∫ dr/(r L²)".to_string());
        }
        for (d, p) in &self.divergence {
            if !p.pass {
                v.push(format!("divergence of ∫ r^(δ-1)/L² for δ = {d}"));
            }
        }
        if !self.symbol.pass {
            v.push("symbol bound on 1/L".to_string());
        }
        if !self.slow_variation.pass {
            v.push("slow variation r L'/L → 0".to_string());
        }
        v
    }
}
