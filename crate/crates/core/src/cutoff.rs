//! The `exp(-1/t)` smooth step and the cutoffs built from it.

use crate::jet::Taylor1;

/// Below this argument `exp(-1/t)` underflows, so the step is flat to machine precision.
const FLAT: f64 = 1.0 / 700.0;

#[inline]
fn bump_half(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump_half(t);
        a / (a + bump_half(1.0 - t))
    }
}

/// Series of the smooth step composed with the series `t`.
pub fn smooth_step_series(t: &Taylor1) -> Taylor1 {
    let t0 = t.value();
    if t0 <= FLAT {
        return Taylor1::constant(0.0, t.deg);
    }
    if t0 >= 1.0 - FLAT {
        return Taylor1::constant(1.0, t.deg);
    }
    let a = t.recip().scale(-1.0).exp();
    let one_minus = t.scale(-1.0).add_const(1.0);
    let b = one_minus.recip().scale(-1.0).exp();
    a.div(&a.add(&b))
}

/// Angular plateau profile: 1 for u ≤ inner, 0 for u ≥ outer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularProfile {
    pub inner: f64,
    pub outer: f64,
}

impl AngularProfile {
    pub fn value(&self, u: f64) -> f64 {
        1.0 - smooth_step((u - self.inner) / (self.outer - self.inner))
    }

    /// Profile as a function of `cos u`, returning its series in the cosine.
    pub fn series_in_cos(&self, c: &Taylor1) -> Taylor1 {
        let c0 = c.value();
        if c0 >= self.inner.cos() {
            return Taylor1::constant(1.0, c.deg);
        }
        if c0 <= self.outer.cos() {
            return Taylor1::constant(0.0, c.deg);
        }
        let u = c.acos();
        let t = u.add_const(-self.inner).scale(1.0 / (self.outer - self.inner));
        smooth_step_series(&t).scale(-1.0).add_const(1.0)
    }

    pub fn value_cos(&self, c: f64) -> f64 {
        if c >= self.inner.cos() {
            1.0
        } else if c <= self.outer.cos() {
            0.0
        } else {
            self.value(c.clamp(-1.0, 1.0).acos())
        }
    }
}

/// Radial cutoff: 0 on [0, 1], 1 on [r1, ∞).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialCutoff {
    pub r1: f64,
}

impl RadialCutoff {
    pub fn value(&self, r: f64) -> f64 {
        smooth_step((r - 1.0) / (self.r1 - 1.0))
    }

    pub fn series(&self, r: &Taylor1) -> Taylor1 {
        smooth_step_series(&r.add_const(-1.0).scale(1.0 / (self.r1 - 1.0)))
    }
}
