//! Truncated Taylor arithmetic.
//!
//! [`Taylor1`] is a univariate series `Σ c_k t^k` around a base point and
//! [`Jet`] is a trivariate polynomial in the displacement `(dx, dy, dz)`
//! truncated at a fixed total degree. Smooth closed forms are evaluated by
//! building their univariate series with `Taylor1` and substituting a `Jet`
//! for the displacement. Derivatives then fall out as scaled coefficients.

use std::sync::OnceLock;

/// Maximum number of univariate coefficients (degree 15).
pub const TMAX: usize = 16;
/// Maximum supported jet degree.
pub const JDEG_MAX: usize = 5;
/// Coefficient capacity of a degree-5 trivariate jet.
pub const JMAX: usize = 56;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor1 {
    pub c: [f64; TMAX],
    pub deg: usize,
}

impl Taylor1 {
    pub fn constant(a: f64, deg: usize) -> Self {
        assert!(deg < TMAX, "series degree {deg} exceeds capacity");
        let mut c = [0.0; TMAX];
        c[0] = a;
        Taylor1 { c, deg }
    }

    /// The identity series `a + t`.
    pub fn var(a: f64, deg: usize) -> Self {
        let mut s = Self::constant(a, deg);
        if deg >= 1 {
            s.c[1] = 1.0;
        }
        s
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> f64 {
        if k > self.deg {
            return 0.0;
        }
        self.c[k] * factorial(k)
    }

    pub fn is_zero(&self) -> bool {
        self.c[..=self.deg].iter().all(|&v| v == 0.0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for k in 0..=self.deg {
            r.c[k] += o.c[k];
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = *self;
        for k in 0..=self.deg {
            r.c[k] -= o.c[k];
        }
        r
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut r = *self;
        for k in 0..=self.deg {
            r.c[k] *= a;
        }
        r
    }

    pub fn add_const(&self, a: f64) -> Self {
        let mut r = *self;
        r.c[0] += a;
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::constant(0.0, self.deg);
        for k in 0..=self.deg {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.c[j] * o.c[k - j];
            }
            r.c[k] = acc;
        }
        r
    }

    pub fn recip(&self) -> Self {
        let x0 = self.c[0];
        let mut r = Self::constant(1.0 / x0, self.deg);
        for k in 1..=self.deg {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.c[j] * r.c[k - j];
            }
            r.c[k] = -acc / x0;
        }
        r
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Self {
        let mut r = Self::constant(self.c[0].exp(), self.deg);
        for k in 1..=self.deg {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * r.c[k - j];
            }
            r.c[k] = acc / k as f64;
        }
        r
    }

    pub fn ln(&self) -> Self {
        let x0 = self.c[0];
        let mut r = Self::constant(x0.ln(), self.deg);
        for k in 1..=self.deg {
            let mut acc = 0.0;
            for j in 1..k {
                acc += j as f64 * r.c[j] * self.c[k - j];
            }
            r.c[k] = (self.c[k] - acc / k as f64) / x0;
        }
        r
    }

    /// `x^alpha` for a positive base value.
    pub fn powf(&self, alpha: f64) -> Self {
        let x0 = self.c[0];
        let mut r = Self::constant(x0.powf(alpha), self.deg);
        for k in 1..=self.deg {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (alpha * j as f64 - (k - j) as f64) * self.c[j] * r.c[k - j];
            }
            r.c[k] = acc / (k as f64 * x0);
        }
        r
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// Antiderivative with the given constant term.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut r = Self::constant(c0, self.deg);
        for k in 1..=self.deg {
            r.c[k] = self.c[k - 1] / k as f64;
        }
        r
    }

    /// `acos` for base values strictly inside (-1, 1).
    pub fn acos(&self) -> Self {
        let one_minus_sq = Self::constant(1.0, self.deg).sub(&self.mul(self));
        let dacos = one_minus_sq.powf(-0.5).scale(-1.0);
        // d/dt acos(x(t)) = dacos(x) x'(t); integrate the product.
        let dx = self.deriv_series();
        let prod = dacos.mul(&dx);
        prod.integrate(self.c[0].acos())
    }

    /// Series of the t-derivative, padded with a zero top coefficient.
    fn deriv_series(&self) -> Self {
        let mut r = Self::constant(0.0, self.deg);
        for k in 0..self.deg {
            r.c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        r
    }

    /// Compose `self(inner)` where `self` is expanded around `inner.value()`.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut d = *inner;
        d.c[0] = 0.0;
        let mut r = Self::constant(self.c[self.deg], inner.deg);
        for k in (0..self.deg).rev() {
            r = r.mul(&d).add_const(self.c[k]);
        }
        r
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

struct JetTables {
    /// Exponents of each monomial, ordered by total degree.
    mono: Vec<[usize; 3]>,
    index: [[[usize; JDEG_MAX + 1]; JDEG_MAX + 1]; JDEG_MAX + 1],
    /// Product table per truncation degree: (i, j, target).
    mul: Vec<Vec<(u8, u8, u8)>>,
}

fn tables() -> &'static JetTables {
    static T: OnceLock<JetTables> = OnceLock::new();
    T.get_or_init(|| {
        let mut mono = Vec::new();
        for d in 0..=JDEG_MAX {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    mono.push([a, b, d - a - b]);
                }
            }
        }
        let mut index = [[[usize::MAX; JDEG_MAX + 1]; JDEG_MAX + 1]; JDEG_MAX + 1];
        for (i, m) in mono.iter().enumerate() {
            index[m[0]][m[1]][m[2]] = i;
        }
        let mut mul = Vec::new();
        for deg in 0..=JDEG_MAX {
            let n = jet_len(deg);
            let mut t = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (mono[i], mono[j]);
                    let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                    if e[0] + e[1] + e[2] <= deg {
                        t.push((i as u8, j as u8, index[e[0]][e[1]][e[2]] as u8));
                    }
                }
            }
            mul.push(t);
        }
        JetTables { mono, index, mul }
    })
}

/// Number of monomials of total degree at most `deg` in three variables.
pub const fn jet_len(deg: usize) -> usize {
    (deg + 1) * (deg + 2) * (deg + 3) / 6
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [f64; JMAX],
    pub deg: usize,
}

impl Jet {
    pub fn constant(a: f64, deg: usize) -> Self {
        assert!(deg <= JDEG_MAX, "jet degree {deg} exceeds capacity");
        let mut c = [0.0; JMAX];
        c[0] = a;
        Jet { c, deg }
    }

    /// Coordinate function `x_axis` expanded around `x0`.
    pub fn coord(axis: usize, x0: f64, deg: usize) -> Self {
        let mut j = Self::constant(x0, deg);
        if deg >= 1 {
            j.c[1 + axis] = 1.0;
        }
        j
    }

    /// The three coordinate jets at a point.
    pub fn point(x: [f64; 3], deg: usize) -> [Self; 3] {
        [Self::coord(0, x[0], deg), Self::coord(1, x[1], deg), Self::coord(2, x[2], deg)]
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn len(&self) -> usize {
        jet_len(self.deg)
    }

    /// Raw coefficient of `dx^a dy^b dz^c`.
    pub fn coeff(&self, e: [usize; 3]) -> f64 {
        if e[0] + e[1] + e[2] > self.deg {
            return 0.0;
        }
        self.c[tables().index[e[0]][e[1]][e[2]]]
    }

    /// Partial derivative `∂^e` at the expansion point.
    pub fn partial(&self, e: [usize; 3]) -> f64 {
        self.coeff(e) * factorial(e[0]) * factorial(e[1]) * factorial(e[2])
    }

    /// Gradient at the expansion point.
    pub fn grad(&self) -> [f64; 3] {
        [self.partial([1, 0, 0]), self.partial([0, 1, 0]), self.partial([0, 0, 1])]
    }

    /// Hessian entry `∂_i ∂_j` at the expansion point.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        let mut e = [0; 3];
        e[i] += 1;
        e[j] += 1;
        self.partial(e)
    }

    /// Jet of `∂_axis self`, one degree lower.
    pub fn diff(&self, axis: usize) -> Self {
        assert!(self.deg >= 1);
        let t = tables();
        let mut r = Self::constant(0.0, self.deg - 1);
        for (i, m) in t.mono[..r.len()].iter().enumerate() {
            let mut e = *m;
            e[axis] += 1;
            r.c[i] = e[axis] as f64 * self.c[t.index[e[0]][e[1]][e[2]]];
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.c[..self.len()].iter().all(|&v| v == 0.0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for k in 0..self.len() {
            r.c[k] += o.c[k];
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = *self;
        for k in 0..self.len() {
            r.c[k] -= o.c[k];
        }
        r
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut r = *self;
        for k in 0..self.len() {
            r.c[k] *= a;
        }
        r
    }

    pub fn add_const(&self, a: f64) -> Self {
        let mut r = *self;
        r.c[0] += a;
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::constant(0.0, self.deg);
        for &(i, j, k) in &tables().mul[self.deg] {
            r.c[k as usize] += self.c[i as usize] * o.c[j as usize];
        }
        r
    }

    /// Substitute this jet into a univariate series built around its value.
    pub fn compose(&self, f: &Taylor1) -> Self {
        let mut d = *self;
        d.c[0] = 0.0;
        let top = f.deg.min(self.deg);
        let mut r = Self::constant(f.c[top], self.deg);
        for k in (0..top).rev() {
            r = r.mul(&d).add_const(f.c[k]);
        }
        r
    }

    /// Apply a univariate function given as a series builder.
    pub fn map(&self, f: impl FnOnce(Taylor1) -> Taylor1) -> Self {
        let s = f(Taylor1::var(self.value(), self.deg));
        self.compose(&s)
    }

    pub fn recip(&self) -> Self {
        self.map(|t| t.recip())
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn sqrt(&self) -> Self {
        self.map(|t| t.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_ln_roundtrip() {
        let x = Taylor1::var(0.7, 8);
        let y = x.exp().ln();
        for k in 0..=8 {
            assert_relative_eq!(y.c[k], x.c[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn powf_matches_binomial() {
        // (1+t)^a = Σ binom(a,k) t^k
        let a = -1.3;
        let s = Taylor1::var(1.0, 6).powf(a);
        let mut b = 1.0;
        for k in 0..=6 {
            assert_relative_eq!(s.c[k], b, epsilon = 1e-13);
            b *= (a - k as f64) / (k + 1) as f64;
        }
    }

    #[test]
    fn acos_derivatives() {
        let x0: f64 = 0.3;
        let s = Taylor1::var(x0, 4).acos();
        assert_relative_eq!(s.c[0], x0.acos(), epsilon = 1e-15);
        assert_relative_eq!(s.derivative(1), -1.0 / (1.0 - x0 * x0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(s.derivative(2), -x0 / (1.0 - x0 * x0).powf(1.5), epsilon = 1e-14);
    }

    #[test]
    fn jet_product_rule() {
        let [x, y, z] = Jet::point([0.5, -1.0, 2.0], 4);
        let f = x.mul(&y).mul(&z).mul(&x);
        // f = x² y z
        assert_relative_eq!(f.value(), 0.25 * -1.0 * 2.0);
        assert_relative_eq!(f.partial([2, 0, 0]), 2.0 * -1.0 * 2.0);
        assert_relative_eq!(f.partial([1, 1, 1]), 2.0 * 0.5);
        assert_relative_eq!(f.partial([2, 1, 1]), 2.0);
        assert_eq!(f.partial([3, 0, 0]), 0.0);
    }

    #[test]
    fn jet_radius_hessian() {
        let p = [1.0, 2.0, 2.0];
        let [x, y, z] = Jet::point(p, 3);
        let r = x.mul(&x).add(&y.mul(&y)).add(&z.mul(&z)).sqrt();
        assert_relative_eq!(r.value(), 3.0);
        for i in 0..3 {
            assert_relative_eq!(r.grad()[i], p[i] / 3.0, epsilon = 1e-15);
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                let want = (d - p[i] * p[j] / 9.0) / 3.0;
                assert_relative_eq!(r.hess(i, j), want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn diff_lowers_degree() {
        let [x, y, _] = Jet::point([1.0, 3.0, 0.0], 3);
        let f = x.mul(&x).mul(&y);
        let fx = f.diff(0);
        assert_eq!(fx.deg, 2);
        assert_relative_eq!(fx.value(), 6.0);
        assert_relative_eq!(fx.partial([1, 0, 0]), 6.0);
        assert_relative_eq!(fx.partial([0, 1, 0]), 2.0);
    }
}
