//! Gauss–Legendre rules and the spherical-cap product rule.

use std::f64::consts::PI;

use crate::grid::ConeSpec;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss rule mapped to [a, b].
pub fn gauss_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter().zip(&w).map(|(&xi, &wi)| (m + h * xi, h * wi)).collect()
}

/// Composite Gauss rule with `panels` equal panels.
pub fn composite_gauss(n: usize, panels: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let step = (b - a) / panels as f64;
    (0..panels).flat_map(|p| gauss_interval(n, a + p as f64 * step, a + (p + 1) as f64 * step)).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct CapNode {
    pub dir: [f64; 3],
    /// Polar angle from the cone axis.
    pub u: f64,
    pub weight: f64,
    /// Index of the polar ring the node belongs to.
    pub ring: usize,
}

/// Product rule on the cap {angle ≤ theta}: Gauss in the polar angle, trapezoid in azimuth.
#[derive(Clone, Debug)]
pub struct CapRule {
    pub nodes: Vec<CapNode>,
    pub polar: usize,
    pub azimuth: usize,
}

impl CapRule {
    /// `polar` nodes split evenly between the plateau [0, inner] and the transition [inner, theta].
    pub fn new(cone: &ConeSpec, polar: usize, azimuth: usize) -> Self {
        let [a, u1, u2] = cone.frame();
        let lo = polar / 2;
        let mut rings = gauss_interval(lo.max(1), 0.0, cone.theta_inner);
        rings.extend(gauss_interval((polar - lo).max(1), cone.theta_inner, cone.theta));
        let mut nodes = Vec::with_capacity(rings.len() * azimuth);
        let dphi = 2.0 * PI / azimuth as f64;
        for (ring, &(u, wu)) in rings.iter().enumerate() {
            let (su, cu) = u.sin_cos();
            for k in 0..azimuth {
                let phi = (k as f64 + 0.5) * dphi;
                let (sp, cp) = phi.sin_cos();
                let dir = std::array::from_fn(|i| cu * a[i] + su * (cp * u1[i] + sp * u2[i]));
                nodes.push(CapNode { dir, u, weight: wu * su * dphi, ring });
            }
        }
        CapRule { nodes, polar: rings.len(), azimuth }
    }

    pub fn integrate(&self, f: impl Fn(&CapNode) -> f64) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(n)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_exact_for_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p + 1) as f64 };
                assert_relative_eq!(got, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn cap_area() {
        let cone = ConeSpec::with_axis([0.3, -0.2, 0.9], 0.9).unwrap();
        let rule = CapRule::new(&cone, 24, 48);
        let area = rule.integrate(|_| 1.0);
        assert_relative_eq!(area, 2.0 * PI * (1.0 - 0.9f64.cos()), max_relative = 1e-13);
        for n in &rule.nodes {
            assert!(cone.contains(n.dir));
        }
    }
}
