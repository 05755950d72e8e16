use approx::assert_relative_eq;
use cone_data::checks::counterexample_pair;
use cone_data::grid::{dot, norm, sub3, ConeSpec, SYM_PAIRS};
use cone_data::kernels::*;
use cone_data::quadrature::gauss_interval;
use proptest::prelude::*;

fn cone() -> ConeSpec {
    ConeSpec::with_axis([0.0, 0.0, 1.0], 1.2).unwrap()
}

fn profile() -> KernelProfile {
    KernelProfile::new(cone(), 24, 48)
}

fn tilted() -> KernelProfile {
    KernelProfile::new(ConeSpec::with_axis([0.3, -0.5, 0.8], 0.9).unwrap(), 24, 48)
}

#[test]
fn profile_has_unit_mass() {
    assert_relative_eq!(profile().total_mass(), 1.0, epsilon = 1e-10);
    assert_relative_eq!(tilted().total_mass(), 1.0, epsilon = 1e-10);
    let doubled = KernelProfile::with_mass(cone(), 24, 48, 2.0);
    assert_relative_eq!(doubled.total_mass(), 2.0, epsilon = 1e-10);
}

#[test]
fn cap_nodes_lie_in_the_cone() {
    for p in [profile(), tilted()] {
        assert!(p.rule.nodes.iter().all(|n| p.cone.contains(n.dir)));
    }
}

#[test]
fn moment_coefficients_for_frame_vectors() {
    let p = profile();
    let c = MomentCoefficients::solve(&p).unwrap();
    let along = c.for_vector(c.frame[0]);
    assert_relative_eq!(along[0], 1.0 / c.c0, max_relative = 1e-14);
    assert!(along[1].abs() < 1e-14 && along[2].abs() < 1e-14);
    let across = c.for_vector(c.frame[1]);
    assert!(across[0].abs() < 1e-14 && across[2].abs() < 1e-14);
    assert_relative_eq!(across[1], 1.0 / c.c1, max_relative = 1e-14);
    // axial symmetry: the two transverse moments agree
    assert_relative_eq!(c.c1, c.c2, max_relative = 1e-10);
}

#[test]
fn moment_residual_with_tilted_axis() {
    let p = tilted();
    let c = MomentCoefficients::solve(&p).unwrap();
    assert!(c.residual(&p) <= 1e-9);
    // independent recomputation for v = e₃
    let mut m = [0.0; 3];
    for n in &p.rule.nodes {
        let w = n.weight * p.chi(n.dir) * c.factor(2, n.dir);
        for i in 0..3 {
            m[i] += w * n.dir[i];
        }
    }
    assert!(m[0].abs() < 1e-9 && m[1].abs() < 1e-9 && (m[2] - 1.0).abs() < 1e-9, "{m:?}");
}

#[test]
fn kernels_vanish_outside_the_cone() {
    let p = profile();
    let c = MomentCoefficients::solve(&p).unwrap();
    for y in [[0.0, 0.0, -1.0], [1.0, 0.0, 0.2], [0.0, -3.0, 0.5]] {
        assert!(!p.cone.contains(y));
        assert_eq!(eval_k(&p, y).unwrap(), [0.0; 6]);
        for k in 0..3 {
            assert_eq!(eval_lker(&p, &c, k, y).unwrap(), [0.0; 6]);
        }
    }
    assert!(eval_k(&p, [0.0; 3]).is_err());
}

#[test]
fn kernel_halves_when_argument_doubles() {
    let p = profile();
    let c = MomentCoefficients::solve(&p).unwrap();
    let y = [0.2, -0.1, 1.3];
    let (k1, k2) = (eval_k(&p, y).unwrap(), eval_k(&p, y.map(|v| 2.0 * v)).unwrap());
    let (l1, l2) = (eval_lker(&p, &c, 1, y).unwrap(), eval_lker(&p, &c, 1, y.map(|v| 2.0 * v)).unwrap());
    for i in 0..6 {
        assert_eq!(k2[i], k1[i] / 2.0);
        assert_eq!(l2[i], l1[i] / 4.0);
    }
}

#[test]
fn kernel_closed_form() {
    let p = profile();
    let y = [0.1, 0.2, 2.0];
    let r = norm(y);
    let k = eval_k(&p, y).unwrap();
    let chi = p.chi(y.map(|v| v / r));
    for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        assert_relative_eq!(k[c], y[i] * y[j] * chi / r.powi(3), max_relative = 1e-14);
    }
}

/// `∫_{S²} χ ∫₀^∞ t ∂²_t φ(tω) dt dσ` by midpoint rules, independent of the library quadrature.
fn brute_k_pairing(p: &KernelProfile, c: [f64; 3], sigma: f64) -> f64 {
    let [a, u1, u2] = p.cone.frame();
    let (nu, nphi, nt) = (200, 64, 4000);
    let t_max = norm(c) + 9.0 * sigma;
    let mut acc = 0.0;
    for iu in 0..nu {
        let u = p.cone.theta * (iu as f64 + 0.5) / nu as f64;
        for ip in 0..nphi {
            let ph = 2.0 * std::f64::consts::PI * (ip as f64 + 0.5) / nphi as f64;
            let w: [f64; 3] = std::array::from_fn(|i| u.cos() * a[i] + u.sin() * (ph.cos() * u1[i] + ph.sin() * u2[i]));
            let chi = p.chi(w);
            if chi == 0.0 {
                continue;
            }
            // φ(tω) = exp(-|tω - c|²/2σ²); along the ray it is a 1-D Gaussian times a constant
            let b = dot(w, c);
            let perp = dot(c, c) - b * b;
            let amp = (-perp / (2.0 * sigma * sigma)).exp();
            let mut s = 0.0;
            for it in 0..nt {
                let t = t_max * (it as f64 + 0.5) / nt as f64;
                let z = (t - b) / sigma;
                let d2 = amp * (z * z - 1.0) / (sigma * sigma) * (-0.5 * z * z).exp();
                s += t * d2 * t_max / nt as f64;
            }
            acc += chi * s * u.sin() * (p.cone.theta / nu as f64) * (2.0 * std::f64::consts::PI / nphi as f64);
        }
    }
    acc
}

#[test]
fn weak_delta_identities_for_gaussians() {
    let p = profile();
    let coeffs = MomentCoefficients::solve(&p).unwrap();
    for (c, sigma) in [([0.2, -0.1, 0.5], 0.7), ([0.0, 0.0, 1.5], 1.0)] {
        let phi = gaussian_test(c, sigma);
        let wi = weak_identities(&p, &coeffs, &phi, norm(c) + 12.0 * sigma, 96);
        assert!(wi.k_error <= 1e-3, "{wi:?}");
        assert!(wi.l_error <= 1e-3, "{wi:?}");
        let phi0 = (-dot(c, c) / (2.0 * sigma * sigma)).exp();
        let brute = brute_k_pairing(&p, c, sigma);
        assert!((brute - phi0).abs() <= 2e-3 * phi0.max(1e-3), "brute {brute} vs {phi0}");
        assert_relative_eq!(wi.k_ratio, 1.0, epsilon = 1e-3);
    }
}

#[test]
fn doubled_mass_doubles_the_pairing() {
    let p = KernelProfile::with_mass(cone(), 24, 48, 2.0);
    let coeffs = MomentCoefficients::solve(&p).unwrap();
    let phi = gaussian_test([0.0, 0.0, 1.5], 1.0);
    let wi = weak_identities(&p, &coeffs, &phi, 14.0, 96);
    assert_relative_eq!(wi.k_ratio, 2.0, epsilon = 1e-3);
    // errors are relative to sup φ = 1, and φ(0) = e^{-9/8}
    assert_relative_eq!(wi.k_error, (-1.125f64).exp(), max_relative = 1e-2);
}

#[test]
fn weak_identity_for_a_cone_bump() {
    let p = profile();
    let coeffs = MomentCoefficients::solve(&p).unwrap();
    let phi = bump_test([0.0, 0.0, 2.0], 1.6 * 1.2f64.sin());
    let wi = weak_identities(&p, &coeffs, &phi, 6.0, 128);
    // φ(0) = 0 here, so the errors are relative to sup φ
    assert!(wi.k_error <= 1e-3 && wi.l_error <= 1e-3, "{wi:?}");
}

#[test]
fn outgoing_examples() {
    let c = cone();
    let x = [0.1, 0.0, 1.0];
    let sec = 1.0 / c.theta.cos();
    let y = [0.2, 0.1, 1.0].map(|v| v * sec * norm(x) / norm([0.2, 0.1, 1.0]));
    assert!(outgoing_check(&c, x, y));
    assert!(!c.contains(sub3(x, y)));
    assert_eq!(eval_k(&profile(), sub3(x, y)).unwrap(), [0.0; 6]);
    assert!(!outgoing_check(&c, x, x));
}

#[test]
fn counterexample_configuration() {
    let (c, x, y) = counterexample_pair();
    assert!(c.contains(x) && c.contains(y));
    assert!(!outgoing_check(&c, x, y));
    assert!(c.contains(sub3(x, y)));
    // sin(α/2) > cos θ
    assert!((0.45f64).sin() > c.theta.cos());
}

#[test]
fn cone_exit_lands_on_the_boundary() {
    let c = cone();
    let x = [0.3, 0.1, 2.0];
    for w in [[0.0, 0.0, 1.0], [0.5, 0.0, 0.866], [-0.2, 0.4, 0.9]] {
        let w = w.map(|v| v / norm(w));
        let t = cone_exit(&c, x, w);
        let y = [x[0] - t * w[0], x[1] - t * w[1], x[2] - t * w[2]];
        let ang = (dot(y, c.axis) / norm(y)).acos();
        assert!(norm(y) < 1e-9 || (ang - c.theta).abs() < 1e-7, "{ang}");
    }
}

#[test]
fn ray_panels_tile_the_interval() {
    let cfg = RayConfig::from_points(96);
    let x = [0.0, 0.0, 5.0];
    let w = [0.6f64.sin(), 0.0, 0.6f64.cos()];
    let panels = ray_panels(&cfg, x, w, 9.0);
    assert_eq!(panels[0].0, 0.0);
    assert!((panels.last().unwrap().1 - 9.0).abs() < 1e-12);
    for p in panels.windows(2) {
        assert!((p[0].1 - p[1].0).abs() < 1e-12);
    }
}

#[test]
fn graded_rule_integrates_the_cap() {
    let c = cone();
    for r in [10.0, 1e3, 1e6] {
        let rule = graded_polar_rule(&c, r, 0.5, 8);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, c.theta, max_relative = 1e-12);
        let area: f64 = rule.iter().map(|(u, w)| w * u.sin()).sum();
        assert_relative_eq!(area, 1.0 - c.theta.cos(), max_relative = 1e-12);
    }
}

#[test]
fn axis_convolution_matches_full_sphere_quadrature() {
    let p = profile();
    let src = |y: [f64; 3]| {
        let d = [y[0], y[1], y[2] - 1.5];
        if p.cone.contains(y) { (-dot(d, d) / 0.5).exp() * p.chi(y.map(|v| v / norm(y).max(1e-300))) } else { 0.0 }
    };
    let ray = RayConfig::from_points(192);
    let r = 3.0;
    let fast = apply_k_on_axis(&p, &src, r, &ray);
    // oracle: the generic point evaluation on a fine cap rule
    let fine = KernelProfile::new(cone(), 96, 128);
    let coeffs = MomentCoefficients::solve(&fine).unwrap();
    let s = |y: [f64; 3]| (src(y), [0.0; 3]);
    let (slow, _) = apply_s_point(&fine, &coeffs, &s, [0.0, 0.0, r], &ray);
    let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..6 {
        assert!((fast[k] - slow[k]).abs() < 1e-4 * scale, "{k}: {} vs {}", fast[k], slow[k]);
    }
    // off-diagonal entries vanish by symmetry
    assert!(fast[1].abs() < 1e-12 * scale && fast[2].abs() < 1e-12 * scale && fast[4].abs() < 1e-12 * scale);
}

#[test]
fn point_solution_vanishes_outside_the_cone() {
    let p = profile();
    let coeffs = MomentCoefficients::solve(&p).unwrap();
    let s = |y: [f64; 3]| (1.0 + y[2], [y[0], 1.0, 0.0]);
    let ray = RayConfig::from_points(32);
    assert_eq!(apply_s_point(&p, &coeffs, &s, [0.0, 0.0, -2.0], &ray), ([0.0; 6], [0.0; 6]));
    assert_eq!(apply_s_point(&p, &coeffs, &s, [3.0, 0.0, 0.5], &ray), ([0.0; 6], [0.0; 6]));
    let zero = |_: [f64; 3]| (0.0, [0.0; 3]);
    assert_eq!(apply_s_point(&p, &coeffs, &zero, [0.0, 0.0, 2.0], &ray), ([0.0; 6], [0.0; 6]));
}

#[test]
fn gauss_interval_is_exact_for_cubics() {
    let rule = gauss_interval(2, -1.0, 3.0);
    let v: f64 = rule.iter().map(|(x, w)| w * x.powi(3)).sum();
    assert_relative_eq!(v, (81.0 - 1.0) / 4.0, epsilon = 1e-12);
}

proptest! {
    #[test]
    fn kernel_homogeneity(y in prop::array::uniform3(-3.0f64..3.0), lam in 0.01f64..100.0) {
        prop_assume!(norm(y) > 1e-3);
        let p = profile();
        let c = MomentCoefficients::solve(&p).unwrap();
        let ys = y.map(|v| lam * v);
        let (k1, k2) = (eval_k(&p, y).unwrap(), eval_k(&p, ys).unwrap());
        let (l1, l2) = (eval_lker(&p, &c, 0, y).unwrap(), eval_lker(&p, &c, 0, ys).unwrap());
        let sk = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sl = l1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..6 {
            prop_assert!((k2[i] * lam - k1[i]).abs() <= 1e-12 * sk);
            prop_assert!((l2[i] * lam * lam - l1[i]).abs() <= 1e-12 * sl);
        }
    }

    #[test]
    fn outgoing_pairs_give_zero_kernel(
        ux in 0.0f64..1.2, px in 0.0f64..6.3, rx in 0.01f64..10.0,
        uy in 0.0f64..1.2, py in 0.0f64..6.3, stretch in 1.0f64..5.0,
    ) {
        let c = cone();
        let dir = |u: f64, ph: f64| [u.sin() * ph.cos(), u.sin() * ph.sin(), u.cos()];
        let x = dir(ux, px).map(|v| v * rx);
        let y = dir(uy, py).map(|v| v * rx * stretch / c.theta.cos());
        prop_assert!(outgoing_check(&c, x, y));
        let d = sub3(x, y);
        prop_assert!(!c.contains(d));
        prop_assert_eq!(eval_k(&profile(), d).unwrap(), [0.0; 6]);
    }
}
