use approx::assert_relative_eq;
use cone_data::config::RunConfig;
use cone_data::constraints::*;
use cone_data::grid::{dot, norm, GridSpec, ScalarField, SymTensorField};

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn vec_l2(v: &[[f64; 3]]) -> f64 {
    v.iter().map(|x| dot(*x, *x)).sum::<f64>().sqrt()
}

/// Smooth compactly concentrated test data of unit size.
fn smooth_hp(grid: GridSpec) -> HPiData {
    let bump = |x: [f64; 3], c: [f64; 3]| (-(dot([x[0] - c[0], x[1] - c[1], x[2] - c[2]], [x[0] - c[0], x[1] - c[1], x[2] - c[2]]))).exp();
    let h = SymTensorField::from_fn(grid, |x| {
        let b = bump(x, [0.3, -0.2, 0.1]);
        [b, 0.5 * b * x[1], 0.2 * b, -0.7 * b, 0.3 * b * x[0], 0.4 * b]
    });
    let p = SymTensorField::from_fn(grid, |x| {
        let b = bump(x, [-0.2, 0.1, 0.3]);
        [0.3 * b, -0.2 * b, 0.1 * b * x[2], 0.6 * b, 0.2 * b, -0.5 * b]
    });
    HPiData { h, p }
}

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, 4.0).unwrap()
}

#[test]
fn flat_data_maps_to_zero() {
    let g = grid(8);
    let flat = SymTensorField::from_fn(g, |_| [1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
    let md = MetricData { g: flat, k: SymTensorField::zeros(g) };
    let hp = to_hpi(&md);
    assert_eq!(hp, HPiData::zeros(g));
    let (h, m) = constraints(&md, 4).unwrap();
    assert!(h.max_abs() < 1e-12);
    assert!(vec_l2(&m.values) < 1e-12);
    let (ph, pm) = apply_p(&HPiData::zeros(g), 4).unwrap();
    assert_eq!(ph.max_abs(), 0.0);
    assert_eq!(vec_l2(&pm.values), 0.0);
    let (fh, fm) = apply_phi(&HPiData::zeros(g), 4).unwrap();
    assert_eq!(fh.max_abs(), 0.0);
    assert_eq!(vec_l2(&fm.values), 0.0);
}

#[test]
fn diagonal_metric_substitution() {
    // g = diag(1+a, 1, 1): tr(g - δ) = a, so h₁₁ = 0 and h₂₂ = h₃₃ = -a
    let g = grid(8);
    let a = 0.125;
    let md = MetricData { g: SymTensorField::from_fn(g, |_| [1.0 + a, 0.0, 0.0, 1.0, 0.0, 1.0]), k: SymTensorField::zeros(g) };
    let hp = to_hpi(&md);
    assert_eq!(hp.h.values[0], [0.0, 0.0, 0.0, -a, 0.0, -a]);
    let back = reconstruct_gk(&hp).unwrap();
    assert_eq!(back, md);
}

#[test]
fn round_trip_to_machine_precision() {
    let g = grid(10);
    let hp = smooth_hp(g).scale(0.1);
    let md = reconstruct_gk(&hp).unwrap();
    let back = to_hpi(&md);
    for (a, b) in back.h.values.iter().zip(&hp.h.values).chain(back.p.values.iter().zip(&hp.p.values)) {
        for k in 0..6 {
            assert!((a[k] - b[k]).abs() < 1e-15);
        }
    }
}

#[test]
fn large_data_is_rejected_as_not_positive() {
    let g = grid(8);
    let hp = HPiData { h: SymTensorField::from_fn(g, |_| [-3.0, 0.0, 0.0, 0.0, 0.0, 0.0]), p: SymTensorField::zeros(g) };
    assert!(matches!(reconstruct_gk(&hp), Err(cone_data::Error::NotPositive { .. })));
}

fn conformal(m: f64, n: usize) -> (GridSpec, MetricData) {
    let g = GridSpec::new(n, 7.0).unwrap();
    let md = MetricData {
        g: SymTensorField::from_fn(g, |x| {
            let psi4 = (1.0 + m / (2.0 * norm(x).max(1e-3))).powi(4);
            [psi4, 0.0, 0.0, psi4, 0.0, psi4]
        }),
        k: SymTensorField::zeros(g),
    };
    (g, md)
}

#[test]
fn schwarzschild_slice_is_scalar_flat_at_stencil_order() {
    let err = |n: usize| {
        let (g, md) = conformal(0.01, n);
        let h = hamiltonian_constraint(&md, 4).unwrap();
        (0..g.len())
            .filter(|&i| (2.0..=6.0).contains(&norm(g.point(i))))
            .map(|i| h.values[i].abs())
            .fold(0.0, f64::max)
    };
    let (c, f) = (err(32), err(64));
    assert!(c < 1e-4, "{c}");
    assert!(c / f > 10.0, "{c} {f}");
}

#[test]
fn pure_trace_perturbation_matches_conformal_formula() {
    // g = (1 + εφ) δ = ψ⁴ δ has R = -8 ψ⁻⁵ Δψ
    let eps = 0.01;
    let phi = |x: [f64; 3]| (-0.5 * dot(x, x)).exp();
    let g = GridSpec::new(48, 5.0).unwrap();
    let md = MetricData {
        g: SymTensorField::from_fn(g, |x| {
            let v = 1.0 + eps * phi(x);
            [v, 0.0, 0.0, v, 0.0, v]
        }),
        k: SymTensorField::zeros(g),
    };
    let r = hamiltonian_constraint(&md, 4).unwrap();
    // ψ = (1 + εφ)^{1/4}; Δψ by the chain rule with ∇φ = -xφ, Δφ = (|x|² - 3)φ
    let exact = |x: [f64; 3]| {
        let (f, r2) = (phi(x), dot(x, x));
        let u = 1.0 + eps * f;
        let grad2 = eps * eps * f * f * r2;
        let lap_u = eps * (r2 - 3.0) * f;
        let lap_psi = 0.25 * u.powf(-0.75) * lap_u - 0.1875 * u.powf(-1.75) * grad2;
        -8.0 * u.powf(-1.25) * lap_psi
    };
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in (0..g.len()).filter(|&i| g.is_interior(i, 4)) {
        let x = g.point(i);
        worst = worst.max((r.values[i] - exact(x)).abs());
        scale = scale.max(exact(x).abs());
    }
    assert!(worst < 1e-3 * scale, "{worst} vs {scale}");
    // and the linear part -2εΔφ is off by O(ε²) only
    let lin = |x: [f64; 3]| -2.0 * eps * (dot(x, x) - 3.0) * phi(x);
    let x0 = [0.0; 3];
    assert!((exact(x0) - lin(x0)).abs() < 20.0 * eps * eps);
}

#[test]
fn momentum_of_flat_metric_is_the_divergence() {
    let cfg = RunConfig::default().resolved().unwrap();
    let g = GridSpec::new(24, cfg.grid.half_width).unwrap();
    let (_, p0) = cfg.seed_spec().unwrap().to_grid(g);
    let hp = HPiData { h: SymTensorField::zeros(g), p: p0 };
    let md = reconstruct_gk(&hp).unwrap();
    let m = momentum_constraint(&md, 4).unwrap();
    let (_, div) = apply_p(&hp, 4).unwrap();
    for (a, b) in m.values.iter().zip(&div.values) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-15 + 1e-12 * b[k].abs());
        }
    }
}

#[test]
fn linearization_identity_is_second_order() {
    let g = grid(24);
    let hp = smooth_hp(g);
    let (ph, pm) = apply_p(&hp, 4).unwrap();
    let defect = |t: f64| {
        let md = reconstruct_gk(&hp.scale(t)).unwrap();
        let (h, m) = constraints(&md, 4).unwrap();
        let dh: Vec<f64> = h.values.iter().zip(&ph.values).map(|(a, b)| a - t * b).collect();
        let dm: Vec<[f64; 3]> = m.values.iter().zip(&pm.values).map(|(a, b)| [a[0] - t * b[0], a[1] - t * b[1], a[2] - t * b[2]]).collect();
        (l2(&dh).powi(2) + vec_l2(&dm).powi(2)).sqrt()
    };
    let (a, b, c) = (defect(1e-2), defect(5e-3), defect(2.5e-3));
    assert_relative_eq!(a / b, 4.0, max_relative = 0.05);
    assert_relative_eq!(b / c, 4.0, max_relative = 0.05);
}

#[test]
fn phi_is_quadratic() {
    let g = grid(24);
    let hp = smooth_hp(g).scale(1e-2);
    let size = |t: f64| {
        let (h, m) = apply_phi(&hp.scale(t), 4).unwrap();
        (l2(&h.values).powi(2) + vec_l2(&m.values).powi(2)).sqrt() / (t * t)
    };
    let (a, b, c) = (size(1.0), size(0.5), size(0.25));
    assert_relative_eq!(a, b, max_relative = 0.05);
    assert_relative_eq!(b, c, max_relative = 0.05);
}

#[test]
fn p_minus_phi_is_the_constraint_map() {
    let g = grid(16);
    let hp = smooth_hp(g).scale(0.05);
    let (ph, pm) = apply_p(&hp, 4).unwrap();
    let (fh, fm) = apply_phi(&hp, 4).unwrap();
    let pts = point_data_fd(&hp, 4).unwrap();
    for (i, d) in pts.iter().enumerate() {
        let (ch, cm) = d.constraints().unwrap();
        assert!((ph.values[i] - fh.values[i] - ch).abs() < 1e-14);
        for k in 0..3 {
            assert!((pm.values[i][k] - fm.values[i][k] - cm[k]).abs() < 1e-14);
        }
    }
    // the metric-form evaluation agrees up to discretization
    let (h, _) = constraints(&reconstruct_gk(&hp).unwrap(), 4).unwrap();
    let diff: Vec<f64> = (0..g.len()).filter(|&i| g.is_interior(i, 3)).map(|i| h.values[i] - (ph.values[i] - fh.values[i])).collect();
    let scale: Vec<f64> = (0..g.len()).filter(|&i| g.is_interior(i, 3)).map(|i| h.values[i]).collect();
    assert!(l2(&diff) < 0.05 * l2(&scale), "{} {}", l2(&diff), l2(&scale));
}

#[test]
fn random_data_momentum_is_divergence_to_second_order() {
    let g = grid(20);
    let hp = smooth_hp(g);
    let (_, div) = apply_p(&hp, 4).unwrap();
    let defect = |a: f64| {
        let m = momentum_constraint(&reconstruct_gk(&hp.scale(a)).unwrap(), 4).unwrap();
        let d: Vec<[f64; 3]> = m.values.iter().zip(&div.values).map(|(x, y)| [x[0] - a * y[0], x[1] - a * y[1], x[2] - a * y[2]]).collect();
        vec_l2(&d)
    };
    assert_relative_eq!(defect(1e-2) / defect(5e-3), 4.0, max_relative = 0.05);
}

#[test]
fn residual_norms_include_cell_volume() {
    let g = GridSpec::new(9, 2.0).unwrap();
    let h = ScalarField::from_fn(g, |_| 2.0);
    let m = VectorField { grid: g, values: vec![[0.0, 3.0, 4.0]; g.len()] };
    let (a, b) = residual_norms(&h, &m, |_| true);
    let vol = 0.5f64.powi(3);
    assert_relative_eq!(a, (vol * 729.0 * 4.0).sqrt(), max_relative = 1e-12);
    assert_relative_eq!(b, (vol * 729.0 * 25.0).sqrt(), max_relative = 1e-12);
}
