use approx::assert_relative_eq;
use cone_data::checks::right_inverse_error;
use cone_data::config::RunConfig;
use cone_data::constraints::{HPiData, VectorField};
use cone_data::convolve::{cardinal, cone_distance, GridSolutionOperator, TableConfig};
use cone_data::diagnostics::support_check;
use cone_data::grid::{ConeSpec, GridSpec, ScalarField};
use cone_data::solver::*;
use cone_data::Error;

const N: usize = 20;

fn problem(eps0: f64) -> FixedPointProblem {
    let mut c = RunConfig::default();
    c.seed.eps0 = eps0;
    let c = c.resolved().unwrap();
    let grid = GridSpec::new(N, c.grid.half_width).unwrap();
    FixedPointProblem::new(&c.seed_spec().unwrap(), grid, &c.table_config()).unwrap()
}

fn cfg() -> SolveConfig {
    RunConfig::default().resolved().unwrap().solve_config()
}

#[test]
fn zero_seed_converges_immediately() {
    let p = problem(0.0);
    let st = p.solve(&cfg()).unwrap();
    assert!(st.converged);
    assert_eq!(st.history.len(), 1);
    assert_eq!(st.correction, HPiData::zeros(p.grid));
}

#[test]
fn single_iteration_is_not_converged() {
    let st = problem(1e-3).solve(&SolveConfig { max_iter: 1, ..cfg() }).unwrap();
    assert!(!st.converged);
    assert_eq!(st.history.len(), 1);
    assert!(st.estimate_contraction().is_err());
}

#[test]
fn tight_guard_reports_divergence() {
    let err = problem(1e-2).solve(&SolveConfig { guard: 1e-6, guard_count: 1, ..cfg() }).unwrap_err();
    assert!(matches!(err, Error::Divergence { .. }), "{err}");
}

#[test]
fn tiny_ball_reports_violation() {
    let err = problem(1e-3).solve(&SolveConfig { ball_radius: Some(1e-30), ..cfg() }).unwrap_err();
    assert!(matches!(err, Error::BallViolation { .. }), "{err}");
}

#[test]
fn converged_solution_properties() {
    let p = problem(1e-3);
    let c = cfg();
    let st = p.solve(&c).unwrap();
    assert!(st.converged);
    // history is indexed in order
    for (k, r) in st.history.iter().enumerate() {
        assert_eq!(r.iter, k + 1);
    }
    // fixed-point residual in the product norm
    let (f, fv) = p.phi(&st.correction, c.fd_order).unwrap();
    let again = p.op.apply(&f, &fv);
    let (q, s) = (p.seed.q, p.seed.s);
    let gap = product_norm(&again.sub(&st.correction), q, s, c.fd_order).unwrap();
    let size = product_norm(&st.correction, q, s, c.fd_order).unwrap();
    assert!(gap <= c.tol * size * 10.0, "{gap} vs {size}");
    assert!(size <= st.ball_radius);
    // exact cone support
    assert_eq!(support_check(&p.grid, &st.correction.h.values, &p.seed.cone), 0.0);
    assert_eq!(support_check(&p.grid, &st.correction.p.values, &p.seed.cone), 0.0);
}

#[test]
fn correction_is_quadratic_and_contraction_linear_in_amplitude() {
    let c = cfg();
    let a = problem(2e-3).solve(&c).unwrap();
    let b = problem(1e-3).solve(&c).unwrap();
    let (q, s) = (3, 1.0);
    let na = product_norm(&a.correction, q, s, 4).unwrap();
    let nb = product_norm(&b.correction, q, s, 4).unwrap();
    assert_relative_eq!(na / nb, 4.0, max_relative = 0.2);
    let (ra, rb) = (a.estimate_contraction().unwrap(), b.estimate_contraction().unwrap());
    assert!(ra / rb > 1.4 && ra / rb < 2.8, "{ra} {rb}");
}

#[test]
fn contraction_of_a_constant_map() {
    let recs = [
        IterRecord { iter: 1, update_norm: 1.0, phi_norm: 1.0, ratio: f64::NAN },
        IterRecord { iter: 2, update_norm: 0.0, phi_norm: 1.0, ratio: 0.0 },
    ];
    assert_eq!(estimate_contraction(&recs).unwrap(), 0.0);
}

#[test]
fn config_validation() {
    assert!(SolveConfig { tol: 0.0, ..cfg() }.validate().is_err());
    assert!(SolveConfig { max_iter: 0, ..cfg() }.validate().is_err());
    assert!(SolveConfig { fd_order: 3, ..cfg() }.validate().is_err());
}

#[test]
fn cardinal_function_interpolates() {
    assert_eq!(cardinal(0.0), 1.0);
    for k in 1..4 {
        assert_eq!(cardinal(k as f64), 0.0);
        assert_eq!(cardinal(-(k as f64)), 0.0);
    }
    // partition of unity and exact reproduction of cubics
    for x in [0.1, 0.37, 0.5, 0.93] {
        let nodes = -3i32..=3;
        let sum: f64 = nodes.clone().map(|m| cardinal(x - m as f64)).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-14);
        let cub: f64 = nodes.map(|m| cardinal(x - m as f64) * (m as f64).powi(3)).sum();
        assert_relative_eq!(cub, x * x * x, epsilon = 1e-13);
    }
}

#[test]
fn distance_to_the_cone() {
    let cone = ConeSpec::with_axis([0.0, 0.0, 1.0], 0.5).unwrap();
    assert_eq!(cone_distance(&cone, [0.0, 0.0, 2.0]), 0.0);
    assert_relative_eq!(cone_distance(&cone, [0.0, 0.0, -2.0]), 2.0);
    let p = [1.0f64.sin(), 0.0, 1.0f64.cos()];
    assert_relative_eq!(cone_distance(&cone, p), 0.5f64.sin(), epsilon = 1e-14);
}

#[test]
fn solution_operator_is_supported_in_the_cone_and_linear() {
    let cone = ConeSpec::with_axis([0.0, 0.0, 1.0], 1.2).unwrap();
    let grid = GridSpec::new(16, 6.0).unwrap();
    let op = GridSolutionOperator::new(&cone, grid, &TableConfig::default()).unwrap();
    let zero = op.apply(&ScalarField::zeros(grid), &VectorField::zeros(grid));
    assert_eq!(zero, HPiData::zeros(grid));
    // sources everywhere, including outside the cone
    let f = ScalarField::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + (x[2] - 2.0).powi(2))).exp());
    let fv = VectorField { grid, values: f.values.iter().map(|v| [0.3 * v, -v, 0.5 * v]).collect() };
    let out = op.apply(&f, &fv);
    assert_eq!(support_check(&grid, &out.h.values, &cone), 0.0);
    assert_eq!(support_check(&grid, &out.p.values, &cone), 0.0);
    assert!(out.h.max_abs() > 0.0 && out.p.max_abs() > 0.0);
    // mapping bound proxy: output scales with the input amplitude
    let f2 = ScalarField { grid, values: f.values.iter().map(|v| 3.0 * v).collect() };
    let fv2 = VectorField { grid, values: fv.values.iter().map(|v| v.map(|c| 3.0 * c)).collect() };
    let out2 = op.apply(&f2, &fv2);
    let n1 = product_norm(&out, 3, 1.0, 4).unwrap();
    let n2 = product_norm(&out2, 3, 1.0, 4).unwrap();
    let (s1, s2) = (source_norm(&f, &fv, 3, 1.0, 4).unwrap(), source_norm(&f2, &fv2, 3, 1.0, 4).unwrap());
    assert_relative_eq!(n2 / s2, n1 / s1, max_relative = 1e-10);
}

#[test]
fn right_inverse_improves_under_refinement() {
    let cone = ConeSpec::with_axis([0.0, 0.0, 1.0], 1.2).unwrap();
    let e = |n| right_inverse_error(&cone, GridSpec::new(n, 6.0).unwrap(), 4, &TableConfig::default()).unwrap();
    let (a, b) = (e(20), e(28));
    assert!(b < a, "{a} {b}");
    assert!(b < 0.2, "{b}");
}
