use approx::assert_relative_eq;
use cone_data::weights::*;
use proptest::prelude::*;

#[test]
fn log_weight_closed_form() {
    let w = WeightFunction::log_power(1.0);
    let r = std::f64::consts::E - 2.0;
    assert_relative_eq!(w.value(r), 1.0, epsilon = 1e-12);
    assert_relative_eq!(w.eval(r, 0).unwrap(), 1.0, epsilon = 1e-12);
    // L' = 1/(2+r)
    assert_relative_eq!(w.eval(10.0, 1).unwrap(), 1.0 / 12.0, epsilon = 1e-12);
    // L'' = -1/(2+r)²
    assert_relative_eq!(w.eval(10.0, 2).unwrap(), -1.0 / 144.0, epsilon = 1e-12);
}

#[test]
fn squared_log_at_one_thousand() {
    let w = WeightFunction::log_power(2.0);
    let oracle = 1002f64.ln().powi(2);
    assert_relative_eq!(w.value(1e3), oracle, max_relative = 1e-13);
    assert!((w.value(1e3) - 47.75).abs() < 0.01);
}

#[test]
fn slow_variation_ratio_at_one_million() {
    let w = WeightFunction::log_power(1.0);
    let r: f64 = 1e6;
    let oracle = r / ((2.0 + r) * (2.0 + r).ln());
    assert_relative_eq!(w.log_slope(r), oracle, max_relative = 1e-10);
    assert!((oracle - 7.2e-2).abs() < 1e-3);
}

#[test]
fn derivative_order_is_limited() {
    let w = WeightFunction::log_power(1.0);
    assert!(w.eval_for_order(5.0, 6, 3).is_ok());
    assert!(w.eval_for_order(5.0, 7, 3).is_err());
    assert!(w.eval(5.0, MAX_DERIV + 1).is_err());
    assert!(w.eval(-1.0, 0).is_err());
}

#[test]
fn auto_threshold_satisfies_the_log_floor() {
    for m in 1..=2 {
        let r = auto_r_star(m).unwrap();
        let mut v = 2.0 + r;
        for _ in 0..m {
            v = v.ln();
        }
        assert!(v >= 2.0 - 1e-9, "m = {m}: {v}");
    }
    assert_eq!(auto_r_star(1).unwrap().round(), (2f64.exp() - 2.0).max(2.0).round());
    assert!(auto_r_star(4).is_err());
}

#[test]
fn log_weight_is_admissible() {
    let rep = WeightFunction::log_power(1.0).check_admissibility(3, &[0.25, 0.5]);
    assert!(rep.pass(), "{:?}", rep.violations());
}

#[test]
fn constant_weight_fails_convergence() {
    let rep = WeightFunction::constant().check_admissibility(3, &[0.5]);
    assert!(!rep.convergence.pass);
    assert!(rep.violations().iter().any(|v| v.contains("convergence")));
}

#[test]
fn quarter_power_log_fails_convergence() {
    let w = WeightFunction::iterated_log(vec![0.25], 1, auto_r_star(1).unwrap(), 30.0);
    // β ≤ 1/2 is also rejected by validation
    assert!(w.validate().is_err());
    let rep = w.check_admissibility(3, &[0.5]);
    assert!(!rep.convergence.pass, "{}", rep.convergence.detail);
    // oracle: ∫ dr / (r log(2+r)^{1/2}) over a decade grows with r
    let decade = |k: i32| {
        let (a, b) = (10f64.powi(k).ln(), 10f64.powi(k + 1).ln());
        let n = 2000;
        (0..n)
            .map(|i| {
                let u = a + (b - a) * (i as f64 + 0.5) / n as f64;
                (b - a) / n as f64 / (2.0 + u.exp()).ln().sqrt()
            })
            .sum::<f64>()
    };
    // increments shrink too slowly to be summable: ratio of consecutive decades tends to 1
    assert!(decade(8) / decade(7) > 0.9);
}

#[test]
fn validation_rules() {
    let rs = auto_r_star(2).unwrap();
    assert!(WeightFunction::iterated_log(vec![0.5, 1.0], 2, rs, rs).validate().is_ok());
    assert!(WeightFunction::iterated_log(vec![0.7, 1.0], 2, rs, rs).validate().is_err());
    assert!(WeightFunction::iterated_log(vec![1.0], 2, 10.0, 30.0).validate().is_err());
    assert!(WeightFunction::iterated_log(vec![1.0, 1.0], 1, 10.0, 30.0).validate().is_err());
}

#[test]
fn fit_slope_on_a_line() {
    let x = [0.0, 1.0, 2.0, 3.0];
    let y: Vec<f64> = x.iter().map(|v| 2.5 - 0.75 * v).collect();
    assert_relative_eq!(fit_slope(&x, &y), -0.75, epsilon = 1e-14);
}

proptest! {
    #[test]
    fn weight_is_nondecreasing(a in 0.0f64..1e8, b in 0.0f64..1e8, beta in 0.6f64..3.0) {
        let w = WeightFunction::log_power(beta);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(w.value(hi) >= w.value(lo));
        prop_assert!(w.value(lo) > 0.0);
    }

    #[test]
    fn nested_weight_is_nondecreasing(a in 0.0f64..1e9, b in 0.0f64..1e9, beta in 0.6f64..2.0) {
        let rs = auto_r_star(2).unwrap();
        let w = WeightFunction::iterated_log(vec![0.5, beta], 2, rs, rs);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(w.value(hi) >= w.value(lo) * (1.0 - 1e-14));
        prop_assert!(w.value(lo) > 0.0);
    }
}
