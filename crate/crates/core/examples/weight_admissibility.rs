//! Iterated-log weights and the proxies for their admissibility conditions.
//!
//! `cargo run --example weight_admissibility`

use cone_data::weights::{auto_r_star, WeightFunction};

pub fn run() -> cone_data::Result<()> {
    for beta in [vec![1.0], vec![2.0], vec![0.5, 1.5]] {
        let r_star = auto_r_star(beta.len())?;
        let w = WeightFunction::iterated_log(beta.clone(), beta.len(), r_star, r_star);
        w.validate()?;
        let report = w.check_admissibility(3, &[0.25, 0.5]);
        println!("beta = {beta:?}, R_star = {r_star:.3}: admissible {}", report.pass());
        for v in report.violations() {
            println!("  violates {v}");
        }
        println!("  L(1e6) = {:.4}, r L'/L at 1e6 = {:.4}", w.value(1e6), w.log_slope(1e6));
    }
    // β = 1/2 at the last level fails the convergence condition
    let w = WeightFunction::log_power(0.5);
    println!("beta = [0.5]: violations {:?}", w.check_admissibility(3, &[0.5]).violations());
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
