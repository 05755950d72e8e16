//! Build the conical kernels and test `∂∂K = δ` and `div L_{e_k} = e_k δ` in weak form.
//!
//! `cargo run --example kernel_identities`

use cone_data::grid::ConeSpec;
use cone_data::kernels::{eval_k, gaussian_test, weak_identities, KernelProfile, MomentCoefficients};

pub fn run() -> cone_data::Result<()> {
    let cone = ConeSpec::with_axis([0.0, 0.0, 1.0], 1.2)?;
    let profile = KernelProfile::new(cone, 24, 48);
    let coeffs = MomentCoefficients::solve(&profile)?;
    println!("discrete mass of chi: {:.15}", profile.total_mass());
    println!("moment residual: {:.2e}", coeffs.residual(&profile));

    // degree -1 homogeneity
    let y = [0.1, -0.2, 1.0];
    let (a, b) = (eval_k(&profile, y)?, eval_k(&profile, y.map(|v| 3.0 * v))?);
    println!("K(3y) / K(y) = {:.12} (expect 1/3)", b[5] / a[5]);

    let phi = gaussian_test([0.2, -0.1, 0.5], 0.7);
    for points in [8, 16, 32, 64] {
        let w = weak_identities(&profile, &coeffs, &phi, 6.2, points);
        println!("ray points {points:3}: K error {:.2e}, L error {:.2e}", w.k_error, w.l_error);
    }
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
