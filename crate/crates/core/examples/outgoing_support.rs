//! The kernels vanish on pairs with `|y| ≥ sec θ |x|`; below that constant they need not.
//!
//! `cargo run --example outgoing_support`

use cone_data::checks::counterexample_pair;
use cone_data::grid::sub3;
use cone_data::kernels::{eval_k, outgoing_check, KernelProfile};

pub fn run() -> cone_data::Result<()> {
    let (cone, x, y) = counterexample_pair();
    let profile = KernelProfile::new(cone, 24, 48);
    println!("x = {x:?}, y = {y:?}");
    println!("|y| ≥ sec θ |x|: {}", outgoing_check(&cone, x, y));
    println!("x - y in the cone: {}", cone.contains(sub3(x, y)));
    println!("K(x - y)_33 = {:.4e}", eval_k(&profile, sub3(x, y))?[5]);

    // stretch y onto the admissible side
    let sec = 1.0 / cone.theta.cos();
    let far = y.map(|v| v * sec / 1.05);
    println!("stretched: check {}, K(x - y) = {:?}", outgoing_check(&cone, x, far), eval_k(&profile, sub3(x, far))?);
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
