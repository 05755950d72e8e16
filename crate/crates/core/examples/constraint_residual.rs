//! Constraints of explicit data: Schwarzschild in isotropic coordinates is a vacuum
//! time-symmetric slice, so away from the center both constraints vanish up to truncation.
//!
//! `cargo run --example constraint_residual`

use cone_data::constraints::{constraints, residual_norms, MetricData};
use cone_data::grid::{norm, GridSpec, SymTensorField};

pub fn run() -> cone_data::Result<()> {
    let m = 0.5;
    for n in [24, 48] {
        let grid = GridSpec::new(n, 6.0)?;
        // g = ψ⁴ δ with ψ = 1 + m / 2r; even n keeps r = 0 off the grid
        let g = SymTensorField::from_fn(grid, |x| {
            let psi = 1.0 + m / (2.0 * norm(x));
            let p4 = psi.powi(4);
            [p4, 0.0, 0.0, p4, 0.0, p4]
        });
        let md = MetricData { k: SymTensorField::zeros(grid), g };
        let (h, mom) = constraints(&md, 4)?;
        let (nh, nm) = residual_norms(&h, &mom, |i| grid.is_interior(i, 4) && norm(grid.point(i)) > 2.0);
        println!("n = {n}: |H| = {nh:.3e}, |M| = {nm:.3e}");
    }
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
