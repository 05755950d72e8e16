//! Apply the grid solution operator `S` to a cone-supported bump and check `P S = I`.
//!
//! `cargo run --example solution_operator`

use cone_data::checks::right_inverse_error;
use cone_data::convolve::{GridSolutionOperator, TableConfig};
use cone_data::grid::{ConeSpec, GridSpec};

pub fn run() -> cone_data::Result<()> {
    let cone = ConeSpec::with_axis([0.0, 0.0, 1.0], 1.2)?;
    let grid = GridSpec::new(32, 6.0)?;
    let table = TableConfig::default();
    let op = GridSolutionOperator::new(&cone, grid, &table)?;
    println!("{} table entries, {} cone points", op.table.len(), op.table.cone_points.len());
    println!("cone points whose past leaves the box: {:.1}%", 100.0 * op.truncated_fraction(&cone));
    let err = right_inverse_error(&cone, grid, 4, &table)?;
    println!("|P S f - f| / |f| = {err:.3e} at n = {}", grid.n);
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
