//! Sample the cone-supported seed, check its support and read off the axis decay.
//!
//! `cargo run --example seed_profile`

use cone_data::config::RunConfig;
use cone_data::diagnostics::{decay_fit, support_check};
use cone_data::grid::GridSpec;
use cone_data::seed::log_radii;

pub fn run() -> cone_data::Result<()> {
    let cfg = RunConfig::from_toml("[seed]\ns = 1.5\n")?;
    let seed = cfg.seed_spec()?;

    let grid = GridSpec::new(24, cfg.grid.half_width)?;
    let (h0, pi0) = seed.to_grid(grid);
    println!("max |h0| = {:.3e}, max |pi0| = {:.3e}", h0.max_abs(), pi0.max_abs());
    println!("outside the cone: {:e} and {:e}", support_check(&grid, &h0.values, &seed.cone), support_check(&grid, &pi0.values, &seed.cone));

    // |h0| L(r) ~ r^{-(s-1)/2} and |pi0| L(r) ~ r^{-(s+1)/2}
    let radii = log_radii(1e2, 1e6, 4);
    let rows = seed.decay_samples(&radii);
    let rows = &rows;
    let col = |c: usize| move |r: f64| rows.iter().find(|row| row[0] == r).unwrap()[c];
    let sh = decay_fit(col(1), &radii, Some(&seed.weight))?;
    let sp = decay_fit(col(3), &radii, Some(&seed.weight))?;
    println!("h0 slope {sh:.4} (expect {:.4})", -(seed.s - 1.0) / 2.0);
    println!("pi0 slope {sp:.4} (expect {:.4})", -(seed.s + 1.0) / 2.0);
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
