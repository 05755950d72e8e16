//! Shell increments of `∫ ⟨x⟩^{s'-4} |h0|²`: summable at `s' = s` when `β > 1`, growing at `s' = s + 1`.
//!
//! `cargo run --example sharpness_scan`

use cone_data::config::RunConfig;
use cone_data::diagnostics::sharpness_scan;
use cone_data::seed::log_radii;

pub fn run() -> cone_data::Result<()> {
    let radii = log_radii(1e3, 1e6, 2);
    for (beta, shift) in [(2.0, 0.0), (1.0, 1.0)] {
        let cfg = RunConfig::from_toml(&format!("[weight]\nbeta = [{beta:?}]\n"))?;
        let seed = cfg.seed_spec()?;
        let scan = sharpness_scan(&seed, seed.s + shift, &radii)?;
        println!("beta = {beta}, s' = s + {shift}:");
        for (w, inc) in radii.windows(2).zip(&scan.increments) {
            println!("  [{:.1e}, {:.1e}]  {inc:.4e}", w[0], w[1]);
        }
        println!("  decreasing {}, last/first {:.3e}", scan.strictly_decreasing(), scan.growth());
    }
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
