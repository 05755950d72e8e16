//! Decay of the seed and of the first correction `K ∗ Φ_H(h0, pi0)` along the axis.
//!
//! `cargo run --example decay_fit`

use cone_data::checks::first_correction_on_axis;
use cone_data::config::RunConfig;
use cone_data::diagnostics::decay_fit;
use cone_data::seed::log_radii;

pub fn run() -> cone_data::Result<()> {
    let cfg = RunConfig::from_toml("[seed]\ns = 1.5\n")?;
    let seed = cfg.seed_spec()?;
    let radii = log_radii(1e2, 1e6, 2);
    let h1 = first_correction_on_axis(&cfg, &seed, &radii)?;
    let h0: Vec<f64> = seed.decay_samples(&radii).iter().map(|r| r[1]).collect();
    for (i, r) in radii.iter().enumerate() {
        println!("r = {r:9.3e}  |h0| = {:.4e}  |h1| = {:.4e}", h0[i], h1[i]);
    }
    let at = |v: &[f64]| {
        let v = v.to_vec();
        let radii = radii.clone();
        move |r: f64| v[radii.iter().position(|&x| x == r).unwrap()]
    };
    let s0 = decay_fit(at(&h0), &radii, Some(&seed.weight))?;
    let s1 = decay_fit(at(&h1), &radii, Some(&seed.weight))?;
    println!("slopes after multiplying by L: h0 {s0:.3}, h1 {s1:.3}, gain {:.3}", s0 - s1);
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
