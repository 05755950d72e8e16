//! Solve for the correction `(h1, pi1)` and compare constraint residuals before and after.
//!
//! `cargo run --example fixed_point_solve`

use cone_data::config::RunConfig;
use cone_data::constraints::HPiData;
use cone_data::solver::{combined, FixedPointProblem};

pub fn run() -> cone_data::Result<()> {
    let cfg = RunConfig::from_toml("[grid]\nn = 32\n")?;
    let seed = cfg.seed_spec()?;
    let grid = cfg.grid_spec()?;
    let prob = FixedPointProblem::new(&seed, grid, &cfg.table_config())?;
    let st = prob.solve_with(&cfg.solve_config(), |r| {
        println!("iter {:2}  update {:.3e}  |Phi| {:.3e}  ratio {:.4}", r.iter, r.update_norm, r.phi_norm, r.ratio)
    })?;
    println!("converged: {}, contraction ≈ {:.4}", st.converged, st.estimate_contraction()?);

    let r0 = combined(prob.residual(&HPiData::zeros(grid), 4, 4)?);
    let r1 = combined(prob.residual(&st.correction, 4, 4)?);
    println!("constraint residual: seed {r0:.3e}, seed + correction {r1:.3e} ({:.1}x)", r0 / r1);
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
