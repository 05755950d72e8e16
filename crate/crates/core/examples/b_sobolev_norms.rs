//! Weighted b-Sobolev norms on the grid: the embedding into weighted sup norms and the
//! product estimate, on a few random bumps.
//!
//! `cargo run --example b_sobolev_norms`

use cone_data::diagnostics::{b_norm_scalar, bump_family, embedding_check, product_check, BNormSpec};
use cone_data::grid::GridSpec;

pub fn run() -> cone_data::Result<()> {
    let grid = GridSpec::new(32, 6.0)?;
    let bumps = bump_family(7, 4, grid.half_width);
    let fields: Vec<_> = bumps.iter().map(|b| b.sample(grid)).collect();
    for (b, f) in bumps.iter().zip(&fields) {
        let ladder: Vec<String> = (0..=3)
            .map(|k| format!("{:.3e}", b_norm_scalar(f, &BNormSpec::new(k, -1.5)).unwrap()))
            .collect();
        println!(
            "width {:.2}: norms k=0..3 [{}], embedding {:.3e}",
            b.width,
            ladder.join(", "),
            embedding_check(f, &BNormSpec::new(2, -1.5))?
        );
    }
    // the algebra case: δ₁ = δ₂ = -3/2 gives δ₁ + δ₂ + 3/2 = -3/2
    println!("product ratio {:.3e}", product_check(&fields[0], &fields[1], 2, -1.5, -1.5, 4)?);
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
