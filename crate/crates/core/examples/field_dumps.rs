//! Write and read CIDF1 field dumps: a one-line ASCII header, then little-endian f64.
//!
//! `cargo run --example field_dumps`

use cone_data::config::RunConfig;
use cone_data::grid::{load_tensor, save_tensor, GridSpec};

pub fn run() -> cone_data::Result<()> {
    let cfg = RunConfig::from_toml("")?;
    let grid = GridSpec::new(16, cfg.grid.half_width)?;
    let (h0, _) = cfg.seed_spec()?.to_grid(grid);
    let path = std::env::temp_dir().join("cone_data_h0_example.cidf");
    save_tensor(&path, &h0)?;
    let bytes = std::fs::read(&path)?;
    let header = bytes.split(|&b| b == b'\n').next().unwrap();
    println!("{} bytes, header {:?}", bytes.len(), String::from_utf8_lossy(header));
    let back = load_tensor(&path)?;
    println!("round trip exact: {}", back == h0);
    std::fs::remove_file(&path)?;
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
