//! Configs are TOML with a default for every key; the resolved form reproduces the run.
//!
//! `cargo run --example config_roundtrip`

use cone_data::config::RunConfig;

pub fn run() -> cone_data::Result<()> {
    let cfg = RunConfig::from_toml("[seed]\ns = 1.5\neps0 = 5e-4\n[grid]\nn = 32\n")?;
    let text = cfg.to_toml();
    println!("{text}");
    assert_eq!(RunConfig::from_toml(&text)?, cfg);

    match RunConfig::from_toml("[grid]\nspacing = 0.1\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("unknown keys are rejected"),
    }
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
