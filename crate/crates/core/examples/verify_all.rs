//! The full verification suite on the default configuration. Takes a few minutes.
//!
//! `cargo run --example verify_all`

use cone_data::checks::run_all;
use cone_data::config::RunConfig;

pub fn run() -> cone_data::Result<()> {
    let cfg = RunConfig::from_toml("")?;
    let list = run_all(&cfg, |c| println!("{}", c.line()))?;
    let failed = list.iter().filter(|c| !c.pass).count();
    println!("{} of {} checks pass", list.len() - failed, list.len());
    Ok(())
}

fn main() -> cone_data::Result<()> {
    run()
}
