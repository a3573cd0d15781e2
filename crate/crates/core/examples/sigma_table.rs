//! Run the sigma-table experiment from a configuration file and print it as CSV.

use cvteleport::experiments::{run_experiment, ExperimentConfig};

fn main() -> cvteleport::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/sigma_table.toml");
    let (cfg, table) = run_experiment(&ExperimentConfig::from_path(path.as_ref())?)?;
    print!("{}", table.render(&cfg));
    Ok(())
}
