//! Sweeps every f-structure over the default grid and writes JSON reports,
//! then repeats the run and confirms the files are byte-identical.
//!
//! Usage: `cargo run --example sweep_report -- [out_dir]`.

use flagf::report::{cmd_sweep, OutputFormat, RunConfig};

fn main() -> flagf::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("flagf-sweep"));
    let mut config = RunConfig::new(5, 6);
    config.format = OutputFormat::Json;
    config.out = Some(dir.clone());

    let (reports, paths) = cmd_sweep(&config)?;
    for (r, p) in reports.iter().zip(&paths) {
        println!("{}: {}  -> {}", r.structure_id(), r.summary.text, p.display());
    }
    let first: Vec<Vec<u8>> = paths.iter().map(std::fs::read).collect::<Result<_, _>>()?;
    let (_, again) = cmd_sweep(&config)?;
    let second: Vec<Vec<u8>> = again.iter().map(std::fs::read).collect::<Result<_, _>>()?;
    println!("byte-identical on rerun: {}", first == second);
    Ok(())
}
