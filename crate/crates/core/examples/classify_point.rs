//! Class membership of one f-structure at one metric, with the basis pair
//! that violates each failing condition most.
//!
//! Usage: `cargo run --example classify_point -- [n] [k] [id] [s] [t]`
//! (defaults 5 6 f1 1 4/3).

use flagf::report::{cmd_classify, parse_number, render_classify, OutputFormat, RunConfig};

fn main() -> flagf::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.into());
    let n: usize = arg(0, "5").parse().unwrap_or(5);
    let k: usize = arg(1, "6").parse().unwrap_or(6);
    let id = arg(2, "f1");
    let s = parse_number(&arg(3, "1"))?;
    let t = parse_number(&arg(4, "4/3"))?;

    let report = cmd_classify(&RunConfig::new(n, k), &id, s, t)?;
    print!("{}", render_classify(&report, OutputFormat::Text)?);
    println!("KILL ⇒ NK ⇒ G1 holds: {}", report.chain_holds());
    Ok(())
}
