use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flagf::report::{
    cmd_classify, cmd_sweep, cmd_verify, exit_code, parse_number, parse_points, render_classify,
    render_sweep, render_verify, write_atomic, OutputFormat, RunConfig, VerifyReport,
};
use flagf::FlagError;

#[derive(Parser)]
#[command(name = "flagf", version, about = "Canonical f-structures on SO(n)/SO(2)xSO(n-3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite for one space.
    Verify(Common),
    /// Class memberships of one f-structure at one (s, t).
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "f")]
        structure: String,
        #[arg(long, value_parser = number)]
        s: f64,
        #[arg(long, value_parser = number)]
        t: f64,
    },
    /// Sweep every f-structure over an (s, t) grid and write one report each.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m_blocks: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.25, value_parser = number)]
    grid_min: f64,
    #[arg(long, default_value_t = 3.0, value_parser = number)]
    grid_max: f64,
    #[arg(long, default_value_t = 0.25, value_parser = number)]
    grid_step: f64,
    /// Extra grid points as `s,t;s,t`; fractions like 4/3 are accepted.
    #[arg(long, default_value = "1,1;1,4/3")]
    extra_points: String,
    #[arg(long, default_value = "text", value_parser = format)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = number)]
    kappa: Option<f64>,
}

fn number(s: &str) -> Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

fn format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: FlagError| e.to_string())
}

impl Common {
    fn config(&self) -> flagf::Result<RunConfig> {
        Ok(RunConfig {
            n: self.n,
            m_blocks: self.m_blocks,
            k: self.k,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            grid_step: self.grid_step,
            extra_points: parse_points(&self.extra_points)?,
            format: self.format,
            out: self.out.clone(),
            seed: self.seed,
            kappa: self.kappa,
        })
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> flagf::Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Verify(common) => {
            let result = common.config().and_then(|c| cmd_verify(&c).map(|r| (c, r)));
            let code = exit_code(&result, |(_, r): &(RunConfig, VerifyReport)| r.passed());
            result.and_then(|(c, r)| {
                emit(&render_verify(&r, c.format)?, c.out.as_ref())?;
                Ok(code)
            })
        }
        Command::Classify { common, structure, s, t } => common.config().and_then(|c| {
            let r = cmd_classify(&c, &structure, s, t)?;
            emit(&render_classify(&r, c.format)?, c.out.as_ref())?;
            Ok(0)
        }),
        Command::Sweep(common) => common.config().and_then(|c| {
            let (reports, paths) = cmd_sweep(&c)?;
            for (r, p) in reports.iter().zip(&paths) {
                if c.format == OutputFormat::Text {
                    print!("{}", render_sweep(r, OutputFormat::Text)?);
                } else {
                    println!("{}: {}", r.structure_id(), r.summary.text);
                }
                println!("wrote {}", p.display());
            }
            let bad = reports.iter().any(|r| r.summary.chain_violations > 0);
            Ok(if bad { 1 } else { 0 })
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code::<()>(&Err(e), |_| true)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()) as u8)
}
