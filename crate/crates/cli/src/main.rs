use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rel_toa::config::{parse_config, ConfigError, RunConfig};
use rel_toa::presets;
use rel_toa::run::{run, Command, RunError};

#[derive(Parser)]
#[command(name = "rel-toa", version, about = "Relativistic time-of-arrival scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Closed-form vs integral T_c and the momentum-space oracle
    Kernel(Common),
    /// Nyström spectrum of the confined kernel and the modes nearest the target
    Spectrum(Common),
    /// Time evolution of coarse, analytic or Razavi eigenfunctions
    Evolve(Common),
    /// Exact expectation value against t*Q_c and the optimally truncated series
    Expectation(Common),
    /// Quantum correction factor over a (p, sigma) grid
    Qfactor(Common),
    /// Arrival-time distributions of a wavepacket
    Dist(Common),
    /// Distributions of time-translated packets
    Translate(Common),
    /// Run the acceptance criteria
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration document (TOML)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Output directory; overrides output.dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Named scenario: fig1 ... fig9, fig7-compact
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
    preset: Option<String>,
}

fn load(c: &Common) -> Result<RunConfig, RunError> {
    if let Some(name) = &c.preset {
        let (text, _) = presets::preset(name).expect("validated by clap");
        return Ok(parse_config(text)?);
    }
    match &c.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
            Ok(parse_config(&text)?)
        }
        None => Ok(RunConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match &cli.command {
        Sub::Kernel(c) => (Command::Kernel, c),
        Sub::Spectrum(c) => (Command::Spectrum, c),
        Sub::Evolve(c) => (Command::Evolve, c),
        Sub::Expectation(c) => (Command::Expectation, c),
        Sub::Qfactor(c) => (Command::Qfactor, c),
        Sub::Dist(c) => (Command::Dist, c),
        Sub::Translate(c) => (Command::Translate, c),
        Sub::Selftest(c) => (Command::Selftest, c),
    };
    let result = load(common).and_then(|cfg| {
        if let Some(name) = &common.preset {
            let (_, cmds) = presets::preset(name).expect("validated by clap");
            if !cmds.contains(&cmd.name()) {
                eprintln!("note: preset {name} is meant for {}", cmds.join(", "));
            }
        }
        let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
        run(cmd, &cfg, &out)
    });
    match result {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
