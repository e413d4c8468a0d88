use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use grating_cli::config::{parse_distances, Output, Scenario};
use grating_cli::presets;

#[derive(Parser)]
#[command(name = "grating", version, about = "Wave, Bohmian and straight-line models of grating diffraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Momentum spectrum |c(k)|^2.
    Spectrum(Common),
    /// Intensity profiles |psi|^2 at the target distances.
    Intensity(Common),
    /// Intensity carpet up to the farthest target distance.
    Carpet(Common),
    /// Bohmian trajectories.
    Trajectories(Common),
    /// Bohmian momentum histograms against |c|^2.
    Momentum(Common),
    /// Straight-line arrival probability against |psi|^2.
    MdCompare(Common),
    /// Runs a figure preset with its own outputs.
    Preset {
        /// fig1, fig2, fig3, fig5 or fig6.
        name: String,
        /// Print the preset as a config file instead of running it.
        #[arg(long)]
        print: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file; the fig1 preset when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "n-traj")]
    n_traj: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    /// Distances such as `1.25 LT, 3.9 mm`.
    #[arg(long)]
    y: Option<String>,
}

impl Common {
    fn scenario(&self, base: Option<Scenario>) -> Result<Scenario> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Scenario::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => base.unwrap_or_else(|| presets::preset("fig1").expect("fig1 preset")),
        };
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.n_traj {
            s.n_traj = v;
        }
        if let Some(v) = self.bins {
            s.bins = v;
        }
        if let Some(v) = &self.y {
            s.y_targets = parse_distances(v).map_err(|e| anyhow!("--y: {e}"))?;
        }
        Ok(s)
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (scenario, out) = match cli.command {
        Command::Preset { name, print, common } => {
            let base = presets::preset(&name)
                .ok_or_else(|| anyhow!("unknown preset `{name}` (known: {})", presets::NAMES.join(", ")))?;
            let s = common.scenario(Some(base))?;
            if print {
                print!("{}", s.to_config_string());
                return Ok(());
            }
            (s, common.out)
        }
        Command::Spectrum(c) => with_output(c, Output::Spectrum)?,
        Command::Intensity(c) => with_output(c, Output::Intensity)?,
        Command::Carpet(c) => with_output(c, Output::Carpet)?,
        Command::Trajectories(c) => with_output(c, Output::Trajectories)?,
        Command::Momentum(c) => with_output(c, Output::Momentum)?,
        Command::MdCompare(c) => with_output(c, Output::Md)?,
    };
    let report = grating_cli::run(&scenario, &out)?;
    for (name, digest) in &report.files {
        println!("{}  {}", digest, out.join(name).display());
    }
    println!("manifest  {}", report.manifest.display());
    Ok(())
}

fn with_output(c: Common, output: Output) -> Result<(Scenario, PathBuf)> {
    let mut s = c.scenario(None)?;
    s.outputs = vec![output];
    Ok((s, c.out))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
