use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use heatsrc::pipeline::{bench_csv, run_bench, run_forward, run_invert};
use heatsrc::{Engine, RunConfig};

/// Heat source reconstruction from final-time measurements.
#[derive(Debug, Parser)]
#[command(name = "heatsrc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the forward problem and write u(T).
    Forward(Common),
    /// Simulate noisy data with the FEM solver and reconstruct the source.
    Invert(Common),
    /// Time CG-FEM against CG-ROM over a list of mesh sizes (h = dt).
    Bench {
        #[command(flatten)]
        common: Common,
        /// Mesh sizes, e.g. `1/32,1/64`.
        #[arg(long, value_delimiter = ',', value_parser = parse_size, default_values = ["1/32", "1/64"])]
        mesh_sizes: Vec<f64>,
        /// Reconstructions per pipeline and mesh; times are averaged.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// Run the rows concurrently (timings become contended).
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    engine: Option<Engine>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mesh size override.
    #[arg(long, value_parser = parse_size)]
    h: Option<f64>,
    /// Time step override.
    #[arg(long, value_parser = parse_size)]
    dt: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(engine) = self.engine {
            cfg.engine = engine;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Accepts `0.03125` or `1/32`.
fn parse_size(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
            let den: f64 = den.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
            num / den
        }
        None => s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?,
    };
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not a positive size"))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forward(common) => {
            let cfg = common.resolve()?;
            let run = run_forward(&cfg)?;
            run.write_to(&cfg.output_dir)
                .with_context(|| format!("writing to {}", cfg.output_dir.display()))?;
            println!("{}", serde_json::to_string_pretty(&run.summary)?);
        }
        Command::Invert(common) => {
            let cfg = common.resolve()?;
            let run = run_invert(&cfg)?;
            run.write_to(&cfg.output_dir)
                .with_context(|| format!("writing to {}", cfg.output_dir.display()))?;
            println!("{}", serde_json::to_string_pretty(&run.metrics)?);
        }
        Command::Bench {
            common,
            mesh_sizes,
            repeat,
            parallel,
        } => {
            if repeat == 0 {
                bail!("--repeat must be at least 1");
            }
            let cfg = common.resolve()?;
            let rows = run_bench(&cfg, &mesh_sizes, repeat, parallel)?;
            let csv = bench_csv(&rows);
            fs::create_dir_all(&cfg.output_dir)
                .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
            fs::write(cfg.output_dir.join("bench.csv"), &csv)?;
            fs::write(cfg.output_dir.join("config.json"), cfg.to_json())?;
            print!("{csv}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse_as_fractions_or_decimals() {
        assert_eq!(parse_size("1/32"), Ok(0.03125));
        assert_eq!(parse_size("0.25"), Ok(0.25));
        assert!(parse_size("0").is_err());
        assert!(parse_size("1/x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["heatsrc", "invert", "--engine", "fem", "--seed", "7", "--h", "1/16"]).unwrap();
        let Command::Invert(common) = cli.command else { panic!() };
        let cfg = common.resolve().unwrap();
        assert_eq!((cfg.engine, cfg.seed, cfg.h), (Engine::Fem, 7, 0.0625));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
