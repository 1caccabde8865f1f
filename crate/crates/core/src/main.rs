use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cortexk::cli::{preset_names, run, RunConfig};
use cortexk::Error;

/// Connectivity kernels of receptive-profile banks: computation,
/// propagation and the bundled experiments.
#[derive(Debug, Parser)]
#[command(name = "cortexk", version)]
struct Args {
    /// Command to run (kernel, propagate, pinwheel, endstop, spatiotemporal,
    /// lift-evolve, learned); overrides the `command` key.
    command: Option<String>,
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter set applied before the config file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, env = "CORTEXK_THREADS")]
    threads: Option<usize>,
    /// Seed for every random draw; overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

fn resolve(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = match &args.preset {
        Some(p) => RunConfig::preset(p)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &args.config {
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
    }
    for pair in &args.set {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = args.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(c) = &args.command {
        cfg.set("command", c)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_presets {
        preset_names().for_each(|p| println!("{p}"));
        return ExitCode::SUCCESS;
    }
    let outcome = resolve(&args).and_then(|cfg| {
        if let Some(n) = args.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        }
        run(&cfg, &args.out)
    });
    match outcome {
        Ok(summary) => {
            print!("{}", summary.report);
            println!("wrote {} files to {}", summary.files.len() + 1, summary.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
