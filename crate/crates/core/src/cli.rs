//! Command layer: resolves a [`RunConfig`], runs one experiment and writes
//! its outputs, the resolved configuration and a hash manifest.

mod commands;
mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub use config::{preset_names, RunConfig};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Kernel,
    Propagate,
    Pinwheel,
    Endstop,
    Spatiotemporal,
    LiftEvolve,
    Learned,
}

impl Command {
    pub const ALL: [(&'static str, Command); 7] = [
        ("kernel", Command::Kernel),
        ("propagate", Command::Propagate),
        ("pinwheel", Command::Pinwheel),
        ("endstop", Command::Endstop),
        ("spatiotemporal", Command::Spatiotemporal),
        ("lift-evolve", Command::LiftEvolve),
        ("learned", Command::Learned),
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.iter().find(|(n, _)| *n == name).map(|(_, c)| *c).ok_or_else(|| {
            Error::invalid(format!(
                "unknown command `{name}`; known: {}",
                Self::ALL.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

/// Collects output files and report lines of one run.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    report: String,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new(), report: String::new() })
    }

    /// Path for a new output file, recorded for the manifest.
    fn file(&mut self, name: impl Into<String>) -> PathBuf {
        let name = name.into();
        let path = self.dir.join(&name);
        self.files.push(name);
        path
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.report.push_str(text.as_ref());
        self.report.push('\n');
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    /// Output file names with their SHA-256 digests, in write order.
    pub files: Vec<(String, String)>,
    pub report: String,
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Runs the configured command, writing everything into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let command = Command::parse(cfg.str("command"))?;
    let mut o = Outputs::new(out)?;
    match command {
        Command::Kernel => commands::kernel(cfg, &mut o)?,
        Command::Propagate => commands::propagate(cfg, &mut o)?,
        Command::Pinwheel => commands::pinwheel(cfg, &mut o)?,
        Command::Endstop => commands::endstop(cfg, &mut o)?,
        Command::Spatiotemporal => commands::spatiotemporal(cfg, &mut o)?,
        Command::LiftEvolve => commands::lift_evolve(cfg, &mut o)?,
        Command::Learned => commands::learned(cfg, &mut o)?,
    }
    let report = std::mem::take(&mut o.report);
    fs::write(o.file("report.txt"), &report)?;
    fs::write(o.file("config.txt"), cfg.resolved())?;
    let mut files = Vec::with_capacity(o.files.len());
    let mut manifest = String::new();
    for name in &o.files {
        let digest = sha256_file(&o.dir.join(name))?;
        let _ = writeln!(manifest, "{digest}  {name}");
        files.push((name.clone(), digest));
    }
    fs::write(o.dir.join("manifest.txt"), manifest)?;
    Ok(RunSummary { out_dir: o.dir, files, report })
}
