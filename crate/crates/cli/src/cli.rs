use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::commands::{self, Report};
use crate::config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "ddpc", version, about = "Data-driven predictive control of descriptor systems")]
pub struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// System file (JSON with E, A, B, C, D).
    #[arg(long, global = true)]
    pub system: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Prediction horizon.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Number of recorded samples.
    #[arg(long = "data-length", global = true)]
    pub data_length: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regularity, structural indices and rank tests of a system.
    Analyze,
    /// Record persistently exciting input/output data.
    Collect,
    /// Check persistency of excitation of recorded inputs.
    CheckPe {
        /// Trajectory CSV.
        data: PathBuf,
        #[arg(long)]
        order: usize,
    },
    /// Solve the data-driven and model-based problem for one past window.
    Ocp {
        /// Trajectory CSV whose last samples form the past window.
        past: PathBuf,
    },
    /// Run the closed loop.
    Mpc,
    /// Run the built-in reference experiment.
    PaperExample,
}

impl Cli {
    /// Configuration file (or defaults) with command-line overrides applied.
    pub fn experiment(&self, use_file: bool) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, use_file) {
            (Some(path), true) => ExperimentConfig::load(path)?,
            _ => ExperimentConfig::default(),
        };
        if let Some(s) = &self.system {
            cfg.system = Some(s.clone());
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = Some(out.clone());
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(t) = self.data_length {
            cfg.data_length = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn run(&self) -> Result<Report> {
        match &self.command {
            Command::Analyze => {
                let cfg = self.experiment(true)?;
                let sys = commands::load_system(cfg.system.as_deref())?;
                Ok(commands::analyze(&sys, cfg.rank_tol))
            }
            Command::Collect => commands::collect(&self.experiment(true)?),
            Command::CheckPe { data, order } => {
                let cfg = self.experiment(true)?;
                commands::check_pe(data, *order, cfg.rank_tol)
            }
            Command::Ocp { past } => commands::ocp(&self.experiment(true)?, past),
            Command::Mpc => commands::mpc(&self.experiment(true)?),
            Command::PaperExample => commands::reference_experiment(&self.experiment(false)?),
        }
    }
}
