use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kinetic_market::experiments::{
    emit_results, emit_sweep, load_config, preset, presets, run_ensemble, sweep, Mode, RunConfig,
    PRESETS,
};
use kinetic_market::Result;

#[derive(Parser)]
#[command(name = "kinetic-market", version, about = "Kinetic market simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run with the base seed.
    Run(Common),
    /// Ensemble over seeds `seed .. seed + ensemble`.
    Ensemble(Common),
    /// Ensembles over a grid of alpha and/or beta values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated alpha values.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        /// Comma-separated beta values.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
    },
    /// Fokker-Planck oracle run.
    Fp(Common),
    /// Preset library.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Boltzmann,
    Fp,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coarse grid, dt = 1e-4, 20 runs.
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    emit_bands: bool,
    #[arg(long, value_enum)]
    mode: Option<CliMode>,
}

impl Common {
    /// Preset or file (file wins), then `--fast`, then explicit flags.
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => RunConfig::default(),
        };
        if self.fast {
            cfg = cfg.fast();
        }
        if let Some(seed) = self.seed {
            cfg.scenario.seed = seed;
        }
        if let Some(e) = self.ensemble {
            cfg.scenario.ensemble = e;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if self.emit_bands {
            cfg.output.emit_bands = true;
        }
        match self.mode {
            Some(CliMode::Boltzmann) => cfg.mode = Mode::Boltzmann,
            Some(CliMode::Fp) => cfg.mode = Mode::Fp,
            None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn ensemble_and_emit(mut cfg: RunConfig, single: bool) -> Result<()> {
    if single {
        cfg.scenario.ensemble = 1;
    }
    let res = run_ensemble(&cfg)?;
    let dir = cfg.output.dir.clone();
    for path in emit_results(&res, &cfg, &dir)? {
        println!("{}", path.display());
    }
    let p = res.percentages;
    eprintln!(
        "bubble {:.2}%  crash {:.2}%  normal {:.2}%",
        p.bubble, p.crash, p.normal
    );
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => ensemble_and_emit(c.resolve()?, true),
        Command::Ensemble(c) => ensemble_and_emit(c.resolve()?, false),
        Command::Fp(c) => {
            let mut cfg = c.resolve()?;
            cfg.mode = Mode::Fp;
            cfg.validate()?;
            ensemble_and_emit(cfg, true)
        }
        Command::Sweep {
            common,
            mut alpha,
            mut beta,
        } => {
            let cfg = common.resolve()?;
            if alpha.is_empty() && beta.is_empty() && common.preset.as_deref() == Some("test1") {
                alpha = presets::TEST1_ALPHAS.to_vec();
                beta = presets::TEST1_BETAS.to_vec();
            }
            let points = sweep(&cfg, &alpha, &beta)?;
            for path in emit_sweep(&points, &cfg, &cfg.output.dir)? {
                println!("{}", path.display());
            }
            for pt in &points {
                let p = pt.result.percentages;
                eprintln!(
                    "alpha {:<5} beta {:<5} bubble {:6.2}%  crash {:6.2}%",
                    pt.alpha, pt.beta, p.bubble, p.crash
                );
            }
            Ok(())
        }
        Command::Presets {
            action: PresetAction::List,
        } => {
            for (name, about) in PRESETS {
                println!("{name:<16} {about}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
