use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::BandSpec;
use crate::collision::CollisionConfig;
use crate::error::{Error, Result};
use crate::fokker_planck::FpConfig;
use crate::grid::DistributionGrid;
use crate::model::ModelParams;
use crate::scenario::Scenario;
use crate::transport::FluxForm;

/// Value-space bounds of the kinetic grid.
pub const W_BOUNDS: (f64, f64) = (0.0, 1.0);
/// Rationality bounds of the kinetic grid.
pub const X_BOUNDS: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Boltzmann,
    #[serde(alias = "fokker-planck")]
    Fp,
}

/// Uniform in `x`, Gaussian in `w`, truncated to the grid and normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialDatum {
    /// Center of the bump; `W(0)` when unset.
    pub center: Option<f64>,
    pub sd: f64,
    pub mass: f64,
}

impl Default for InitialDatum {
    fn default() -> Self {
        InitialDatum {
            center: None,
            sd: 0.1,
            mass: 1.0,
        }
    }
}

impl InitialDatum {
    pub fn validate(&self) -> Result<()> {
        if !(self.sd > 0.0 && self.sd.is_finite()) {
            return Err(Error::invalid("initial.sd", "must be > 0"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("initial.mass", "must be > 0"));
        }
        Ok(())
    }

    /// Unnormalized profile `exp(-(w - c)^2 / (2 sd^2))`.
    pub fn profile(&self, background0: f64) -> impl Fn(f64, f64) -> f64 {
        let c = self.center.unwrap_or(background0);
        let two_var = 2.0 * self.sd * self.sd;
        move |_, w| (-(w - c) * (w - c) / two_var).exp()
    }

    pub fn grid(&self, n_x: usize, n_w: usize, background0: f64) -> Result<DistributionGrid> {
        let mut g = DistributionGrid::from_fn(n_x, n_w, X_BOUNDS, W_BOUNDS, self.profile(background0))?;
        if !(g.total_mass() > 0.0) {
            return Err(Error::invalid("initial.center", "initial density vanishes on the grid"));
        }
        g.normalize_to(self.mass);
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Record every `cadence`-th step.
    pub cadence: usize,
    pub emit_bands: bool,
    pub bands: BandSpec,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            cadence: 1,
            emit_bands: false,
            bands: BandSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub n_x: usize,
    pub n_w: usize,
    pub model: ModelParams,
    pub scenario: Scenario,
    pub collision: CollisionConfig,
    pub flux: FluxForm,
    pub initial: InitialDatum,
    pub output: OutputConfig,
    pub fp: FpConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Boltzmann,
            n_x: 70,
            n_w: 70,
            model: ModelParams::default(),
            scenario: Scenario::default(),
            collision: CollisionConfig::default(),
            flux: FluxForm::Limited,
            initial: InitialDatum::default(),
            output: OutputConfig::default(),
            fp: FpConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 || self.n_w < 2 {
            return Err(Error::invalid("n_x", "grid needs n_x >= 2 and n_w >= 2"));
        }
        if self.output.cadence < 1 {
            return Err(Error::invalid("output.cadence", "must be >= 1"));
        }
        self.model.validate()?;
        self.collision.validate()?;
        self.initial.validate()?;
        match self.mode {
            Mode::Boltzmann => self.scenario.validate(W_BOUNDS.0, W_BOUNDS.1),
            Mode::Fp => {
                self.fp.validate()?;
                let w_max = self
                    .fp
                    .w_max
                    .unwrap_or(4.0 * self.scenario.background.value_at(0.0));
                self.scenario.validate(0.0, w_max)
            }
        }
    }

    /// Desk-scale variant: coarser grid, larger step, smaller ensemble.
    pub fn fast(mut self) -> Self {
        self.n_x = 35;
        self.n_w = 35;
        self.scenario.dt = 1e-4;
        self.scenario.ensemble = 20;
        self
    }
}

/// Reads and validates a TOML run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config { message, .. } => Error::Config {
            path: path.to_path_buf(),
            message,
        },
        other => Error::Config {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
        path: PathBuf::new(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
