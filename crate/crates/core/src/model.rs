//! Model constants and the scalar functions of the kinetic market model.
//!
//! An agent is described by its rationality `x` (negative: irrational,
//! positive: rational) and its estimated asset value `w`. The functions here
//! are the building blocks shared by the Boltzmann and Fokker-Planck solvers:
//! the rationality drift, the compromise propensity, the diffusion amplitude,
//! the herding kernel and the mean-field drift towards the background.

use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-mean noise added to post-interaction values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    Off,
    /// `+a` or `-a` with probability one half each.
    TwoPoint { amplitude: f64 },
    /// Normal with standard deviation `a`. Out-of-range outcomes are removed
    /// by the admissibility check of the collision step.
    Gaussian { amplitude: f64 },
}

impl NoiseModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Off => 0.0,
            NoiseModel::TwoPoint { amplitude } => {
                if rng.random_bool(0.5) {
                    amplitude
                } else {
                    -amplitude
                }
            }
            NoiseModel::Gaussian { amplitude } => {
                let z: f64 = StandardNormal.sample(rng);
                amplitude * z
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::Off => 0.0,
            NoiseModel::TwoPoint { amplitude } | NoiseModel::Gaussian { amplitude } => {
                amplitude * amplitude
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Off => Ok(()),
            NoiseModel::TwoPoint { amplitude } | NoiseModel::Gaussian { amplitude } => {
                if amplitude > 0.0 && amplitude.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("noise.amplitude", "must be finite and > 0"))
                }
            }
        }
    }
}

/// Compromise propensity `P(|w - W|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Compromise {
    ConstantOne,
    /// Selective perception: public information is ignored when `|w - W| >= radius`.
    Indicator { radius: f64 },
}

/// Herding confidence kernel `gamma(v, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HerdingKernel {
    /// `1{w < v} * v * (1 - w)`.
    IndicatorProduct,
    /// `1{|w - v| < radius}`.
    DistanceIndicator { radius: f64 },
}

/// Rational-fraction thresholds deciding which interaction rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleThresholds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for RuleThresholds {
    fn default() -> Self {
        RuleThresholds {
            lower: 0.4,
            upper: 0.6,
        }
    }
}

/// Quantity compared with the rule thresholds at each value `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RuleMeasure {
    /// `I_rat / (I_rat + I_irr)`, the share of rational agents at `w`.
    #[default]
    RationalShare,
    /// `I_rat(w) = int_0^1 f(x, w) dx` itself, a density in `w`.
    RationalDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Strength of the public-information pull.
    pub alpha: f64,
    /// Herding strength, in `(0, 1/2]`.
    pub beta: f64,
    /// Multiplier of the irrational drift inside the band.
    pub delta: f64,
    pub kappa: f64,
    /// Half-width of the band `|w - W| < R` inside which agents drift irrational.
    pub band_r: f64,
    pub tau_i: f64,
    pub tau_h: f64,
    pub noise: NoiseModel,
    pub compromise: Compromise,
    pub herding_kernel: HerdingKernel,
    /// Amplitude of `d(w) = d_scale * 4w(1 - w)`.
    pub d_scale: f64,
    pub rule_thresholds: RuleThresholds,
    pub rule_measure: RuleMeasure,
    /// Exchange the rules triggered by rational and irrational majorities.
    pub swap_rules: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: 0.5,
            beta: 0.25,
            delta: 1.0,
            kappa: 1.0,
            band_r: 0.025,
            tau_i: 1.0,
            tau_h: 1.0,
            noise: NoiseModel::Gaussian { amplitude: 0.06 },
            compromise: Compromise::ConstantOne,
            herding_kernel: HerdingKernel::IndicatorProduct,
            d_scale: 1.0,
            rule_thresholds: RuleThresholds::default(),
            rule_measure: RuleMeasure::RationalShare,
            swap_rules: false,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in [0, 1], got {}", self.alpha),
            ));
        }
        if !(self.beta > 0.0 && self.beta <= 0.5) {
            return Err(Error::invalid(
                "beta",
                format!("must lie in (0, 1/2], got {}", self.beta),
            ));
        }
        positive("delta", self.delta)?;
        positive("kappa", self.kappa)?;
        positive("band_r", self.band_r)?;
        positive("tau_i", self.tau_i)?;
        positive("tau_h", self.tau_h)?;
        if !(self.d_scale >= 0.0 && self.d_scale <= 1.0) {
            return Err(Error::invalid("d_scale", "must lie in [0, 1]"));
        }
        let t = self.rule_thresholds;
        let share = self.rule_measure == RuleMeasure::RationalShare;
        if !(0.0 <= t.lower && t.lower <= t.upper && (t.upper <= 1.0 || !share)) {
            return Err(Error::invalid(
                "rule_thresholds",
                format!("need 0 <= lower <= upper <= 1, got ({}, {})", t.lower, t.upper),
            ));
        }
        if let Compromise::Indicator { radius } = self.compromise {
            positive("compromise.radius", radius)?;
        }
        if let HerdingKernel::DistanceIndicator { radius } = self.herding_kernel {
            positive("herding_kernel.radius", radius)?;
        }
        self.noise.validate()
    }
}

/// Rationality drift `Phi`: `-delta * kappa` inside the band, `kappa` outside.
/// Does not depend on `x`.
pub fn drift_phi(_x: f64, w: f64, background: f64, p: &ModelParams) -> f64 {
    if (w - background).abs() < p.band_r {
        -p.delta * p.kappa
    } else {
        p.kappa
    }
}

pub fn compromise_p(dist: f64, p: &ModelParams) -> f64 {
    match p.compromise {
        Compromise::ConstantOne => 1.0,
        Compromise::Indicator { radius } => {
            if dist < radius {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Diffusion amplitude, vanishing at `w = 0` and `w = 1`.
pub fn diffusion_d(w: f64, p: &ModelParams) -> f64 {
    p.d_scale * 4.0 * w * (1.0 - w)
}

/// Herding kernel `gamma(v, w)` of an agent at `w` meeting a partner at `v`.
pub fn herding_gamma(v: f64, w: f64, p: &ModelParams) -> f64 {
    match p.herding_kernel {
        HerdingKernel::IndicatorProduct => {
            if w < v {
                v * (1.0 - w)
            } else {
                0.0
            }
        }
        HerdingKernel::DistanceIndicator { radius } => {
            if (w - v).abs() < radius {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Distribution `M(W)` of background values seen by the agents.
#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundMeasure {
    PointMass(f64),
    /// Density sampled at `nodes` (uniformly spaced, ascending) for trapezoid quadrature.
    Density { nodes: Vec<f64>, density: Vec<f64> },
}

const NORMALIZATION_TOL: f64 = 1e-8;

fn trapezoid(nodes: &[f64], values: impl Fn(usize) -> f64) -> f64 {
    nodes
        .windows(2)
        .enumerate()
        .map(|(k, pair)| 0.5 * (pair[1] - pair[0]) * (values(k) + values(k + 1)))
        .sum()
}

/// Mean-field drift `H(w) = (1/tau_I) * int P(|w - W|)(w - W) M(W) dW`.
pub fn h_of_w(w: f64, background: &BackgroundMeasure, p: &ModelParams) -> Result<f64> {
    let integral = match background {
        BackgroundMeasure::PointMass(bg) => compromise_p((w - bg).abs(), p) * (w - bg),
        BackgroundMeasure::Density { nodes, density } => {
            if nodes.len() != density.len() || nodes.len() < 2 {
                return Err(Error::invalid(
                    "background.density",
                    "needs at least two nodes and one value per node",
                ));
            }
            let norm = trapezoid(nodes, |k| density[k]);
            if (norm - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized { integral: norm });
            }
            trapezoid(nodes, |k| {
                let bg = nodes[k];
                compromise_p((w - bg).abs(), p) * (w - bg) * density[k]
            })
        }
    };
    Ok(integral / p.tau_i)
}
