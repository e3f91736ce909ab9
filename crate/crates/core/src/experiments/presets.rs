//! Scenario presets for the three numerical tests.

use crate::error::{Error, Result};
use crate::model::{ModelParams, NoiseModel};
use crate::scenario::{Background, Scenario};

use super::config::RunConfig;

pub const PRESETS: &[(&str, &str)] = &[
    ("test1", "constant W = 0.5, R = 0.025; bubble/crash percentages over alpha and beta"),
    ("test2-smooth", "oscillating, exponentially growing W(t)"),
    ("test2-crash", "W rises until t = 0.2, then drops and stays constant"),
    ("test3-bollinger", "constant W = 0.5, Bollinger bands of the mean value"),
    ("test3-jump", "W drops at t = 0.2, noise +-0.06, Bollinger bandwidth"),
    ("test3-jump-wide", "as test3-jump with noise +-0.18"),
];

/// Default sweep grid of the first test.
pub const TEST1_ALPHAS: [f64; 10] = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95];
pub const TEST1_BETAS: [f64; 3] = [0.05, 0.25, 0.5];

/// Time step the second test's background was written against.
const TEST2_DT: f64 = 1e-5;

fn base(model: ModelParams, background: Background, horizon: f64, ensemble: usize) -> RunConfig {
    RunConfig {
        model,
        scenario: Scenario {
            background,
            horizon,
            ensemble,
            ..Scenario::default()
        },
        ..RunConfig::default()
    }
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let two_point = |amplitude| NoiseModel::TwoPoint { amplitude };
    let cfg = match name {
        "test1" => base(
            ModelParams {
                alpha: 0.5,
                beta: 0.25,
                delta: 1.0,
                kappa: 1.0,
                band_r: 0.025,
                noise: two_point(0.06),
                ..ModelParams::default()
            },
            Background::Constant { value: 0.5 },
            0.5,
            200,
        ),
        "test2-smooth" => base(
            ModelParams {
                alpha: 0.05,
                beta: 0.25,
                delta: 2.0,
                kappa: 1.0,
                band_r: 0.025,
                noise: two_point(0.06),
                ..ModelParams::default()
            },
            Background::SinExp {
                c0: 0.1,
                c1: 0.05,
                omega: 1.0 / (500.0 * TEST2_DT),
                rate: 1.0 / (1500.0 * TEST2_DT),
            },
            // W reaches 1 shortly after t = 0.053
            0.05,
            1,
        ),
        "test2-crash" => base(
            ModelParams {
                alpha: 0.25,
                beta: 0.2,
                delta: 0.01,
                kappa: 1.0,
                band_r: 0.025,
                noise: two_point(0.06),
                ..ModelParams::default()
            },
            Background::PiecewiseLinear {
                points: vec![(0.0, 0.4), (0.2, 0.6), (0.2, 0.3)],
            },
            0.5,
            20,
        ),
        "test3-bollinger" => {
            let mut cfg = base(
                ModelParams {
                    alpha: 0.2,
                    beta: 0.25,
                    delta: 1.0,
                    kappa: 1.0,
                    band_r: 0.025,
                    noise: two_point(0.06),
                    ..ModelParams::default()
                },
                Background::Constant { value: 0.5 },
                0.5,
                1,
            );
            cfg.output.emit_bands = true;
            cfg
        }
        "test3-jump" | "test3-jump-wide" => {
            let amplitude = if name == "test3-jump" { 0.06 } else { 0.18 };
            let mut cfg = base(
                ModelParams {
                    alpha: 0.05,
                    beta: 0.25,
                    delta: 1.0,
                    kappa: 1.0,
                    band_r: 0.025,
                    noise: two_point(amplitude),
                    // d(w) = w(1 - w)
                    d_scale: 0.25,
                    ..ModelParams::default()
                },
                Background::Piecewise {
                    points: vec![(0.0, 0.5), (0.2, 0.3)],
                },
                0.5,
                1,
            );
            cfg.output.emit_bands = true;
            cfg
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}
