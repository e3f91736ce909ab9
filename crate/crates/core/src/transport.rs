//! Rationality transport `f_t + (Phi f)_x = 0` with a flux-limited
//! upwind/Lax-Wendroff finite-volume scheme and the van Leer limiter.
//!
//! `Phi` depends on `w` only, so each value row is a constant-velocity
//! advection problem. The walls at `x_min` and `x_max` carry zero flux: agents
//! accumulate at extreme rationality instead of leaving the domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DistributionGrid;
use crate::model::{drift_phi, ModelParams};
use crate::scenario::{background_w, Scenario};

/// Interface flux variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FluxForm {
    /// `F = a f_up + (|a|/2)(1 - nu) Psi(theta) (f_i - f_{i-1})` with the
    /// slope ratio taken on the upwind side.
    #[default]
    Limited,
    /// Transcription of the published formula
    /// `F_i = (f_{i-1} - f_i)/2 - sgn(Phi)(1 - Psi(theta_i)(1 - nu))(f_i - f_{i-1})/2`
    /// with the centred ratio `theta_i = (f_i - f_{i-1})/(f_{i+1} - f_i)`.
    /// Its advective part cancels; kept for comparison only.
    AsPrinted,
}

/// Van Leer limiter `(|theta| + theta) / (1 + |theta|)`.
pub fn van_leer_psi(theta: f64) -> f64 {
    if theta.is_infinite() {
        return if theta > 0.0 { 2.0 } else { 0.0 };
    }
    (theta.abs() + theta) / (1.0 + theta.abs())
}

/// `num / den` with `0/0 = 1` and `x/0 = sign(x) * inf`.
pub fn slope_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            num.signum() * f64::INFINITY
        }
    } else {
        num / den
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Scratch buffers reused across rows and steps.
#[derive(Debug, Clone, Default)]
pub struct TransportWorkspace {
    /// Interface fluxes, `n + 1` entries.
    pub flux: Vec<f64>,
    /// Limiter ratios per cell.
    pub theta: Vec<f64>,
    row: Vec<f64>,
}

impl TransportWorkspace {
    pub fn new(n: usize) -> Self {
        TransportWorkspace {
            flux: vec![0.0; n + 1],
            theta: vec![0.0; n],
            row: vec![0.0; n],
        }
    }

    fn resize(&mut self, n: usize) {
        self.flux.resize(n + 1, 0.0);
        self.theta.resize(n, 0.0);
        self.row.resize(n, 0.0);
    }
}

/// Advances one row by `dt` with constant velocity; zero flux at both ends.
pub fn advect_row(
    f: &mut [f64],
    velocity: f64,
    dt: f64,
    dx: f64,
    form: FluxForm,
    ws: &mut TransportWorkspace,
) -> Result<()> {
    let n = f.len();
    let nu = dt * velocity.abs() / dx;
    if nu > 1.0 {
        return Err(Error::Cfl { nu });
    }
    if velocity == 0.0 || n < 2 {
        return Ok(());
    }
    ws.resize(n);
    // cell-to-cell jumps, zero beyond the walls
    let jump = |k: isize| -> f64 {
        if k <= 0 || k >= n as isize {
            0.0
        } else {
            f[k as usize] - f[k as usize - 1]
        }
    };
    ws.flux[0] = 0.0;
    ws.flux[n] = 0.0;
    match form {
        FluxForm::Limited => {
            for k in 1..n {
                let d = jump(k as isize);
                let upwind = if velocity > 0.0 {
                    jump(k as isize - 1)
                } else {
                    jump(k as isize + 1)
                };
                let theta = slope_ratio(upwind, d);
                ws.theta[k] = theta;
                let psi = van_leer_psi(theta);
                ws.flux[k] = 0.5 * velocity * (f[k - 1] + f[k])
                    - 0.5 * velocity.abs() * (1.0 - psi * (1.0 - nu)) * d;
            }
            let c = dt / dx;
            for i in 0..n {
                ws.row[i] = f[i] - c * (ws.flux[i + 1] - ws.flux[i]);
            }
        }
        FluxForm::AsPrinted => {
            for i in 1..n {
                let theta = slope_ratio(jump(i as isize), jump(i as isize + 1));
                ws.theta[i] = theta;
                let psi = van_leer_psi(theta);
                ws.flux[i] = 0.5 * (f[i - 1] - f[i])
                    - 0.5 * sgn(velocity) * (1.0 - psi * (1.0 - nu)) * (f[i] - f[i - 1]);
            }
            let c = dt / dx * velocity;
            for i in 0..n {
                ws.row[i] = f[i] - c * (ws.flux[i + 1] - ws.flux[i]);
            }
        }
    }
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (dst, &v) in f.iter_mut().zip(&ws.row) {
        // rounding can leave an emptied cell at -1e-20
        *dst = if v < 0.0 && v > -1e-13 * scale { 0.0 } else { v };
    }
    Ok(())
}

/// Largest CFL number of a transport step at time `t`.
pub fn cfl_number(g: &DistributionGrid, dt: f64, background: f64, p: &ModelParams) -> f64 {
    (0..g.n_w())
        .map(|j| drift_phi(0.0, g.w_center(j), background, p).abs())
        .fold(0.0, f64::max)
        * dt
        / g.dx()
}

pub struct Transport {
    pub form: FluxForm,
    ws: TransportWorkspace,
}

impl Transport {
    pub fn new(form: FluxForm) -> Self {
        Transport {
            form,
            ws: TransportWorkspace::default(),
        }
    }

    /// Advances every value row by `dt`, with `Phi` evaluated at `W(t)`.
    pub fn step(
        &mut self,
        g: &mut DistributionGrid,
        t: f64,
        dt: f64,
        s: &Scenario,
        p: &ModelParams,
    ) -> Result<()> {
        let (w_lo, w_hi) = g.w_bounds();
        let background = background_w(t, s, w_lo, w_hi)?;
        let nu = cfl_number(g, dt, background, p);
        if nu > 1.0 {
            return Err(Error::Cfl { nu });
        }
        let (n_x, n_w, dx) = (g.n_x(), g.n_w(), g.dx());
        let mut line = vec![0.0; n_x];
        for j in 0..n_w {
            let velocity = drift_phi(0.0, g.w_center(j), background, p);
            let values = g.values_mut();
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = values[i * n_w + j];
            }
            advect_row(&mut line, velocity, dt, dx, self.form, &mut self.ws)?;
            for (i, v) in line.iter().enumerate() {
                values[i * n_w + j] = *v;
            }
        }
        Ok(())
    }
}

/// One transport step with the default flux.
pub fn transport_step(
    g: &mut DistributionGrid,
    t: f64,
    dt: f64,
    s: &Scenario,
    p: &ModelParams,
) -> Result<()> {
    Transport::new(FluxForm::Limited).step(g, t, dt, s, p)
}

pub fn total_variation(f: &[f64]) -> f64 {
    f.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
