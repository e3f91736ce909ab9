//! Explicit finite-difference solver for the diffusive limit equation
//!
//! ```text
//! g_t + (Phi g)_x = (K[g] g)_w + (H(w) g)_w + (D(w) g)_ww,
//! K[g](x, w) = int Gamma(v, w) g(x, v) dv,
//! ```
//!
//! on `[-L, L] x [0, w_max]` with `g = 0` at both value boundaries and zero
//! flux through the rationality walls. Forward Euler in time, upwind
//! differences for both drifts and a centred second difference for the
//! diffusion; the time step is limited so that every update is a convex
//! combination and the state stays nonnegative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DistributionGrid, Moments};
use crate::model::{diffusion_d, drift_phi, h_of_w, herding_gamma, BackgroundMeasure, ModelParams};
use crate::scenario::{background_w, Scenario};

/// Interaction kernel `Gamma(v, w)` of the nonlocal drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InteractionKernel {
    Constant { gamma0: f64 },
    /// `Gamma(v, w) = (k / tau_h) gamma(v, w) (v - w)`.
    Herding { k: f64 },
}

/// Diffusion coefficient `D(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DiffusionCoefficient {
    /// `(lambda_i / tau_i + lambda_h rho / tau_h) d(w)^2 / 2`, with `rho`
    /// frozen at the initial mass.
    FromNoise { lambda_i: f64, lambda_h: f64 },
    /// `D(w) = w`.
    Linear,
    /// Uniformly elliptic `D(w) = value`.
    Constant { value: f64 },
}

/// Mean-field drift `H(w)` towards the background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MeanFieldDrift {
    /// `(w - W) / tau_i`.
    #[default]
    Affine,
    /// Compromise-weighted `H(w)` for a point-mass background.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FpConfig {
    pub n_x: usize,
    pub n_w: usize,
    /// `L` in `x in [-L, L]`.
    pub half_width: f64,
    /// Upper value bound; `4 W(0)` when unset.
    pub w_max: Option<f64>,
    /// Time step; a fraction of the initial stability bound when unset.
    pub dt: Option<f64>,
    pub safety: f64,
    pub kernel: InteractionKernel,
    pub diffusion: DiffusionCoefficient,
    pub drift: MeanFieldDrift,
}

impl Default for FpConfig {
    fn default() -> Self {
        FpConfig {
            n_x: 20,
            n_w: 100,
            half_width: 1.0,
            w_max: None,
            dt: None,
            safety: 0.9,
            kernel: InteractionKernel::Constant { gamma0: 1.0 },
            diffusion: DiffusionCoefficient::Linear,
            drift: MeanFieldDrift::Affine,
        }
    }
}

impl FpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_w < 2 {
            return Err(Error::invalid("fp.n_w", "need n_x >= 1 and n_w >= 2"));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::invalid("fp.half_width", "must be > 0"));
        }
        if let Some(w) = self.w_max {
            if !(w > 0.0) {
                return Err(Error::invalid("fp.w_max", "must be > 0"));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::invalid("fp.dt", "must be > 0"));
            }
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::invalid("fp.safety", "must lie in (0, 1]"));
        }
        match self.kernel {
            InteractionKernel::Constant { gamma0 } if gamma0 < 0.0 => {
                Err(Error::invalid("fp.kernel.gamma0", "must be >= 0"))
            }
            InteractionKernel::Herding { k } if k < 0.0 => {
                Err(Error::invalid("fp.kernel.k", "must be >= 0"))
            }
            _ => match self.diffusion {
                DiffusionCoefficient::Constant { value } if !(value > 0.0) => {
                    Err(Error::invalid("fp.diffusion.value", "must be > 0"))
                }
                _ => Ok(()),
            },
        }
    }
}

fn kernel_value(kernel: InteractionKernel, v: f64, w: f64, p: &ModelParams) -> f64 {
    match kernel {
        InteractionKernel::Constant { gamma0 } => gamma0,
        InteractionKernel::Herding { k } => k / p.tau_h * herding_gamma(v, w, p) * (v - w),
    }
}

/// Nonlocal drift `K[g]` in rationality row `i` at value `w` (midpoint quadrature).
pub fn k_of_g(g: &DistributionGrid, i: usize, w: f64, kernel: InteractionKernel, p: &ModelParams) -> f64 {
    let dw = g.dw();
    match kernel {
        InteractionKernel::Constant { gamma0 } => gamma0 * g.row(i).iter().sum::<f64>() * dw,
        InteractionKernel::Herding { .. } => g
            .row(i)
            .iter()
            .enumerate()
            .map(|(j, &f)| kernel_value(kernel, g.w_center(j), w, p) * f)
            .sum::<f64>()
            * dw,
    }
}

pub struct FokkerPlanck {
    cfg: FpConfig,
    grid: DistributionGrid,
    next: Vec<f64>,
    rho: f64,
    dt: f64,
    diffusion: Vec<f64>,
    /// `K + H` at the `n_w + 1` value faces of the current row.
    face_drift: Vec<f64>,
}

impl FokkerPlanck {
    /// Sets up the solver with `initial(x, w)` sampled at cell centers.
    pub fn new(
        cfg: FpConfig,
        p: &ModelParams,
        s: &Scenario,
        initial: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        cfg.validate()?;
        let w_max = match cfg.w_max {
            Some(w) => w,
            None => 4.0 * s.background.value_at(0.0),
        };
        let grid = DistributionGrid::from_fn(
            cfg.n_x,
            cfg.n_w,
            (-cfg.half_width, cfg.half_width),
            (0.0, w_max),
            initial,
        )?;
        let rho = grid.total_mass();
        let diffusion = (0..cfg.n_w)
            .map(|j| {
                let w = grid.w_center(j);
                match cfg.diffusion {
                    DiffusionCoefficient::FromNoise { lambda_i, lambda_h } => {
                        let d = diffusion_d(w, p);
                        0.5 * (lambda_i / p.tau_i + lambda_h * rho / p.tau_h) * d * d
                    }
                    DiffusionCoefficient::Linear => w,
                    DiffusionCoefficient::Constant { value } => value,
                }
            })
            .collect();
        let mut solver = FokkerPlanck {
            next: vec![0.0; cfg.n_x * cfg.n_w],
            face_drift: vec![0.0; cfg.n_w + 1],
            cfg,
            grid,
            rho,
            dt: 0.0,
            diffusion,
        };
        solver.dt = match solver.cfg.dt {
            Some(dt) => dt,
            // K can grow as mass gathers in a row, keep a margin
            None => 0.5 * solver.stability_bound(0.0, p, s)?,
        };
        Ok(solver)
    }

    pub fn grid(&self) -> &DistributionGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Overrides the time step; checked against the stability bound on every step.
    pub fn set_dt(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::invalid("fp.dt", "must be > 0"));
        }
        self.dt = dt;
        Ok(())
    }

    /// Mass of the initial datum, used in the diffusion coefficient.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn moments(&self, background: f64) -> Moments {
        self.grid.moments(background)
    }

    fn fill_face_drift(&mut self, i: usize, background: f64, p: &ModelParams) -> Result<()> {
        let dw = self.grid.dw();
        let measure = BackgroundMeasure::PointMass(background);
        for f in 0..=self.cfg.n_w {
            let w = f as f64 * dw;
            let k = k_of_g(&self.grid, i, w, self.cfg.kernel, p);
            let h = match self.cfg.drift {
                MeanFieldDrift::Affine => (w - background) / p.tau_i,
                MeanFieldDrift::Quadrature => h_of_w(w, &measure, p)?,
            };
            self.face_drift[f] = k + h;
        }
        Ok(())
    }

    /// Largest time step keeping the explicit update a convex combination.
    pub fn stability_bound(&mut self, t: f64, p: &ModelParams, s: &Scenario) -> Result<f64> {
        let (w_lo, w_hi) = self.grid.w_bounds();
        let background = background_w(t, s, w_lo, w_hi)?;
        let (dx, dw) = (self.grid.dx(), self.grid.dw());
        let mut max_drift = 0.0f64;
        for i in 0..self.cfg.n_x {
            self.fill_face_drift(i, background, p)?;
            max_drift = self.face_drift.iter().fold(max_drift, |m, v| m.max(v.abs()));
        }
        let max_d = self.diffusion.iter().fold(0.0f64, |m, v| m.max(*v));
        let max_phi = (0..self.cfg.n_w)
            .map(|j| drift_phi(0.0, self.grid.w_center(j), background, p).abs())
            .fold(0.0, f64::max);
        let rate = 2.0 * max_drift / dw + 3.0 * max_d / (dw * dw) + max_phi / dx;
        Ok(if rate > 0.0 {
            self.cfg.safety / rate
        } else {
            f64::INFINITY
        })
    }

    /// One forward-Euler step from `t` to `t + dt`.
    pub fn step(&mut self, t: f64, p: &ModelParams, s: &Scenario) -> Result<()> {
        let bound = self.stability_bound(t, p, s)?;
        if self.dt > bound {
            return Err(Error::Stability {
                dt: self.dt,
                bound,
            });
        }
        let (w_lo, w_hi) = self.grid.w_bounds();
        let background = background_w(t, s, w_lo, w_hi)?;
        let (n_x, n_w) = (self.cfg.n_x, self.cfg.n_w);
        let (dx, dw, dt) = (self.grid.dx(), self.grid.dw(), self.dt);

        for i in 0..n_x {
            self.fill_face_drift(i, background, p)?;
            let g = self.grid.values();
            let row = &g[i * n_w..(i + 1) * n_w];
            // value-direction flux J = -(K + H) g - (D g)_w at each face
            let mut flux_lo = 0.0;
            for j in 0..n_w {
                let f_hi = j + 1;
                let c = -self.face_drift[f_hi];
                let left = row[j];
                let right = if f_hi < n_w { row[f_hi] } else { 0.0 };
                let advective = c.max(0.0) * left + c.min(0.0) * right;
                let dg_right = if f_hi < n_w {
                    self.diffusion[f_hi] * row[f_hi]
                } else {
                    -self.diffusion[j] * row[j]
                };
                let diffusive = -(dg_right - self.diffusion[j] * row[j]) / dw;
                let flux_hi = advective + diffusive;
                if j == 0 {
                    let c0 = -self.face_drift[0];
                    // ghost value zero: only outflow carries mass
                    let adv0 = c0.min(0.0) * row[0];
                    let dif0 = -(self.diffusion[0] * row[0] + self.diffusion[0] * row[0]) / dw;
                    flux_lo = adv0 + dif0;
                }
                self.next[i * n_w + j] = row[j] - dt / dw * (flux_hi - flux_lo);
                flux_lo = flux_hi;
            }
        }

        // rationality transport, upwind with zero-flux walls
        let g = self.grid.values();
        for j in 0..n_w {
            let phi = drift_phi(0.0, self.grid.w_center(j), background, p);
            if phi == 0.0 {
                continue;
            }
            let c = dt / dx;
            for i in 0..n_x {
                let left_face = if i == 0 {
                    0.0
                } else {
                    phi.max(0.0) * g[(i - 1) * n_w + j] + phi.min(0.0) * g[i * n_w + j]
                };
                let right_face = if i + 1 == n_x {
                    0.0
                } else {
                    phi.max(0.0) * g[i * n_w + j] + phi.min(0.0) * g[(i + 1) * n_w + j]
                };
                self.next[i * n_w + j] -= c * (right_face - left_face);
            }
        }

        for (k, v) in self.next.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -1e-14 {
                    return Err(Error::LostPositivity {
                        i: k / n_w,
                        j: k % n_w,
                        value: *v,
                    });
                }
                *v = 0.0;
            }
        }
        self.grid.values_mut().copy_from_slice(&self.next);
        Ok(())
    }
}

/// Moments of a Fokker-Planck state: `(m_w, m_x, V_w, mass)`.
pub fn fp_moments(solver: &FokkerPlanck, background: f64) -> Moments {
    solver.moments(background)
}
