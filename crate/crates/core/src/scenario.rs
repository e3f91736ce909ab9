use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-dependent background ("fair") value `W(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Background {
    Constant { value: f64 },
    /// `W(t) = c0 + c1 * (sin(omega * t) + exp(rate * t) / 2)`.
    SinExp {
        c0: f64,
        c1: f64,
        omega: f64,
        rate: f64,
    },
    /// Step function through `(t, W)` breakpoints, right-continuous; constant
    /// `W` of the first breakpoint before it.
    Piecewise { points: Vec<(f64, f64)> },
    /// Linear interpolation between breakpoints. A repeated time encodes a
    /// jump; the value is right-continuous there.
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

impl Background {
    /// Evaluates `W(t)` without range checks.
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Background::Constant { value } => *value,
            Background::SinExp {
                c0,
                c1,
                omega,
                rate,
            } => c0 + c1 * ((omega * t).sin() + 0.5 * (rate * t).exp()),
            Background::Piecewise { points } => {
                let mut value = points[0].1;
                for &(tp, wp) in points {
                    if t >= tp {
                        value = wp;
                    } else {
                        break;
                    }
                }
                value
            }
            Background::PiecewiseLinear { points } => {
                if t < points[0].0 {
                    return points[0].1;
                }
                // last breakpoint not after t; ties resolve to the later point
                let k = points.iter().rposition(|&(tp, _)| tp <= t).unwrap_or(0);
                match points.get(k + 1) {
                    Some(&(t1, w1)) => {
                        let (t0, w0) = points[k];
                        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
                    }
                    None => points[k].1,
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Background::Piecewise { points } | Background::PiecewiseLinear { points } => {
                if points.is_empty() {
                    return Err(Error::invalid("background.points", "must not be empty"));
                }
                if points.windows(2).any(|p| p[1].0 < p[0].0) {
                    return Err(Error::invalid(
                        "background.points",
                        "breakpoint times must be non-decreasing",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub background: Background,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    pub ensemble: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            background: Background::Constant { value: 0.5 },
            horizon: 0.5,
            dt: 1e-5,
            seed: 0,
            ensemble: 1,
        }
    }
}

impl Scenario {
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Time of step `k`; computed by multiplication so long runs do not drift.
    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Checks the scenario invariants, including `W(t)` staying inside
    /// `(w_lo, w_hi)` at every step time of the horizon.
    pub fn validate(&self, w_lo: f64, w_hi: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.horizon != 0.0 && !(self.horizon >= self.dt) {
            return Err(Error::invalid(
                "horizon",
                format!("must be 0 or >= dt, got {}", self.horizon),
            ));
        }
        if self.ensemble < 1 {
            return Err(Error::invalid("ensemble", "must be >= 1"));
        }
        self.background.validate()?;
        for k in 0..=self.steps() {
            background_w(self.time_of(k), self, w_lo, w_hi)?;
        }
        Ok(())
    }
}

/// `W(t)`, failing when the value leaves `(w_lo, w_hi)`.
pub fn background_w(t: f64, s: &Scenario, w_lo: f64, w_hi: f64) -> Result<f64> {
    let value = s.background.value_at(t);
    if value > w_lo && value < w_hi {
        Ok(value)
    } else {
        Err(Error::BackgroundOutOfRange {
            t,
            value,
            lo: w_lo,
            hi: w_hi,
        })
    }
}
