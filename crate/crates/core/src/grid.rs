//! Cell-averaged agent density on a uniform rationality/asset-value grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Density `f(x, w)` averaged over the cells of a uniform `n_x * n_w` grid.
///
/// Storage is row-major in `x`: cell `(i, j)` (rationality index `i`, value
/// index `j`) lives at `i * n_w + j`, so a row holds all values at one `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionGrid {
    n_x: usize,
    n_w: usize,
    x_min: f64,
    x_max: f64,
    w_min: f64,
    w_max: f64,
    values: Vec<f64>,
}

/// Integral moments of a density; `m_w` and `m_x` are not divided by the mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub m_w: f64,
    pub m_x: f64,
    pub v_w: f64,
    pub mass: f64,
}

impl DistributionGrid {
    /// Zero density on the numerical domain `[-1, 1] x [0, 1]`.
    pub fn new(n_x: usize, n_w: usize) -> Result<Self> {
        Self::with_bounds(n_x, n_w, (-1.0, 1.0), (0.0, 1.0))
    }

    pub fn with_bounds(n_x: usize, n_w: usize, x: (f64, f64), w: (f64, f64)) -> Result<Self> {
        if n_x == 0 || n_w == 0 {
            return Err(Error::invalid("grid", "cell counts must be >= 1"));
        }
        if !(x.1 > x.0) || !(w.1 > w.0) {
            return Err(Error::invalid("grid", "bounds must satisfy min < max"));
        }
        Ok(DistributionGrid {
            n_x,
            n_w,
            x_min: x.0,
            x_max: x.1,
            w_min: w.0,
            w_max: w.1,
            values: vec![0.0; n_x * n_w],
        })
    }

    /// Grid filled by evaluating `density(x, w)` at cell centers.
    pub fn from_fn(
        n_x: usize,
        n_w: usize,
        x: (f64, f64),
        w: (f64, f64),
        density: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut g = Self::with_bounds(n_x, n_w, x, w)?;
        for i in 0..n_x {
            let xc = g.x_center(i);
            for j in 0..n_w {
                let v = density(xc, g.w_center(j));
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::invalid("density", format!("negative or non-finite value {v}")));
                }
                g.values[i * n_w + j] = v;
            }
        }
        Ok(g)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_w(&self) -> usize {
        self.n_w
    }

    pub fn x_bounds(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn w_bounds(&self) -> (f64, f64) {
        (self.w_min, self.w_max)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_x as f64
    }

    pub fn dw(&self) -> f64 {
        (self.w_max - self.w_min) / self.n_w as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dw()
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn w_center(&self, j: usize) -> f64 {
        self.w_min + (j as f64 + 0.5) * self.dw()
    }

    /// Cells with center `x >= 0` count as rational.
    pub fn is_rational(&self, i: usize) -> bool {
        self.x_center(i) >= 0.0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_w + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.values[k] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Densities of the row at rationality index `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_w..(i + 1) * self.n_w]
    }

    pub fn cell_mass(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) * self.cell_area()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Scales the density to total mass `mass`. No-op on an empty grid.
    pub fn normalize_to(&mut self, mass: f64) {
        let current = self.total_mass();
        if current > 0.0 {
            let s = mass / current;
            self.values.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// Midpoint-rule moments; `V_w` is taken about `background`.
    pub fn moments(&self, background: f64) -> Moments {
        let area = self.cell_area();
        let (mut mass, mut m_w, mut m_x, mut v_w) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..self.n_x {
            let xc = self.x_center(i);
            let mut row_mass = 0.0;
            for (j, &f) in self.row(i).iter().enumerate() {
                let wc = self.w_center(j);
                let m = f * area;
                row_mass += m;
                m_w += m * wc;
                v_w += m * (wc - background) * (wc - background);
            }
            mass += row_mass;
            m_x += row_mass * xc;
        }
        Moments { m_w, m_x, v_w, mass }
    }

    /// `I_rat / (I_rat + I_irr)` of value column `j`, or `0.5` when the column is empty.
    pub fn rational_fraction(&self, j: usize) -> f64 {
        let (mut rat, mut irr) = (0.0, 0.0);
        for i in 0..self.n_x {
            let f = self.get(i, j);
            if self.is_rational(i) {
                rat += f;
            } else {
                irr += f;
            }
        }
        let total = rat + irr;
        if total > 0.0 {
            rat / total
        } else {
            0.5
        }
    }

    /// Linear-interpolation weights of a value `w` onto the two bracketing
    /// cell centers. Returns `[(j0, 1 - s), (j1, s)]`; both entries name the
    /// same cell when `w` is on a center or inside a boundary half-cell.
    pub fn deposit_weights(&self, w: f64) -> Result<[(usize, f64); 2]> {
        if !(w >= self.w_min && w <= self.w_max) {
            return Err(Error::DepositOutOfRange {
                w,
                lo: self.w_min,
                hi: self.w_max,
            });
        }
        let s = (w - self.w_min) / self.dw() - 0.5;
        let last = self.n_w - 1;
        if s <= 0.0 {
            return Ok([(0, 1.0), (0, 0.0)]);
        }
        if s >= last as f64 {
            return Ok([(last, 1.0), (last, 0.0)]);
        }
        let j = s.floor() as usize;
        let frac = s - j as f64;
        if frac == 0.0 {
            Ok([(j, 1.0), (j, 0.0)])
        } else {
            Ok([(j, 1.0 - frac), (j + 1, frac)])
        }
    }

    /// Adds mass `m` at rationality row `i` and value `w_star`, split between
    /// the neighbouring value cells.
    pub fn deposit_mass(&mut self, i: usize, w_star: f64, m: f64) -> Result<()> {
        if !(m >= 0.0) {
            return Err(Error::invalid("deposit mass", "must be >= 0"));
        }
        let [(j0, a0), (j1, a1)] = self.deposit_weights(w_star)?;
        let area = self.cell_area();
        let base = i * self.n_w;
        // second term of a single-cell deposit is an exact 0.0
        self.values[base + j0] += m * a0 / area;
        if a1 > 0.0 {
            self.values[base + j1] += m * a1 / area;
        }
        Ok(())
    }

    /// Rationality row index containing `x`.
    pub fn x_index(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.dx()).floor();
        (k.max(0.0) as usize).min(self.n_x - 1)
    }

    /// Value column index containing `w`.
    pub fn w_index(&self, w: f64) -> usize {
        let k = ((w - self.w_min) / self.dw()).floor();
        (k.max(0.0) as usize).min(self.n_w - 1)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
