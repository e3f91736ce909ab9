//! Stochastic collision step for the public-information and herding operators.
//!
//! The density is never converted to particles. An event withdraws a small
//! mass quantum from a sampled cell (and, for herding, from a partner cell in
//! the same rationality row), applies the interaction rule to the cell-center
//! values and deposits the quanta back at the post-interaction values by
//! linear interpolation. Every event conserves mass exactly; events whose
//! post-interaction value leaves the value range are rejected and leave the
//! grid untouched.

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DistributionGrid;
use crate::model::{compromise_p, diffusion_d, herding_gamma, ModelParams, RuleMeasure};
use crate::scenario::{background_w, Scenario};

/// Unit in which the interaction times `tau_i`, `tau_h` are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionClock {
    /// Interaction times count time steps: with `tau = 1` every agent
    /// interacts once per step, whatever `dt` is.
    #[default]
    PerStep,
    /// Interaction times are in model time units.
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionConfig {
    /// Events per step per unit mass at unit turnover; defaults to the cell count.
    pub events_per_step: Option<f64>,
    /// Mass moved by one event; defaults to `mass * turnover / N_ev`.
    pub quantum_mass: Option<f64>,
    pub clock: CollisionClock,
    /// Apply this rule to every event instead of the majority selection.
    pub forced_rule: Option<Rule>,
}

impl CollisionConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.events_per_step {
            if !(e >= 1.0 && e.is_finite()) {
                return Err(Error::invalid("collision.events_per_step", "must be >= 1"));
            }
        }
        if let Some(q) = self.quantum_mass {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::invalid("collision.quantum_mass", "must be > 0"));
            }
        }
        Ok(())
    }

    /// Fraction of the population taken through an interaction per step,
    /// `dt / min(tau_i, tau_h)` in the configured clock.
    pub fn turnover(&self, dt: f64, p: &ModelParams) -> f64 {
        let tau = p.tau_i.min(p.tau_h);
        match self.clock {
            CollisionClock::PerStep => 1.0 / tau,
            CollisionClock::Physical => dt / tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Public,
    Herding,
}

/// `w* = w - alpha P(|w - W|)(w - W) + eta d(w)`.
pub fn public_interaction(w: f64, background: f64, eta: f64, p: &ModelParams) -> f64 {
    w - p.alpha * compromise_p((w - background).abs(), p) * (w - background)
        + eta * diffusion_d(w, p)
}

/// Binary herding rule; returns `(w*, v*)`.
pub fn herding_interaction(w: f64, v: f64, eta1: f64, eta2: f64, p: &ModelParams) -> (f64, f64) {
    let shift = p.beta * herding_gamma(v, w, p) * (w - v);
    (
        w - shift + eta1 * diffusion_d(w, p),
        v + shift + eta2 * diffusion_d(v, p),
    )
}

/// Herding above the upper threshold, public information below the lower
/// one, a fair coin in between. `swap_rules` exchanges the two majorities.
pub fn select_rule<R: Rng + ?Sized>(frac_rational: f64, p: &ModelParams, rng: &mut R) -> Rule {
    let t = p.rule_thresholds;
    let (rational_rule, irrational_rule) = if p.swap_rules {
        (Rule::Public, Rule::Herding)
    } else {
        (Rule::Herding, Rule::Public)
    };
    if frac_rational > t.upper {
        rational_rule
    } else if frac_rational < t.lower {
        irrational_rule
    } else if rng.random_bool(0.5) {
        Rule::Public
    } else {
        Rule::Herding
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    Public { background: f64 },
    Herding { partner: usize },
}

/// One sampled interaction in rationality row `row`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub row: usize,
    pub source: usize,
    pub interaction: Interaction,
    pub eta1: f64,
    pub eta2: f64,
    /// Requested mass; capped by the mass available in the cells involved.
    pub quantum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventOutcome {
    Applied { moved: f64 },
    Rejected,
}

/// Density changes of one event along its row, with repeated cells merged.
struct Transfer {
    cells: [(usize, f64); 6],
    len: usize,
}

impl Transfer {
    fn new() -> Self {
        Transfer {
            cells: [(0, 0.0); 6],
            len: 0,
        }
    }

    fn add(&mut self, j: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        if let Some(slot) = self.cells[..self.len].iter_mut().find(|c| c.0 == j) {
            slot.1 += delta;
        } else {
            self.cells[self.len] = (j, delta);
            self.len += 1;
        }
    }

    fn entries(&self) -> &[(usize, f64)] {
        &self.cells[..self.len]
    }
}

fn plan_event(g: &DistributionGrid, ev: &Event, p: &ModelParams) -> Result<Option<Transfer>> {
    let (w_lo, w_hi) = g.w_bounds();
    let admissible = |w: f64| w >= w_lo && w <= w_hi;
    let area = g.cell_area();
    let w = g.w_center(ev.source);
    let f_src = g.get(ev.row, ev.source);
    let mut plan = Transfer::new();
    match ev.interaction {
        Interaction::Public { background } => {
            let w_star = public_interaction(w, background, ev.eta1, p);
            if !admissible(w_star) {
                return Ok(None);
            }
            let q = (ev.quantum / area).min(f_src);
            plan.add(ev.source, -q);
            for (j, a) in g.deposit_weights(w_star)? {
                plan.add(j, q * a);
            }
        }
        Interaction::Herding { partner } => {
            let v = g.w_center(partner);
            let (w_star, v_star) = herding_interaction(w, v, ev.eta1, ev.eta2, p);
            if !admissible(w_star) || !admissible(v_star) {
                return Ok(None);
            }
            let f_par = g.get(ev.row, partner);
            let q = if partner == ev.source {
                (ev.quantum / area).min(0.5 * f_src)
            } else {
                (ev.quantum / area).min(f_src).min(f_par)
            };
            plan.add(ev.source, -q);
            plan.add(partner, -q);
            for (j, a) in g.deposit_weights(w_star)? {
                plan.add(j, q * a);
            }
            for (j, a) in g.deposit_weights(v_star)? {
                plan.add(j, q * a);
            }
        }
    }
    Ok(Some(plan))
}

fn commit(g: &mut DistributionGrid, row: usize, plan: &Transfer) -> Result<()> {
    let n_w = g.n_w();
    let values = g.values_mut();
    for &(j, delta) in plan.entries() {
        let k = row * n_w + j;
        let v = values[k] + delta;
        if v < 0.0 {
            return Err(Error::NegativeCell { i: row, j, value: v });
        }
        values[k] = v;
    }
    Ok(())
}

/// Applies one event. The grid is left bit-identical when the event is rejected.
pub fn apply_event(g: &mut DistributionGrid, ev: &Event, p: &ModelParams) -> Result<EventOutcome> {
    match plan_event(g, ev, p)? {
        None => Ok(EventOutcome::Rejected),
        Some(plan) => {
            let moved = plan
                .entries()
                .iter()
                .filter(|c| c.1 < 0.0)
                .map(|c| -c.1)
                .sum::<f64>()
                * g.cell_area();
            commit(g, ev.row, &plan)?;
            Ok(EventOutcome::Applied { moved })
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CollisionStats {
    pub sampled: usize,
    pub public: usize,
    pub herding: usize,
    pub rejected: usize,
}

/// Running sums used to sample cells and evaluate rational fractions
/// without rescanning the grid on every event.
struct Tallies {
    rows: Vec<f64>,
    total: f64,
    rational: Vec<f64>,
    column: Vec<f64>,
    rational_row: Vec<bool>,
}

impl Tallies {
    fn new(g: &DistributionGrid) -> Self {
        let (n_x, n_w) = (g.n_x(), g.n_w());
        let mut rows = vec![0.0; n_x];
        let mut rational = vec![0.0; n_w];
        let mut column = vec![0.0; n_w];
        let rational_row: Vec<bool> = (0..n_x).map(|i| g.is_rational(i)).collect();
        for i in 0..n_x {
            for (j, &f) in g.row(i).iter().enumerate() {
                rows[i] += f;
                column[j] += f;
                if rational_row[i] {
                    rational[j] += f;
                }
            }
        }
        let total = rows.iter().sum();
        Tallies {
            rows,
            total,
            rational,
            column,
            rational_row,
        }
    }

    /// Threshold input of value column `j`: the rational share (0.5 for an
    /// empty column) or the rational density `sum_rational f dx`.
    fn rule_input(&self, j: usize, measure: RuleMeasure, dx: f64) -> f64 {
        match measure {
            RuleMeasure::RationalShare if self.column[j] > 0.0 => {
                (self.rational[j] / self.column[j]).clamp(0.0, 1.0)
            }
            RuleMeasure::RationalShare => 0.5,
            RuleMeasure::RationalDensity => self.rational[j].max(0.0) * dx,
        }
    }

    fn update(&mut self, row: usize, plan: &Transfer) {
        for &(j, d) in plan.entries() {
            self.rows[row] += d;
            self.total += d;
            self.column[j] += d;
            if self.rational_row[row] {
                self.rational[j] += d;
            }
        }
    }
}

/// Index drawn with probability proportional to `weights`, using the
/// (possibly slightly stale) sum `total`. `None` when nothing is positive.
fn sample_index(weights: &[f64], total: f64, u: f64) -> Option<usize> {
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(k);
            if acc > target {
                return Some(k);
            }
        }
    }
    last_positive
}

/// Number of events and per-event mass for one collision step.
pub fn event_budget(g: &DistributionGrid, dt: f64, p: &ModelParams, cfg: &CollisionConfig) -> Result<(usize, f64)> {
    let mass = g.total_mass();
    if mass <= 0.0 {
        return Ok((0, 0.0));
    }
    let turnover = cfg.turnover(dt, p);
    if turnover > 1.0 {
        return Err(Error::invalid(
            "dt",
            format!("collision turnover dt/tau = {turnover} exceeds 1; reduce dt or raise tau"),
        ));
    }
    let rate = cfg.events_per_step.unwrap_or((g.n_x() * g.n_w()) as f64);
    let n_ev = (rate * mass * turnover).round().max(1.0) as usize;
    let quantum = cfg.quantum_mass.unwrap_or(mass * turnover / n_ev as f64);
    Ok((n_ev, quantum))
}

/// Runs the collisional half-step on `g` at time `t`.
pub fn collision_step<R: Rng + ?Sized>(
    g: &mut DistributionGrid,
    t: f64,
    dt: f64,
    s: &Scenario,
    p: &ModelParams,
    cfg: &CollisionConfig,
    rng: &mut R,
) -> Result<CollisionStats> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let mut stats = CollisionStats::default();
    let (n_ev, quantum) = event_budget(g, dt, p, cfg)?;
    if n_ev == 0 {
        return Ok(stats);
    }
    let (w_lo, w_hi) = g.w_bounds();
    let background = background_w(t, s, w_lo, w_hi)?;
    let tau_min = p.tau_i.min(p.tau_h);
    let accept_public = tau_min / p.tau_i;
    let accept_herding = tau_min / p.tau_h;
    let mut tallies = Tallies::new(g);
    let dx = g.dx();

    for _ in 0..n_ev {
        let Some(row) = sample_index(&tallies.rows, tallies.total, rng.random()) else {
            break;
        };
        let Some(source) = sample_index(g.row(row), tallies.rows[row], rng.random()) else {
            continue;
        };
        stats.sampled += 1;
        let rule = match cfg.forced_rule {
            Some(rule) => rule,
            None => select_rule(tallies.rule_input(source, p.rule_measure, dx), p, rng),
        };
        let accept = match rule {
            Rule::Public => accept_public,
            Rule::Herding => accept_herding,
        };
        if accept < 1.0 && rng.random::<f64>() >= accept {
            continue;
        }
        let interaction = match rule {
            Rule::Public => Interaction::Public { background },
            Rule::Herding => {
                let Some(partner) = sample_index(g.row(row), tallies.rows[row], rng.random())
                else {
                    continue;
                };
                Interaction::Herding { partner }
            }
        };
        let eta1 = p.noise.sample(rng);
        let eta2 = match rule {
            Rule::Herding => p.noise.sample(rng),
            Rule::Public => 0.0,
        };
        let ev = Event {
            row,
            source,
            interaction,
            eta1,
            eta2,
            quantum,
        };
        match plan_event(g, &ev, p)? {
            None => stats.rejected += 1,
            Some(plan) => {
                commit(g, row, &plan)?;
                tallies.update(row, &plan);
                match rule {
                    Rule::Public => stats.public += 1,
                    Rule::Herding => stats.herding += 1,
                }
            }
        }
    }
    Ok(stats)
}
