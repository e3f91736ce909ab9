use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{bubble_crash_percentages, classify, Percentages};
use crate::collision::collision_step;
use crate::error::{Error, Result};
use crate::fokker_planck::FokkerPlanck;
use crate::grid::DistributionGrid;
use crate::scenario::{background_w, Scenario};
use crate::series::{Record, TimeSeries};
use crate::transport::Transport;

use super::config::{Mode, RunConfig};

fn record(g: &DistributionGrid, t: f64, cfg: &RunConfig) -> Result<Record> {
    let (w_lo, w_hi) = g.w_bounds();
    let background = background_w(t, &cfg.scenario, w_lo, w_hi)?;
    let m = g.moments(background);
    let mean = if m.mass > 0.0 { m.m_w / m.mass } else { background };
    Ok(Record {
        t,
        m_w: m.m_w,
        m_x: m.m_x,
        v_w: m.v_w,
        mass: m.mass,
        state: classify(mean, background, cfg.model.band_r),
    })
}

fn at_step(seed: u64, step: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Run {
        seed,
        step,
        source: Box::new(e),
    }
}

/// Initial kinetic density of a run.
pub fn initial_grid(cfg: &RunConfig) -> Result<DistributionGrid> {
    cfg.initial
        .grid(cfg.n_x, cfg.n_w, cfg.scenario.background.value_at(0.0))
}

/// One simulation: collision then transport on every step, recorded every
/// `cadence` steps and at `t = 0`.
pub fn run_single(cfg: &RunConfig, seed: u64) -> Result<TimeSeries> {
    cfg.validate()?;
    if cfg.mode == Mode::Fp {
        return run_fp(cfg);
    }
    let s = &cfg.scenario;
    let mut g = initial_grid(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transport = Transport::new(cfg.flux);
    let mut series = TimeSeries::new();
    series.push(record(&g, 0.0, cfg)?)?;
    for k in 0..s.steps() {
        let t = s.time_of(k);
        collision_step(&mut g, t, s.dt, s, &cfg.model, &cfg.collision, &mut rng)
            .map_err(at_step(seed, k))?;
        transport
            .step(&mut g, t, s.dt, s, &cfg.model)
            .map_err(at_step(seed, k))?;
        if (k + 1) % cfg.output.cadence == 0 {
            let r = record(&g, s.time_of(k + 1), cfg).map_err(at_step(seed, k))?;
            series.push(r)?;
        }
    }
    Ok(series)
}

/// Fokker-Planck run; the solver step is the largest stable step dividing
/// the horizon unless `fp.dt` is set.
pub fn run_fp(cfg: &RunConfig) -> Result<TimeSeries> {
    let p = &cfg.model;
    let s = &cfg.scenario;
    let profile = cfg.initial.profile(s.background.value_at(0.0));
    let w_max = cfg.fp.w_max.unwrap_or(4.0 * s.background.value_at(0.0));
    let bounds = (-cfg.fp.half_width, cfg.fp.half_width);
    let probe = DistributionGrid::from_fn(cfg.fp.n_x, cfg.fp.n_w, bounds, (0.0, w_max), &profile)?;
    let scale = cfg.initial.mass / probe.total_mass();
    let mut solver = FokkerPlanck::new(cfg.fp.clone(), p, s, |x, w| scale * profile(x, w))?;
    let steps = if s.horizon > 0.0 {
        (s.horizon / solver.dt()).ceil().max(1.0) as usize
    } else {
        0
    };
    if steps > 0 && cfg.fp.dt.is_none() {
        solver.set_dt(s.horizon / steps as f64)?;
    }
    let dt = solver.dt();
    let fp_scenario = Scenario {
        dt,
        ..s.clone()
    };
    let mut series = TimeSeries::new();
    series.push(record(solver.grid(), 0.0, cfg)?)?;
    for k in 0..steps {
        let t = k as f64 * dt;
        solver.step(t, p, &fp_scenario).map_err(at_step(s.seed, k))?;
        if (k + 1) % cfg.output.cadence == 0 {
            series.push(record(solver.grid(), (k + 1) as f64 * dt, cfg)?)?;
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub percentages: Percentages,
    #[serde(skip)]
    pub series: TimeSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub seeds: Vec<u64>,
    pub runs: Vec<RunSummary>,
    /// Mean of the per-run percentages.
    pub percentages: Percentages,
    #[serde(skip)]
    pub mean: TimeSeries,
}

/// Record-wise average of equally sampled series.
pub fn average_series(series: &[&TimeSeries], cfg: &RunConfig) -> Result<TimeSeries> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    let n = series.len() as f64;
    let mut out = TimeSeries::new();
    for (k, r0) in first.records().iter().enumerate() {
        let (mut m_w, mut m_x, mut v_w, mut mass) = (0.0, 0.0, 0.0, 0.0);
        for s in series {
            let r = s.records().get(k).ok_or(Error::SeriesTooShort {
                len: s.len(),
                needed: k,
            })?;
            m_w += r.m_w;
            m_x += r.m_x;
            v_w += r.v_w;
            mass += r.mass;
        }
        let (m_w, mass) = (m_w / n, mass / n);
        let background = cfg.scenario.background.value_at(r0.t);
        let mean = if mass > 0.0 { m_w / mass } else { background };
        out.push(Record {
            t: r0.t,
            m_w,
            m_x: m_x / n,
            v_w: v_w / n,
            mass,
            state: classify(mean, background, cfg.model.band_r),
        })?;
    }
    Ok(out)
}

fn mean_percentages(runs: &[RunSummary]) -> Percentages {
    let n = runs.len() as f64;
    let sum = |f: fn(&Percentages) -> f64| runs.iter().map(|r| f(&r.percentages)).sum::<f64>() / n;
    Percentages {
        bubble: sum(|p| p.bubble),
        crash: sum(|p| p.crash),
        normal: sum(|p| p.normal),
    }
}

/// Runs seeds `seed, seed + 1, ..., seed + E - 1` in parallel; the result
/// does not depend on scheduling.
pub fn run_ensemble(cfg: &RunConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    let base = cfg.scenario.seed;
    let seeds: Vec<u64> = (0..cfg.scenario.ensemble as u64).map(|i| base + i).collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let series = run_single(cfg, seed)?;
            let percentages = bubble_crash_percentages(&series, &cfg.scenario, cfg.model.band_r)?;
            Ok(RunSummary {
                seed,
                percentages,
                series,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&TimeSeries> = runs.iter().map(|r| &r.series).collect();
    let mean = average_series(&refs, cfg)?;
    Ok(EnsembleResult {
        seeds,
        percentages: mean_percentages(&runs),
        runs,
        mean,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub beta: f64,
    pub result: EnsembleResult,
}

/// Ensembles over the grid `alphas x betas`; an empty list keeps the
/// configured value.
pub fn sweep(cfg: &RunConfig, alphas: &[f64], betas: &[f64]) -> Result<Vec<SweepPoint>> {
    let alphas = if alphas.is_empty() { vec![cfg.model.alpha] } else { alphas.to_vec() };
    let betas = if betas.is_empty() { vec![cfg.model.beta] } else { betas.to_vec() };
    let grid: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| alphas.iter().map(move |&a| (a, b)))
        .collect();
    grid.par_iter()
        .map(|&(alpha, beta)| {
            let mut point = cfg.clone();
            point.model.alpha = alpha;
            point.model.beta = beta;
            Ok(SweepPoint {
                alpha,
                beta,
                result: run_ensemble(&point)?,
            })
        })
        .collect()
}

/// First recorded time at or after `after` at which the mean value lies in
/// `[W - R, W + R]`, or `None` if it never does.
pub fn reentry_time(series: &TimeSeries, cfg: &RunConfig, after: f64) -> Option<f64> {
    series
        .records()
        .iter()
        .filter(|r| r.t >= after)
        .find(|r| {
            let w = cfg.scenario.background.value_at(r.t);
            (r.m_w / r.mass - w).abs() <= cfg.model.band_r
        })
        .map(|r| r.t)
}
