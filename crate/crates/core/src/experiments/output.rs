use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytics::{bandwidth, bollinger, Percentages};
use crate::error::{Error, Result};

use super::config::RunConfig;
use super::runner::{EnsembleResult, SweepPoint};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    f(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Summary<'a> {
    seeds: &'a [u64],
    percentages: Percentages,
    runs: &'a [super::runner::RunSummary],
    records: usize,
    config: &'a RunConfig,
}

/// Writes `run_<seed>.csv` per run, `ensemble.csv`, `summary.json` and,
/// when enabled, `bands.csv` into `dir`. Returns the written paths.
pub fn emit_results(res: &EnsembleResult, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for run in &res.runs {
        let path = dir.join(format!("run_{}.csv", run.seed));
        write_with(&path, |out| run.series.write_csv(out))?;
        written.push(path);
    }
    let path = dir.join("ensemble.csv");
    write_with(&path, |out| res.mean.write_csv(out))?;
    written.push(path);

    if cfg.output.emit_bands {
        let bands = bollinger(&res.mean, cfg.output.bands)?;
        let widths = bandwidth(&bands, &cfg.scenario)?;
        let path = dir.join("bands.csv");
        write_with(&path, |out| bands.write_csv(&widths, out))?;
        written.push(path);
    }

    let summary = Summary {
        seeds: &res.seeds,
        percentages: res.percentages,
        runs: &res.runs,
        records: res.mean.len(),
        config: cfg,
    };
    let path = dir.join("summary.json");
    write_with(&path, |out| {
        serde_json::to_writer_pretty(&mut *out, &summary)?;
        writeln!(out)
    })?;
    written.push(path);
    Ok(written)
}

pub const SWEEP_HEADER: &str = "alpha,beta,bubble,crash,normal";

/// One subdirectory `alpha_<a>_beta_<b>` per point plus `sweep.csv`.
pub fn emit_sweep(points: &[SweepPoint], cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for pt in points {
        let mut point_cfg = cfg.clone();
        point_cfg.model.alpha = pt.alpha;
        point_cfg.model.beta = pt.beta;
        let sub = dir.join(format!("alpha_{}_beta_{}", pt.alpha, pt.beta));
        written.extend(emit_results(&pt.result, &point_cfg, &sub)?);
    }
    let path = dir.join("sweep.csv");
    write_with(&path, |out| {
        writeln!(out, "{SWEEP_HEADER}")?;
        for pt in points {
            let p = pt.result.percentages;
            writeln!(out, "{},{},{},{},{}", pt.alpha, pt.beta, p.bubble, p.crash, p.normal)?;
        }
        Ok(())
    })?;
    written.push(path);
    Ok(written)
}
