use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub const SERIES_HEADER: &str = "t,m_w,m_x,V_w,mass,state";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum State {
    Bubble,
    Crash,
    Normal,
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            State::Bubble => "bubble",
            State::Crash => "crash",
            State::Normal => "normal",
        })
    }
}

impl FromStr for State {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bubble" => Ok(State::Bubble),
            "crash" => Ok(State::Crash),
            "normal" => Ok(State::Normal),
            other => Err(format!("unknown state `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    pub m_w: f64,
    pub m_x: f64,
    pub v_w: f64,
    pub mass: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TimeSeries {
    records: Vec<Record>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; times must increase strictly.
    pub fn push(&mut self, r: Record) -> Result<()> {
        if let Some(last) = self.records.last() {
            if !(r.t > last.t) {
                return Err(Error::invalid(
                    "series.t",
                    format!("times must increase strictly ({} after {})", r.t, last.t),
                ));
            }
        }
        self.records.push(r);
        Ok(())
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.t)
    }

    pub fn mean_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.m_w).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SERIES_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t, r.m_w, r.m_x, r.v_w, r.mass, r.state
            )?;
        }
        Ok(())
    }

    /// Parses the format produced by [`TimeSeries::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> std::result::Result<Self, String> {
        let mut lines = input.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == SERIES_HEADER => {}
            _ => return Err(format!("line 1: expected header `{SERIES_HEADER}`")),
        }
        let mut series = TimeSeries::new();
        for (k, line) in lines.enumerate() {
            let lineno = k + 2;
            let line = line.map_err(|e| format!("line {lineno}: {e}"))?;
            let cols: Vec<&str> = line.trim().split(',').collect();
            if cols.len() != 6 {
                return Err(format!("line {lineno}: expected 6 columns"));
            }
            let num = |c: &str| c.parse::<f64>().map_err(|e| format!("line {lineno}: {e}"));
            let record = Record {
                t: num(cols[0])?,
                m_w: num(cols[1])?,
                m_x: num(cols[2])?,
                v_w: num(cols[3])?,
                mass: num(cols[4])?,
                state: cols[5].parse().map_err(|e| format!("line {lineno}: {e}"))?,
            };
            series
                .push(record)
                .map_err(|e| format!("line {lineno}: {e}"))?;
        }
        Ok(series)
    }
}
