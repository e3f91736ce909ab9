//! Bubble/crash statistics and Bollinger bands of mean-value time series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::series::{State, TimeSeries};

/// Bubble above `W + R`, crash below `W - R`; the band edges are normal.
pub fn classify(m_w: f64, background: f64, band_r: f64) -> State {
    if m_w > background + band_r {
        State::Bubble
    } else if m_w < background - band_r {
        State::Crash
    } else {
        State::Normal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percentages {
    pub bubble: f64,
    pub crash: f64,
    pub normal: f64,
}

/// Share of records (in percent) classified bubble, crash and normal, using
/// the series' per-unit-mass mean value against `W(t)`.
pub fn bubble_crash_percentages(series: &TimeSeries, s: &Scenario, band_r: f64) -> Result<Percentages> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (mut bubble, mut crash) = (0usize, 0usize);
    for r in series.records() {
        match classify(r.m_w / r.mass, s.background.value_at(r.t), band_r) {
            State::Bubble => bubble += 1,
            State::Crash => crash += 1,
            State::Normal => {}
        }
    }
    let n = series.len();
    let normal = n - bubble - crash;
    let pct = |k: usize| 100.0 * k as f64 / n as f64;
    Ok(Percentages {
        bubble: pct(bubble),
        crash: pct(crash),
        normal: pct(normal),
    })
}

/// How the deviation inside `sigma` is centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaCentering {
    /// Each lagged value is compared with the moving average at its own time.
    #[default]
    LaggedAverages,
    /// Textbook variant: every lagged value is compared with the current average.
    CurrentAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandSpec {
    pub window: usize,
    pub width: f64,
    pub centering: SigmaCentering,
}

impl Default for BandSpec {
    fn default() -> Self {
        BandSpec {
            window: 30,
            width: 2.0,
            centering: SigmaCentering::LaggedAverages,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandRecord {
    pub t: f64,
    pub moving_average: f64,
    pub sigma: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BollingerBands {
    pub spec: BandSpec,
    pub records: Vec<BandRecord>,
}

pub const BANDS_HEADER: &str = "t,M_n,sigma,r_plus,r_minus,bandwidth";

/// Bollinger bands of the mean-value column.
///
/// The moving average at step `k` averages the `n` preceding values
/// `m(t_{k-1}), ..., m(t_{k-n})`. Bands are emitted from step `n` on. The
/// lagged averages needed by `sigma` at steps `k < 2n` fall before the first
/// full window; they use the values available up to that time (the first
/// value alone at step 0).
pub fn bollinger(series: &TimeSeries, spec: BandSpec) -> Result<BollingerBands> {
    let n = spec.window;
    if n < 2 {
        return Err(Error::invalid("bands.window", "must be >= 2"));
    }
    if !(spec.width > 0.0) {
        return Err(Error::invalid("bands.width", "must be > 0"));
    }
    if series.len() <= n {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: n,
        });
    }
    let m = series.mean_values();
    let len = m.len();
    // anchored at the window's first value so constant stretches average exactly
    let averages: Vec<f64> = (0..len)
        .map(|k| {
            if k == 0 {
                return m[0];
            }
            let lo = k.saturating_sub(n);
            let anchor = m[lo];
            anchor + m[lo..k].iter().map(|v| v - anchor).sum::<f64>() / (k - lo) as f64
        })
        .collect();
    let average = |k: usize| averages[k];
    let times: Vec<f64> = series.times().collect();
    let mut records = Vec::with_capacity(len - n);
    for k in n..len {
        let mk = average(k);
        let ss: f64 = (1..=n)
            .map(|l| {
                let centre = match spec.centering {
                    SigmaCentering::LaggedAverages => average(k - l),
                    SigmaCentering::CurrentAverage => mk,
                };
                (m[k - l] - centre).powi(2)
            })
            .sum();
        let sigma = (ss / (n - 1) as f64).sqrt();
        records.push(BandRecord {
            t: times[k],
            moving_average: mk,
            sigma,
            upper: mk + spec.width * sigma,
            lower: mk - spec.width * sigma,
        });
    }
    Ok(BollingerBands { spec, records })
}

/// `B(t) = 100 (R+ - R-) / W(t)` per band record.
pub fn bandwidth(bands: &BollingerBands, s: &Scenario) -> Result<Vec<f64>> {
    bands
        .records
        .iter()
        .map(|r| {
            let w = s.background.value_at(r.t);
            if w == 0.0 {
                Err(Error::ZeroBackground { t: r.t })
            } else {
                Ok(100.0 * (r.upper - r.lower) / w)
            }
        })
        .collect()
}

impl BollingerBands {
    pub fn write_csv<W: std::io::Write>(&self, widths: &[f64], mut out: W) -> std::io::Result<()> {
        writeln!(out, "{BANDS_HEADER}")?;
        for (r, b) in self.records.iter().zip(widths) {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t, r.moving_average, r.sigma, r.upper, r.lower, b
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Background;
    use crate::series::Record;

    fn series_of(values: &[f64]) -> TimeSeries {
        let mut s = TimeSeries::new();
        for (k, &m_w) in values.iter().enumerate() {
            s.push(Record {
                t: k as f64 * 0.01,
                m_w,
                m_x: 0.0,
                v_w: 0.0,
                mass: 1.0,
                state: State::Normal,
            })
            .unwrap();
        }
        s
    }

    fn constant_scenario(w: f64) -> Scenario {
        Scenario {
            background: Background::Constant { value: w },
            ..Scenario::default()
        }
    }

    #[test]
    fn classification() {
        assert_eq!(classify(0.53, 0.5, 0.025), State::Bubble);
        assert_eq!(classify(0.47, 0.5, 0.025), State::Crash);
        assert_eq!(classify(0.51, 0.5, 0.025), State::Normal);
        assert_eq!(classify(0.5 + 0.025, 0.5, 0.025), State::Normal);
    }

    #[test]
    fn percentages() {
        let s = constant_scenario(0.5);
        let p = bubble_crash_percentages(&series_of(&[0.5; 10]), &s, 0.025).unwrap();
        assert_eq!((p.bubble, p.crash), (0.0, 0.0));
        let p = bubble_crash_percentages(&series_of(&[0.9; 10]), &s, 0.025).unwrap();
        assert_eq!((p.bubble, p.crash), (100.0, 0.0));
        let mut v = vec![0.5; 100];
        v[..30].iter_mut().for_each(|x| *x = 0.6);
        v[50..60].iter_mut().for_each(|x| *x = 0.4);
        let p = bubble_crash_percentages(&series_of(&v), &s, 0.025).unwrap();
        assert_eq!((p.bubble, p.crash, p.normal), (30.0, 10.0, 60.0));
        assert!(matches!(
            bubble_crash_percentages(&TimeSeries::new(), &s, 0.025),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn constant_series_has_flat_bands() {
        let b = bollinger(&series_of(&[0.42; 50]), BandSpec::default()).unwrap();
        assert_eq!(b.records.len(), 20);
        for r in &b.records {
            assert!((r.moving_average - 0.42).abs() < 1e-15);
            assert_eq!(r.sigma, 0.0);
            assert_eq!(r.upper, r.lower);
        }
        let w = bandwidth(&b, &constant_scenario(0.5)).unwrap();
        assert!(w.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn alternating_series_is_symmetric() {
        let v: Vec<f64> = (0..80).map(|k| if k % 2 == 0 { 0.6 } else { 0.4 }).collect();
        let spec = BandSpec {
            window: 10,
            width: 5.0,
            ..BandSpec::default()
        };
        let b = bollinger(&series_of(&v), spec).unwrap();
        for r in &b.records[20..] {
            assert!(r.sigma > 0.0);
            assert!((r.moving_average - 0.5).abs() < 1e-12);
            assert!(((r.upper - 0.5) + (r.lower - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_ramp_moving_average() {
        let h = 0.01;
        let v: Vec<f64> = (0..12).map(|l| l as f64 * h).collect();
        let spec = BandSpec {
            window: 3,
            width: 2.0,
            ..BandSpec::default()
        };
        let b = bollinger(&series_of(&v), spec).unwrap();
        for (r, k) in b.records.iter().zip(3..) {
            assert!((r.moving_average - (k as f64 - 2.0) * h).abs() < 1e-15);
        }
        // from k = 2n on every lagged average is a full window and the ramp
        // deviation m(t_j) - M(t_j) = 2h for all lags
        let expect = (3.0 * (2.0 * h) * (2.0 * h) / 2.0f64).sqrt();
        for r in &b.records[3..] {
            assert!((r.sigma - expect).abs() < 1e-15, "{}", r.sigma);
        }
    }

    #[test]
    fn short_series_is_an_error() {
        assert!(matches!(
            bollinger(&series_of(&[0.5; 30]), BandSpec::default()),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn bandwidth_scales_with_width() {
        let v: Vec<f64> = (0..200).map(|k| 0.5 + 0.05 * (k as f64 * 0.3).sin()).collect();
        let s = series_of(&v);
        let one = bollinger(&s, BandSpec { width: 1.0, ..BandSpec::default() }).unwrap();
        let two = bollinger(&s, BandSpec { width: 2.0, ..BandSpec::default() }).unwrap();
        let sc = constant_scenario(0.5);
        let b1 = bandwidth(&one, &sc).unwrap();
        let b2 = bandwidth(&two, &sc).unwrap();
        for (a, b) in b1.iter().zip(&b2) {
            assert!((2.0 * a - b).abs() < 1e-12);
            assert!(*a >= 0.0);
        }
    }

    #[test]
    fn zero_background_bandwidth_is_an_error() {
        let b = bollinger(&series_of(&[0.5; 40]), BandSpec::default()).unwrap();
        assert!(matches!(
            bandwidth(&b, &constant_scenario(0.0)),
            Err(Error::ZeroBackground { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn classify_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, w in 0.1f64..0.9) {
                let rank = |s: State| match s { State::Crash => 0, State::Normal => 1, State::Bubble => 2 };
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(rank(classify(lo, w, 0.025)) <= rank(classify(hi, w, 0.025)));
            }

            #[test]
            fn percentages_sum_to_hundred(v in proptest::collection::vec(0.0f64..1.0, 1..200)) {
                let p = bubble_crash_percentages(&series_of(&v), &constant_scenario(0.5), 0.025).unwrap();
                prop_assert!((p.bubble + p.crash + p.normal - 100.0).abs() < 1e-9);
                prop_assert!(p.bubble + p.crash <= 100.0);
            }

            #[test]
            fn bands_bracket_the_average(v in proptest::collection::vec(0.0f64..1.0, 40..120)) {
                let b = bollinger(&series_of(&v), BandSpec::default()).unwrap();
                prop_assert_eq!(b.records.len(), v.len() - 30);
                for r in &b.records {
                    prop_assert!(r.upper >= r.moving_average && r.moving_average >= r.lower);
                    prop_assert!(r.sigma >= 0.0);
                }
            }
        }
    }
}
