//! Pair matching, correlation estimates and the CHSH statistic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::hv::{Generator, Outcome, Setting, StationStream};
use crate::quantum::singlet_correlation;
use crate::seed;
use crate::{Error, Result};

/// How detections at the two stations are paired up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoincidenceWindow {
    /// Pair by `pair_id`, with no selection.
    Unwindowed,
    /// Pair detections whose time tags differ by at most this many seconds.
    Window(f64),
}

impl CoincidenceWindow {
    pub fn new(width: f64) -> Result<Self> {
        if !(width.is_finite() && width >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coincidence window must be finite and non-negative, got {width}"
            )));
        }
        Ok(CoincidenceWindow::Window(width))
    }

    pub fn width(&self) -> Option<f64> {
        match self {
            CoincidenceWindow::Unwindowed => None,
            CoincidenceWindow::Window(w) => Some(*w),
        }
    }
}

/// One matched pair of detections; indices point into the input streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coincidence {
    pub index_a: usize,
    pub index_b: usize,
    pub outcome_a: Outcome,
    pub outcome_b: Outcome,
}

impl Coincidence {
    pub fn product(&self) -> i8 {
        self.outcome_a.value() * self.outcome_b.value()
    }

    pub fn transposed(&self) -> Self {
        Self {
            index_a: self.index_b,
            index_b: self.index_a,
            outcome_a: self.outcome_b,
            outcome_b: self.outcome_a,
        }
    }
}

fn check_sorted(s: &StationStream) -> Result<()> {
    match s.events.windows(2).position(|w| w[1].time_tag < w[0].time_tag) {
        Some(i) => Err(Error::UnsortedStream {
            station: s.station.tag(),
            index: i + 1,
        }),
        None => Ok(()),
    }
}

/// Match detections of two streams.
///
/// In windowed mode every candidate `(i, j)` with `|tA_i - tB_j| <= W` is
/// ranked by time difference and accepted greedily, each detection being
/// consumed at most once. Exact ties fall back to the midpoint time and then
/// the indices. The result is ordered by `index_a`.
pub fn match_coincidences(a: &StationStream, b: &StationStream, window: CoincidenceWindow) -> Result<Vec<Coincidence>> {
    match window {
        CoincidenceWindow::Unwindowed => match_by_pair_id(a, b),
        CoincidenceWindow::Window(w) => {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter(format!("bad coincidence window {w}")));
            }
            check_sorted(a)?;
            check_sorted(b)?;
            Ok(match_windowed(a, b, w))
        }
    }
}

fn match_by_pair_id(a: &StationStream, b: &StationStream) -> Result<Vec<Coincidence>> {
    if a.len() != b.len() {
        return Err(Error::PairIdMismatch(format!("{} vs {} records", a.len(), b.len())));
    }
    a.events
        .iter()
        .zip(&b.events)
        .enumerate()
        .map(|(i, (x, y))| {
            if x.pair_id != y.pair_id {
                return Err(Error::PairIdMismatch(format!(
                    "record {i}: pair {} vs pair {}",
                    x.pair_id, y.pair_id
                )));
            }
            Ok(Coincidence {
                index_a: i,
                index_b: i,
                outcome_a: x.outcome,
                outcome_b: y.outcome,
            })
        })
        .collect()
}

fn match_windowed(a: &StationStream, b: &StationStream, w: f64) -> Vec<Coincidence> {
    struct Candidate {
        gap: f64,
        mid: f64,
        i: usize,
        j: usize,
    }
    let ta: Vec<f64> = a.events.iter().map(|e| e.time_tag).collect();
    let tb: Vec<f64> = b.events.iter().map(|e| e.time_tag).collect();

    let mut candidates = Vec::new();
    let mut lo = 0;
    for (i, &t) in ta.iter().enumerate() {
        while lo < tb.len() && tb[lo] < t - w {
            lo += 1;
        }
        let mut j = lo;
        while j < tb.len() && tb[j] <= t + w {
            let gap = (t - tb[j]).abs();
            if gap <= w {
                candidates.push(Candidate {
                    gap,
                    mid: 0.5 * (t + tb[j]),
                    i,
                    j,
                });
            }
            j += 1;
        }
    }
    candidates.sort_by(|x, y| {
        x.gap
            .total_cmp(&y.gap)
            .then(x.mid.total_cmp(&y.mid))
            .then(x.i.cmp(&y.i))
            .then(x.j.cmp(&y.j))
    });

    let mut used_a = vec![false; ta.len()];
    let mut used_b = vec![false; tb.len()];
    let mut out = Vec::new();
    for c in candidates {
        if used_a[c.i] || used_b[c.j] {
            continue;
        }
        used_a[c.i] = true;
        used_b[c.j] = true;
        out.push(Coincidence {
            index_a: c.i,
            index_b: c.j,
            outcome_a: a.events[c.i].outcome,
            outcome_b: b.events[c.j].outcome,
        });
    }
    out.sort_by_key(|c| (c.index_a, c.index_b));
    out
}

/// Estimated `E(AB)` from matched ±1 pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub e_hat: f64,
    pub n_matched: usize,
    /// `sqrt((1 - e_hat²) / n_matched)`, the exact standard error of a mean
    /// of ±1 products.
    pub std_error: f64,
}

impl CorrelationEstimate {
    pub fn from_products(sum: i64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: n });
        }
        let e_hat = (sum as f64 / n as f64).clamp(-1.0, 1.0);
        let std_error = ((1.0 - e_hat * e_hat).max(0.0) / n as f64).sqrt();
        Ok(Self {
            e_hat,
            n_matched: n,
            std_error,
        })
    }
}

pub fn estimate_correlation(pairs: &[Coincidence]) -> Result<CorrelationEstimate> {
    let sum: i64 = pairs.iter().map(|c| i64::from(c.product())).sum();
    CorrelationEstimate::from_products(sum, pairs.len())
}

/// `|e_ab - e_ab'| + |e_a'b + e_a'b'|`.
pub fn chsh_statistic(e_ab: f64, e_ab_prime: f64, e_a_prime_b: f64, e_a_prime_b_prime: f64) -> Result<f64> {
    for (name, e) in [
        ("E(ab)", e_ab),
        ("E(ab')", e_ab_prime),
        ("E(a'b)", e_a_prime_b),
        ("E(a'b')", e_a_prime_b_prime),
    ] {
        if !(-1.0..=1.0).contains(&e) {
            return Err(Error::InvalidParameter(format!("{name} = {e} outside [-1, 1]")));
        }
    }
    Ok((e_ab - e_ab_prime).abs() + (e_a_prime_b + e_a_prime_b_prime).abs())
}

/// The four settings of a CHSH experiment, as spin directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingsQuadruple {
    pub a: Setting,
    pub a_prime: Setting,
    pub b: Setting,
    pub b_prime: Setting,
}

impl SettingsQuadruple {
    /// Labels `a, a', b, b'` at the given angles in degrees.
    pub fn from_degrees(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        Ok(Self {
            a: Setting::new("a", a.to_radians())?,
            a_prime: Setting::new("a'", a_prime.to_radians())?,
            b: Setting::new("b", b.to_radians())?,
            b_prime: Setting::new("b'", b_prime.to_radians())?,
        })
    }

    /// 0°, 90°, 45°, 135°: the quadruple that maximizes the singlet value.
    pub fn standard() -> Self {
        Self::from_degrees(0.0, 90.0, 45.0, 135.0).expect("finite angles")
    }

    /// `(a, b), (a, b'), (a', b), (a', b')`, the order used everywhere.
    pub fn pairs(&self) -> [(&Setting, &Setting); 4] {
        [
            (&self.a, &self.b),
            (&self.a, &self.b_prime),
            (&self.a_prime, &self.b),
            (&self.a_prime, &self.b_prime),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshResult {
    pub e_ab: CorrelationEstimate,
    pub e_ab_prime: CorrelationEstimate,
    pub e_a_prime_b: CorrelationEstimate,
    pub e_a_prime_b_prime: CorrelationEstimate,
    pub s: f64,
    pub s_std_error: f64,
}

impl ChshResult {
    pub fn from_estimates(e: [CorrelationEstimate; 4]) -> Result<Self> {
        let s = chsh_statistic(e[0].e_hat, e[1].e_hat, e[2].e_hat, e[3].e_hat)?;
        let s_std_error = e.iter().map(|x| x.std_error * x.std_error).sum::<f64>().sqrt();
        Ok(Self {
            e_ab: e[0],
            e_ab_prime: e[1],
            e_a_prime_b: e[2],
            e_a_prime_b_prime: e[3],
            s,
            s_std_error,
        })
    }

    pub fn estimates(&self) -> [CorrelationEstimate; 4] {
        [self.e_ab, self.e_ab_prime, self.e_a_prime_b, self.e_a_prime_b_prime]
    }
}

/// Generate, match and estimate one setting pair.
pub fn measure_correlation(
    generator: &Generator,
    a: &Setting,
    b: &Setting,
    n_pairs: u64,
    window: CoincidenceWindow,
    seed: u64,
) -> Result<CorrelationEstimate> {
    let (sa, sb) = generator.sample(a, b, n_pairs, seed)?;
    estimate_correlation(&match_coincidences(&sa, &sb, window)?)
}

/// Four independent runs, one per setting pair, each with its own seed
/// derived from `(seed, pass index)`. No state is shared between passes.
pub fn run_chsh_experiment(
    generator: &Generator,
    settings: &SettingsQuadruple,
    n_pairs: u64,
    window: CoincidenceWindow,
    seed: u64,
) -> Result<ChshResult> {
    let mut est = Vec::with_capacity(4);
    for (pass, (a, b)) in settings.pairs().into_iter().enumerate() {
        est.push(measure_correlation(
            generator,
            a,
            b,
            n_pairs,
            window,
            seed::derive(seed, &[pass as u64]),
        )?);
    }
    ChshResult::from_estimates(est.try_into().expect("four passes"))
}

/// One point of a correlation scan against the singlet curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub delta: f64,
    pub estimate: CorrelationEstimate,
    /// `n_matched / n_pairs`.
    pub match_fraction: f64,
    pub singlet: f64,
}

impl ScanPoint {
    pub fn deviation(&self) -> f64 {
        (self.estimate.e_hat - self.singlet).abs()
    }
}

/// `Δ_k = kπ/12`, k = 0..=12.
pub fn standard_delta_grid() -> Vec<f64> {
    (0..=12).map(|k| k as f64 * PI / 12.0).collect()
}

/// Sweep the setting difference: station A at Δ, station B at 0. Point `k`
/// is seeded with `(seed, k)`, so scans of different models share their
/// per-point random streams.
pub fn correlation_scan(
    generator: &Generator,
    deltas: &[f64],
    n_pairs: u64,
    window: CoincidenceWindow,
    seed: u64,
) -> Result<Vec<ScanPoint>> {
    let b = Setting::new("b", 0.0)?;
    deltas
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let a = Setting::new("a", delta)?;
            let estimate = measure_correlation(generator, &a, &b, n_pairs, window, seed::derive(seed, &[k as u64]))?;
            Ok(ScanPoint {
                delta,
                estimate,
                match_fraction: estimate.n_matched as f64 / n_pairs as f64,
                singlet: singlet_correlation(a.angle, b.angle),
            })
        })
        .collect()
}

pub fn max_deviation(points: &[ScanPoint]) -> f64 {
    points.iter().map(ScanPoint::deviation).fold(0.0, f64::max)
}
