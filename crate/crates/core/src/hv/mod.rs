//! Event generators for two-station correlation experiments.
//!
//! Each generator emits one [`StationStream`] per station. Generation is
//! partitioned into fixed-size chunks of pair indices; chunk `c` of a run
//! draws from generators derived from `(seed, tag, c)` where the tag names
//! the source or one of the stations (see [`crate::seed`]). Output is
//! therefore identical whether chunks run sequentially or on a thread pool.

mod calibrate;
mod contextual;
mod deterministic;
mod factorizable;
mod qt;

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quantum::AnalyzerSetting;
use crate::{Error, Result};

pub use calibrate::{calibrate_contextual, CalibrationCell, CalibrationReport};
pub use contextual::{sample_contextual_event, ContextualEventModel, ContextualStation, SourceConvention};
pub use deterministic::{sample_deterministic, DeterministicCell, DeterministicSharedSpaceModel};
pub use factorizable::{sample_factorizable, FactorizableCell, FactorizableModel};
pub use qt::sample_qt_oracle;

/// Pair indices per generation chunk.
pub const CHUNK_PAIRS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Station {
    A,
    B,
}

impl Station {
    pub fn tag(self) -> char {
        match self {
            Station::A => 'A',
            Station::B => 'B',
        }
    }
}

impl fmt::Display for Station {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// A single ±1 detection outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
#[repr(i8)]
pub enum Outcome {
    Plus = 1,
    Minus = -1,
}

impl Outcome {
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl TryFrom<i8> for Outcome {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::InvalidParameter(format!("outcome must be 1 or -1, got {other}"))),
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value()
    }
}

/// A labelled analyzer setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub label: String,
    pub angle: AnalyzerSetting,
}

impl Setting {
    pub fn new(label: impl Into<String>, radians: f64) -> Result<Self> {
        Ok(Self {
            label: label.into(),
            angle: AnalyzerSetting::new(radians)?,
        })
    }
}

/// One detection inside a stream; station and setting live on the stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub pair_id: u64,
    pub outcome: Outcome,
    pub time_tag: f64,
}

/// Fully qualified detection event, as persisted in event logs.
#[derive(Debug, Clone, PartialEq)]
pub struct StationRecord {
    pub pair_id: u64,
    pub station: Station,
    pub setting_label: String,
    pub setting: AnalyzerSetting,
    pub outcome: Outcome,
    pub time_tag: f64,
}

/// Detections of one station during one run at a fixed setting.
#[derive(Debug, Clone, PartialEq)]
pub struct StationStream {
    pub station: Station,
    pub setting: Setting,
    pub events: Vec<Detection>,
}

impl StationStream {
    /// Build a stream, checking that pair ids strictly increase and time tags
    /// are finite and non-negative.
    pub fn new(station: Station, setting: Setting, events: Vec<Detection>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if !(e.time_tag.is_finite() && e.time_tag >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "station {station} event {i}: time tag {} is not a finite non-negative number",
                    e.time_tag
                )));
            }
            if i > 0 && events[i - 1].pair_id >= e.pair_id {
                return Err(Error::InvalidParameter(format!(
                    "station {station} event {i}: pair ids must strictly increase"
                )));
            }
        }
        Ok(Self {
            station,
            setting,
            events,
        })
    }

    /// Rebuild a stream from flat records, which must all share one station
    /// and one setting.
    pub fn from_records(records: &[StationRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidParameter("cannot build a stream from zero records".into()))?;
        let setting = Setting {
            label: first.setting_label.clone(),
            angle: first.setting,
        };
        let mut events = Vec::with_capacity(records.len());
        for r in records {
            if r.station != first.station || r.setting_label != setting.label || r.setting != setting.angle {
                return Err(Error::InvalidParameter(format!(
                    "pair {}: a stream must have a single station and setting",
                    r.pair_id
                )));
            }
            events.push(Detection {
                pair_id: r.pair_id,
                outcome: r.outcome,
                time_tag: r.time_tag,
            });
        }
        Self::new(first.station, setting, events)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = StationRecord> + '_ {
        self.events.iter().map(move |e| StationRecord {
            pair_id: e.pair_id,
            station: self.station,
            setting_label: self.setting.label.clone(),
            setting: self.setting.angle,
            outcome: e.outcome,
            time_tag: e.time_tag,
        })
    }
}

/// Any of the four generators, as selected by an experiment recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    QuantumOracle,
    Factorizable(FactorizableModel),
    Deterministic(DeterministicSharedSpaceModel),
    Contextual(ContextualEventModel),
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::QuantumOracle => "qt",
            Generator::Factorizable(_) => "factorizable",
            Generator::Deterministic(_) => "deterministic",
            Generator::Contextual(_) => "contextual",
        }
    }

    /// Run one setting pair. Settings are spin directions; the contextual
    /// model is photon-like, so its analyzers are placed at half the spin
    /// angle and its streams carry those analyzer angles.
    pub fn sample(&self, a: &Setting, b: &Setting, n_pairs: u64, seed: u64) -> Result<(StationStream, StationStream)> {
        match self {
            Generator::QuantumOracle => sample_qt_oracle(a, b, n_pairs, seed),
            Generator::Factorizable(m) => sample_factorizable(m, a, b, n_pairs, seed),
            Generator::Deterministic(m) => sample_deterministic(m, a, b, n_pairs, seed),
            Generator::Contextual(m) => {
                let half = |s: &Setting| Setting {
                    label: s.label.clone(),
                    angle: AnalyzerSetting::new(0.5 * s.angle.radians()).expect("half of a reduced angle is finite"),
                };
                sample_contextual_event(m, &half(a), &half(b), n_pairs, seed)
            }
        }
    }
}

pub(crate) fn check_pairs(n_pairs: u64) -> Result<()> {
    if n_pairs == 0 {
        return Err(Error::InvalidParameter("n_pairs must be at least 1".into()));
    }
    Ok(())
}

/// Run `chunk` over every chunk of `0..n_pairs` in parallel and concatenate
/// the per-station outputs in pair order.
pub(crate) fn generate_chunked<F>(n_pairs: u64, chunk: F) -> (Vec<Detection>, Vec<Detection>)
where
    F: Fn(u64, Range<u64>) -> (Vec<Detection>, Vec<Detection>) + Sync,
{
    let n_chunks = n_pairs.div_ceil(CHUNK_PAIRS);
    let parts: Vec<_> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK_PAIRS;
            let hi = (lo + CHUNK_PAIRS).min(n_pairs);
            chunk(c, lo..hi)
        })
        .collect();
    let mut a = Vec::with_capacity(n_pairs as usize);
    let mut b = Vec::with_capacity(n_pairs as usize);
    for (pa, pb) in parts {
        a.extend(pa);
        b.extend(pb);
    }
    (a, b)
}

pub(crate) fn into_streams(
    a: &Setting,
    b: &Setting,
    (ea, eb): (Vec<Detection>, Vec<Detection>),
) -> (StationStream, StationStream) {
    (
        StationStream {
            station: Station::A,
            setting: a.clone(),
            events: ea,
        },
        StationStream {
            station: Station::B,
            setting: b.clone(),
            events: eb,
        },
    )
}
