//! Predetermined outcomes on a single shared probability space.
//!
//! A label λ is drawn with weight P(λ) and the stations evaluate fixed
//! response tables `A(λ1, x)` and `B(λ2, y)` with no further randomness.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::factorizable::{random_weights, validate_weights};
use super::{check_pairs, generate_chunked, into_streams, Detection, Outcome, Setting, Station, StationStream};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterministicCell {
    pub weight: f64,
    pub alice: BTreeMap<String, Outcome>,
    pub bob: BTreeMap<String, Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicSharedSpaceModel {
    cells: Vec<DeterministicCell>,
}

impl DeterministicSharedSpaceModel {
    pub fn new(cells: Vec<DeterministicCell>) -> Result<Self> {
        validate_weights(cells.iter().map(|c| c.weight))?;
        Ok(Self { cells })
    }

    /// Random response tables over the given labels.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_cells: usize, alice: &[&str], bob: &[&str]) -> Self {
        let sign = |rng: &mut R| {
            if rng.random::<bool>() {
                Outcome::Plus
            } else {
                Outcome::Minus
            }
        };
        let cells = random_weights(rng, n_cells)
            .into_iter()
            .map(|weight| DeterministicCell {
                weight,
                alice: alice.iter().map(|l| (l.to_string(), sign(rng))).collect(),
                bob: bob.iter().map(|l| (l.to_string(), sign(rng))).collect(),
            })
            .collect();
        Self::new(cells).expect("random weights are normalized")
    }

    pub fn cells(&self) -> &[DeterministicCell] {
        &self.cells
    }

    /// Exact `Σ P(λ) A(λ1, x) B(λ2, y)`.
    pub fn expected_correlation(&self, x: &str, y: &str) -> Result<f64> {
        let mut e = 0.0;
        for c in &self.cells {
            let a = response(&c.alice, Station::A, x)?;
            let b = response(&c.bob, Station::B, y)?;
            e += c.weight * f64::from(a.value() * b.value());
        }
        // weights sum to 1 only up to rounding
        Ok(e.clamp(-1.0, 1.0))
    }
}

fn response(map: &BTreeMap<String, Outcome>, station: Station, label: &str) -> Result<Outcome> {
    map.get(label).copied().ok_or_else(|| Error::UnknownSetting {
        station: station.tag(),
        label: label.to_string(),
    })
}

/// Sample `n_pairs` at setting labels `(x, y)`; only λ is random.
pub fn sample_deterministic(
    model: &DeterministicSharedSpaceModel,
    x: &Setting,
    y: &Setting,
    n_pairs: u64,
    seed: u64,
) -> Result<(StationStream, StationStream)> {
    check_pairs(n_pairs)?;
    let ra: Vec<Outcome> = model
        .cells
        .iter()
        .map(|c| response(&c.alice, Station::A, &x.label))
        .collect::<Result<_>>()?;
    let rb: Vec<Outcome> = model
        .cells
        .iter()
        .map(|c| response(&c.bob, Station::B, &y.label))
        .collect::<Result<_>>()?;
    let picker = WeightedIndex::new(model.cells.iter().map(|c| c.weight))
        .map_err(|e| Error::InvalidParameter(format!("cell weights: {e}")))?;

    let events = generate_chunked(n_pairs, |chunk, range| {
        let mut src = seed::rng(seed, &[seed::SOURCE, chunk]);
        let mut ea = Vec::with_capacity(range.clone().count());
        let mut eb = Vec::with_capacity(ea.capacity());
        for k in range {
            let cell = picker.sample(&mut src);
            let t = k as f64;
            ea.push(Detection {
                pair_id: k,
                outcome: ra[cell],
                time_tag: t,
            });
            eb.push(Detection {
                pair_id: k,
                outcome: rb[cell],
                time_tag: t,
            });
        }
        (ea, eb)
    });
    Ok(into_streams(x, y, events))
}
