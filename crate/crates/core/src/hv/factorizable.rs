//! Mixed ensemble of independent local experiments.
//!
//! A source label λ = (λ1, λ2) is drawn with weight P(λ); inside a cell the
//! two stations respond independently with `P(+1 | x, λ1)` and
//! `P(+1 | y, λ2)`. Correlations come only from the mixture, which is why
//! every four-setting combination of these models obeys `S ≤ 2`.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_pairs, generate_chunked, into_streams, Detection, Outcome, Setting, Station, StationStream};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizableCell {
    pub weight: f64,
    /// `P(A = +1 | setting, λ1)` by setting label.
    pub alice: BTreeMap<String, f64>,
    /// `P(B = +1 | setting, λ2)` by setting label.
    pub bob: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizableModel {
    cells: Vec<FactorizableCell>,
}

impl FactorizableModel {
    pub fn new(cells: Vec<FactorizableCell>) -> Result<Self> {
        validate_weights(cells.iter().map(|c| c.weight))?;
        for (i, c) in cells.iter().enumerate() {
            for (label, &p) in c.alice.iter().chain(&c.bob) {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!(
                        "cell {i}, setting `{label}`: probability {p} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self { cells })
    }

    /// Random model over the given labels. Each response probability is 0
    /// or 1 with chance 1/4 each and uniform on `[0, 1)` otherwise, so both
    /// deterministic corners and interior cells are exercised.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_cells: usize, alice: &[&str], bob: &[&str]) -> Self {
        let draw = |rng: &mut R| -> f64 {
            match rng.random_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random(),
            }
        };
        let weights = random_weights(rng, n_cells);
        let cells = weights
            .into_iter()
            .map(|weight| FactorizableCell {
                weight,
                alice: alice.iter().map(|l| (l.to_string(), draw(rng))).collect(),
                bob: bob.iter().map(|l| (l.to_string(), draw(rng))).collect(),
            })
            .collect();
        Self::new(cells).expect("random weights are normalized")
    }

    pub fn cells(&self) -> &[FactorizableCell] {
        &self.cells
    }

    /// Exact `E(AB | x, y) = Σ P(λ) E(A | λ1, x) E(B | λ2, y)`.
    pub fn expected_correlation(&self, x: &str, y: &str) -> Result<f64> {
        let mut e = 0.0;
        for c in &self.cells {
            let pa = lookup(&c.alice, Station::A, x)?;
            let pb = lookup(&c.bob, Station::B, y)?;
            e += c.weight * (2.0 * pa - 1.0) * (2.0 * pb - 1.0);
        }
        Ok(e.clamp(-1.0, 1.0))
    }
}

fn lookup(map: &BTreeMap<String, f64>, station: Station, label: &str) -> Result<f64> {
    map.get(label).copied().ok_or_else(|| Error::UnknownSetting {
        station: station.tag(),
        label: label.to_string(),
    })
}

pub(crate) fn validate_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for w in weights {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("weight {w} outside [0, 1]")));
        }
        total += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidParameter("model needs at least one cell".into()));
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

pub(crate) fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // push the rounding residue onto the largest weight
    let resid = 1.0 - w.iter().sum::<f64>();
    let imax = (0..n).max_by(|&i, &j| w[i].total_cmp(&w[j])).unwrap();
    w[imax] += resid;
    w
}

/// Station response inside one λ-cell: a fresh local coin with `P(+1) = p_plus`.
pub(crate) fn local_coin<R: Rng + ?Sized>(p_plus: f64, rng: &mut R) -> Outcome {
    if rng.random::<f64>() < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Sample `n_pairs` from the mixture at setting labels `(x, y)`.
///
/// λ comes from the source stream; each station's coin comes from its own
/// stream.
pub fn sample_factorizable(
    model: &FactorizableModel,
    x: &Setting,
    y: &Setting,
    n_pairs: u64,
    seed: u64,
) -> Result<(StationStream, StationStream)> {
    check_pairs(n_pairs)?;
    let pa: Vec<f64> = model
        .cells
        .iter()
        .map(|c| lookup(&c.alice, Station::A, &x.label))
        .collect::<Result<_>>()?;
    let pb: Vec<f64> = model
        .cells
        .iter()
        .map(|c| lookup(&c.bob, Station::B, &y.label))
        .collect::<Result<_>>()?;
    let picker = WeightedIndex::new(model.cells.iter().map(|c| c.weight))
        .map_err(|e| Error::InvalidParameter(format!("cell weights: {e}")))?;

    let events = generate_chunked(n_pairs, |chunk, range| {
        let mut src = seed::rng(seed, &[seed::SOURCE, chunk]);
        let mut rng_a = seed::rng(seed, &[seed::STATION_A, chunk]);
        let mut rng_b = seed::rng(seed, &[seed::STATION_B, chunk]);
        let mut ea = Vec::with_capacity(range.clone().count());
        let mut eb = Vec::with_capacity(ea.capacity());
        for k in range {
            let cell = picker.sample(&mut src);
            let t = k as f64;
            ea.push(Detection {
                pair_id: k,
                outcome: local_coin(pa[cell], &mut rng_a),
                time_tag: t,
            });
            eb.push(Detection {
                pair_id: k,
                outcome: local_coin(pb[cell], &mut rng_b),
                time_tag: t,
            });
        }
        (ea, eb)
    });
    Ok(into_streams(x, y, events))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(w: f64, a: &[(&str, f64)], b: &[(&str, f64)]) -> FactorizableCell {
        FactorizableCell {
            weight: w,
            alice: a.iter().map(|(l, p)| (l.to_string(), *p)).collect(),
            bob: b.iter().map(|(l, p)| (l.to_string(), *p)).collect(),
        }
    }

    fn mean_product(a: &StationStream, b: &StationStream) -> f64 {
        a.events
            .iter()
            .zip(&b.events)
            .map(|(p, q)| (p.outcome.value() * q.outcome.value()) as f64)
            .sum::<f64>()
            / a.len() as f64
    }

    #[test]
    fn single_fair_cell_is_uncorrelated() {
        let m = FactorizableModel::new(vec![cell(1.0, &[("x", 0.5)], &[("y", 0.5)])]).unwrap();
        let n = 100_000;
        let (a, b) = sample_factorizable(
            &m,
            &Setting::new("x", 0.0).unwrap(),
            &Setting::new("y", 0.0).unwrap(),
            n,
            9,
        )
        .unwrap();
        assert!(mean_product(&a, &b).abs() <= 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn two_deterministic_cells_correlate_perfectly() {
        let m = FactorizableModel::new(vec![
            cell(0.5, &[("x", 1.0)], &[("y", 1.0)]),
            cell(0.5, &[("x", 0.0)], &[("y", 0.0)]),
        ])
        .unwrap();
        assert_eq!(m.expected_correlation("x", "y").unwrap(), 1.0);
        let (a, b) = sample_factorizable(
            &m,
            &Setting::new("x", 0.0).unwrap(),
            &Setting::new("y", 0.0).unwrap(),
            10_000,
            2,
        )
        .unwrap();
        assert_eq!(mean_product(&a, &b), 1.0);
    }

    #[test]
    fn unknown_label_is_rejected() {
        let m = FactorizableModel::new(vec![cell(1.0, &[("x", 0.5)], &[("y", 0.5)])]).unwrap();
        let err = sample_factorizable(
            &m,
            &Setting::new("x'", 0.0).unwrap(),
            &Setting::new("y", 0.0).unwrap(),
            10,
            0,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::UnknownSetting {
                station: 'A',
                label: "x'".into()
            }
        );
    }

    #[test]
    fn validation() {
        assert!(FactorizableModel::new(vec![]).is_err());
        assert!(FactorizableModel::new(vec![cell(0.7, &[], &[])]).is_err());
        assert!(FactorizableModel::new(vec![cell(1.0, &[("x", 1.2)], &[])]).is_err());
    }

    #[test]
    fn random_models_are_valid() {
        let mut rng = seed::rng(0, &[]);
        for n in 1..20 {
            let m = FactorizableModel::random(&mut rng, n, &["a", "a'"], &["b", "b'"]);
            let total: f64 = m.cells().iter().map(|c| c.weight).sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn converges_to_mixture_expectation() {
        let mut rng = seed::rng(42, &[]);
        let m = FactorizableModel::random(&mut rng, 5, &["x"], &["y"]);
        let n = 200_000;
        let (a, b) = sample_factorizable(
            &m,
            &Setting::new("x", 0.0).unwrap(),
            &Setting::new("y", 0.0).unwrap(),
            n,
            1,
        )
        .unwrap();
        let e = m.expected_correlation("x", "y").unwrap();
        assert!((mean_product(&a, &b) - e).abs() <= 4.0 / (n as f64).sqrt());
    }
}
