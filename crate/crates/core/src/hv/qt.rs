//! Nonlocal reference sampler drawing each pair from the singlet joint law.

use rand::Rng;

use super::{check_pairs, generate_chunked, into_streams, Detection, Outcome, Setting, StationStream};
use crate::quantum::singlet_joint_probabilities;
use crate::seed;
use crate::Result;

/// Draw `n_pairs` outcome pairs from `(1 - a·b·cos(θA - θB)) / 4`.
///
/// Both outcomes come from the shared source stream, so this sampler sees
/// both settings at once. Detectors are ideal: the two time tags of a pair
/// are equal, one unit apart between pairs.
pub fn sample_qt_oracle(a: &Setting, b: &Setting, n_pairs: u64, seed: u64) -> Result<(StationStream, StationStream)> {
    check_pairs(n_pairs)?;
    let law = singlet_joint_probabilities(a.angle, b.angle);
    // P(b = a | a), identical for both values of a
    let p_same = law.plus_plus * 2.0;
    let events = generate_chunked(n_pairs, |chunk, range| {
        let mut rng = seed::rng(seed, &[seed::SOURCE, chunk]);
        let mut ea = Vec::with_capacity(range.clone().count());
        let mut eb = Vec::with_capacity(ea.capacity());
        for k in range {
            let oa = if rng.random::<f64>() < 0.5 {
                Outcome::Plus
            } else {
                Outcome::Minus
            };
            let ob = if rng.random::<f64>() < p_same { oa } else { oa.flip() };
            let t = k as f64;
            ea.push(Detection {
                pair_id: k,
                outcome: oa,
                time_tag: t,
            });
            eb.push(Detection {
                pair_id: k,
                outcome: ob,
                time_tag: t,
            });
        }
        (ea, eb)
    });
    Ok(into_streams(a, b, events))
}
