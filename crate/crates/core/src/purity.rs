//! Nonparametric purity tests.
//!
//! A pure ensemble yields i.i.d. outcomes, so any sub-run of an experiment
//! should look like any other. The Wald–Wolfowitz runs test checks a binary
//! stream for clustering or over-alternation; the Mann–Whitney U test checks
//! two samples for a location difference. [`split_sample_purity`] combines
//! them over contiguous blocks of one series.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::{Error, Result};

/// Below this size on either side, `mann_whitney_u` enumerates the exact null.
pub const EXACT_THRESHOLD: usize = 8;
/// Cap on `n · m · max_rank_sum` cells in the exact enumeration.
pub const EXACT_WORK_LIMIT: u128 = 400_000_000;
/// Family-wise level of [`split_sample_purity`].
pub const PURITY_LEVEL: f64 = 0.05;

fn two_sided_normal_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Sequence over a two-letter alphabet. Symbols are stored as `false` for
/// the first letter and `true` for the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySequence {
    symbols: Vec<bool>,
}

impl BinarySequence {
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        Self {
            symbols: bits.into_iter().collect(),
        }
    }

    /// Parse a string of at most two distinct characters. The smaller
    /// character maps to the first letter.
    pub fn parse(s: &str) -> Result<Self> {
        let mut letters: Vec<char> = s.chars().collect();
        letters.sort_unstable();
        letters.dedup();
        if letters.len() > 2 {
            return Err(Error::InvalidParameter(format!(
                "binary sequence uses {} distinct symbols",
                letters.len()
            )));
        }
        let first = letters.first().copied();
        Ok(Self::from_bits(s.chars().map(|c| Some(c) != first)))
    }

    pub fn symbols(&self) -> &[bool] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `(n1, n2)`: occurrences of the first and second letter.
    pub fn counts(&self) -> (usize, usize) {
        let n2 = self.symbols.iter().filter(|&&b| b).count();
        (self.symbols.len() - n2, n2)
    }

    pub fn reversed(&self) -> Self {
        Self::from_bits(self.symbols.iter().rev().copied())
    }
}

/// Number of maximal blocks of equal symbols.
pub fn count_runs(seq: &BinarySequence) -> Result<usize> {
    if seq.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    Ok(1 + seq.symbols.windows(2).filter(|w| w[0] != w[1]).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunsTestReport {
    pub runs: usize,
    pub n1: usize,
    pub n2: usize,
    pub expected_runs: f64,
    pub variance: f64,
    pub z: f64,
    pub p_value: f64,
    /// False when `min(n1, n2) < 10`, where the normal law is a poor fit.
    pub normal_approximation_reliable: bool,
}

/// Expected run count and its variance under random arrangement of
/// `n1` and `n2` symbols.
pub fn runs_moments(n1: usize, n2: usize) -> (f64, f64) {
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let two_ab = 2.0 * a * b;
    let mean = 1.0 + two_ab / n;
    let var = if n > 1.0 {
        two_ab * (two_ab - n) / (n * n * (n - 1.0))
    } else {
        0.0
    };
    (mean, var)
}

/// Wald–Wolfowitz runs test with a two-sided normal p-value.
pub fn runs_test(seq: &BinarySequence) -> Result<RunsTestReport> {
    let runs = count_runs(seq)?;
    let (n1, n2) = seq.counts();
    if n1 == 0 || n2 == 0 {
        return Err(Error::Degenerate("runs test needs both symbols present".into()));
    }
    let (expected_runs, variance) = runs_moments(n1, n2);
    let (z, p_value) = if variance > 0.0 {
        let z = (runs as f64 - expected_runs) / variance.sqrt();
        (z, two_sided_normal_p(z))
    } else {
        (0.0, 1.0)
    };
    Ok(RunsTestReport {
        runs,
        n1,
        n2,
        expected_runs,
        variance,
        z,
        p_value,
        normal_approximation_reliable: n1.min(n2) >= 10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitneyReport {
    /// `min(U1, U2)`.
    pub u: f64,
    /// `n1·n2 + n1(n1+1)/2 − R1`.
    pub u1: f64,
    /// Rank sum of sample 1 in the combined mid-ranking.
    pub r1: f64,
    /// Normal score of `u` under the tie-corrected variance.
    pub z: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: PValueMethod,
}

/// Mid-ranks (1-based) of `values`; tied values share the average rank.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Mann–Whitney U test.
///
/// The p-value is two-sided. When either sample is smaller than
/// [`EXACT_THRESHOLD`] it is exact: the number of size-`n1` subsets of the
/// combined mid-ranks whose rank sum lies at least as far from its mean as
/// the observed one, over `C(n, n1)`. Otherwise it uses the normal law with
/// tie-corrected variance.
pub fn mann_whitney_u(sample1: &[f64], sample2: &[f64]) -> Result<MannWhitneyReport> {
    let (n1, n2) = (sample1.len(), sample2.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    if sample1.iter().chain(sample2).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("Mann-Whitney samples must be finite".into()));
    }
    let combined: Vec<f64> = sample1.iter().chain(sample2).copied().collect();
    let ranks = mid_ranks(&combined);
    let r1: f64 = ranks[..n1].iter().sum();
    let (f1, f2) = (n1 as f64, n2 as f64);
    let u1 = f1 * f2 + f1 * (f1 + 1.0) / 2.0 - r1;
    let u = u1.min(f1 * f2 - u1);

    let n = f1 + f2;
    let tie_term: f64 = tie_groups(&combined).map(|t| (t * t * t - t) as f64).sum();
    let var = f1 * f2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)).max(1.0));
    let z = if var > 0.0 {
        (u - f1 * f2 / 2.0) / var.sqrt()
    } else {
        0.0
    };

    let exact = if n1.min(n2) < EXACT_THRESHOLD {
        exact_p_value(&ranks, n1)
    } else {
        None
    };
    let (p_value, method) = match exact {
        Some(p) => (p, PValueMethod::Exact),
        None if var > 0.0 => (two_sided_normal_p(z), PValueMethod::Normal),
        None => (1.0, PValueMethod::Normal),
    };
    Ok(MannWhitneyReport {
        u,
        u1,
        r1,
        z,
        p_value,
        n1,
        n2,
        method,
    })
}

/// Sizes of groups of tied values.
fn tie_groups(values: &[f64]) -> impl Iterator<Item = u64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > 1 {
            groups.push((j - i) as u64);
        }
        i = j;
    }
    groups.into_iter()
}

/// Exact two-sided permutation p-value of the first `n1` ranks' sum, or
/// `None` when the enumeration would exceed [`EXACT_WORK_LIMIT`].
///
/// Works on doubled ranks so every rank sum is an integer. Enumerating the
/// smaller side suffices: the two rank sums are affine in each other with
/// equal distances from their means.
pub fn exact_p_value(ranks: &[f64], n1: usize) -> Option<f64> {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..n1].iter().sum();
    let (m, observed) = if n1 <= n - n1 {
        (n1, observed)
    } else {
        (n - n1, n * (n + 1) - observed)
    };
    let max_sum: usize = {
        let mut d = doubled.clone();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d[..m].iter().sum()
    };
    if (n as u128) * (m as u128) * (max_sum as u128 + 1) > EXACT_WORK_LIMIT {
        return None;
    }
    // counts[k][t]: subsets of size k with doubled rank sum t
    let mut counts = vec![vec![0u128; max_sum + 1]; m + 1];
    counts[0][0] = 1;
    for (seen, &r) in doubled.iter().enumerate() {
        for k in (1..=m.min(seen + 1)).rev() {
            let (lo, hi) = counts.split_at_mut(k);
            let prev = &lo[k - 1];
            let cur = &mut hi[0];
            for t in (r..=max_sum).rev() {
                cur[t] += prev[t - r];
            }
        }
    }
    let center2 = m * (n + 1); // doubled mean rank sum
    let obs_dist = observed.abs_diff(center2);
    let (mut extreme, mut total) = (0u128, 0u128);
    for (t, &c) in counts[m].iter().enumerate() {
        total += c;
        if t.abs_diff(center2) >= obs_dist {
            extreme += c;
        }
    }
    Some((extreme as f64 / total as f64).min(1.0))
}

/// Series handed to the split-sample harness.
#[derive(Debug, Clone, Copy)]
pub enum PurityInput<'a> {
    Real(&'a [f64]),
    Binary(&'a BinarySequence),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockComparison {
    pub block_i: usize,
    pub block_j: usize,
    pub u: f64,
    pub z: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SeriesRunsTest {
    Ok(RunsTestReport),
    Degenerate { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityReport {
    pub n: usize,
    pub blocks: usize,
    pub block_lengths: Vec<usize>,
    pub comparisons: Vec<BlockComparison>,
    pub runs_test: SeriesRunsTest,
    /// Number of p-values in the family.
    pub family_size: usize,
    /// Per-test threshold `PURITY_LEVEL / family_size`.
    pub corrected_level: f64,
    pub min_p_value: f64,
    pub flagged: bool,
}

/// Above/below-median binarization, dropping points equal to the median.
pub fn median_binarize(series: &[f64]) -> BinarySequence {
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    BinarySequence::from_bits(series.iter().filter(|&&x| x != median).map(|&x| x > median))
}

/// Lengths of `k` contiguous blocks covering `n`, as equal as possible
/// (the first `n mod k` blocks are one longer).
pub fn block_lengths(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Split a series into `k` contiguous blocks and test them against each
/// other (all pairwise Mann–Whitney tests) and the whole series for
/// randomness (runs test). The series is flagged as impure when any
/// p-value is below the Bonferroni-corrected level.
pub fn split_sample_purity(input: PurityInput<'_>, k: usize) -> Result<PurityReport> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 blocks, got {k}")));
    }
    let values: Vec<f64> = match input {
        PurityInput::Real(v) => v.to_vec(),
        PurityInput::Binary(s) => s.symbols().iter().map(|&b| f64::from(u8::from(b))).collect(),
    };
    let n = values.len();
    let lengths = block_lengths(n, k);
    let shortest = *lengths.iter().min().expect("k >= 2");
    if shortest < 8 {
        return Err(Error::TooFewObservations { needed: 8 * k, got: n });
    }
    let mut blocks = Vec::with_capacity(k);
    let mut start = 0;
    for &len in &lengths {
        blocks.push(&values[start..start + len]);
        start += len;
    }

    let mut comparisons = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let r = mann_whitney_u(blocks[i], blocks[j])?;
            comparisons.push(BlockComparison {
                block_i: i,
                block_j: j,
                u: r.u,
                z: r.z,
                p_value: r.p_value,
                method: r.method,
            });
        }
    }

    let binary = match input {
        PurityInput::Real(v) => median_binarize(v),
        PurityInput::Binary(s) => s.clone(),
    };
    let runs = match runs_test(&binary) {
        Ok(r) => SeriesRunsTest::Ok(r),
        Err(Error::Degenerate(reason)) => SeriesRunsTest::Degenerate { reason },
        Err(Error::TooFewObservations { .. }) => SeriesRunsTest::Degenerate {
            reason: "no points off the median".into(),
        },
        Err(e) => return Err(e),
    };

    let mut p_values: Vec<f64> = comparisons.iter().map(|c| c.p_value).collect();
    if let SeriesRunsTest::Ok(r) = &runs {
        p_values.push(r.p_value);
    }
    let family_size = p_values.len();
    let corrected_level = PURITY_LEVEL / family_size as f64;
    let min_p_value = p_values.iter().copied().fold(1.0, f64::min);
    Ok(PurityReport {
        n,
        blocks: k,
        block_lengths: lengths,
        comparisons,
        runs_test: runs,
        family_size,
        corrected_level,
        min_p_value,
        flagged: min_p_value < corrected_level,
    })
}
