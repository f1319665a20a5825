//! Time-series toolkit for looking for structure in outcome streams.
//!
//! Descriptive statistics and histograms cannot see temporal structure; the
//! correlogram and AR(p) fitting can. The pipeline used throughout is:
//! sample ACF with the biased `1/n` autocovariance, PACF by the
//! Durbin–Levinson recursion, order selection by PACF cut-off, and
//! Yule–Walker coefficients from the same recursion.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::seed;
use crate::{Error, Result};

pub const DEFAULT_BURN_IN: usize = 1000;
/// Two-sided 95% point of the standard normal, used for correlogram bands.
pub const BAND_Z: f64 = 1.96;
/// Family-wise level for PACF order selection.
pub const ORDER_SELECTION_LEVEL: f64 = 0.05;
/// Margin on `|root| > 1` in the stationarity check.
pub const STATIONARITY_TOL: f64 = 1e-9;

const AR_NOISE: u64 = 0x0041_524E_4F49_5345;

fn check_finite(x: &[f64]) -> Result<()> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("value at index {i} is not finite")));
    }
    Ok(())
}

fn std_normal() -> StdNormal {
    StdNormal::standard()
}

/// Observed series `z_0..z_{n-1}`, optionally with a known process mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesSample {
    values: Vec<f64>,
    known_mean: Option<f64>,
}

impl TimeSeriesSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewObservations { needed: 1, got: 0 });
        }
        check_finite(&values)?;
        Ok(Self {
            values,
            known_mean: None,
        })
    }

    pub fn with_known_mean(mut self, mean: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidParameter("known mean must be finite".into()));
        }
        self.known_mean = Some(mean);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn known_mean(&self) -> Option<f64> {
        self.known_mean
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample ACF, centred on the known mean when there is one.
    pub fn acf(&self, max_lag: usize) -> Result<Vec<f64>> {
        let mean = self.known_mean.unwrap_or_else(|| mean(&self.values));
        acf_about(&self.values, max_lag, mean)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased, `n - 1` denominator.
    pub variance: f64,
    pub std_dev: f64,
    /// `m3 / m2^1.5` from central moments; `None` for zero variance.
    pub skewness: Option<f64>,
    /// `m4 / m2² - 3`; `None` for zero variance.
    pub excess_kurtosis: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn descriptive_stats(x: &[f64]) -> Result<DescriptiveStats> {
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    check_finite(x)?;
    let n = x.len() as f64;
    let m = mean(x);
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - m;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    let (m2, m3, m4) = (s2 / n, s3 / n, s4 / n);
    let variance = s2 / (n - 1.0);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Ok(DescriptiveStats {
        n: x.len(),
        mean: m,
        variance,
        std_dev: variance.sqrt(),
        skewness,
        excess_kurtosis,
        min: x.iter().copied().fold(f64::INFINITY, f64::min),
        max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRule {
    Count(usize),
    /// `ceil(log2 n) + 1` bins.
    Sturges,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` equally spaced edges from min to max.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width histogram on `[min, max]`; the last bin is closed.
pub fn histogram(x: &[f64], rule: BinRule) -> Result<Histogram> {
    if x.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    check_finite(x)?;
    let bins = match rule {
        BinRule::Count(0) => return Err(Error::InvalidParameter("histogram needs at least one bin".into())),
        BinRule::Count(k) => k,
        BinRule::Sturges => (x.len() as f64).log2().ceil() as usize + 1,
    };
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(Error::Degenerate(
            "histogram range is empty: all values are equal".into(),
        ));
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0; bins];
    for &v in x {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Normal-scores plot data: the i-th order statistic (1-based) paired with
/// the standard-normal quantile at the Blom position `(i - 3/8)/(n + 1/4)`.
/// Returned as `(theoretical quantile, ordered value)`.
pub fn normal_scores(x: &[f64]) -> Result<Vec<(f64, f64)>> {
    if x.len() < 8 {
        return Err(Error::TooFewObservations {
            needed: 8,
            got: x.len(),
        });
    }
    check_finite(x)?;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let nd = std_normal();
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (nd.inverse_cdf((i as f64 + 1.0 - 0.375) / (n + 0.25)), v))
        .collect())
}

/// `(z_t, z_{t+k})` for `t = 0..n-k`.
pub fn lagged_pairs(x: &[f64], k: usize) -> Result<Vec<(f64, f64)>> {
    if k == 0 || k >= x.len() {
        return Err(Error::InvalidParameter(format!(
            "lag {k} out of range for a series of length {}",
            x.len()
        )));
    }
    Ok(x.iter().zip(&x[k..]).map(|(&a, &b)| (a, b)).collect())
}

/// Biased autocovariances `γ̂(0..=max_lag)` about `mean`.
pub fn autocovariances_about(x: &[f64], max_lag: usize, mean: f64) -> Result<Vec<f64>> {
    if max_lag >= x.len() {
        return Err(Error::InvalidParameter(format!(
            "max lag {max_lag} must be below the series length {}",
            x.len()
        )));
    }
    check_finite(x)?;
    let n = x.len();
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    Ok((0..=max_lag)
        .map(|k| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect())
}

fn acf_about(x: &[f64], max_lag: usize, mean: f64) -> Result<Vec<f64>> {
    let g = autocovariances_about(x, max_lag, mean)?;
    if g[0] <= 0.0 {
        return Err(Error::Degenerate("series has zero sample variance".into()));
    }
    Ok(g.iter().map(|v| (v / g[0]).clamp(-1.0, 1.0)).collect())
}

/// Sample autocorrelations `ρ̂(0..=max_lag)`; `ρ̂(0) = 1`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    acf_about(x, max_lag, mean(x))
}

/// Output of the Durbin–Levinson recursion at its final order `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Levinson {
    /// `φ_{p,1}..φ_{p,p}`: the Yule–Walker AR(p) coefficients.
    pub coefficients: Vec<f64>,
    /// `φ_{1,1}..φ_{p,p}`: partial autocorrelations.
    pub pacf: Vec<f64>,
    /// One-step prediction-error variance relative to `γ(0)`:
    /// `Π (1 - φ_kk²)`.
    pub relative_error_variance: f64,
}

/// Durbin–Levinson recursion on autocorrelations `rho` (with `rho[0] = 1`)
/// up to `order`.
pub fn durbin_levinson(rho: &[f64], order: usize) -> Result<Levinson> {
    if rho.len() <= order {
        return Err(Error::InvalidParameter(format!(
            "need {} autocorrelations for order {order}, got {}",
            order + 1,
            rho.len()
        )));
    }
    let mut phi: Vec<f64> = Vec::with_capacity(order);
    let mut pacf = Vec::with_capacity(order);
    let mut v = 1.0;
    for k in 1..=order {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let kk = num / v;
        let next: Vec<f64> = (0..k - 1)
            .map(|j| phi[j] - kk * phi[k - 2 - j])
            .chain(std::iter::once(kk))
            .collect();
        phi = next;
        pacf.push(kk);
        v *= 1.0 - kk * kk;
        if v <= 1e-14 {
            return Err(Error::Singular(format!(
                "prediction-error variance vanished at order {k}"
            )));
        }
    }
    Ok(Levinson {
        coefficients: phi,
        pacf,
        relative_error_variance: v,
    })
}

/// PACF `φ̂_kk` for `k = 1..=max_lag`, from the sample ACF.
pub fn pacf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(x, max_lag)?;
    Ok(durbin_levinson(&rho, max_lag)?.pacf)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelogramReport {
    pub n: usize,
    /// `ρ̂(0..=K)`.
    pub acf: Vec<f64>,
    /// `φ̂_kk` at index `k - 1`, for `k = 1..=K`.
    pub pacf: Vec<f64>,
    /// `1.96 / √n`.
    pub band: f64,
}

pub fn correlogram(x: &[f64], max_lag: usize) -> Result<CorrelogramReport> {
    let rho = acf(x, max_lag)?;
    let pacf = durbin_levinson(&rho, max_lag)?.pacf;
    Ok(CorrelogramReport {
        n: x.len(),
        acf: rho,
        pacf,
        band: BAND_Z / (x.len() as f64).sqrt(),
    })
}

/// Stationary autoregressive model
/// `Z_t = Φ1 Z_{t-1} + … + Φp Z_{t-p} + a_t`, `a_t ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArModel {
    coefficients: Vec<f64>,
    noise_variance: f64,
}

impl ArModel {
    /// Rejects models whose characteristic polynomial
    /// `1 - Φ1 z - … - Φp z^p` has a root with `|z| <= 1 + 1e-9`.
    pub fn new(coefficients: Vec<f64>, noise_variance: f64) -> Result<Self> {
        check_finite(&coefficients)?;
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        if let Some(r) = smallest_root_modulus(&coefficients) {
            if r <= 1.0 + STATIONARITY_TOL {
                return Err(Error::NonStationary(format!(
                    "characteristic root with modulus {r:.6} inside or on the unit circle"
                )));
            }
        }
        Ok(Self {
            coefficients,
            noise_variance,
        })
    }

    pub fn white_noise(noise_variance: f64) -> Result<Self> {
        Self::new(Vec::new(), noise_variance)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// `γ(0) = σ² / (1 - Σ Φi ρ(i))`.
    pub fn theoretical_variance(&self) -> f64 {
        let rho = theoretical_acf(self, self.order());
        let s: f64 = self.coefficients.iter().zip(&rho[1..]).map(|(p, r)| p * r).sum();
        self.noise_variance / (1.0 - s)
    }
}

/// Smallest `|z|` over roots of `1 - Σ Φi z^i`, via the eigenvalues of the
/// companion matrix (which are the reciprocal roots). `None` when there are
/// no roots.
fn smallest_root_modulus(phi: &[f64]) -> Option<f64> {
    let p = phi.iter().rposition(|&c| c != 0.0)? + 1;
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, &c) in phi[..p].iter().enumerate() {
        companion[(0, j)] = c;
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    let largest = companion
        .complex_eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max);
    Some(if largest == 0.0 { f64::INFINITY } else { 1.0 / largest })
}

/// Theoretical `ρ(0..=max_lag)`: solve the Yule–Walker equations for
/// `ρ(1..p)` directly, then extend with `ρ(k) = Σ Φi ρ(k - i)`.
pub fn theoretical_acf(model: &ArModel, max_lag: usize) -> Vec<f64> {
    let phi = &model.coefficients;
    let p = phi.len();
    let mut rho = vec![0.0; max_lag.max(p) + 1];
    rho[0] = 1.0;
    if p > 0 {
        // unknowns ρ(1..=p); row k: ρ(k) - Σ_{i≠k} Φi ρ(|k-i|) = Φk
        let mut m = DMatrix::<f64>::identity(p, p);
        let mut rhs = DVector::<f64>::zeros(p);
        for k in 1..=p {
            rhs[k - 1] = phi[k - 1];
            for i in 1..=p {
                let j = k.abs_diff(i);
                if j > 0 {
                    m[(k - 1, j - 1)] -= phi[i - 1];
                }
            }
        }
        let sol = m
            .lu()
            .solve(&rhs)
            .expect("stationary AR models have a nonsingular Yule-Walker system");
        rho[1..=p].copy_from_slice(sol.as_slice());
        for k in p + 1..rho.len() {
            rho[k] = (1..=p).map(|i| phi[i - 1] * rho[k - i]).sum();
        }
    }
    rho.truncate(max_lag + 1);
    rho
}

/// Simulate `n` values of `model`. Gaussian noise comes from the stream
/// derived from `seed`; the recursion starts from zeros and the first
/// `burn_in` values are discarded.
pub fn simulate_ar(model: &ArModel, n: usize, seed: u64, burn_in: usize) -> TimeSeriesSample {
    let mut rng = seed::rng(seed, &[AR_NOISE]);
    let noise = Normal::new(0.0, model.noise_variance.sqrt()).expect("positive variance");
    let p = model.order();
    let mut hist = vec![0.0; p];
    let mut out = Vec::with_capacity(n);
    for t in 0..burn_in + n {
        let mut z = noise.sample(&mut rng);
        for (i, c) in model.coefficients.iter().enumerate() {
            // hist[i] holds Z_{t-1-i}
            z += c * hist[i];
        }
        if p > 0 {
            hist.rotate_right(1);
            hist[0] = z;
        }
        if t >= burn_in {
            out.push(z);
        }
    }
    TimeSeriesSample {
        values: out,
        known_mean: None,
    }
}

/// Yule–Walker AR(p) fit via Durbin–Levinson on the sample ACF.
pub fn fit_ar(x: &[f64], order: usize) -> Result<ArModel> {
    let needed = (10 * order).max(2);
    if x.len() < needed {
        return Err(Error::TooFewObservations { needed, got: x.len() });
    }
    let m = mean(x);
    let g = autocovariances_about(x, order, m)?;
    if g[0] <= 0.0 {
        return Err(Error::Singular("constant series".into()));
    }
    let rho: Vec<f64> = g.iter().map(|v| v / g[0]).collect();
    let lev = durbin_levinson(&rho, order)?;
    ArModel::new(lev.coefficients, lev.relative_error_variance * g[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSelection {
    pub order: usize,
    pub max_lag: usize,
    pub pacf: Vec<f64>,
    /// Simultaneous band `z_{1 - α/(2K)} / √n` with `α = 0.05`.
    pub band: f64,
}

/// Suggest an AR order from the PACF cut-off: the largest lag `k <= K`
/// whose `|φ̂_kk|` leaves the band, so that every larger lag up to `K` is
/// inside it; 0 when no lag leaves the band.
///
/// The band is Bonferroni-adjusted over the `K` lags inspected, so a white
/// noise series is assigned order 0 with probability at least 95% no matter
/// how many lags are scanned.
pub fn select_order(x: &[f64], max_lag: usize) -> Result<OrderSelection> {
    if max_lag == 0 || 4 * max_lag >= x.len() {
        return Err(Error::InvalidParameter(format!(
            "max lag {max_lag} must be in 1..n/4 for n = {}",
            x.len()
        )));
    }
    let pacf = pacf(x, max_lag)?;
    let z = std_normal().inverse_cdf(1.0 - ORDER_SELECTION_LEVEL / (2.0 * max_lag as f64));
    let band = z / (x.len() as f64).sqrt();
    let order = pacf.iter().rposition(|v| v.abs() > band).map_or(0, |i| i + 1);
    Ok(OrderSelection {
        order,
        max_lag,
        pacf,
        band,
    })
}
