//! Quantum-theoretic predictions for the spin singlet.
//!
//! These are the reference values every simulator is checked against. The
//! spin convention `E(AB) = -cos(θA - θB)` is used throughout; photon-like
//! generators are adapted at their own boundary.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gauss–Legendre order used per axis by [`smeared_correlation`].
pub const QUADRATURE_NODES: usize = 64;

/// Measurement direction at one station, in radians, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AnalyzerSetting(f64);

impl AnalyzerSetting {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "analyzer angle must be finite, got {radians}"
            )));
        }
        let mut reduced = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if reduced >= TAU {
            reduced = 0.0;
        }
        Ok(Self(reduced))
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::new(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AnalyzerSetting {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AnalyzerSetting> for f64 {
    fn from(s: AnalyzerSetting) -> f64 {
        s.0
    }
}

/// Joint law of two ±1 outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointOutcomeDistribution {
    pub plus_plus: f64,
    pub plus_minus: f64,
    pub minus_plus: f64,
    pub minus_minus: f64,
}

impl JointOutcomeDistribution {
    /// Probability of `(a, b)`, where each argument is `+1` or `-1`.
    pub fn p(&self, a: i8, b: i8) -> f64 {
        match (a > 0, b > 0) {
            (true, true) => self.plus_plus,
            (true, false) => self.plus_minus,
            (false, true) => self.minus_plus,
            (false, false) => self.minus_minus,
        }
    }

    pub fn total(&self) -> f64 {
        self.plus_plus + self.plus_minus + self.minus_plus + self.minus_minus
    }

    /// `E(a·b)` under this law.
    pub fn expectation(&self) -> f64 {
        self.plus_plus + self.minus_minus - self.plus_minus - self.minus_plus
    }

    /// `(P(a = +1), P(b = +1))`.
    pub fn marginals(&self) -> (f64, f64) {
        (self.plus_plus + self.plus_minus, self.plus_plus + self.minus_plus)
    }
}

/// Shape of an analyzer-direction spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmearingDensity {
    Uniform,
    /// Gaussian with standard deviation `sigma`, truncated to the interval
    /// and renormalized.
    TruncatedGaussian {
        sigma: f64,
    },
}

/// A blurred analyzer direction: a density on `[center - δ, center + δ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularSmearing {
    center: f64,
    half_width: f64,
    density: SmearingDensity,
}

impl AngularSmearing {
    pub fn new(center: f64, half_width: f64, density: SmearingDensity) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidParameter("smearing center must be finite".into()));
        }
        if !half_width.is_finite() || half_width < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smearing half-width must be finite and non-negative, got {half_width}"
            )));
        }
        if let SmearingDensity::TruncatedGaussian { sigma } = density {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "gaussian smearing needs sigma > 0, got {sigma}"
                )));
            }
        }
        Ok(Self {
            center,
            half_width,
            density,
        })
    }

    pub fn uniform(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center, half_width, SmearingDensity::Uniform)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn density(&self) -> SmearingDensity {
        self.density
    }

    /// Quadrature nodes and normalized weights for this density. A zero
    /// half-width collapses to a point mass at the center.
    fn rule(&self, gl: &GaussLegendre) -> Vec<(f64, f64)> {
        if self.half_width == 0.0 {
            return vec![(self.center, 1.0)];
        }
        let mut pts: Vec<(f64, f64)> = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(&x, &w)| {
                let theta = self.center + self.half_width * x;
                let rho = match self.density {
                    SmearingDensity::Uniform => 1.0,
                    SmearingDensity::TruncatedGaussian { sigma } => {
                        let u = (theta - self.center) / sigma;
                        (-0.5 * u * u).exp()
                    }
                };
                (theta, w * rho)
            })
            .collect();
        let norm: f64 = pts.iter().map(|p| p.1).sum();
        for p in &mut pts {
            p.1 /= norm;
        }
        pts
    }
}

/// Separable mixture `Σ p_i ρ_i ⊗ ρ̃_i`, represented by each component's
/// local expectations at the chosen settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparableState {
    components: Vec<SeparableComponent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableComponent {
    pub weight: f64,
    pub e_a: f64,
    pub e_b: f64,
}

impl SeparableState {
    pub fn new(components: Vec<SeparableComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("separable state needs a component".into()));
        }
        for c in &components {
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "component weight {} outside (0, 1]",
                    c.weight
                )));
            }
            if !(-1.0..=1.0).contains(&c.e_a) || !(-1.0..=1.0).contains(&c.e_b) {
                return Err(Error::InvalidParameter(format!(
                    "local expectations ({}, {}) outside [-1, 1]",
                    c.e_a, c.e_b
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "component weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[SeparableComponent] {
        &self.components
    }
}

/// `E(AB | ψ) = -cos(θA - θB)` for the singlet.
pub fn singlet_correlation(a: AnalyzerSetting, b: AnalyzerSetting) -> f64 {
    // cos is even, so ordering the difference makes the swap symmetry exact
    let (lo, hi) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
    -(hi - lo).cos()
}

/// Joint law with uniform marginals and expectation `-cos(θA - θB)`:
/// `p(a, b) = (1 - a·b·cos(θA - θB)) / 4`.
pub fn singlet_joint_probabilities(a: AnalyzerSetting, b: AnalyzerSetting) -> JointOutcomeDistribution {
    let c = -singlet_correlation(a, b);
    let same = (1.0 - c) / 4.0;
    let diff = (1.0 + c) / 4.0;
    JointOutcomeDistribution {
        plus_plus: same,
        plus_minus: diff,
        minus_plus: diff,
        minus_minus: same,
    }
}

/// Singlet correlation averaged over blurred analyzer directions:
/// `-∫∫ cos(θ1 - θ2) dρA(θ1) dρB(θ2)`, by tensor-product Gauss–Legendre.
pub fn smeared_correlation(a: &AngularSmearing, b: &AngularSmearing) -> Result<f64> {
    for s in [a, b] {
        if s.half_width < 0.0 {
            return Err(Error::InvalidParameter("negative smearing half-width".into()));
        }
    }
    let gl = GaussLegendre::new(QUADRATURE_NODES);
    let ra = a.rule(&gl);
    let rb = b.rule(&gl);
    let mut acc = 0.0;
    for &(t1, w1) in &ra {
        let mut inner = 0.0;
        for &(t2, w2) in &rb {
            inner += w2 * (t1 - t2).cos();
        }
        acc += w1 * inner;
    }
    Ok(-acc)
}

/// `Σ p_i E(A | ρ_i) E(B | ρ̃_i)`.
pub fn separable_correlation(state: &SeparableState) -> f64 {
    state.components.iter().map(|c| c.weight * c.e_a * c.e_b).sum()
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`, started from the Chebyshev-like
    /// guess `cos(π(i - 1/4)/(n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// `∫_lo^hi f(x) dx`.
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
