//! Contextual local deterministic model with detector time delays.
//!
//! The source emits a polarization phase λ uniform on `[0, 2π)`; particle A
//! carries λ and particle B carries λ + π/2. A station whose analyzer sits
//! at α sees ξ = phase − α and
//!
//! - emits `sign(cos 2ξ)`, a deterministic function of (ξ, α);
//! - registers the detection after `T0 · r · |sin 2ξ|^d`, where `r` is
//!   drawn uniformly on `[0, 1)` from the station's own generator and plays
//!   the role of the instrument's hidden state.
//!
//! Neither station sees the other's particle or setting. Correlations that
//! violate CHSH appear only after coincidence selection, because the
//! delays depend on the local setting so the selected subensemble depends
//! on the pair of settings.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_pairs, generate_chunked, into_streams, Detection, Outcome, Setting, StationStream};
use crate::seed;
use crate::{Error, Result};

/// How the source correlates the two particles' phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceConvention {
    /// Particle B's phase is particle A's plus π/2.
    #[default]
    OrthogonalPair,
}

impl SourceConvention {
    fn partner_phase(self, lambda: f64) -> f64 {
        match self {
            SourceConvention::OrthogonalPair => lambda + FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContextualEventModel {
    t0: f64,
    exponent: f64,
    emission_interval: f64,
    source: SourceConvention,
}

impl Default for ContextualEventModel {
    fn default() -> Self {
        Self {
            t0: 1.0,
            exponent: Self::DEFAULT_EXPONENT,
            emission_interval: 1000.0,
            source: SourceConvention::OrthogonalPair,
        }
    }
}

impl ContextualEventModel {
    /// Delay exponent selected by calibration against the singlet curve.
    pub const DEFAULT_EXPONENT: f64 = 4.0;
    /// Coincidence window, in units of `T0`, selected together with
    /// [`Self::DEFAULT_EXPONENT`].
    pub const DEFAULT_WINDOW_T0: f64 = 0.1;

    /// `t0` is the delay scale, `exponent` the power `d` on `|sin 2ξ|`, and
    /// `emission_interval` the time between successive pairs. Pairs must not
    /// overlap, so the interval has to exceed `t0`.
    pub fn new(t0: f64, exponent: f64, emission_interval: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::InvalidParameter(format!("T0 must be positive, got {t0}")));
        }
        if !(exponent.is_finite() && exponent >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delay exponent must be >= 0, got {exponent}"
            )));
        }
        if !(emission_interval.is_finite() && emission_interval > t0) {
            return Err(Error::InvalidParameter(format!(
                "emission interval {emission_interval} must exceed T0 = {t0}"
            )));
        }
        Ok(Self {
            t0,
            exponent,
            emission_interval,
            source: SourceConvention::OrthogonalPair,
        })
    }

    pub fn with_exponent(self, exponent: f64) -> Result<Self> {
        Self::new(self.t0, exponent, self.emission_interval)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn emission_interval(&self) -> f64 {
        self.emission_interval
    }

    pub fn source(&self) -> SourceConvention {
        self.source
    }

    pub fn station(&self, analyzer: &Setting) -> ContextualStation {
        ContextualStation {
            analyzer: analyzer.angle.radians(),
            t0: self.t0,
            exponent: self.exponent,
        }
    }
}

/// Everything one station knows: its own analyzer angle and instrument
/// constants. [`ContextualStation::detect`] additionally reads only the
/// arriving particle's phase and the station's private generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextualStation {
    analyzer: f64,
    t0: f64,
    exponent: f64,
}

impl ContextualStation {
    /// Outcome and detection delay for a particle with polarization `phase`.
    pub fn detect<R: Rng + ?Sized>(&self, phase: f64, rng: &mut R) -> (Outcome, f64) {
        let xi = phase - self.analyzer;
        let outcome = Outcome::from_sign((2.0 * xi).cos());
        let r: f64 = rng.random();
        let delay = self.t0 * r * (2.0 * xi).sin().abs().powf(self.exponent);
        (outcome, delay)
    }
}

/// Generate `n_pairs` with analyzers at `a.angle` and `b.angle` (these are
/// analyzer angles, not spin directions). Pair `k` leaves the source at
/// `k · emission_interval`.
pub fn sample_contextual_event(
    model: &ContextualEventModel,
    a: &Setting,
    b: &Setting,
    n_pairs: u64,
    seed: u64,
) -> Result<(StationStream, StationStream)> {
    check_pairs(n_pairs)?;
    let station_a = model.station(a);
    let station_b = model.station(b);
    let source = model.source;
    let dt = model.emission_interval;
    let events = generate_chunked(n_pairs, |chunk, range| {
        let mut src = seed::rng(seed, &[seed::SOURCE, chunk]);
        let mut rng_a = seed::rng(seed, &[seed::STATION_A, chunk]);
        let mut rng_b = seed::rng(seed, &[seed::STATION_B, chunk]);
        let mut ea = Vec::with_capacity(range.clone().count());
        let mut eb = Vec::with_capacity(ea.capacity());
        for k in range {
            let lambda = src.random::<f64>() * TAU;
            let emitted = k as f64 * dt;
            let (oa, da) = station_a.detect(lambda, &mut rng_a);
            let (ob, db) = station_b.detect(source.partner_phase(lambda), &mut rng_b);
            ea.push(Detection {
                pair_id: k,
                outcome: oa,
                time_tag: emitted + da,
            });
            eb.push(Detection {
                pair_id: k,
                outcome: ob,
                time_tag: emitted + db,
            });
        }
        (ea, eb)
    });
    Ok(into_streams(a, b, events))
}
