//! Monte Carlo laboratory for spin-polarization correlation experiments.
//!
//! The crate is split along the lines of an experiment:
//!
//! - [`quantum`]: closed-form and quadrature predictions for the singlet state,
//!   used as oracles by everything else.
//! - [`hv`]: event generators for factorizable, deterministic and contextual
//!   hidden-variable models plus a nonlocal quantum reference sampler.
//! - [`coincidence`]: coincidence-window matching, correlation estimation
//!   and the CHSH statistic.
//! - [`purity`]: runs test, Mann–Whitney U and a split-sample harness for
//!   detecting mixed ensembles.
//! - [`timeseries`]: descriptive statistics, ACF/PACF, AR(p) simulation,
//!   Yule–Walker fitting and order selection.
//!
//! Every random draw goes through [`seed`], so identical inputs produce
//! bit-identical outputs regardless of thread count.

pub mod coincidence;
pub mod error;
pub mod hv;
pub mod purity;
pub mod quantum;
pub mod seed;
pub mod timeseries;

pub use error::{Error, Result};
