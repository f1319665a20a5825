//! Experiment recipes.
//!
//! A recipe is a TOML file whose `experiment` key picks the table layout:
//!
//! ```toml
//! experiment = "chsh"
//! seed = 7
//! n_pairs = 100000
//! window = 0.1            # or "unwindowed"
//!
//! [model]
//! kind = "contextual"     # qt | contextual | factorizable | deterministic
//! exponent = 4.0
//!
//! [settings]              # degrees
//! a = 0
//! a_prime = 90
//! b = 45
//! b_prime = 135
//! ```
//!
//! Command-line flags override file values. Every recipe is validated in
//! full before anything runs; the resolved recipe is echoed into the report.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spcelab::coincidence::{CoincidenceWindow, SettingsQuadruple};
use spcelab::hv::{
    ContextualEventModel, DeterministicCell, DeterministicSharedSpaceModel, FactorizableCell, FactorizableModel,
    Generator,
};
use spcelab::seed;
use spcelab::timeseries::{ArModel, DEFAULT_BURN_IN};

use crate::error::{CliError, CliResult};

pub const DEFAULT_N_PAIRS: u64 = 100_000;
pub const DEFAULT_MAX_LAG: usize = 20;
pub const ALICE_LABELS: [&str; 2] = ["a", "a'"];
pub const BOB_LABELS: [&str; 2] = ["b", "b'"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Simulate(SimulateConfig),
    Chsh(ChshConfig),
    CorrelationScan(ScanConfig),
    Purity(PurityConfig),
    Timeseries(TimeseriesConfig),
    Calibrate(CalibrateConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Simulate(_) => "simulate",
            ExperimentConfig::Chsh(_) => "chsh",
            ExperimentConfig::CorrelationScan(_) => "correlation-scan",
            ExperimentConfig::Purity(_) => "purity",
            ExperimentConfig::Timeseries(_) => "timeseries",
            ExperimentConfig::Calibrate(_) => "calibrate",
        }
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// `"unwindowed"` or a non-negative width in time-tag units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Width(f64),
    Named(String),
}

impl WindowSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        let spec = match s.parse::<f64>() {
            Ok(w) => WindowSpec::Width(w),
            Err(_) => WindowSpec::Named(s.to_string()),
        };
        spec.resolve()?;
        Ok(spec)
    }

    pub fn resolve(&self) -> CliResult<CoincidenceWindow> {
        match self {
            WindowSpec::Width(w) => CoincidenceWindow::new(*w).map_err(CliError::config),
            WindowSpec::Named(s) if s == "unwindowed" => Ok(CoincidenceWindow::Unwindowed),
            WindowSpec::Named(s) => Err(CliError::Config(format!(
                "window must be a number or \"unwindowed\", got \"{s}\""
            ))),
        }
    }

    fn from_window(w: CoincidenceWindow) -> Self {
        match w {
            CoincidenceWindow::Unwindowed => WindowSpec::Named("unwindowed".into()),
            CoincidenceWindow::Window(w) => WindowSpec::Width(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Qt {},
    Contextual {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        emission_interval: Option<f64>,
    },
    Factorizable {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cells: Option<Vec<FactorizableCell>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_cells: Option<usize>,
    },
    Deterministic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cells: Option<Vec<DeterministicCell>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_cells: Option<usize>,
    },
    /// Autoregressive series; only `simulate` accepts it.
    Ar {
        coefficients: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise_variance: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burn_in: Option<usize>,
    },
}

/// What a model spec turns into once validated.
#[derive(Debug, Clone)]
pub enum Model {
    Pairs(Generator),
    Series { model: ArModel, burn_in: usize },
}

impl ModelSpec {
    pub fn from_kind(kind: &str) -> CliResult<Self> {
        Ok(match kind {
            "qt" => ModelSpec::Qt {},
            "contextual" => ModelSpec::Contextual {
                t0: None,
                exponent: None,
                emission_interval: None,
            },
            "factorizable" => ModelSpec::Factorizable {
                cells: None,
                random_cells: None,
            },
            "deterministic" => ModelSpec::Deterministic {
                cells: None,
                random_cells: None,
            },
            "ar" => ModelSpec::Ar {
                coefficients: Vec::new(),
                noise_variance: None,
                burn_in: None,
            },
            other => {
                return Err(CliError::Config(format!(
                    "unknown model `{other}` (expected qt, contextual, factorizable, deterministic or ar)"
                )))
            }
        })
    }

    /// Fill defaults so the echoed recipe is complete.
    pub fn normalize(&mut self) {
        match self {
            ModelSpec::Contextual {
                t0,
                exponent,
                emission_interval,
            } => {
                let d = ContextualEventModel::default();
                t0.get_or_insert(d.t0());
                exponent.get_or_insert(d.exponent());
                emission_interval.get_or_insert(d.emission_interval());
            }
            ModelSpec::Ar {
                noise_variance,
                burn_in,
                ..
            } => {
                noise_variance.get_or_insert(1.0);
                burn_in.get_or_insert(DEFAULT_BURN_IN);
            }
            _ => {}
        }
    }

    /// Natural window for the model when none is given.
    pub fn default_window(&self) -> CoincidenceWindow {
        match self {
            ModelSpec::Contextual { t0, .. } => CoincidenceWindow::Window(
                ContextualEventModel::DEFAULT_WINDOW_T0 * t0.unwrap_or(ContextualEventModel::default().t0()),
            ),
            _ => CoincidenceWindow::Unwindowed,
        }
    }

    /// Build the model. Random hidden-variable models are drawn from the
    /// master seed; `labels` are the setting labels the run will use.
    pub fn build(&self, master_seed: u64, labels: (&[&str], &[&str])) -> CliResult<Model> {
        fn cell_count(cells_given: bool, random: Option<usize>) -> CliResult<Option<usize>> {
            match (cells_given, random) {
                (true, None) => Ok(None),
                (false, Some(0)) => Err(CliError::Config("random_cells must be at least 1".into())),
                (false, Some(n)) => Ok(Some(n)),
                _ => Err(CliError::Config("give exactly one of `cells` or `random_cells`".into())),
            }
        }
        let check = |e: &dyn Fn(&str, &str) -> spcelab::Result<f64>| -> CliResult<()> {
            for x in labels.0 {
                for y in labels.1 {
                    e(x, y).map_err(CliError::config)?;
                }
            }
            Ok(())
        };
        let model = match self {
            ModelSpec::Qt {} => Model::Pairs(Generator::QuantumOracle),
            ModelSpec::Contextual {
                t0,
                exponent,
                emission_interval,
            } => {
                let d = ContextualEventModel::default();
                let m = ContextualEventModel::new(
                    t0.unwrap_or(d.t0()),
                    exponent.unwrap_or(d.exponent()),
                    emission_interval.unwrap_or(d.emission_interval()),
                )
                .map_err(CliError::config)?;
                Model::Pairs(Generator::Contextual(m))
            }
            ModelSpec::Factorizable { cells, random_cells } => {
                let m = match cell_count(cells.is_some(), *random_cells)? {
                    Some(n) => {
                        let mut rng = seed::rng(master_seed, &[seed::MODEL]);
                        FactorizableModel::random(&mut rng, n, labels.0, labels.1)
                    }
                    None => FactorizableModel::new(cells.clone().unwrap_or_default()).map_err(CliError::config)?,
                };
                check(&|x, y| m.expected_correlation(x, y))?;
                Model::Pairs(Generator::Factorizable(m))
            }
            ModelSpec::Deterministic { cells, random_cells } => {
                let m = match cell_count(cells.is_some(), *random_cells)? {
                    Some(n) => {
                        let mut rng = seed::rng(master_seed, &[seed::MODEL]);
                        DeterministicSharedSpaceModel::random(&mut rng, n, labels.0, labels.1)
                    }
                    None => DeterministicSharedSpaceModel::new(cells.clone().unwrap_or_default())
                        .map_err(CliError::config)?,
                };
                check(&|x, y| m.expected_correlation(x, y))?;
                Model::Pairs(Generator::Deterministic(m))
            }
            ModelSpec::Ar {
                coefficients,
                noise_variance,
                burn_in,
            } => Model::Series {
                model: ArModel::new(coefficients.clone(), noise_variance.unwrap_or(1.0)).map_err(CliError::config)?,
                burn_in: burn_in.unwrap_or(DEFAULT_BURN_IN),
            },
        };
        Ok(model)
    }

    pub fn pair_generator(&self, master_seed: u64, labels: (&[&str], &[&str])) -> CliResult<Generator> {
        match self.build(master_seed, labels)? {
            Model::Pairs(g) => Ok(g),
            Model::Series { .. } => Err(CliError::Config("the `ar` model only works with `simulate`".into())),
        }
    }
}

/// Settings quadruple in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsDeg {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for SettingsDeg {
    fn default() -> Self {
        Self {
            a: 0.0,
            a_prime: 90.0,
            b: 45.0,
            b_prime: 135.0,
        }
    }
}

impl SettingsDeg {
    pub fn parse(s: &str) -> CliResult<Self> {
        let v = parse_list::<f64>(s, "angles")?;
        match v[..] {
            [a, a_prime, b, b_prime] => Ok(Self { a, a_prime, b, b_prime }),
            _ => Err(CliError::Config(format!(
                "--angles needs four values a,a',b,b', got {}",
                v.len()
            ))),
        }
    }

    pub fn quadruple(&self) -> CliResult<SettingsQuadruple> {
        SettingsQuadruple::from_degrees(self.a, self.a_prime, self.b, self.b_prime).map_err(CliError::config)
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|e| CliError::Config(format!("{what}: `{p}`: {e}")))
        })
        .collect()
}

fn require<T: Clone>(v: &Option<T>, what: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| CliError::Config(format!("missing `{what}`")))
}

fn positive(n: u64, what: &str) -> CliResult<u64> {
    if n == 0 {
        return Err(CliError::Config(format!("`{what}` must be at least 1")));
    }
    Ok(n)
}

macro_rules! section {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])* #[serde(default, skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>,)*
        }
    };
}

section!(SimulateConfig {
    seed: u64,
    output: String,
    n_pairs: u64,
    model: ModelSpec,
    settings: SettingsDeg,
});

section!(ChshConfig {
    seed: u64,
    output: String,
    n_pairs: u64,
    window: WindowSpec,
    model: ModelSpec,
    settings: SettingsDeg,
    /// Four stored event logs, in pass order (a,b), (a,b'), (a',b), (a',b').
    logs: Vec<String>,
});

section!(ScanConfig {
    seed: u64,
    output: String,
    n_pairs: u64,
    window: WindowSpec,
    model: ModelSpec,
    /// Setting differences in degrees; the 13-point 15° grid by default.
    deltas_deg: Vec<f64>,
});

section!(PurityConfig {
    output: String,
    input: String,
    column: String,
    splits: usize,
    /// Treat the column as 0/1 symbols.
    binary: bool,
});

section!(TimeseriesConfig {
    output: String,
    input: String,
    column: String,
    max_lag: usize,
    /// AR order to fit; the selected order when absent.
    fit: usize,
    bins: usize,
});

section!(CalibrateConfig {
    seed: u64,
    output: String,
    n_pairs: u64,
    model: ModelSpec,
    exponents: Vec<f64>,
    windows: Vec<WindowSpec>,
    /// Pairs per point for the confirmation run at the selected cell.
    verify_n_pairs: u64,
});

pub struct ResolvedSimulate {
    pub seed: u64,
    pub n_pairs: u64,
    pub model: Model,
    pub settings: SettingsQuadruple,
}

impl SimulateConfig {
    pub fn resolve(&mut self) -> CliResult<ResolvedSimulate> {
        let seed = require(&self.seed, "seed")?;
        let n_pairs = positive(require(&self.n_pairs, "n_pairs")?, "n_pairs")?;
        let mut spec = require(&self.model, "model")?;
        spec.normalize();
        let model = spec.build(seed, (&ALICE_LABELS, &BOB_LABELS))?;
        self.model = Some(spec);
        let settings = match model {
            Model::Pairs(_) => *self.settings.get_or_insert_with(SettingsDeg::default),
            Model::Series { .. } if self.settings.is_some() => {
                return Err(CliError::Config("`settings` do not apply to the `ar` model".into()))
            }
            Model::Series { .. } => SettingsDeg::default(),
        }
        .quadruple()?;
        Ok(ResolvedSimulate {
            seed,
            n_pairs,
            model,
            settings,
        })
    }
}

pub enum ChshSource {
    Model {
        generator: Generator,
        seed: u64,
        n_pairs: u64,
        settings: SettingsQuadruple,
    },
    Logs([String; 4]),
}

pub struct ResolvedChsh {
    pub source: ChshSource,
    pub window: CoincidenceWindow,
}

impl ChshConfig {
    pub fn resolve(&mut self) -> CliResult<ResolvedChsh> {
        if let Some(logs) = &self.logs {
            if self.model.is_some() || self.settings.is_some() || self.n_pairs.is_some() || self.seed.is_some() {
                return Err(CliError::Config(
                    "`logs` replaces the model run; drop model, settings, n_pairs and seed".into(),
                ));
            }
            let logs: [String; 4] = logs
                .clone()
                .try_into()
                .map_err(|v: Vec<String>| CliError::Config(format!("`logs` needs four files, got {}", v.len())))?;
            let window = self
                .window
                .get_or_insert(WindowSpec::Named("unwindowed".into()))
                .resolve()?;
            return Ok(ResolvedChsh {
                source: ChshSource::Logs(logs),
                window,
            });
        }
        let seed = require(&self.seed, "seed")?;
        let n_pairs = positive(*self.n_pairs.get_or_insert(DEFAULT_N_PAIRS), "n_pairs")?;
        let mut spec = require(&self.model, "model")?;
        spec.normalize();
        let generator = spec.pair_generator(seed, (&ALICE_LABELS, &BOB_LABELS))?;
        let window = match &self.window {
            Some(w) => w.resolve()?,
            None => spec.default_window(),
        };
        self.window = Some(WindowSpec::from_window(window));
        self.model = Some(spec);
        let settings = self.settings.get_or_insert_with(SettingsDeg::default).quadruple()?;
        Ok(ResolvedChsh {
            source: ChshSource::Model {
                generator,
                seed,
                n_pairs,
                settings,
            },
            window,
        })
    }
}

pub struct ResolvedScan {
    pub generator: Generator,
    pub seed: u64,
    pub n_pairs: u64,
    pub window: CoincidenceWindow,
    pub deltas: Vec<f64>,
}

impl ScanConfig {
    pub fn resolve(&mut self) -> CliResult<ResolvedScan> {
        let seed = require(&self.seed, "seed")?;
        let n_pairs = positive(*self.n_pairs.get_or_insert(DEFAULT_N_PAIRS), "n_pairs")?;
        let mut spec = require(&self.model, "model")?;
        spec.normalize();
        let generator = spec.pair_generator(seed, (&["a"], &["b"]))?;
        let window = match &self.window {
            Some(w) => w.resolve()?,
            None => spec.default_window(),
        };
        self.window = Some(WindowSpec::from_window(window));
        self.model = Some(spec);
        let deltas_deg = self
            .deltas_deg
            .get_or_insert_with(|| (0..=12).map(|k| 15.0 * k as f64).collect());
        if deltas_deg.is_empty() {
            return Err(CliError::Config("`deltas_deg` must not be empty".into()));
        }
        if let Some(d) = deltas_deg.iter().find(|d| !d.is_finite()) {
            return Err(CliError::Config(format!("setting difference {d} is not finite")));
        }
        Ok(ResolvedScan {
            generator,
            seed,
            n_pairs,
            window,
            deltas: deltas_deg.iter().map(|d| d.to_radians()).collect(),
        })
    }
}

pub struct ResolvedPurity {
    pub input: String,
    pub column: String,
    pub splits: usize,
    pub binary: bool,
}

impl PurityConfig {
    pub fn resolve(&mut self) -> CliResult<ResolvedPurity> {
        let splits = *self.splits.get_or_insert(2);
        if splits < 2 {
            return Err(CliError::Config(format!("`splits` must be at least 2, got {splits}")));
        }
        Ok(ResolvedPurity {
            input: require(&self.input, "input")?,
            column: self.column.get_or_insert_with(|| "z".into()).clone(),
            splits,
            binary: *self.binary.get_or_insert(false),
        })
    }
}

pub struct ResolvedTimeseries {
    pub input: String,
    pub column: String,
    pub max_lag: usize,
    pub fit: Option<usize>,
    pub bins: Option<usize>,
}

impl TimeseriesConfig {
    pub fn resolve(&mut self) -> CliResult<ResolvedTimeseries> {
        let max_lag = *self.max_lag.get_or_insert(DEFAULT_MAX_LAG);
        if max_lag == 0 {
            return Err(CliError::Config("`max_lag` must be at least 1".into()));
        }
        if self.bins == Some(0) {
            return Err(CliError::Config("`bins` must be at least 1".into()));
        }
        Ok(ResolvedTimeseries {
            input: require(&self.input, "input")?,
            column: self.column.get_or_insert_with(|| "z".into()).clone(),
            max_lag,
            fit: self.fit,
            bins: self.bins,
        })
    }
}

pub struct ResolvedCalibrate {
    pub base: ContextualEventModel,
    pub seed: u64,
    pub n_pairs: u64,
    pub exponents: Vec<f64>,
    pub windows: Vec<CoincidenceWindow>,
    pub verify_n_pairs: Option<u64>,
}

impl CalibrateConfig {
    pub fn resolve(&mut self) -> CliResult<ResolvedCalibrate> {
        let seed = require(&self.seed, "seed")?;
        let n_pairs = positive(*self.n_pairs.get_or_insert(DEFAULT_N_PAIRS), "n_pairs")?;
        let mut spec = self.model.clone().unwrap_or(ModelSpec::from_kind("contextual")?);
        if !matches!(spec, ModelSpec::Contextual { .. }) {
            return Err(CliError::Config("calibration needs the contextual model".into()));
        }
        spec.normalize();
        let base = match spec.pair_generator(seed, (&[], &[]))? {
            Generator::Contextual(m) => m,
            _ => unreachable!("checked above"),
        };
        self.model = Some(spec);
        let exponents = self.exponents.get_or_insert_with(|| vec![0.0, 2.0, 3.0, 4.0]).clone();
        if exponents.is_empty() {
            return Err(CliError::Config("`exponents` must not be empty".into()));
        }
        for &d in &exponents {
            base.with_exponent(d).map_err(CliError::config)?;
        }
        let windows = self
            .windows
            .get_or_insert_with(|| {
                let mut w: Vec<WindowSpec> = [0.1, 0.03, 0.01, 0.003]
                    .iter()
                    .map(|f| WindowSpec::Width(f * base.t0()))
                    .collect();
                w.push(WindowSpec::Named("unwindowed".into()));
                w
            })
            .iter()
            .map(WindowSpec::resolve)
            .collect::<CliResult<Vec<_>>>()?;
        if windows.is_empty() {
            return Err(CliError::Config("`windows` must not be empty".into()));
        }
        let verify_n_pairs = self.verify_n_pairs.map(|n| positive(n, "verify_n_pairs")).transpose()?;
        Ok(ResolvedCalibrate {
            base,
            seed,
            n_pairs,
            exponents,
            windows,
            verify_n_pairs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_recipe() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            experiment = "chsh"
            seed = 7
            n_pairs = 1000
            window = 0.1
            [model]
            kind = "contextual"
            exponent = 2
            [settings]
            a = 0
            a_prime = 90
            b = 45
            b_prime = 135
            "#,
        )
        .unwrap();
        let ExperimentConfig::Chsh(mut c) = cfg else { panic!() };
        let r = c.resolve().unwrap();
        assert_eq!(r.window, CoincidenceWindow::Window(0.1));
        assert_eq!(
            c.model,
            Some(ModelSpec::Contextual {
                t0: Some(1.0),
                exponent: Some(2.0),
                emission_interval: Some(1000.0)
            })
        );
    }

    #[test]
    fn rejects_unknown_keys() {
        for text in [
            "experiment = \"chsh\"\nseed = 1\ncolour = 3\n",
            "experiment = \"chsh\"\nseed = 1\n[model]\nkind = \"qt\"\nexponent = 2\n",
            "experiment = \"chsh\"\nseed = 1\n[settings]\na = 0\na_prime = 1\nb = 2\nb_prime = 3\nc = 4\n",
            "experiment = \"bogus\"\n",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn seed_is_required() {
        let mut c = ChshConfig {
            model: Some(ModelSpec::Qt {}),
            ..Default::default()
        };
        assert!(matches!(c.resolve(), Err(CliError::Config(m)) if m.contains("seed")));
    }

    #[test]
    fn window_values() {
        assert_eq!(
            WindowSpec::parse("unwindowed").unwrap().resolve().unwrap(),
            CoincidenceWindow::Unwindowed
        );
        assert!(WindowSpec::parse("-1").is_err());
        assert!(WindowSpec::parse("wide").is_err());
        let c = ExperimentConfig::from_toml("experiment = \"chsh\"\nwindow = \"unwindowed\"\n").unwrap();
        assert!(matches!(
            c,
            ExperimentConfig::Chsh(ChshConfig {
                window: Some(WindowSpec::Named(_)),
                ..
            })
        ));
    }

    #[test]
    fn explicit_cells_must_cover_the_labels() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            experiment = "chsh"
            seed = 1
            [model]
            kind = "deterministic"
            cells = [{ weight = 1.0, alice = { a = 1 }, bob = { b = -1, "b'" = 1 } }]
            "#,
        )
        .unwrap();
        let ExperimentConfig::Chsh(mut c) = cfg else { panic!() };
        let err = c.resolve().err().unwrap();
        assert!(err.to_string().contains("a'"), "{err}");
    }
}
