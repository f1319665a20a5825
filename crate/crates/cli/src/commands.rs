//! The work behind each subcommand. Everything here computes in memory and
//! returns the results plus the files to write, so a failure leaves the
//! output directory untouched.

use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Value};
use spcelab::coincidence::{
    correlation_scan, estimate_correlation, match_coincidences, max_deviation, run_chsh_experiment, ChshResult,
    ScanPoint, SettingsQuadruple,
};
use spcelab::hv::{calibrate_contextual, Generator, StationRecord};
use spcelab::purity::{split_sample_purity, BinarySequence, PurityInput};
use spcelab::quantum::singlet_correlation;
use spcelab::seed;
use spcelab::timeseries::{
    correlogram, descriptive_stats, fit_ar, histogram, lagged_pairs, normal_scores, select_order, simulate_ar, BinRule,
};

use crate::config::{
    ChshSource, Model, ResolvedCalibrate, ResolvedChsh, ResolvedPurity, ResolvedScan, ResolvedSimulate,
    ResolvedTimeseries,
};
use crate::error::{CliError, CliResult};
use crate::eventlog::{read_event_log, streams_from_log};
use crate::report::{read_column, to_value, PlotRow};

pub enum Artifact {
    EventLog(Vec<StationRecord>),
    Plot(Vec<PlotRow>),
    Column(&'static str, Vec<f64>),
}

pub struct Outcome {
    pub results: Value,
    pub artifacts: Vec<(String, Artifact)>,
    /// One-line human summary for stdout.
    pub summary: String,
}

const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Tag separating confirmation runs from the calibration sample.
const VERIFY: u64 = 0x5645_5249_4659;

fn generator_value(g: &Generator) -> Value {
    match g {
        Generator::QuantumOracle => json!({ "kind": "qt" }),
        Generator::Factorizable(m) => json!({ "kind": "factorizable", "model": to_value(m) }),
        Generator::Deterministic(m) => json!({ "kind": "deterministic", "model": to_value(m) }),
        Generator::Contextual(m) => json!({ "kind": "contextual", "model": to_value(m) }),
    }
}

fn chsh_value(r: &ChshResult, labels: [(String, String); 4]) -> Value {
    let passes: Vec<Value> = r
        .estimates()
        .iter()
        .zip(labels)
        .map(|(e, (a, b))| json!({ "a": a, "b": b, "estimate": to_value(e) }))
        .collect();
    json!({
        "passes": passes,
        "s": r.s,
        "s_std_error": r.s_std_error,
        "local_bound": 2.0,
        "tsirelson_bound": TSIRELSON,
        "sigma_above_local_bound": if r.s_std_error > 0.0 { Some((r.s - 2.0) / r.s_std_error) } else { None },
    })
}

fn quadruple_labels(q: &SettingsQuadruple) -> [(String, String); 4] {
    q.pairs().map(|(a, b)| (a.label.clone(), b.label.clone()))
}

fn pass_records(g: &Generator, q: &SettingsQuadruple, n: u64, master: u64) -> CliResult<Vec<Vec<StationRecord>>> {
    q.pairs()
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let (sa, sb) = g
                .sample(a, b, n, seed::derive(master, &[i as u64]))
                .map_err(CliError::data)?;
            Ok(sa.records().chain(sb.records()).collect())
        })
        .collect()
}

pub fn simulate(r: ResolvedSimulate) -> CliResult<Outcome> {
    match r.model {
        Model::Pairs(g) => {
            // same per-pass seeds as `chsh`, so the logs replay that run
            let passes = pass_records(&g, &r.settings, r.n_pairs, r.seed)?;
            let mut files = Vec::new();
            let mut artifacts = Vec::new();
            for (i, ((a, b), records)) in r.settings.pairs().into_iter().zip(passes).enumerate() {
                let name = format!("pass{i}.csv");
                files.push(json!({
                    "file": name,
                    "a": a.label,
                    "b": b.label,
                    "records": records.len(),
                }));
                artifacts.push((name, Artifact::EventLog(records)));
            }
            Ok(Outcome {
                results: json!({
                    "generator": generator_value(&g),
                    "n_pairs": r.n_pairs,
                    "event_logs": files,
                }),
                artifacts,
                summary: format!("simulate: wrote 4 event logs of {} pairs ({})", r.n_pairs, g.name()),
            })
        }
        Model::Series { model, burn_in } => {
            let series = simulate_ar(&model, r.n_pairs as usize, r.seed, burn_in);
            Ok(Outcome {
                results: json!({
                    "model": to_value(&model),
                    "theoretical_variance": model.theoretical_variance(),
                    "n": series.len(),
                    "burn_in": burn_in,
                    "file": "series.csv",
                }),
                artifacts: vec![("series.csv".into(), Artifact::Column("z", series.into_values()))],
                summary: format!(
                    "simulate: wrote an AR({}) series of length {}",
                    model.order(),
                    r.n_pairs
                ),
            })
        }
    }
}

pub fn chsh(r: ResolvedChsh) -> CliResult<Outcome> {
    let (result, labels, source) = match r.source {
        ChshSource::Model {
            generator,
            seed,
            n_pairs,
            settings,
        } => {
            let result = run_chsh_experiment(&generator, &settings, n_pairs, r.window, seed).map_err(CliError::data)?;
            let source = json!({ "kind": "model", "generator": generator_value(&generator), "n_pairs": n_pairs });
            (result, quadruple_labels(&settings), source)
        }
        ChshSource::Logs(paths) => {
            let mut estimates = Vec::with_capacity(4);
            let mut labels = Vec::with_capacity(4);
            // parse every log before using any of them
            let streams = paths
                .iter()
                .map(|p| streams_from_log(&read_event_log(Path::new(p))?, p))
                .collect::<CliResult<Vec<_>>>()?;
            for (p, (sa, sb)) in paths.iter().zip(&streams) {
                let pairs = match_coincidences(sa, sb, r.window).map_err(|e| CliError::Data(format!("{p}: {e}")))?;
                estimates.push(estimate_correlation(&pairs).map_err(|e| CliError::Data(format!("{p}: {e}")))?);
                labels.push((sa.setting.label.clone(), sb.setting.label.clone()));
            }
            let result =
                ChshResult::from_estimates(estimates.try_into().expect("four logs")).map_err(CliError::data)?;
            let labels: [(String, String); 4] = labels.try_into().expect("four logs");
            (result, labels, json!({ "kind": "logs", "files": paths }))
        }
    };
    let mut results = chsh_value(&result, labels);
    results["source"] = source;
    results["window"] = to_value(&r.window);
    Ok(Outcome {
        summary: format!("chsh: S = {:.4} ± {:.4}", result.s, result.s_std_error),
        results,
        artifacts: Vec::new(),
    })
}

fn scan_rows(points: &[ScanPoint]) -> Vec<PlotRow> {
    points
        .iter()
        .map(|p| {
            let half = 1.96 * p.estimate.std_error;
            PlotRow::banded(
                p.delta,
                p.estimate.e_hat,
                p.estimate.e_hat - half,
                p.estimate.e_hat + half,
            )
        })
        .collect()
}

fn singlet_rows() -> Vec<PlotRow> {
    let b = spcelab::quantum::AnalyzerSetting::new(0.0).expect("zero is finite");
    (0..=180)
        .map(|k| {
            let delta = k as f64 * PI / 180.0;
            let a = spcelab::quantum::AnalyzerSetting::new(delta).expect("finite");
            PlotRow::xy(delta, singlet_correlation(a, b))
        })
        .collect()
}

fn scan_value(points: &[ScanPoint]) -> Value {
    let worst_z = points
        .iter()
        .filter(|p| p.estimate.std_error > 0.0)
        .map(|p| p.deviation() / p.estimate.std_error)
        .fold(0.0, f64::max);
    json!({
        "points": to_value(&points),
        "max_deviation": max_deviation(points),
        "max_deviation_in_std_errors": worst_z,
    })
}

pub fn scan(r: ResolvedScan) -> CliResult<Outcome> {
    let points = correlation_scan(&r.generator, &r.deltas, r.n_pairs, r.window, r.seed).map_err(CliError::data)?;
    let mut results = scan_value(&points);
    results["generator"] = generator_value(&r.generator);
    results["n_pairs"] = json!(r.n_pairs);
    results["window"] = to_value(&r.window);
    Ok(Outcome {
        summary: format!(
            "scan: {} points, max |e - (-cos Δ)| = {:.4}",
            points.len(),
            max_deviation(&points)
        ),
        results,
        artifacts: vec![
            ("scan.csv".into(), Artifact::Plot(scan_rows(&points))),
            ("singlet.csv".into(), Artifact::Plot(singlet_rows())),
        ],
    })
}

pub fn calibrate(r: ResolvedCalibrate) -> CliResult<Outcome> {
    let report = calibrate_contextual(&r.base, &r.exponents, &r.windows, r.n_pairs, r.seed).map_err(CliError::data)?;
    let best = report.best_cell();
    let mut summary = format!(
        "calibrate: best d = {}, W = {} (max deviation {:.4})",
        best.exponent,
        best.window.width().map_or("unwindowed".to_string(), |w| w.to_string()),
        best.max_deviation
    );
    let table: Vec<Value> = report
        .cells
        .iter()
        .map(|c| {
            json!({
                "exponent": c.exponent,
                "window": to_value(&c.window),
                "max_deviation": c.max_deviation,
                "mean_match_fraction": c.mean_match_fraction,
            })
        })
        .collect();
    let mut artifacts = vec![(
        "calibration_best.csv".to_string(),
        Artifact::Plot(scan_rows(&best.points)),
    )];
    let mut results = json!({
        "n_pairs": r.n_pairs,
        "cells": table,
        "best": to_value(best),
    });
    if let Some(n) = r.verify_n_pairs {
        let g = Generator::Contextual(r.base.with_exponent(best.exponent).map_err(CliError::data)?);
        let points = correlation_scan(
            &g,
            &spcelab::coincidence::standard_delta_grid(),
            n,
            best.window,
            seed::derive(r.seed, &[VERIFY, 0]),
        )
        .map_err(CliError::data)?;
        let quad = SettingsQuadruple::standard();
        let chsh = run_chsh_experiment(&g, &quad, n, best.window, seed::derive(r.seed, &[VERIFY, 1]))
            .map_err(CliError::data)?;
        summary.push_str(&format!(
            "; at n = {n}: max deviation {:.4}, S = {:.4} ± {:.4}",
            max_deviation(&points),
            chsh.s,
            chsh.s_std_error
        ));
        let mut v = scan_value(&points);
        v["n_pairs"] = json!(n);
        v["chsh"] = chsh_value(&chsh, quadruple_labels(&quad));
        artifacts.push(("verification_scan.csv".into(), Artifact::Plot(scan_rows(&points))));
        results["verification"] = v;
    }
    Ok(Outcome {
        results,
        artifacts,
        summary,
    })
}

pub fn purity(r: ResolvedPurity) -> CliResult<Outcome> {
    let values = read_column(Path::new(&r.input), &r.column)?;
    let report = if r.binary {
        let bits = values
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                0.0 => Ok(false),
                1.0 => Ok(true),
                _ => Err(CliError::Data(format!(
                    "{}: row {}: binary column holds {v}",
                    r.input,
                    i + 1
                ))),
            })
            .collect::<CliResult<Vec<bool>>>()?;
        split_sample_purity(PurityInput::Binary(&BinarySequence::from_bits(bits)), r.splits)
    } else {
        split_sample_purity(PurityInput::Real(&values), r.splits)
    }
    .map_err(CliError::data)?;
    Ok(Outcome {
        summary: format!(
            "purity: {} blocks, min p = {:.3e} vs level {:.3e}: {}",
            report.blocks,
            report.min_p_value,
            report.corrected_level,
            if report.flagged {
                "impure"
            } else {
                "no evidence of impurity"
            }
        ),
        results: to_value(&report),
        artifacts: Vec::new(),
    })
}

pub fn timeseries(r: ResolvedTimeseries) -> CliResult<Outcome> {
    let x = read_column(Path::new(&r.input), &r.column)?;
    let data = |e: spcelab::Error| CliError::Data(format!("{}: {e}", r.input));
    let stats = descriptive_stats(&x).map_err(data)?;
    let hist = histogram(&x, r.bins.map_or(BinRule::Sturges, BinRule::Count)).map_err(data)?;
    let scores = normal_scores(&x).map_err(data)?;
    let lag1 = lagged_pairs(&x, 1).map_err(data)?;
    let gram = correlogram(&x, r.max_lag).map_err(data)?;
    let selection = select_order(&x, r.max_lag).map_err(data)?;
    let order = r.fit.unwrap_or(selection.order);
    let fit = fit_ar(&x, order).map_err(data)?;

    let centers: Vec<PlotRow> = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| PlotRow::xy(0.5 * (hist.edges[i] + hist.edges[i + 1]), c as f64))
        .collect();
    let acf_rows = gram
        .acf
        .iter()
        .enumerate()
        .map(|(k, &v)| PlotRow::banded(k as f64, v, -gram.band, gram.band))
        .collect();
    let pacf_rows = gram
        .pacf
        .iter()
        .enumerate()
        .map(|(k, &v)| PlotRow::banded((k + 1) as f64, v, -selection.band, selection.band))
        .collect();
    let summary = format!(
        "timeseries: n = {}, selected order {}, fitted AR({}) coefficients {:?}",
        x.len(),
        selection.order,
        order,
        fit.coefficients()
    );
    Ok(Outcome {
        results: json!({
            "n": x.len(),
            "descriptive": to_value(&stats),
            "histogram": to_value(&hist),
            "correlogram": to_value(&gram),
            "order_selection": to_value(&selection),
            "fit": {
                "order": order,
                "coefficients": fit.coefficients(),
                "noise_variance": fit.noise_variance(),
            },
        }),
        artifacts: vec![
            ("histogram.csv".into(), Artifact::Plot(centers)),
            (
                "normal_scores.csv".into(),
                Artifact::Plot(scores.iter().map(|&(q, v)| PlotRow::xy(q, v)).collect()),
            ),
            (
                "lag1.csv".into(),
                Artifact::Plot(lag1.iter().map(|&(a, b)| PlotRow::xy(a, b)).collect()),
            ),
            ("acf.csv".into(), Artifact::Plot(acf_rows)),
            ("pacf.csv".into(), Artifact::Plot(pacf_rows)),
        ],
        summary,
    })
}
