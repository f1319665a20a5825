//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The whole suite runs twice into separate directories under the cargo
//! target tmpdir; the last criterion compares the two sets of reports byte
//! for byte. Wall times are measured on the first run and never written into
//! a report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use spcelab::coincidence::{run_chsh_experiment, CoincidenceWindow, SettingsQuadruple};
use spcelab::hv::{DeterministicSharedSpaceModel, FactorizableModel, Generator};
use spcelab::purity::{count_runs, mann_whitney_u, mid_ranks, runs_moments, BinarySequence, PValueMethod};
use spcelab::quantum::{smeared_correlation, AngularSmearing};
use spcelab::seed;
use spcelab::timeseries::{
    durbin_levinson, fit_ar, select_order, simulate_ar, theoretical_acf, ArModel, DEFAULT_BURN_IN,
};

const MASTER: u64 = 20_240_601;
const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

struct Check {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
    /// Deterministic figures for the summary report.
    figures: Value,
}

fn cli(args: &[String]) -> Value {
    let argv = std::iter::once("spcelab".to_string()).chain(args.iter().cloned());
    let summary = spcelab_cli::execute(argv).unwrap_or_else(|e| panic!("spcelab {}: {e}", args.join(" ")));
    serde_json::from_str(&fs::read_to_string(summary.report).unwrap()).unwrap()
}

fn args(s: &str, out: &Path) -> Vec<String> {
    let mut v: Vec<String> = s.split_whitespace().map(String::from).collect();
    v.extend(["--out".to_string(), out.display().to_string()]);
    v
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn timed<T>(work: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = work();
    (out, start.elapsed().as_secs_f64())
}

// 1 -------------------------------------------------------------------------
fn qt_curve(dir: &Path) -> Check {
    let (r, secs) = timed(|| cli(&args("scan --model qt --n 100000 --seed 101", &dir.join("c1_scan"))));
    let points = r["results"]["points"].as_array().unwrap();
    let mut worst = 0.0f64;
    let mut within = true;
    for p in points {
        let dev = (f(&p["estimate"]["e_hat"]) - f(&p["singlet"])).abs();
        let se = f(&p["estimate"]["std_error"]);
        within &= dev <= 4.0 * se;
        if se > 0.0 {
            worst = worst.max(dev / se);
        }
    }
    Check {
        id: "1",
        name: "QT curve",
        pass: points.len() == 13 && within && secs <= 10.0,
        detail: format!(
            "{} points, worst |e - (-cos Δ)| = {:.2} stderr (limit 4), {secs:.2} s (limit 10 s)",
            points.len(),
            worst
        ),
        figures: json!({ "points": points.len(), "worst_deviation_in_stderr": worst }),
    }
}

// 2 -------------------------------------------------------------------------
fn qt_chsh(dir: &Path) -> Check {
    let r = cli(&args(
        "chsh --model qt --angles 0,90,45,135 --n 100000 --seed 102",
        &dir.join("c2_chsh"),
    ));
    let s = f(&r["results"]["s"]);
    let se = f(&r["results"]["s_std_error"]);
    let z = (s - TSIRELSON) / se;
    Check {
        id: "2",
        name: "CHSH violation (quantum)",
        pass: z.abs() <= 3.0,
        detail: format!("S = {s:.4} ± {se:.4}, {z:+.2}σ from 2√2 (limit 3σ)"),
        figures: json!({ "s": s, "s_std_error": se }),
    }
}

// 3, 4 ----------------------------------------------------------------------
fn local_bound(id: &'static str, name: &'static str, deterministic: bool) -> Check {
    let quad = SettingsQuadruple::standard();
    let alice = ["a", "a'"];
    let bob = ["b", "b'"];
    let tag = if deterministic { 4 } else { 3 };
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut max_s = f64::NEG_INFINITY;
    for m in 0..100u64 {
        let mut rng = seed::rng(MASTER, &[tag, m]);
        let n_cells = rng.random_range(1..=8);
        let g = if deterministic {
            Generator::Deterministic(DeterministicSharedSpaceModel::random(&mut rng, n_cells, &alice, &bob))
        } else {
            Generator::Factorizable(FactorizableModel::random(&mut rng, n_cells, &alice, &bob))
        };
        let r = run_chsh_experiment(
            &g,
            &quad,
            10_000,
            CoincidenceWindow::Unwindowed,
            seed::derive(MASTER, &[tag, m, 1]),
        )
        .unwrap();
        max_s = max_s.max(r.s);
        if r.s_std_error > 0.0 {
            worst = worst.max((r.s - 2.0) / r.s_std_error);
        }
        if r.s > 2.0 + 5.0 * r.s_std_error {
            violations += 1;
        }
    }
    Check {
        id,
        name,
        pass: violations == 0,
        detail: format!(
            "100 models at n = 10^4: {violations} with S > 2 + 5σ; max S = {max_s:.4}, max (S - 2)/σ = {worst:+.2}"
        ),
        figures: json!({ "violations": violations, "max_s": max_s, "max_sigma_above_2": worst }),
    }
}

// 5 -------------------------------------------------------------------------
fn contextual(dir: &Path) -> Check {
    let (r, secs) = timed(|| {
        cli(&args(
            "calibrate --seed 105 --n 100000 --verify-n 1000000",
            &dir.join("c5_calibrate"),
        ))
    });
    let best = &r["results"]["best"];
    let v = &r["results"]["verification"];
    let dev = f(&v["max_deviation"]);
    let s = f(&v["chsh"]["s"]);
    let window = match &best["window"] {
        Value::String(s) => s.clone(),
        w => format!("{}", f(&w["window"])),
    };
    Check {
        id: "5",
        name: "Contextual model",
        pass: dev <= 0.05 && s > 2.4 && secs <= 120.0,
        detail: format!(
            "calibrated d = {}, W = {window}; at n = 10^6: max |e - (-cos Δ)| = {dev:.4} (limit 0.05), \
             S = {s:.4} (limit > 2.4), {secs:.1} s (limit 120 s)",
            best["exponent"]
        ),
        figures: json!({ "exponent": best["exponent"], "window": best["window"], "max_deviation": dev, "s": s }),
    }
}

// 6 -------------------------------------------------------------------------
fn smearing() -> Check {
    let a = AngularSmearing::uniform(0.0, 0.1).unwrap();
    let b = AngularSmearing::uniform(0.0, 0.1).unwrap();
    let e = smeared_correlation(&a, &b).unwrap();
    let sinc = 0.1f64.sin() / 0.1;
    let closed = -sinc * sinc;
    Check {
        id: "6",
        name: "No strict anti-correlation under smearing",
        pass: (e - closed).abs() <= 1e-6 && e > -1.0,
        detail: format!(
            "E = {e:.10}, closed form -(sin δ/δ)^2 = {closed:.10}, |diff| = {:.1e} (limit 1e-6); \
             the quoted -0.996673 is {:.1e} from the closed form",
            (e - closed).abs(),
            (closed + 0.996673).abs()
        ),
        figures: json!({ "e": e, "closed_form": closed }),
    }
}

// 7 -------------------------------------------------------------------------
fn brute_runs(n1: usize, n2: usize) -> (f64, f64) {
    let n = n1 + n2;
    let (mut count, mut sum, mut sq) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n2 {
            continue;
        }
        let r = (1..n).filter(|&i| (mask >> i & 1) != (mask >> (i - 1) & 1)).count() as u64 + 1;
        count += 1;
        sum += r;
        sq += r * r;
    }
    let m = sum as f64 / count as f64;
    (m, sq as f64 / count as f64 - m * m)
}

fn runs_exactness() -> Check {
    let r8 = count_runs(&BinarySequence::parse("00101100011011").unwrap()).unwrap();
    let r3 = count_runs(&BinarySequence::parse("11111100000111").unwrap()).unwrap();
    let mut worst = 0.0f64;
    for n1 in 1..=6 {
        for n2 in 1..=6 {
            let (bm, bv) = brute_runs(n1, n2);
            let (m, v) = runs_moments(n1, n2);
            worst = worst.max((bm - m).abs()).max((bv - v).abs());
        }
    }
    Check {
        id: "7",
        name: "Runs test exactness",
        pass: r8 == 8 && r3 == 3 && worst <= 1e-12,
        detail: format!("runs {r8} and {r3}; moments vs enumeration over n1, n2 <= 6 differ by at most {worst:.1e}"),
        figures: json!({ "runs": [r8, r3], "max_moment_error": worst }),
    }
}

// 8 -------------------------------------------------------------------------
fn enumerated_p(x: &[f64], y: &[f64]) -> f64 {
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = mid_ranks(&all);
    let (n, n1) = (all.len(), x.len());
    let center = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let obs = (ranks[..n1].iter().sum::<f64>() - center).abs();
    let (mut total, mut hit) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == n1 {
            let t: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            total += 1;
            hit += u64::from((t - center).abs() >= obs - 1e-9);
        }
    }
    hit as f64 / total as f64
}

fn mann_whitney_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(MASTER, &[8]));
    let (mut u_ok, mut p_checked, mut worst_p) = (0, 0, 0.0f64);
    for _ in 0..1000 {
        let n1 = rng.random_range(1..=8);
        let n2 = rng.random_range(1..=8);
        let x: Vec<f64> = (0..n1).map(|_| f64::from(rng.random_range(0..5))).collect();
        let y: Vec<f64> = (0..n2).map(|_| f64::from(rng.random_range(0..5))).collect();
        let r = mann_whitney_u(&x, &y).unwrap();
        let u1: f64 = x
            .iter()
            .flat_map(|a| {
                y.iter().map(move |b| {
                    if b > a {
                        1.0
                    } else if b == a {
                        0.5
                    } else {
                        0.0
                    }
                })
            })
            .sum();
        u_ok += usize::from(r.u1 == u1 && r.u == u1.min((n1 * n2) as f64 - u1));
        if r.method == PValueMethod::Exact {
            worst_p = worst_p.max((r.p_value - enumerated_p(&x, &y)).abs());
            p_checked += 1;
        }
    }
    Check {
        id: "8",
        name: "Mann-Whitney exactness",
        pass: u_ok == 1000 && worst_p <= 1e-12,
        detail: format!(
            "U matches pairwise counts in {u_ok}/1000 samples; {p_checked} exact p-values within {worst_p:.1e} of enumeration"
        ),
        figures: json!({ "u_matches": u_ok, "exact_checked": p_checked, "max_p_error": worst_p }),
    }
}

// 9 -------------------------------------------------------------------------
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn ar2() -> Check {
    let model = ArModel::new(vec![0.25, 0.5], 1.0).unwrap();
    let ((order2, joint, each, band), secs) = timed(|| {
        let (mut order2, mut joint, mut each) = (0, 0, [0, 0]);
        let mut fits: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for k in 0..100u64 {
            let x = simulate_ar(&model, 500, seed::derive(MASTER, &[9, k]), DEFAULT_BURN_IN);
            let fit = fit_ar(x.values(), 2).unwrap();
            let phi = fit.coefficients();
            fits[0].push(phi[0]);
            fits[1].push(phi[1]);
            if select_order(x.values(), 20).unwrap().order == 2 {
                order2 += 1;
                let ok = [(phi[0] - 0.25).abs() <= 0.08, (phi[1] - 0.5).abs() <= 0.08];
                joint += usize::from(ok[0] && ok[1]);
                each[0] += usize::from(ok[0]);
                each[1] += usize::from(ok[1]);
            }
        }
        let band: Vec<(f64, f64)> = fits
            .iter_mut()
            .map(|v| {
                v.sort_by(f64::total_cmp);
                (quantile(v, 0.025), quantile(v, 0.975))
            })
            .collect();
        (order2, joint, each, band)
    });
    let rate = joint as f64 / order2.max(1) as f64;
    let in_band = band[0].0 <= 0.243 && 0.243 <= band[0].1 && band[1].0 <= 0.487 && 0.487 <= band[1].1;
    Check {
        id: "9",
        name: "AR(2) reproduction",
        pass: order2 >= 90 && rate >= 0.95 && in_band && secs <= 5.0,
        detail: format!(
            "order 2 in {order2}/100 (limit 90); both coefficients within ±0.08 in {joint}/{order2} = {:.1}% \
             (limit 95%; Φ1 alone {}, Φ2 alone {}); 95% band Φ1 [{:.3}, {:.3}], Φ2 [{:.3}, {:.3}] {} (0.243, 0.487); \
             {secs:.2} s (limit 5 s)",
            100.0 * rate,
            each[0],
            each[1],
            band[0].0,
            band[0].1,
            band[1].0,
            band[1].1,
            if in_band { "contains" } else { "misses" },
        ),
        figures: json!({ "order2": order2, "joint_within": joint, "each_within": each, "band": band }),
    }
}

// 10 ------------------------------------------------------------------------
fn correlogram_oracles() -> Check {
    let rho = theoretical_acf(&ArModel::new(vec![0.25, 0.5], 1.0).unwrap(), 2);
    let acf_err = (rho[1] - 0.5).abs().max((rho[2] - 0.625).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(MASTER, &[10]));
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = rng.random_range(1..=6);
        // random stationary model from partial autocorrelations in (-0.9, 0.9)
        let mut phi: Vec<f64> = Vec::new();
        for k in 1..=p {
            let kk: f64 = rng.random_range(-0.9..0.9);
            let mut next: Vec<f64> = (0..k - 1).map(|j| phi[j] - kk * phi[k - 2 - j]).collect();
            next.push(kk);
            phi = next;
        }
        let rho = theoretical_acf(&ArModel::new(phi, 1.0).unwrap(), p);
        let toeplitz = DMatrix::from_fn(p, p, |i, j| rho[i.abs_diff(j)]);
        let direct = toeplitz.lu().solve(&DVector::from_column_slice(&rho[1..=p])).unwrap();
        let lev = durbin_levinson(&rho, p).unwrap();
        for (a, b) in lev.coefficients.iter().zip(direct.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    Check {
        id: "10",
        name: "Correlogram oracles",
        pass: acf_err <= 1e-12 && worst <= 1e-10,
        detail: format!(
            "ρ(1) = {:.15}, ρ(2) = {:.15} (error {acf_err:.1e}, limit 1e-12); Durbin-Levinson vs Toeplitz solve on \
             200 models: max error {worst:.1e} (limit 1e-10)",
            rho[1], rho[2]
        ),
        figures: json!({ "rho": [rho[1], rho[2]], "max_levinson_error": worst }),
    }
}

/// Extra recipe runs whose reports join the determinism comparison.
fn pipelines(dir: &Path) {
    let sim = dir.join("ar2_simulation");
    cli(&args("simulate --model ar --phi 0.25,0.5 --n 500 --seed 111", &sim));
    // both runs read the series from one place so their recipes agree; the
    // simulation outputs themselves are compared as well
    let shared = dir.parent().unwrap().join("inputs");
    fs::create_dir_all(&shared).unwrap();
    fs::copy(sim.join("series.csv"), shared.join("series.csv")).unwrap();
    let series = shared.join("series.csv").display().to_string();
    cli(&args(
        &format!("timeseries --input {series} --maxlag 20 --fit 2"),
        &dir.join("ar2_timeseries"),
    ));
    cli(&args(
        &format!("purity --input {series} --splits 4"),
        &dir.join("ar2_purity"),
    ));
    cli(&args(
        "simulate --model contextual --seed 112 --n 20000",
        &dir.join("contextual_logs"),
    ));
}

fn suite(dir: &Path) -> (Vec<Check>, BTreeMap<&'static str, f64>) {
    let _ = fs::remove_dir_all(dir);
    fs::create_dir_all(dir).unwrap();
    let mut times = BTreeMap::new();
    let mut checks = Vec::new();
    let mut step = |name, run: &mut dyn FnMut() -> Check| {
        let (c, secs) = timed(run);
        times.insert(name, secs);
        checks.push(c);
    };
    step("1", &mut || qt_curve(dir));
    step("2", &mut || qt_chsh(dir));
    step("3", &mut || local_bound("3", "CHSH bound (factorizable models)", false));
    step("4", &mut || local_bound("4", "CHSH bound (deterministic models)", true));
    step("5", &mut || contextual(dir));
    step("6", &mut smearing);
    step("7", &mut runs_exactness);
    step("8", &mut mann_whitney_exactness);
    step("9", &mut ar2);
    step("10", &mut correlogram_oracles);
    pipelines(dir);
    let summary: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "criterion": c.id, "name": c.name, "figures": c.figures }))
        .collect();
    let text = serde_json::to_string_pretty(&json!({ "schema": 1, "criteria": summary })).unwrap() + "\n";
    fs::write(dir.join("acceptance.json"), text).unwrap();
    (checks, times)
}

/// Every report and data file under `dir`, keyed by relative path; timing
/// sidecars are skipped.
fn collect(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "timing.json") {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn main() {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let (dir1, dir2) = (root.join("run-1"), root.join("run-2"));
    let (checks, times) = suite(&dir1);
    let (checks2, _) = suite(&dir2);

    let (a, b) = (collect(&dir1), collect(&dir2));
    let reports = a.keys().filter(|k| k.extension().is_some_and(|e| e == "json")).count();
    let differing: Vec<String> = a
        .iter()
        .filter(|(k, v)| b.get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .collect();
    let verdicts_agree = checks
        .iter()
        .zip(&checks2)
        .all(|(x, y)| x.pass == y.pass && x.figures == y.figures);
    let determinism = Check {
        id: "11",
        name: "Determinism",
        pass: differing.is_empty() && a.len() == b.len() && verdicts_agree,
        detail: format!(
            "{} files ({reports} JSON reports) compared across two runs: {} differ{}",
            a.len(),
            differing.len(),
            if differing.is_empty() {
                String::new()
            } else {
                format!(" ({})", differing.join(", "))
            }
        ),
        figures: Value::Null,
    };

    println!();
    let mut failed = 0;
    for c in checks.iter().chain(std::iter::once(&determinism)) {
        let t = times.get(c.id).map_or(String::new(), |s| format!(" [{s:.1} s]"));
        println!(
            "{} {:>2}. {}: {}{t}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
        failed += usize::from(!c.pass);
    }
    println!("\n{} of 11 criteria passed; reports in {}", 11 - failed, root.display());
    if failed > 0 {
        std::process::exit(1);
    }
}
