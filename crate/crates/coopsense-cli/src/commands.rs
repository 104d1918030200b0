//! The four CLI commands: sweep, optimize, validate, calibrate.
//!
//! Every command writes one CSV file plus a `<output>.manifest` sidecar
//! listing the full resolved configuration (sorted `key=value` lines), and
//! prints a short human summary to stdout. CSV bytes are a deterministic
//! function of the manifest, so any output can be reproduced by rerunning
//! with `--config <output>.manifest`.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use coopsense::db_to_linear;
use coopsense::fusion::FusionRule;
use coopsense::planner::{ScenarioConfig, SweepTable, optimize_cluster_size};
use coopsense::validation::{AgreementGrid, run_agreement};

use crate::config::ResolvedConfig;

/// Formats a numeric cell with 12 significant digits.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes the CSV and its manifest sidecar.
fn write_outputs(output: &Path, csv: &str, command: &str, config: &ResolvedConfig) -> Result<()> {
    std::fs::write(output, csv)
        .with_context(|| format!("cannot write output file {}", output.display()))?;
    let mut entries = config.manifest_entries();
    entries.push(("command".into(), command.into()));
    entries.push(("output".into(), output.display().to_string()));
    entries.push(("version".into(), env!("CARGO_PKG_VERSION").into()));
    entries.sort();
    let manifest: String = entries.iter().map(|(key, value)| format!("{key}={value}\n")).collect();
    let manifest_path = manifest_sidecar(output);
    std::fs::write(&manifest_path, manifest)
        .with_context(|| format!("cannot write manifest {}", manifest_path.display()))?;
    Ok(())
}

/// `<output>.manifest` path next to the output file.
pub fn manifest_sidecar(output: &Path) -> std::path::PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    std::path::PathBuf::from(name)
}

/// Sorted (rule, gamma_db) curve axes for sweep/optimize.
fn curve_axes(config: &ResolvedConfig) -> (Vec<FusionRule>, Vec<f64>) {
    let rules = config.rule.rules();
    let mut gammas = config.gamma_db.clone();
    gammas.sort_by(f64::total_cmp);
    (rules, gammas)
}

fn scenario_for(config: &ResolvedConfig, rule: FusionRule, gamma_db: f64) -> ScenarioConfig {
    ScenarioConfig {
        sensing_period: config.ts,
        sensing_symbols: config.m,
        total_pd_target: config.total_pd_target,
        mean_snr: db_to_linear(gamma_db),
        rule,
        max_cluster: config.n_max,
    }
}

/// One optimized sweep per (rule, gamma_db) curve, in output order.
fn sweep_tables(config: &ResolvedConfig) -> Result<Vec<(FusionRule, f64, SweepTable)>> {
    let (rules, gammas) = curve_axes(config);
    let mut tables = Vec::new();
    for &rule in &rules {
        for &gamma_db in &gammas {
            let table = optimize_cluster_size(&scenario_for(config, rule, gamma_db))?;
            tables.push((rule, gamma_db, table));
        }
    }
    Ok(tables)
}

/// Full throughput table over (rule, gamma_db, N), argmax rows marked.
pub fn cmd_sweep(config: &ResolvedConfig, output: &Path) -> Result<()> {
    let tables = sweep_tables(config)?;
    let mut csv = String::from(
        "rule,gamma_db,n,per_su_pd,lambda,per_su_pf,pf_total,overhead_factor,throughput,is_optimal\n",
    );
    for (rule, gamma_db, table) in &tables {
        for (index, row) in table.rows.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                rule.name(),
                gamma_db,
                row.cluster_size,
                sig12(row.per_su_pd),
                sig12(row.threshold()),
                sig12(row.per_su_pf()),
                sig12(row.fused_pf),
                sig12(row.overhead_factor),
                sig12(row.throughput),
                u8::from(index == table.optimal),
            );
        }
    }
    write_outputs(output, &csv, "sweep", config)?;

    println!(
        "sweep: wrote {} rows ({} curves x {} cluster sizes) to {}",
        tables.len() * config.n_max as usize,
        tables.len(),
        config.n_max,
        output.display()
    );
    for (rule, gamma_db, table) in &tables {
        let best = table.optimal_row();
        println!(
            "  {} at {gamma_db} dB: optimum N = {} (throughput {:.6}, fused Pf {:.6})",
            rule.name(),
            best.cluster_size,
            best.throughput,
            best.fused_pf
        );
    }
    Ok(())
}

/// Optimal cluster size per (rule, gamma_db) curve.
pub fn cmd_optimize(config: &ResolvedConfig, output: &Path) -> Result<()> {
    let tables = sweep_tables(config)?;
    let mut csv = String::from("rule,gamma_db,n_opt,throughput,pf_total\n");
    for (rule, gamma_db, table) in &tables {
        let best = table.optimal_row();
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            rule.name(),
            gamma_db,
            best.cluster_size,
            sig12(best.throughput),
            sig12(best.fused_pf),
        );
    }
    write_outputs(output, &csv, "optimize", config)?;

    println!("optimize: wrote {} curves to {}", tables.len(), output.display());
    for (rule, gamma_db, table) in &tables {
        let best = table.optimal_row();
        println!(
            "  {} at {gamma_db} dB: optimum N = {} (throughput {:.6}, fused Pf {:.6})",
            rule.name(),
            best.cluster_size,
            best.throughput,
            best.fused_pf
        );
    }
    Ok(())
}

/// Monte Carlo agreement grid; returns false when the grid fails.
pub fn cmd_validate(config: &ResolvedConfig, output: &Path) -> Result<bool> {
    let report = run_agreement(&AgreementGrid::default(), config.trials, config.seed)?;
    let mut csv = String::from(
        "m,gamma_db,pd_target,rule,n,quantity,analytic,estimate,half_width,tolerance,retried,pass\n",
    );
    for case in &report.cases {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            case.sensing_symbols,
            case.gamma_db,
            case.pd_target,
            case.rule.name(),
            case.cluster_size,
            case.quantity.name(),
            sig12(case.analytic),
            sig12(case.estimate.estimate),
            sig12(case.estimate.half_width_3sigma),
            sig12(case.tolerance),
            u8::from(case.retried),
            u8::from(case.pass),
        );
    }
    write_outputs(output, &csv, "validate", config)?;

    let failures = report.failures();
    let retried = report.cases.iter().filter(|case| case.retried).count();
    println!(
        "validate: {} cases at {} trials (seed {}), {} failed, {} retried -> {}",
        report.cases.len(),
        report.trials,
        report.seed,
        failures,
        retried,
        if report.all_pass() { "PASS" } else { "FAIL" }
    );
    for case in report.cases.iter().filter(|case| !case.pass) {
        println!(
            "  FAIL m={} gamma_db={} target={} rule={} n={} {}: analytic {} vs estimate {} (tolerance {})",
            case.sensing_symbols,
            case.gamma_db,
            case.pd_target,
            case.rule.name(),
            case.cluster_size,
            case.quantity.name(),
            case.analytic,
            case.estimate.estimate,
            case.tolerance
        );
    }
    Ok(report.all_pass())
}

/// Reference optima pairs the calibration searches for:
/// `(gamma_db, m_fraction, wanted OR optimum, wanted AND optimum)`.
const CALIBRATION_CELLS: [(f64, f64, u32, u32); 2] = [(5.0, 0.05, 2, 4), (0.0, 0.2, 4, 8)];

/// Searches (T_s, target) settings that reproduce the reference optima.
pub fn cmd_calibrate(config: &ResolvedConfig, output: &Path) -> Result<()> {
    let mut ts_range = config.calibrate_ts.clone();
    ts_range.sort_unstable();
    let mut targets = config.calibrate_targets.clone();
    targets.sort_by(f64::total_cmp);

    let mut csv =
        String::from("ts,total_pd_target,gamma_db,m,n_opt_or,n_opt_and,want_or,want_and,matches\n");
    let mut matches = Vec::new();
    let mut searched = 0usize;
    for &ts in &ts_range {
        for &target in &targets {
            for &(gamma_db, m_fraction, want_or, want_and) in &CALIBRATION_CELLS {
                let m = ((m_fraction * f64::from(ts)).round() as u32).clamp(1, ts - 1);
                let scenario = |rule| ScenarioConfig {
                    sensing_period: ts,
                    sensing_symbols: m,
                    total_pd_target: target,
                    mean_snr: db_to_linear(gamma_db),
                    rule,
                    max_cluster: ts - m,
                };
                let n_or =
                    optimize_cluster_size(&scenario(FusionRule::Or))?.optimal_row().cluster_size;
                let n_and =
                    optimize_cluster_size(&scenario(FusionRule::And))?.optimal_row().cluster_size;
                let hit = n_or == want_or && n_and == want_and;
                let _ = writeln!(
                    csv,
                    "{ts},{target},{gamma_db},{m},{n_or},{n_and},{want_or},{want_and},{}",
                    u8::from(hit),
                );
                searched += 1;
                if hit {
                    matches.push((ts, target, gamma_db, m));
                }
            }
        }
    }
    write_outputs(output, &csv, "calibrate", config)?;

    println!(
        "calibrate: searched {searched} settings across {} period(s) x {} target(s); wrote {}",
        ts_range.len(),
        targets.len(),
        output.display()
    );
    if matches.is_empty() {
        println!("  no setting reproduced the reference optima exactly");
    } else {
        for (ts, target, gamma_db, m) in matches {
            println!("  match: ts={ts} total_pd_target={target} at {gamma_db} dB (m={m})");
        }
    }
    Ok(())
}
