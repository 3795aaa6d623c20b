use std::collections::BTreeMap;

use qosc_core::regime::{sweep_point, validate_grid, Cell, SimConfig};
use rayon::prelude::*;
use serde_json::json;

use super::Outputs;
use crate::error::AppError;
use crate::io::fmt_f64;
use crate::manifest::{config_hash, manifest, read_manifest, write_manifest};
use crate::plot::{gnuplot_script, regime_plane_svg, GnuplotSpec};
use crate::{resolve_out, SweepArgs};

pub const SWEEP_HEADER: &str = "q,alpha,label,lambda_max,peak_count";

/// Grid values from `start:end:step`, inclusive of `end` up to round-off and
/// rounded to 12 decimals so that e.g. `0.05:0.95:0.05` yields `0.15`, not
/// `0.15000000000000002`.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, AppError> {
    let bad = || AppError::Usage(format!("--q-range expects start:end:step, got {spec:?}"));
    let parts: Vec<f64> =
        spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, end, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && start.is_finite() && end.is_finite() && step.is_finite()) {
        return Err(bad());
    }
    if end < start {
        return Ok(Vec::new());
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Key of a grid point in the manifest's completed-row table; also the first
/// two CSV fields.
fn point_key(q: f64, alpha: f64) -> String {
    format!("{q},{alpha}")
}

pub fn format_row(q: f64, alpha: f64, cell: &Cell) -> String {
    let (lambda, peaks) = match cell.label() {
        Some(l) if l.features.lambda_max.is_finite() => {
            (fmt_f64(l.features.lambda_max), l.features.peak_count.to_string())
        }
        Some(l) => (String::new(), l.features.peak_count.to_string()),
        None => (String::new(), String::new()),
    };
    format!("{},{},{lambda},{peaks}", point_key(q, alpha), cell.label_str())
}

pub fn run(args: SweepArgs) -> Result<(), AppError> {
    let q_grid = match &args.q_range {
        Some(spec) => parse_range(spec)?,
        None => args.q.clone(),
    };
    let alpha_grid = args.alpha.clone();
    validate_grid(&q_grid, &alpha_grid)
        .map_err(|e| AppError::Usage(format!("{e}; give --q or --q-range and --alpha")))?;
    if !(args.dt > 0.0 && args.dt.is_finite()) || args.steps < 2 {
        return Err(AppError::Usage(format!("invalid sampling dt = {}, steps = {}", args.dt, args.steps)));
    }
    if !(args.lambda_threshold > 0.0 && args.lambda_threshold.is_finite()) {
        return Err(AppError::Usage("--lambda-threshold must be positive".into()));
    }
    let cfg =
        SimConfig { dt: args.dt, steps: args.steps, lambda_threshold: args.lambda_threshold, ..SimConfig::default() };

    let config = json!({
        "q_grid": q_grid,
        "alpha_grid": alpha_grid,
        "t0": cfg.t0,
        "dt": cfg.dt,
        "steps": cfg.steps,
        "lambda_threshold": cfg.lambda_threshold,
    });
    let hash = config_hash(&config);
    let dir = resolve_out(args.out, None);

    // rows finished by an earlier run with the same configuration
    let mut done: BTreeMap<String, String> = read_manifest(&dir)
        .filter(|m| m["command"] == "sweep" && m["config_hash"] == hash.as_str())
        .and_then(|m| m["results"]["rows"].as_object().cloned())
        .map(|rows| rows.into_iter().filter_map(|(k, v)| Some((k, v.as_str()?.to_string()))).collect())
        .unwrap_or_default();
    let resumed = done.len();

    let points: Vec<(f64, f64)> = alpha_grid.iter().flat_map(|&a| q_grid.iter().map(move |&q| (q, a))).collect();
    let pending: Vec<(f64, f64)> =
        points.iter().copied().filter(|&(q, a)| !done.contains_key(&point_key(q, a))).collect();
    let budget = args.max_points.unwrap_or(usize::MAX).min(pending.len());

    let save = |done: &BTreeMap<String, String>| -> Result<bool, AppError> {
        let complete = points.iter().all(|&(q, a)| done.contains_key(&point_key(q, a)));
        let mut csv = format!("{SWEEP_HEADER}\n");
        for &(q, a) in &points {
            if let Some(row) = done.get(&point_key(q, a)) {
                csv.push_str(row);
                csv.push('\n');
            }
        }
        let label_of = |qi: usize, ai: usize| {
            done.get(&point_key(q_grid[qi], alpha_grid[ai]))
                .and_then(|r| r.split(',').nth(2))
                .unwrap_or("Pending")
                .to_string()
        };
        let mut out = Outputs::default();
        out.add("sweep.csv", csv);
        out.add("sweep.svg", regime_plane_svg("Dynamical regimes", &q_grid, &alpha_grid, label_of));
        out.add("sweep.gp", sweep_gnuplot());
        out.write_all(&dir)?;
        let mut counts = BTreeMap::new();
        for row in done.values() {
            *counts.entry(row.split(',').nth(2).unwrap_or("").to_string()).or_insert(0usize) += 1;
        }
        let results = json!({ "rows": done, "complete": complete, "label_counts": counts });
        write_manifest(&dir, &manifest("sweep", &config, &out.names(), results))?;
        Ok(complete)
    };

    // checkpoint after every batch so an interrupted run loses at most one
    let batch = rayon::current_num_threads().max(1);
    let mut complete = save(&done)?;
    for chunk in pending[..budget].chunks(batch) {
        let rows: Vec<(String, String)> =
            chunk.par_iter().map(|&(q, a)| (point_key(q, a), format_row(q, a, &sweep_point(q, a, &cfg)))).collect();
        for (k, row) in rows {
            println!("{row}");
            done.insert(k, row);
        }
        complete = save(&done)?;
    }
    println!(
        "{} of {} points done ({resumed} resumed, {budget} computed){}; outputs in {}",
        done.len(),
        points.len(),
        if complete { "" } else { ", rerun to continue" },
        dir.display()
    );
    Ok(())
}

fn sweep_gnuplot() -> String {
    gnuplot_script(&GnuplotSpec {
        stem: "sweep",
        csv: "sweep.csv",
        title: "Dynamical regimes",
        xlabel: "q",
        ylabel: "alpha",
        log_y: false,
        skip: 1,
        using: "1:2:(color(strcol(3)))",
        style: "with points pt 5 ps 2 lc rgb variable notitle",
        extra: "color(s) = s eq 'Periodic' ? 0x4c72b0 : s eq 'QuasiPeriodic' ? 0x55a868 : s eq 'Chaotic' ? 0xc44e52 : s eq 'Inadmissible' ? 0xdddddd : 0x8172b2\n",
    })
}
