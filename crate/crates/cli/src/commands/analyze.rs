use qosc_core::regime::{classify, extract_features, FeatureConfig};
use qosc_core::tsa::{
    choose_delay, choose_dimension, densest_cell, dominant_period, embed, first_return_times,
    lyapunov_rosenstein_embedded, lyapunov_wolf_embedded, mean_period, power_spectrum, recurrence_from_embedding,
    rqa_summary, spectral_peak_count, FitWindow, RosensteinOptions, WolfOptions,
};
use qosc_core::TimeSeries;
use serde_json::{json, Map, Value};

use super::Outputs;
use crate::error::AppError;
use crate::io::{fmt_f64, read_series_csv, two_column_csv};
use crate::manifest::{manifest, write_manifest};
use crate::plot::{figure_svg, gnuplot_script, recurrence_svg, Element, Figure, GnuplotSpec};
use crate::{resolve_out, AnalyzeArgs};

/// Recurrence plots are drawn on at most this many blocks per side.
const RASTER_CELLS: usize = 500;
const PEAK_PROMINENCE: f64 = 0.05;

#[derive(Clone, Copy)]
struct Geometry {
    delay: usize,
    dim: usize,
    theiler: usize,
    period: f64,
}

type Section = Result<Value, AppError>;

pub fn run(args: AnalyzeArgs) -> Result<(), AppError> {
    let file = read_series_csv(&args.input)?;
    let x = &file.series;
    let explicit = args.spectrum || args.recurrence || args.lyapunov || args.returns || args.regime;
    let selected: Vec<&str> = if explicit {
        [
            (args.spectrum, "spectrum"),
            (args.recurrence, "recurrence"),
            (args.lyapunov, "lyapunov"),
            (args.returns, "returns"),
            (args.regime, "regime"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect()
    } else {
        vec!["spectrum", "recurrence", "lyapunov", "returns"]
    };

    let mut geometry_cache = None;

    let mut out = Outputs::default();
    let mut results = Map::new();
    let mut failures = Map::new();
    let mut first_error = None;
    for name in selected {
        let section: Section = match name {
            "spectrum" => spectrum(x, &file.column, &mut out),
            "recurrence" => {
                cached_geometry(&mut geometry_cache, x, &args).and_then(|g| recurrence(x, g, &args, &mut out))
            }
            "lyapunov" => cached_geometry(&mut geometry_cache, x, &args).and_then(|g| lyapunov(x, g, &args, &mut out)),
            "returns" => returns(x, &file.column, &args, &mut out),
            _ => regime(x, &args),
        };
        match section {
            Ok(v) => {
                results.insert(name.to_string(), v);
            }
            // explicitly requested analyses must all succeed
            Err(e) if explicit => return Err(e),
            Err(e) => {
                failures.insert(name.to_string(), Value::String(e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }
    if results.is_empty() {
        return Err(first_error.unwrap_or_else(|| AppError::Usage("no analysis selected".into())));
    }
    if !failures.is_empty() {
        results.insert("skipped".into(), Value::Object(failures));
    }

    let config = json!({
        "input": args.input.display().to_string(),
        "column": file.column,
        "samples": x.len(),
        "t0": x.t0(),
        "dt": x.dt(),
        "analyses": results.keys().filter(|k| *k != "skipped").cloned().collect::<Vec<_>>(),
        "requested": if explicit { "explicit" } else { "default" },
        "dim": args.dim,
        "delay": args.delay,
        "epsilon": args.epsilon,
        "rqa_points": args.rqa_points,
        "horizon": args.horizon,
        "fit_start": args.fit_start,
        "fit_end": args.fit_end,
        "cell_size": args.cell_size,
        "lambda_threshold": args.lambda_threshold,
    });
    let dir = resolve_out(args.out, Some("analysis"));
    out.write_all(&dir)?;
    write_manifest(&dir, &manifest("analyze", &config, &out.names(), Value::Object(results.clone())))?;
    for (k, v) in &results {
        println!("{k}: {v}");
    }
    println!("outputs in {}", dir.display());
    Ok(())
}

/// Delay, dimension and Theiler window are shared by the recurrence and
/// Lyapunov analyses and computed at most once.
fn cached_geometry(
    cache: &mut Option<Result<Geometry, AppError>>,
    x: &TimeSeries,
    args: &AnalyzeArgs,
) -> Result<Geometry, AppError> {
    match cache.get_or_insert_with(|| geometry_of(x, args)) {
        Ok(g) => Ok(*g),
        Err(e) => Err(e.duplicate()),
    }
}

fn geometry_of(x: &TimeSeries, args: &AnalyzeArgs) -> Result<Geometry, AppError> {
    let delay = match args.delay {
        Some(0) => return Err(AppError::Usage("--delay must be at least 1".into())),
        Some(d) => d,
        None => choose_delay(x)?,
    };
    let dim = match args.dim {
        Some(0) => return Err(AppError::Usage("--dim must be at least 1".into())),
        Some(m) => m,
        None => choose_dimension(x, delay)?,
    };
    let period = mean_period(x)?;
    Ok(Geometry { delay, dim, theiler: (period.round() as usize).max(1), period })
}

fn spectrum(x: &TimeSeries, column: &str, out: &mut Outputs) -> Section {
    let s = power_spectrum(x)?;
    let peaks = spectral_peak_count(&s, PEAK_PROMINENCE)?;
    let period = dominant_period(x)?;
    let rows: Vec<(f64, f64)> = s.frequencies.iter().copied().zip(s.power.iter().copied()).collect();
    out.add("spectrum.csv", two_column_csv(("frequency", "power"), rows.iter().copied()));
    let title = format!("Power spectrum of {column}");
    out.add(
        "spectrum.svg",
        figure_svg(&Figure {
            title: title.clone(),
            xlabel: "frequency".into(),
            ylabel: "power".into(),
            log_y: true,
            elements: vec![Element::Line {
                points: rows.into_iter().skip(1).collect(),
                color: "#1f4e79",
                label: String::new(),
            }],
        }),
    );
    out.add(
        "spectrum.gp",
        gnuplot_script(&GnuplotSpec {
            stem: "spectrum",
            csv: "spectrum.csv",
            title: &title,
            xlabel: "frequency",
            ylabel: "power",
            log_y: true,
            skip: 2,
            using: "1:2",
            style: "with lines notitle",
            extra: "",
        }),
    );
    Ok(json!({ "peak_count": peaks, "dominant_period": period, "window": s.window }))
}

fn recurrence(x: &TimeSeries, g: Geometry, args: &AnalyzeArgs, out: &mut Outputs) -> Section {
    if args.rqa_points < 2 {
        return Err(AppError::Usage("--rqa-points must be at least 2".into()));
    }
    let emb = embed(&x.head(args.rqa_points), g.dim, g.delay)?;
    let rm = recurrence_from_embedding(&emb, args.epsilon)?;
    let summary = rqa_summary(&rm, 2)?;
    let mut csv = format!("# n={}, epsilon={}\ni,j\n", rm.n(), fmt_f64(rm.epsilon()));
    for (i, j) in rm.upper_pairs() {
        csv.push_str(&format!("{i},{j}\n"));
    }
    out.add("recurrence.csv", csv);
    let title = format!("Recurrence plot (m = {}, delay = {}, {} points)", g.dim, g.delay, rm.n());
    out.add("recurrence.svg", recurrence_svg(&title, rm.n(), rm.upper_pairs(), RASTER_CELLS));
    out.add(
        "recurrence.gp",
        gnuplot_script(&GnuplotSpec {
            stem: "recurrence",
            csv: "recurrence.csv",
            title: &title,
            xlabel: "i",
            ylabel: "j",
            log_y: false,
            skip: 2,
            using: "1:2",
            style: "with dots lc rgb 'black' notitle, '' skip 2 using 2:1 with dots lc rgb 'black' notitle",
            extra: "set size square\n",
        }),
    );
    Ok(json!({
        "points": rm.n(),
        "dimension": g.dim,
        "delay": g.delay,
        "epsilon": rm.epsilon(),
        "recurrence_rate": rm.recurrence_rate(),
        "determinism": summary.determinism,
        "diag_spacing_cv": finite(summary.diag_spacing_cv),
        "diag_spacing_clusters": summary.distinct_spacing_clusters,
    }))
}

fn lyapunov(x: &TimeSeries, g: Geometry, args: &AnalyzeArgs, out: &mut Outputs) -> Section {
    let emb = embed(x, g.dim, g.delay)?;
    let mut opts = RosensteinOptions::new(g.theiler, args.horizon);
    opts.smoothing = (g.period.round() as usize).max(1);
    opts.min_fit_len = opts.smoothing.max(3);
    opts.fit = args.fit_start.zip(args.fit_end).map(|(start, end)| FitWindow { start, end });
    let r = lyapunov_rosenstein_embedded(&emb, x.dt(), &opts)?;
    let w = lyapunov_wolf_embedded(&emb, x.dt(), &WolfOptions::new(g.theiler, 10, 0.02))?;

    let window = &r.curve[r.fit_window.start..=r.fit_window.end];
    let n = window.len() as f64;
    let (mt, my) = window.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / n, b + y / n));
    let fit_line = vec![
        (window[0].0, my + r.lambda_max * (window[0].0 - mt)),
        (window[window.len() - 1].0, my + r.lambda_max * (window[window.len() - 1].0 - mt)),
    ];

    out.add("divergence.csv", two_column_csv(("t", "ln_d"), r.curve.iter().copied()));
    let title = "Mean log divergence of nearest neighbours";
    out.add(
        "divergence.svg",
        figure_svg(&Figure {
            title: title.into(),
            xlabel: "t".into(),
            ylabel: "<ln d>".into(),
            log_y: false,
            elements: vec![
                Element::Line { points: r.curve.clone(), color: "#1f4e79", label: "<ln d(t)>".into() },
                Element::Line { points: fit_line, color: "#c44e52", label: format!("slope {:.4}", r.lambda_max) },
            ],
        }),
    );
    out.add(
        "divergence.gp",
        gnuplot_script(&GnuplotSpec {
            stem: "divergence",
            csv: "divergence.csv",
            title,
            xlabel: "t",
            ylabel: "<ln d>",
            log_y: false,
            skip: 1,
            using: "1:2",
            style: &format!(
                "with lines title '<ln d(t)>', [{}:{}] {} + {} * (x - {}) title 'fit' lw 2",
                window[0].0,
                window[window.len() - 1].0,
                my,
                r.lambda_max,
                mt
            ),
            extra: "",
        }),
    );
    Ok(json!({
        "lambda_max": r.lambda_max,
        "lambda_wolf": w.lambda_max,
        "fit_start": r.fit_window.start,
        "fit_end": r.fit_window.end,
        "fallback_fit": r.fallback_fit,
        "theiler": g.theiler,
        "dimension": g.dim,
        "delay": g.delay,
    }))
}

fn returns(x: &TimeSeries, column: &str, args: &AnalyzeArgs, out: &mut Outputs) -> Section {
    let center = densest_cell(x, args.cell_size)?;
    let r = first_return_times(x, center, args.cell_size)?;
    let mut csv = String::from("return_time\n");
    for t in &r.return_times {
        csv.push_str(&fmt_f64(*t));
        csv.push('\n');
    }
    out.add("returns.csv", csv);

    let max = r.return_times.iter().copied().fold(0.0, f64::max);
    let bins = ((r.return_times.len() as f64).sqrt().ceil() as usize).clamp(5, 60);
    let width = if max > 0.0 { max / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &t in &r.return_times {
        counts[((t / width) as usize).min(bins - 1)] += 1;
    }
    let norm = r.return_times.len() as f64 * width;
    let bars =
        counts.iter().enumerate().map(|(k, &c)| (k as f64 * width, (k + 1) as f64 * width, c as f64 / norm)).collect();
    let density = (0..=200).map(|k| max * k as f64 / 200.0).map(|t| (t, r.density(t))).collect();
    let title = format!(
        "First return times of {column} to [{:.4}, {:.4}]",
        center - args.cell_size / 2.0,
        center + args.cell_size / 2.0
    );
    out.add(
        "returns.svg",
        figure_svg(&Figure {
            title: title.clone(),
            xlabel: "return time".into(),
            ylabel: "density".into(),
            log_y: false,
            elements: vec![
                Element::Bars { bars, color: "#4c72b0", label: "histogram".into() },
                Element::Line {
                    points: density,
                    color: "#c44e52",
                    label: format!("exponential, mean {:.3}", r.fitted_mean),
                },
            ],
        }),
    );
    out.add(
        "returns.gp",
        gnuplot_script(&GnuplotSpec {
            stem: "returns",
            csv: "returns.csv",
            title: &title,
            xlabel: "return time",
            ylabel: "density",
            log_y: false,
            skip: 1,
            using: &format!(
                "(bin($1)):(1.0/{norm}) smooth frequency with boxes title 'histogram', exp(-x/{m})/{m}",
                m = r.fitted_mean
            ),
            style: "title 'exponential'",
            extra: &format!("width = {width}\nbin(t) = width * (floor(t / width) + 0.5)\nset style fill solid 0.5\n"),
        }),
    );
    Ok(json!({
        "cell_center": center,
        "cell_size": args.cell_size,
        "returns": r.return_times.len(),
        "mean_return_time": r.fitted_mean,
        "ks_statistic": r.ks_statistic,
        "p_value": r.p_value,
        "exponential_accepted": r.exponential_accepted(0.05),
    }))
}

fn regime(x: &TimeSeries, args: &AnalyzeArgs) -> Section {
    let cfg = FeatureConfig {
        horizon: args.horizon,
        fit: args.fit_start.zip(args.fit_end).map(|(start, end)| FitWindow { start, end }),
        rqa_epsilon_fraction: args.epsilon,
        rqa_points: args.rqa_points,
        return_cell_size: args.cell_size,
        ..FeatureConfig::default()
    };
    let f = extract_features(x, None, &cfg)?;
    let label = classify(&f, args.lambda_threshold)?;
    Ok(json!({
        "label": label.label.as_str(),
        "lambda_max": finite(f.lambda_max),
        "lambda_wolf": finite(f.lambda_wolf),
        "lambda_agreement": finite(f.lambda_agreement),
        "peak_count": f.peak_count,
        "diag_spacing_clusters": f.diag_spacing_clusters,
        "determinism": finite(f.determinism),
        "ks_exponential_pass": f.ks_exponential_pass,
        "failures": f.failures,
    }))
}

/// JSON has no NaN; missing values become null.
fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}
