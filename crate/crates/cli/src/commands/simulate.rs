use num_complex::Complex64;
use qosc_core::qcore::{simulate_series, OscillatorParams};
use serde_json::json;

use super::Outputs;
use crate::error::AppError;
use crate::io::{series_csv, two_column_csv};
use crate::manifest::{config_hash, manifest, write_manifest};
use crate::plot::{figure_svg, gnuplot_script, Element, Figure, GnuplotSpec};
use crate::{resolve_out, SimulateArgs};

pub fn run(args: SimulateArgs) -> Result<(), AppError> {
    let alpha = Complex64::new(args.alpha, args.alpha_im);
    let params = OscillatorParams::with_tolerances(args.q, alpha, args.trunc_tol, args.max_terms)?;
    let (x, p) = simulate_series(&params, args.t0, args.dt, args.steps)?;

    let title = format!("q = {}, alpha = {}", args.q, fmt_alpha(alpha));
    let mut out = Outputs::default();
    out.add("x.csv", series_csv(&x, "x"));
    out.add("p.csv", series_csv(&p, "p"));
    let phase: Vec<(f64, f64)> = x.values().iter().copied().zip(p.values().iter().copied()).collect();
    out.add("phase.csv", two_column_csv(("x", "p"), phase.iter().copied()));
    out.add(
        "phase.svg",
        figure_svg(&Figure {
            title: format!("Phase portrait, {title}"),
            xlabel: "<X>".into(),
            ylabel: "<P>".into(),
            log_y: false,
            elements: vec![Element::Line { points: phase, color: "#1f4e79", label: String::new() }],
        }),
    );
    out.add(
        "phase.gp",
        gnuplot_script(&GnuplotSpec {
            stem: "phase",
            csv: "phase.csv",
            title: &format!("Phase portrait, {title}"),
            xlabel: "<X>",
            ylabel: "<P>",
            log_y: false,
            skip: 1,
            using: "1:2",
            style: "with lines notitle",
            extra: "",
        }),
    );

    let config = json!({
        "q": args.q,
        "alpha_re": args.alpha,
        "alpha_im": args.alpha_im,
        "t0": args.t0,
        "dt": args.dt,
        "steps": args.steps,
        "trunc_tol": args.trunc_tol,
        "max_terms": args.max_terms,
    });
    let dir = resolve_out(args.out, None);
    out.write_all(&dir)?;
    let results = json!({ "samples": x.len(), "t_end": x.time(x.len() - 1) });
    write_manifest(&dir, &manifest("simulate", &config, &out.names(), results))?;
    println!("wrote {} samples to {} (config {})", x.len(), dir.display(), &config_hash(&config)[..12]);
    Ok(())
}

pub(crate) fn fmt_alpha(a: Complex64) -> String {
    if a.im == 0.0 {
        format!("{}", a.re)
    } else {
        format!("{}{:+}i", a.re, a.im)
    }
}
