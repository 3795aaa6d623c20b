//! Dependency-free figure output: standalone SVG documents and gnuplot
//! scripts that redraw the same figures from the CSV files.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
/// Lines are thinned to at most this many vertices.
const MAX_VERTICES: usize = 4000;

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub enum Element {
    Line { points: Vec<(f64, f64)>, color: &'static str, label: String },
    Bars { bars: Vec<(f64, f64, f64)>, color: &'static str, label: String },
    VLine { x: f64, color: &'static str, label: String },
}

pub struct Figure {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub log_y: bool,
    pub elements: Vec<Element>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str, log_y: bool) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for k in 0..=4 {
        let fx = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
        let fy = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        let (px, py) = (f.px(fx), f.py(fy));
        let ylab = if log_y { tick_label(10f64.powf(fy)) } else { tick_label(fy) };
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{}" stroke="black"/>"#, b + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            b + 18.0,
            escape(&tick_label(fx))
        );
        let _ = writeln!(out, r#"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/>"#, l - 5.0);
        let _ =
            writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 8.0, py + 4.0, escape(&ylab));
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

/// Render a figure with linear x and linear or log10 y.
pub fn figure_svg(fig: &Figure) -> String {
    let ty = |y: f64| if fig.log_y { y.max(1e-300).log10() } else { y };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut see = |x: f64, y: f64| {
        if x.is_finite() && y.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    };
    for e in &fig.elements {
        match e {
            Element::Line { points, .. } => points.iter().for_each(|&(x, y)| see(x, ty(y))),
            Element::Bars { bars, .. } => bars.iter().for_each(|&(a, b, h)| {
                see(a, ty(h));
                see(b, if fig.log_y { ty(h) } else { 0.0 });
            }),
            Element::VLine { .. } => {}
        }
    }
    let (x0, x1) = widen(x0, x1);
    let (y0, y1) = widen(y0, y1);
    let frame = Frame { x0, x1, y0, y1 };

    let mut out = String::new();
    header(&mut out, &fig.title);
    axes(&mut out, &frame, &fig.xlabel, &fig.ylabel, fig.log_y);
    let mut legend = Vec::new();
    for e in &fig.elements {
        match e {
            Element::Line { points, color, label } => {
                let stride = points.len().div_ceil(MAX_VERTICES).max(1);
                let mut d = String::new();
                for (k, &(x, y)) in points.iter().step_by(stride).enumerate() {
                    if !(x.is_finite() && ty(y).is_finite()) {
                        continue;
                    }
                    let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, frame.px(x), frame.py(ty(y)));
                }
                let _ =
                    writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, d.trim_end());
                legend.push((label.clone(), *color));
            }
            Element::Bars { bars, color, label } => {
                let base = frame.py(frame.y0.max(if fig.log_y { frame.y0 } else { 0.0 }));
                for &(a, b, h) in bars {
                    let top = frame.py(ty(h));
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.5"/>"#,
                        frame.px(a),
                        (frame.px(b) - frame.px(a)).max(0.5),
                        (base - top).max(0.0)
                    );
                }
                legend.push((label.clone(), *color));
            }
            Element::VLine { x, color, label } => {
                let px = frame.px(*x);
                let _ = writeln!(
                    out,
                    r#"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                    HEIGHT - BOTTOM
                );
                legend.push((label.clone(), *color));
            }
        }
    }
    for (k, (label, color)) in legend.iter().enumerate().filter(|(_, (l, _))| !l.is_empty()) {
        let y = TOP + 16.0 + 16.0 * k as f64;
        let x = WIDTH - RIGHT - 170.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="3"/>"#,
            y - 4.0,
            x + 20.0,
            y - 4.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 26.0, escape(label));
    }
    out.push_str("</svg>\n");
    out
}

/// Recurrence plot drawn on a grid of at most `cells` x `cells` blocks; a
/// block is dark when it holds any recurrent pair.
pub fn recurrence_svg(title: &str, n: usize, pairs: impl Iterator<Item = (usize, usize)>, cells: usize) -> String {
    let g = n.min(cells).max(1);
    let mut grid = vec![false; g * g];
    for (i, j) in pairs {
        let (a, b) = (i * g / n.max(1), j * g / n.max(1));
        grid[a * g + b] = true;
        grid[b * g + a] = true;
    }
    let side = (HEIGHT - TOP - BOTTOM).min(WIDTH - LEFT - RIGHT);
    let cell = side / g as f64;
    let frame = Frame { x0: 0.0, x1: n as f64, y0: 0.0, y1: n as f64 };
    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(out, r#"<g transform="translate({LEFT} {TOP})">"#);
    let _ = writeln!(out, r#"<rect width="{side}" height="{side}" fill="none" stroke="black"/>"#);
    for row in 0..g {
        let mut col = 0;
        while col < g {
            if grid[row * g + col] {
                let start = col;
                while col < g && grid[row * g + col] {
                    col += 1;
                }
                // row index grows upward, as in the usual plot orientation
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="black"/>"#,
                    start as f64 * cell,
                    side - (row + 1) as f64 * cell,
                    (col - start) as f64 * cell,
                    cell
                );
            } else {
                col += 1;
            }
        }
    }
    out.push_str("</g>\n");
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">i</text>"#, LEFT + side / 2.0, TOP + side + 20.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">j</text>"#, LEFT - 8.0, TOP + side / 2.0);
    let _ = writeln!(out, r#"<text x="{LEFT}" y="{}">0</text>"#, TOP + side + 20.0);
    let _ =
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT + side, TOP + side + 20.0, frame.x1);
    out.push_str("</svg>\n");
    out
}

pub fn label_color(label: &str) -> &'static str {
    match label {
        "Periodic" => "#4c72b0",
        "QuasiPeriodic" => "#55a868",
        "Chaotic" => "#c44e52",
        "Inadmissible" => "#dddddd",
        "Indeterminate" => "#8172b2",
        _ => "#222222",
    }
}

/// The (q, alpha) plane with one colored rectangle per grid point.
pub fn regime_plane_svg(
    title: &str,
    q_grid: &[f64],
    alpha_grid: &[f64],
    label: impl Fn(usize, usize) -> String,
) -> String {
    let edges = |g: &[f64]| -> Vec<f64> {
        if g.len() == 1 {
            return vec![g[0] - 0.025, g[0] + 0.025];
        }
        let mut e = vec![g[0] - (g[1] - g[0]) / 2.0];
        e.extend(g.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        e.push(g[g.len() - 1] + (g[g.len() - 1] - g[g.len() - 2]) / 2.0);
        e
    };
    let (qe, ae) = (edges(q_grid), edges(alpha_grid));
    let frame = Frame { x0: qe[0], x1: qe[qe.len() - 1], y0: ae[0], y1: ae[ae.len() - 1] };
    let mut out = String::new();
    header(&mut out, title);
    let mut seen: Vec<String> = Vec::new();
    for ai in 0..alpha_grid.len() {
        for qi in 0..q_grid.len() {
            let l = label(qi, ai);
            let (x, y) = (frame.px(qe[qi]), frame.py(ae[ai + 1]));
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>q={} alpha={} {}</title></rect>"#,
                frame.px(qe[qi + 1]) - x,
                frame.py(ae[ai]) - y,
                label_color(&l),
                q_grid[qi],
                alpha_grid[ai],
                escape(&l)
            );
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
    }
    axes(&mut out, &frame, "q", "alpha", false);
    for (k, l) in seen.iter().enumerate() {
        let x = LEFT + 10.0 + 130.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/>"#,
            HEIGHT - 12.0 - 10.0,
            label_color(l)
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x + 16.0, HEIGHT - 12.0, escape(l));
    }
    out.push_str("</svg>\n");
    out
}

/// A gnuplot script that renders `csv` to `<stem>_gnuplot.svg`.
pub struct GnuplotSpec<'a> {
    pub stem: &'a str,
    pub csv: &'a str,
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub log_y: bool,
    /// Leading non-data lines to skip (header and comments).
    pub skip: usize,
    pub using: &'a str,
    pub style: &'a str,
    pub extra: &'a str,
}

pub fn gnuplot_script(s: &GnuplotSpec) -> String {
    let q = |t: &str| t.replace('\'', "''");
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set terminal svg size 720,480");
    let _ = writeln!(out, "set output '{}_gnuplot.svg'", q(s.stem));
    let _ = writeln!(out, "set title '{}'", q(s.title));
    let _ = writeln!(out, "set xlabel '{}'", q(s.xlabel));
    let _ = writeln!(out, "set ylabel '{}'", q(s.ylabel));
    if s.log_y {
        let _ = writeln!(out, "set logscale y");
    }
    out.push_str(s.extra);
    let _ = writeln!(out, "plot '{}' skip {} using {} {}", q(s.csv), s.skip, s.using, s.style);
    out
}
