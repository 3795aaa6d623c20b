//! Plain-text persistence: atomic file writes and the two-column series
//! CSV format.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qosc_core::TimeSeries;

use crate::error::AppError;

/// Largest relative deviation of a time step from the first one.
pub const UNIFORMITY_TOL: f64 = 1e-9;

/// 17 significant digits: enough for every `f64` to survive a text round
/// trip bit for bit.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write through a temporary sibling and rename, so readers never observe a
/// partially written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), AppError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(AppError::io(path, e));
    }
    Ok(())
}

/// Header plus one `a,b` row per pair.
pub fn two_column_csv(header: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (a, b) in rows {
        out.push_str(&fmt_f64(a));
        out.push(',');
        out.push_str(&fmt_f64(b));
        out.push('\n');
    }
    out
}

/// `t,<name>` CSV of a series.
pub fn series_csv(series: &TimeSeries, name: &str) -> String {
    two_column_csv(("t", name), series.times().zip(series.values().iter().copied()))
}

/// A series read back from a `t,<name>` CSV.
#[derive(Debug, Clone)]
pub struct SeriesFile {
    pub column: String,
    pub times: Vec<f64>,
    pub series: TimeSeries,
}

/// Parse a `t,<name>` CSV and check that the time column is increasing and
/// uniform. Malformed text is a parse error carrying the 1-based line
/// number; bad sampling is a sampling error.
pub fn parse_series_csv(text: &str) -> Result<SeriesFile, AppError> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    let (_, header) = lines.next().ok_or(AppError::Parse { line: 1, msg: "empty file".into() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() != 2 || cols[0] != "t" || cols[1].is_empty() {
        return Err(AppError::Parse { line: 1, msg: format!("expected header `t,<name>`, found {header:?}") });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut blank_at = None;
    for (line, raw) in lines {
        if raw.trim().is_empty() {
            blank_at.get_or_insert(line);
            continue;
        }
        if let Some(b) = blank_at {
            return Err(AppError::Parse { line: b, msg: "blank line inside data".into() });
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(AppError::Parse { line, msg: format!("expected 2 fields, found {}", fields.len()) });
        }
        let parse = |s: &str| -> Result<f64, AppError> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(AppError::Parse { line, msg: format!("not a finite number: {s:?}") }),
            }
        };
        times.push(parse(fields[0])?);
        values.push(parse(fields[1])?);
    }
    if times.len() < 2 {
        return Err(AppError::Sampling(format!("need at least 2 samples, found {}", times.len())));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(AppError::Sampling("time column must be strictly increasing".into()));
    }
    for k in 2..times.len() {
        let step = times[k] - times[k - 1];
        if (step - dt).abs() > UNIFORMITY_TOL * dt {
            return Err(AppError::Sampling(format!(
                "non-uniform sampling between rows {} and {}: step {step} differs from {dt}",
                k + 1,
                k + 2
            )));
        }
    }
    let series =
        TimeSeries::new(times[0], recover_step(&times), values).map_err(|e| AppError::Sampling(e.to_string()))?;
    Ok(SeriesFile { column: cols[1].to_string(), times, series })
}

/// The step `h` for which `t0 + k h` reproduces every time stamp exactly,
/// searched a few ulps around the mean spacing; files written from a
/// `TimeSeries` thus recover its `dt` bit for bit. Otherwise the mean spacing.
fn recover_step(times: &[f64]) -> f64 {
    let n = times.len();
    let mean = (times[n - 1] - times[0]) / (n - 1) as f64;
    let reproduces = |h: f64| times.iter().enumerate().all(|(k, &t)| times[0] + k as f64 * h == t);
    (-4i64..=4).map(|u| f64::from_bits((mean.to_bits() as i64 + u) as u64)).find(|&h| reproduces(h)).unwrap_or(mean)
}

pub fn read_series_csv(path: &Path) -> Result<SeriesFile, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_series_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let values: Vec<f64> = (0..50).map(|k| (k as f64 * 0.37).sin() * 1e-3 + 1.0 / 3.0).collect();
        let s = TimeSeries::new(0.0, 0.1, values).unwrap();
        let back = parse_series_csv(&series_csv(&s, "x")).unwrap();
        assert_eq!(back.column, "x");
        assert_eq!(back.series.values(), s.values());
        assert_eq!(back.series.dt(), s.dt());
        let times: Vec<f64> = s.times().collect();
        assert_eq!(back.times, times);

        let s = TimeSeries::new(1.5, 0.1, vec![0.0; 3000]).unwrap();
        assert_eq!(parse_series_csv(&series_csv(&s, "p")).unwrap().series.dt(), 0.1);
    }

    #[test]
    fn formatting_has_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "t,x\n0,1\n0.1,oops\n";
        match parse_series_csv(bad) {
            Err(AppError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_series_csv("x,p\n1,2\n"), Err(AppError::Parse { line: 1, .. })));
        assert!(matches!(parse_series_csv("t,x\n0,1,2\n"), Err(AppError::Parse { line: 2, .. })));
        assert!(matches!(parse_series_csv("t,x\n0,1\n\n0.2,3\n"), Err(AppError::Parse { line: 3, .. })));
    }

    #[test]
    fn sampling_checks() {
        assert!(matches!(parse_series_csv("t,x\n0,1\n0.1,2\n0.25,3\n"), Err(AppError::Sampling(_))));
        assert!(matches!(parse_series_csv("t,x\n0,1\n0,2\n"), Err(AppError::Sampling(_))));
        assert!(matches!(parse_series_csv("t,x\n0,1\n"), Err(AppError::Sampling(_))));
        assert!(parse_series_csv("t,x\r\n0,1\r\n0.5,2\r\n1.0,3\r\n").is_ok());
    }

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}
