//! Result rows, the human table, the CSV file and plot-data files.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 8] = [
    "game", "T", "quantity", "value", "stderr", "bound", "holds", "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub game: String,
    pub horizon: usize,
    pub quantity: String,
    pub value: f64,
    pub stderr: f64,
    /// Bound the value is checked against, if any.
    pub bound: Option<f64>,
    pub holds: Option<bool>,
    pub seed: u64,
}

/// `(x, y)` points of one plotted curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub series: Vec<Series>,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&Row> {
        self.rows
            .iter()
            .filter(|r| r.holds == Some(false))
            .collect()
    }
}

fn sci(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn csv_string(rows: &[Row]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.game.clone(),
            r.horizon.to_string(),
            r.quantity.clone(),
            sci(r.value),
            sci(r.stderr),
            r.bound.map(sci).unwrap_or_default(),
            r.holds.map(|h| h.to_string()).unwrap_or_default(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(format!("csv: {e}")))
}

/// Twelve significant digits, fixed-point where that stays readable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        let s = format!("{x:.*}", (11 - mag) as usize);
        let s = s.trim_end_matches('0');
        s.trim_end_matches('.').to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn table_string(rows: &[Row]) -> String {
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.game.clone(),
                r.horizon.to_string(),
                r.quantity.clone(),
                fmt_num(r.value),
                if r.stderr == 0.0 {
                    String::new()
                } else {
                    fmt_num(r.stderr)
                },
                r.bound.map(fmt_num).unwrap_or_default(),
                match r.holds {
                    Some(true) => "ok".into(),
                    Some(false) => "FAILED".into(),
                    None => String::new(),
                },
            ]
        })
        .collect();
    let header = ["game", "T", "quantity", "value", "stderr", "bound", "check"];
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |fields: Vec<&str>| {
        let padded: Vec<String> = fields
            .iter()
            .zip(&widths)
            .map(|(f, w)| format!("{f}{}", " ".repeat(w - f.chars().count())))
            .collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(header.to_vec());
    for row in &cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

pub fn series_string(series: &Series) -> String {
    let mut out = format!("# series: {}\n", series.name);
    for (x, y) in &series.points {
        out.push_str(&format!("{} {}\n", sci(*x), sci(*y)));
    }
    out
}

/// `<dir>/<stem>.<series>.dat` next to the CSV path.
pub fn series_path(out: &Path, series: &Series) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "regretlab".into());
    out.with_file_name(format!("{stem}.{}.dat", series.name))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Prints the table and writes the CSV and plot-data files. With `out`
/// set the CSV and series go to files; otherwise CSV goes to `stdout`.
/// An empty report writes nothing and only warns.
pub fn emit_report(
    report: &Report,
    format: Format,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("output stream: {e}"));
    if report.rows.is_empty() && report.series.is_empty() {
        writeln!(stderr, "warning: no results; nothing written").map_err(io)?;
        return Ok(());
    }
    if matches!(format, Format::Table | Format::Both) && !report.rows.is_empty() {
        stdout
            .write_all(table_string(&report.rows).as_bytes())
            .map_err(io)?;
    }
    let csv = if matches!(format, Format::Csv | Format::Both) && !report.rows.is_empty() {
        Some(csv_string(&report.rows)?)
    } else {
        None
    };
    match out {
        Some(path) => {
            if let Some(csv) = &csv {
                write_file(path, csv)?;
            }
            for s in &report.series {
                write_file(&series_path(path, s), &series_string(s))?;
            }
        }
        None => {
            if let Some(csv) = &csv {
                stdout.write_all(csv.as_bytes()).map_err(io)?;
            }
            if !report.series.is_empty() {
                writeln!(stderr, "warning: plot data is written only with --out").map_err(io)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(game: &str, value: f64) -> Row {
        Row {
            game: game.into(),
            horizon: 3,
            quantity: "minimax".into(),
            value,
            stderr: 0.0,
            bound: Some(1.0),
            holds: Some(true),
            seed: 7,
        }
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(&[row("experts-simple(N=2)", 0.5)]).unwrap();
        assert_eq!(
            s,
            "game,T,quantity,value,stderr,bound,holds,seed\n\
             experts-simple(N=2),3,minimax,5.000000000000000e-1,0.000000000000000e0,\
             1.000000000000000e0,true,7\n"
        );
        let s = csv_string(&[row("a,b", 0.5)]).unwrap();
        assert!(s.contains("\"a,b\",3"));
    }

    #[test]
    fn numbers_keep_twelve_digits() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-6), "6.66666666667e-7");
        assert_eq!(fmt_num(-12.25), "-12.25");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn empty_report_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let (mut out, mut err) = (Vec::new(), Vec::new());
        emit_report(
            &Report::default(),
            Format::Both,
            Some(&path),
            &mut out,
            &mut err,
        )
        .unwrap();
        assert!(!path.exists());
        assert!(out.is_empty());
        assert!(String::from_utf8(err).unwrap().starts_with("warning:"));
    }

    #[test]
    fn series_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let report = Report {
            rows: vec![row("g", 1.0)],
            series: vec![Series {
                name: "sum_c".into(),
                points: vec![(1.0, 2.0), (3.0, 4.0)],
            }],
        };
        let (mut out, mut err) = (Vec::new(), Vec::new());
        emit_report(&report, Format::Csv, Some(&path), &mut out, &mut err).unwrap();
        let dat = std::fs::read_to_string(dir.path().join("sweep.sum_c.dat")).unwrap();
        let lines: Vec<&str> = dat.lines().collect();
        assert_eq!(lines[0], "# series: sum_c");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split_whitespace().count(), 2);
        assert!(std::fs::read_to_string(&path)
            .unwrap()
            .starts_with("game,T,"));
        assert!(out.is_empty());
    }

    #[test]
    fn unwritable_path_is_io() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let report = Report {
            rows: vec![row("g", 1.0)],
            series: vec![],
        };
        let bad = Path::new("/nonexistent-dir/x/out.csv");
        let e = emit_report(&report, Format::Csv, Some(bad), &mut out, &mut err).unwrap_err();
        assert_eq!(e.exit_code(), 5);
    }
}
