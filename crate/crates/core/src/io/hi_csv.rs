//! Health-index series files.
//!
//! A series file has either two columns `t,hi` (integer sample index, value)
//! or a single `hi` column, in which case samples are numbered from 1. The
//! header row is optional. Indices must be consecutive.
//!
//! Ensemble files are wide: `t,T1,T2,...,Tn`, one row per sample.

use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{PrognosisEnsemble, Trajectory, Window};

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

struct Row {
    line: usize,
    fields: Vec<String>,
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let text = super::read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(Row {
            line,
            fields: record.iter().map(str::to_owned).collect(),
        });
    }
    Ok(rows)
}

fn is_header(row: &Row) -> bool {
    row.fields.iter().any(|f| f.parse::<f64>().is_err())
}

fn parse_value(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_error(path, line, format!("'{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(path, line, format!("non-finite value '{field}'")));
    }
    Ok(v)
}

fn parse_index(path: &Path, line: usize, field: &str) -> Result<usize> {
    field
        .parse()
        .map_err(|_| parse_error(path, line, format!("'{field}' is not a nonnegative integer index")))
}

/// Checks that `t` follows `prev` by exactly one sample.
fn check_next_index(path: &Path, line: usize, prev: Option<usize>, t: usize) -> Result<()> {
    match prev {
        Some(p) if t <= p => Err(parse_error(
            path,
            line,
            format!("index {t} does not increase (previous {p})"),
        )),
        Some(p) if t != p + 1 => Err(parse_error(
            path,
            line,
            format!("index jumps from {p} to {t}; samples must be consecutive"),
        )),
        _ => Ok(()),
    }
}

pub fn read_hi_csv(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let mut rows = read_rows(path)?;
    let header_line = rows.first().map(|r| r.line).unwrap_or(1);
    let width = match rows.first() {
        Some(r) if is_header(r) => {
            let header = rows.remove(0);
            let names: Vec<String> = header.fields.iter().map(|f| f.to_ascii_lowercase()).collect();
            match names.as_slice() {
                [hi] if hi == "hi" => 1,
                [t, hi] if t == "t" && hi == "hi" => 2,
                _ => {
                    return Err(parse_error(
                        path,
                        header.line,
                        format!("expected header 't,hi' or 'hi', found '{}'", header.fields.join(",")),
                    ))
                }
            }
        }
        Some(r) => r.fields.len(),
        None => 0,
    };
    if rows.is_empty() {
        return Err(parse_error(path, header_line, "no data rows"));
    }

    let mut start = None;
    let mut prev = None;
    let mut values = Vec::with_capacity(rows.len());
    for row in &rows {
        if row.fields.len() != width || !(1..=2).contains(&width) {
            return Err(parse_error(
                path,
                row.line,
                format!("expected {width} column(s), found {}", row.fields.len()),
            ));
        }
        if width == 2 {
            let t = parse_index(path, row.line, &row.fields[0])?;
            check_next_index(path, row.line, prev, t)?;
            start.get_or_insert(t);
            prev = Some(t);
        }
        values.push(parse_value(path, row.line, &row.fields[width - 1])?);
    }
    Trajectory::new(start.unwrap_or(1), values)
}

pub fn write_trajectory_csv(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let mut out = String::from("t,hi\n");
    for (t, v) in traj.window().indices().zip(&traj.values) {
        out.push_str(&format!("{t},{v}\n"));
    }
    super::write_text(path.as_ref(), &out)
}

pub fn write_ensemble_csv(path: impl AsRef<Path>, ensemble: &PrognosisEnsemble) -> Result<()> {
    let mut out = String::from("t");
    for i in 1..=ensemble.n() {
        out.push_str(&format!(",T{i}"));
    }
    out.push('\n');
    for (j, t) in ensemble.window().indices().enumerate() {
        out.push_str(&t.to_string());
        for traj in ensemble.trajectories() {
            out.push_str(&format!(",{}", traj[j]));
        }
        out.push('\n');
    }
    super::write_text(path.as_ref(), &out)
}

pub fn read_ensemble_csv(path: impl AsRef<Path>) -> Result<PrognosisEnsemble> {
    let path = path.as_ref();
    let mut rows = read_rows(path)?;
    if rows.first().is_some_and(is_header) {
        rows.remove(0);
    }
    let Some(first) = rows.first() else {
        return Err(parse_error(path, 1, "no data rows"));
    };
    let width = first.fields.len();
    if width < 3 {
        return Err(parse_error(
            path,
            first.line,
            "ensemble rows need an index and at least two trajectories",
        ));
    }
    let mut trajectories = vec![Vec::with_capacity(rows.len()); width - 1];
    let mut prev = None;
    let mut start = 0;
    for row in &rows {
        if row.fields.len() != width {
            return Err(parse_error(
                path,
                row.line,
                format!("expected {width} columns, found {}", row.fields.len()),
            ));
        }
        let t = parse_index(path, row.line, &row.fields[0])?;
        check_next_index(path, row.line, prev, t)?;
        if prev.is_none() {
            start = t;
        }
        prev = Some(t);
        for (traj, field) in trajectories.iter_mut().zip(&row.fields[1..]) {
            traj.push(parse_value(path, row.line, field)?);
        }
    }
    let window = Window::new(start, start + rows.len() - 1)?;
    PrognosisEnsemble::new(window, trajectories)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), contents).unwrap();
        f
    }

    #[test]
    fn two_column_with_header() {
        let f = file("t,hi\n1,0.5\n2,0.7\n");
        let t = read_hi_csv(f.path()).unwrap();
        assert_eq!(t, Trajectory::new(1, vec![0.5, 0.7]).unwrap());
    }

    #[test]
    fn nan_row_reports_file_line() {
        let f = file("t,hi\n1,0.5\n2,0.7\n3,NaN\n");
        match read_hi_csv(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn single_column_starts_at_one() {
        let f = file("hi\n3.0\n4.0\n5.5\n");
        let t = read_hi_csv(f.path()).unwrap();
        assert_eq!(t.start, 1);
        assert_eq!(t.len(), 3);
        let bare = file("3.0\n4.0\n");
        assert_eq!(read_hi_csv(bare.path()).unwrap().values, vec![3.0, 4.0]);
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            ("t,hi\n1,0.5\n1,0.6\n", 3),
            ("t,hi\n1,0.5\n3,0.6\n", 3),
            ("t,hi\n1,0.5\n2,abc\n", 3),
            ("t,hi\n1,0.5\n2\n", 3),
            ("time,value\n1,0.5\n", 1),
            ("t,hi\n", 1),
        ];
        for (text, want) in cases {
            let f = file(text);
            match read_hi_csv(f.path()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
        assert!(matches!(
            read_hi_csv("/nonexistent/hi.csv"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn ensemble_round_trip() {
        let e = PrognosisEnsemble::new(
            Window::new(5, 7).unwrap(),
            vec![vec![0.1, 1.0 / 3.0, -2.5e-17], vec![1e300, 2.0, 3.0]],
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_ensemble_csv(f.path(), &e).unwrap();
        assert_eq!(read_ensemble_csv(f.path()).unwrap(), e);
    }

    proptest::proptest! {
        #[test]
        fn trajectory_round_trip_is_exact(
            start in 0usize..10_000,
            values in proptest::collection::vec(proptest::num::f64::NORMAL, 1..50),
        ) {
            let t = Trajectory::new(start, values).unwrap();
            let f = tempfile::NamedTempFile::new().unwrap();
            write_trajectory_csv(f.path(), &t).unwrap();
            proptest::prop_assert_eq!(read_hi_csv(f.path()).unwrap(), t);
        }
    }
}
