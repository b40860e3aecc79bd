//! Plain-text group tables and finite metric spaces.
//!
//! Both formats are whitespace separated, `#` starts a comment and blank
//! lines are ignored. A group table is `m` followed by `m` rows of `m`
//! element indices (identity first). A metric space is `n`, then `n` rows of
//! `n` distances, then one line per generator giving the image of each point.

use std::path::Path;

use crate::scenario::{read, ScenarioError};

type Result<T> = std::result::Result<T, ScenarioError>;

/// Distance matrix and generator permutations.
pub type MetricSpace = (Vec<Vec<f64>>, Vec<Vec<usize>>);

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let fields: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn field<T: std::str::FromStr>(text: &str, line: usize) -> Result<T> {
    text.parse::<T>().map_err(|_| ScenarioError::Parse { line, message: format!("cannot read `{text}`") })
}

fn row<T: std::str::FromStr>(fields: &[&str], len: usize, line: usize) -> Result<Vec<T>> {
    if fields.len() != len {
        return Err(ScenarioError::Parse { line, message: format!("expected {len} entries, found {}", fields.len()) });
    }
    fields.iter().map(|f| field(f, line)).collect()
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>, what: &str) -> Result<usize> {
    match lines.next() {
        Some((line, fields)) if fields.len() == 1 => field(fields[0], line),
        Some((line, _)) => Err(ScenarioError::Parse { line, message: format!("expected the {what} alone on the first line") }),
        None => Err(ScenarioError::Parse { line: 1, message: "empty file".into() }),
    }
}

fn truncated(text: &str) -> ScenarioError {
    ScenarioError::Parse { line: text.lines().count().max(1), message: "file ends early".into() }
}

pub fn parse_group_table(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut lines = content_lines(text);
    let m = header(&mut lines, "group order")?;
    let mut table = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, fields) = lines.next().ok_or_else(|| truncated(text))?;
        table.push(row(&fields, m, line)?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(ScenarioError::Parse { line, message: "unexpected trailing row".into() });
    }
    Ok(table)
}

pub fn parse_metric_space(text: &str) -> Result<MetricSpace> {
    let mut lines = content_lines(text);
    let n = header(&mut lines, "point count")?;
    let mut metric = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, fields) = lines.next().ok_or_else(|| truncated(text))?;
        metric.push(row(&fields, n, line)?);
    }
    let generators = lines.map(|(line, fields)| row(&fields, n, line)).collect::<Result<Vec<_>>>()?;
    if generators.is_empty() {
        return Err(ScenarioError::Validation { field: "file", message: "metric space has no generators".into() });
    }
    Ok((metric, generators))
}

pub fn load_group_table(path: &Path) -> Result<Vec<Vec<usize>>> {
    parse_group_table(&read(path)?).map_err(|e| in_file(e, path))
}

pub fn load_metric_space(path: &Path) -> Result<MetricSpace> {
    parse_metric_space(&read(path)?).map_err(|e| in_file(e, path))
}

fn in_file(e: ScenarioError, path: &Path) -> ScenarioError {
    match e {
        ScenarioError::Parse { line, message } => {
            ScenarioError::Io { path: path.to_path_buf(), message: format!("line {line}: {message}") }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z3_table() {
        let t = parse_group_table("3\n0 1 2\n1 2 0 # rotate\n\n2 0 1\n").unwrap();
        assert_eq!(t[2], vec![2, 0, 1]);
    }

    #[test]
    fn short_row_names_its_line() {
        let err = parse_group_table("2\n0 1\n1\n").unwrap_err();
        assert_eq!(err, ScenarioError::Parse { line: 3, message: "expected 2 entries, found 1".into() });
    }

    #[test]
    fn metric_space_with_two_generators() {
        let (d, g) = parse_metric_space("2\n0 1\n1 0\n1 0\n0 1\n").unwrap();
        assert_eq!(d[0][1], 1.0);
        assert_eq!(g, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn metric_space_needs_generators() {
        assert!(matches!(parse_metric_space("1\n0\n"), Err(ScenarioError::Validation { .. })));
    }
}
