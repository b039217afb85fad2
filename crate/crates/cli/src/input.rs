// SPDX-License-Identifier: MIT OR Apache-2.0

//! Series input: plain one-value-per-line files, or TSV with a header row
//! naming the conditions (one series per column).

use crate::CliError;
use ebcp::Series;
use std::path::Path;

/// All series contained in one input file, in column order.
pub fn read_series(path: &Path) -> Result<Vec<Series>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let Some((first_no, first)) = lines.next() else {
        return Err(CliError::input(format!("{}: empty input", path.display())));
    };

    let first_tokens: Vec<&str> = first.split_whitespace().collect();
    let header: Option<Vec<String>> = if first_tokens.iter().all(|t| t.parse::<f64>().is_ok()) {
        None
    } else {
        Some(first_tokens.iter().map(|s| s.to_string()).collect())
    };

    let mut columns: Vec<Vec<f64>> = match &header {
        Some(names) => vec![Vec::new(); names.len()],
        None => {
            let vals = parse_row(path, first_no, first, first_tokens.len())?;
            let mut cols = vec![Vec::new(); vals.len()];
            for (c, v) in vals.into_iter().enumerate() {
                cols[c].push(v);
            }
            cols
        }
    };

    for (line_no, line) in lines {
        let vals = parse_row(path, line_no, line, columns.len())?;
        for (c, v) in vals.into_iter().enumerate() {
            columns[c].push(v);
        }
    }

    let labels: Vec<String> = match header {
        Some(names) => names,
        None if columns.len() == 1 => vec![name],
        None => (1..=columns.len()).map(|c| format!("{name}:{c}")).collect(),
    };

    columns
        .into_iter()
        .zip(labels)
        .map(|(vals, label)| {
            Series::new(vals, label).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
        })
        .collect()
}

fn parse_row(path: &Path, line_no: usize, line: &str, width: usize) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::with_capacity(width);
    for tok in line.split_whitespace() {
        let v: f64 = tok.parse().map_err(|_| {
            CliError::input(format!(
                "{}:{line_no}: cannot parse '{tok}' as a number",
                path.display()
            ))
        })?;
        out.push(v);
    }
    if out.len() != width {
        return Err(CliError::input(format!(
            "{}:{line_no}: expected {width} column(s), found {}",
            path.display(),
            out.len()
        )));
    }
    Ok(out)
}

/// Gather series from several files, in argument order.
pub fn read_all(paths: &[std::path::PathBuf]) -> Result<Vec<(String, Series)>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        for series in read_series(path)? {
            out.push((path.display().to_string(), series));
        }
    }
    if out.is_empty() {
        return Err(CliError::input("no input series".into()));
    }
    Ok(out)
}
