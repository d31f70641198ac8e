//! Labeled matrix CSV files for inspecting solver output.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Write `m` with a header of column labels and a leading row-label column.
pub fn write_labeled_csv(
    path: &Path,
    m: &DMatrix<f64>,
    rows: &[String],
    cols: &[String],
) -> Result<()> {
    if rows.len() != m.nrows() || cols.len() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{} row and {} column labels for a {:?} matrix",
            rows.len(),
            cols.len(),
            m.shape()
        )));
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![String::new()];
    header.extend(cols.iter().cloned());
    w.write_record(&header)?;
    for (i, label) in rows.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(m.row(i).iter().map(|v| format!("{v:e}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Inverse of [`write_labeled_csv`]: `(matrix, row labels, column labels)`.
pub fn read_labeled_csv(path: &Path) -> Result<(DMatrix<f64>, Vec<String>, Vec<String>)> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path)?;
    let cols: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut it = rec.iter();
        rows.push(it.next().unwrap_or_default().to_string());
        for field in it {
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("{field:?}: {e}")))?,
            );
        }
        if values.len() != rows.len() * cols.len() {
            return Err(parse_err(format!("row {} has the wrong width", rows.len())));
        }
    }
    Ok((DMatrix::from_row_slice(rows.len(), cols.len(), &values), rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -2.5e-17, 3.0, 0.1, 0.2, 1.0 / 3.0]);
        let rows = vec!["a".to_string(), "b".to_string()];
        let cols = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        write_labeled_csv(&path, &m, &rows, &cols).unwrap();
        let (back, r, c) = read_labeled_csv(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(r, rows);
        assert_eq!(c, cols);
    }
}
