//! Core record types, dataset container, and CSV ingestion.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject: observed time, event indicator, covariate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    /// Observed (possibly censored) time, strictly positive.
    pub time: f64,
    /// 1 = observed failure, 0 = right-censored.
    pub status: u8,
    pub covariates: Vec<f64>,
}

impl SurvivalRecord {
    pub fn new(time: f64, status: u8, covariates: Vec<f64>) -> Result<Self> {
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::Domain(format!("time must be positive and finite, got {time}")));
        }
        if status > 1 {
            return Err(Error::Domain(format!("status must be 0 or 1, got {status}")));
        }
        Ok(Self { time, status, covariates })
    }
}

/// Immutable collection of survival records sharing a covariate dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<SurvivalRecord>,
    covariate_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, enforcing shared covariate dimension and at least
    /// one observed event.
    pub fn new(records: Vec<SurvivalRecord>, covariate_names: Vec<String>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Schema("dataset must be non-empty".into()));
        }
        let dim = covariate_names.len();
        for (i, r) in records.iter().enumerate() {
            if r.covariates.len() != dim {
                return Err(Error::Row {
                    row: i,
                    message: format!(
                        "covariate length {} does not match dimension {}",
                        r.covariates.len(),
                        dim
                    ),
                });
            }
        }
        if !records.iter().any(|r| r.status == 1) {
            return Err(Error::Schema("dataset contains no observed events".into()));
        }
        Ok(Self { records, covariate_names })
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn statuses(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.status).collect()
    }

    /// Fraction of censored rows.
    pub fn censoring_fraction(&self) -> f64 {
        let censored = self.records.iter().filter(|r| r.status == 0).count();
        censored as f64 / self.records.len() as f64
    }

    /// Dataset with row `i` removed. Used by leave-one-out residuals.
    pub fn without_row(&self, i: usize) -> Result<Self> {
        let mut records = self.records.clone();
        records.remove(i);
        Dataset::new(records, self.covariate_names.clone())
    }

    /// Same records with covariates replaced by a derived design column set.
    pub fn with_covariates(
        &self,
        covariates: Vec<Vec<f64>>,
        names: Vec<String>,
    ) -> Result<Self> {
        let records = self
            .records
            .iter()
            .zip(covariates)
            .map(|(r, c)| SurvivalRecord { time: r.time, status: r.status, covariates: c })
            .collect();
        Dataset::new(records, names)
    }

    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        time_col: &str,
        status_col: &str,
    ) -> Result<()> {
        write!(w, "{time_col},{status_col}")?;
        for name in &self.covariate_names {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for r in &self.records {
            write!(w, "{:.17e},{}", r.time, r.status)?;
            for c in &r.covariates {
                write!(w, ",{c:.17e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Loads a dataset from a headered CSV file.
///
/// Any missing column is a schema error; non-positive times and statuses
/// outside {0,1} are reported with the offending row index (0-based over
/// data rows).
pub fn load_csv(
    path: &Path,
    time_col: &str,
    status_col: &str,
    covariate_cols: &[String],
) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not found")))
    };
    let time_idx = find(time_col)?;
    let status_idx = find(status_col)?;
    let cov_idx: Vec<usize> = covariate_cols.iter().map(|c| find(c)).collect::<Result<_>>()?;

    let parse_cell = |row: usize, field: &str, col: &str| -> Result<f64> {
        let trimmed = field.trim();
        if trimmed.is_empty() {
            return Err(Error::Row { row, message: format!("empty cell in column '{col}'") });
        }
        trimmed.parse::<f64>().map_err(|_| Error::Row {
            row,
            message: format!("non-numeric value '{trimmed}' in column '{col}'"),
        })
    };

    let mut records = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let time = parse_cell(row, &rec[time_idx], time_col)?;
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::Row { row, message: format!("time must be positive, got {time}") });
        }
        let status_raw = parse_cell(row, &rec[status_idx], status_col)?;
        if status_raw != 0.0 && status_raw != 1.0 {
            return Err(Error::Row {
                row,
                message: format!("status must be 0 or 1, got {status_raw}"),
            });
        }
        let covariates = cov_idx
            .iter()
            .zip(covariate_cols)
            .map(|(&i, col)| parse_cell(row, &rec[i], col))
            .collect::<Result<Vec<f64>>>()?;
        records.push(SurvivalRecord { time, status: status_raw as u8, covariates });
    }
    Dataset::new(records, covariate_cols.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_three_row_file() {
        let f = write_temp("t,s,x\n1,1,0.5\n2,0,1.5\n3,1,2.5\n");
        let d = load_csv(f.path(), "t", "s", &["x".into()]).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.dim(), 1);
        assert_eq!(d.records()[1].status, 0);
        assert_eq!(d.records()[2].covariates, vec![2.5]);
    }

    #[test]
    fn missing_status_column_is_schema_error() {
        let f = write_temp("t,x\n1,0.5\n");
        let err = load_csv(f.path(), "t", "s", &["x".into()]).unwrap_err();
        assert!(matches!(err, Error::Schema(ref m) if m.contains("'s'")));
    }

    #[test]
    fn negative_time_is_row_error() {
        let f = write_temp("t,s,x\n1,1,0.5\n-1,1,1.5\n");
        let err = load_csv(f.path(), "t", "s", &["x".into()]).unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }));
    }

    #[test]
    fn empty_cell_is_row_error() {
        let f = write_temp("t,s,x\n1,1,\n");
        let err = load_csv(f.path(), "t", "s", &["x".into()]).unwrap_err();
        assert!(matches!(err, Error::Row { row: 0, .. }));
    }

    #[test]
    fn status_outside_01_rejected() {
        let f = write_temp("t,s,x\n1,2,0.5\n");
        let err = load_csv(f.path(), "t", "s", &["x".into()]).unwrap_err();
        assert!(matches!(err, Error::Row { row: 0, .. }));
    }

    #[test]
    fn all_censored_rejected() {
        let f = write_temp("t,s,x\n1,0,0.5\n2,0,1.5\n");
        assert!(load_csv(f.path(), "t", "s", &["x".into()]).is_err());
    }

    #[test]
    fn censoring_fraction_counts() {
        let recs = vec![
            SurvivalRecord::new(1.0, 1, vec![]).unwrap(),
            SurvivalRecord::new(2.0, 0, vec![]).unwrap(),
            SurvivalRecord::new(3.0, 1, vec![]).unwrap(),
            SurvivalRecord::new(4.0, 0, vec![]).unwrap(),
        ];
        let d = Dataset::new(recs, vec![]).unwrap();
        assert_eq!(d.censoring_fraction(), 0.5);
    }

    #[test]
    fn censoring_fraction_zero_when_all_events() {
        let recs = vec![
            SurvivalRecord::new(1.0, 1, vec![]).unwrap(),
            SurvivalRecord::new(2.0, 1, vec![]).unwrap(),
            SurvivalRecord::new(3.0, 1, vec![]).unwrap(),
        ];
        let d = Dataset::new(recs, vec![]).unwrap();
        assert_eq!(d.censoring_fraction(), 0.0);
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let f = write_temp("t,s,x\n1.25,1,0.5\n2.7182818284590452,0,1.5\n3,1,2.5\n");
        let d = load_csv(f.path(), "t", "s", &["x".into()]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, "t", "s").unwrap();
        let f2 = write_temp(std::str::from_utf8(&buf).unwrap());
        let d2 = load_csv(f2.path(), "t", "s", &["x".into()]).unwrap();
        assert_eq!(d, d2);
    }
}
