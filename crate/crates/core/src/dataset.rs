//! Input/target matrices and their CSV form.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Binary,
}

/// `N` rows of `d` input features and `Q` targets. Row order is anchor order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: DMatrix<f64>,
    targets: DMatrix<f64>,
    kinds: Vec<FeatureKind>,
}

impl Dataset {
    pub fn new(inputs: DMatrix<f64>, targets: DMatrix<f64>, kinds: Vec<FeatureKind>) -> Result<Self> {
        let (n, d) = inputs.shape();
        if n == 0 || d == 0 || targets.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset needs N, d, Q >= 1 (got N={n}, d={d}, Q={})",
                targets.ncols()
            )));
        }
        if targets.nrows() != n {
            return Err(Error::Shape(format!("{n} input rows but {} target rows", targets.nrows())));
        }
        if kinds.len() != d {
            return Err(Error::Shape(format!("{d} features but {} feature kinds", kinds.len())));
        }
        if !crate::linalg::all_finite(&inputs) {
            return Err(Error::NonFinite("dataset inputs"));
        }
        if !crate::linalg::all_finite(&targets) {
            return Err(Error::NonFinite("dataset targets"));
        }
        for (c, kind) in kinds.iter().enumerate() {
            if *kind == FeatureKind::Binary && inputs.column(c).iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidInput(format!("binary column x{c} holds a value outside {{0,1}}")));
            }
        }
        Ok(Self { inputs, targets, kinds })
    }

    /// All columns continuous.
    pub fn continuous(inputs: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        let d = inputs.ncols();
        Self::new(inputs, targets, vec![FeatureKind::Continuous; d])
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &DMatrix<f64> {
        &self.targets
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    pub fn n_features(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.ncols()
    }

    /// Writes `x0..x{d-1},y0..y{Q-1}` with a header row.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.n_features()).map(|c| format!("x{c}")).collect();
        header.extend((0..self.n_targets()).map(|c| format!("y{c}")));
        w.write_record(&header)?;
        for r in 0..self.len() {
            let row = self
                .inputs
                .row(r)
                .iter()
                .chain(self.targets.row(r).iter())
                .map(|v| v.to_string())
                .collect::<Vec<_>>();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`Dataset::write_csv`]. Columns whose values all
    /// lie in `{0,1}` are tagged binary.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path_str = path.as_ref().display().to_string();
        let mut rdr = csv::Reader::from_path(path.as_ref())?;
        let header = rdr.headers()?.clone();
        let mut x_cols = Vec::new();
        let mut y_cols = Vec::new();
        for (pos, name) in header.iter().enumerate() {
            let name = name.trim();
            let parsed = |prefix: char| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
            if let Some(k) = parsed('x') {
                x_cols.push((k, pos));
            } else if let Some(k) = parsed('y') {
                y_cols.push((k, pos));
            } else {
                return Err(Error::Parse { path: path_str, line: 1, message: format!("unexpected column '{name}'") });
            }
        }
        for (cols, prefix) in [(&mut x_cols, 'x'), (&mut y_cols, 'y')] {
            cols.sort();
            if cols.iter().enumerate().any(|(i, (k, _))| *k != i) {
                return Err(Error::Parse {
                    path: path_str,
                    line: 1,
                    message: format!("{prefix} columns must be numbered contiguously from 0"),
                });
            }
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let line = r + 2;
            let record = record?;
            let field = |pos: usize| -> Result<f64> {
                let raw = record.get(pos).unwrap_or("").trim();
                let v: f64 = raw.parse().map_err(|_| Error::Parse {
                    path: path_str.clone(),
                    line,
                    message: format!("'{raw}' is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse { path: path_str.clone(), line, message: "non-finite value".into() });
                }
                Ok(v)
            };
            for &(_, pos) in &x_cols {
                xs.push(field(pos)?);
            }
            for &(_, pos) in &y_cols {
                ys.push(field(pos)?);
            }
        }
        let n = xs.len() / x_cols.len().max(1);
        let inputs = DMatrix::from_row_slice(n, x_cols.len(), &xs);
        let targets = DMatrix::from_row_slice(n, y_cols.len(), &ys);
        let kinds = (0..inputs.ncols())
            .map(|c| {
                if inputs.column(c).iter().all(|&v| v == 0.0 || v == 1.0) {
                    FeatureKind::Binary
                } else {
                    FeatureKind::Continuous
                }
            })
            .collect();
        Self::new(inputs, targets, kinds)
    }
}
