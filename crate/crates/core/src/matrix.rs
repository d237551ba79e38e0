use serde::{Deserialize, Serialize};

use crate::dataset::fingerprint_of;

/// Dense row-major feature matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    columns: Vec<String>,
    n_rows: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// Panics if `data.len() != n_rows * columns.len()`.
    pub fn new(columns: Vec<String>, n_rows: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_rows * columns.len(), "matrix shape mismatch");
        FeatureMatrix {
            columns,
            n_rows,
            data,
        }
    }

    pub fn from_rows(columns: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * columns.len());
        for r in rows {
            assert_eq!(r.len(), columns.len(), "ragged row");
            data.extend_from_slice(r);
        }
        FeatureMatrix::new(columns, rows.len(), data)
    }

    /// Columns named `x0, x1, ...`; handy for toy problems.
    pub fn unnamed(rows: &[Vec<f64>]) -> Self {
        let p = rows.first().map_or(0, Vec::len);
        FeatureMatrix::from_rows((0..p).map(|j| format!("x{j}")).collect(), rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let p = self.n_cols();
        &mut self.data[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols());
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix::new(self.columns.clone(), idx.len(), data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_of(self.columns.iter().map(String::as_str))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
