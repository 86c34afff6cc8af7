use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dct::PartialDct;
use crate::error::{check_len, Error, Result};

/// A real `m x N` linear map with its adjoint.
///
/// Implementors are immutable after construction and may be applied from
/// several threads at once.
pub trait LinearMap: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `out = Phi x`, `x.len() == cols()`, `out.len() == rows()`.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// `out = Phi^* y`, `y.len() == rows()`, `out.len() == cols()`.
    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        out
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.apply_adjoint_into(y, &mut out);
        out
    }

    /// `diag(Phi^* Phi)`, i.e. squared column norms.
    fn column_norms_sq(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.cols()];
        let mut e = vec![0.0; self.rows()];
        for i in 0..self.rows() {
            e[i] = 1.0;
            let row = self.apply_adjoint(&e);
            e[i] = 0.0;
            for (dj, r) in d.iter_mut().zip(&row) {
                *dj += r * r;
            }
        }
        d
    }

    /// Dense materialization, row-major. Meant for tests and small sizes.
    fn to_dense(&self) -> DenseMatrix {
        let (m, n) = (self.rows(), self.cols());
        let mut data = vec![0.0; m * n];
        let mut e = vec![0.0; m];
        for i in 0..m {
            e[i] = 1.0;
            let row = self.apply_adjoint(&e);
            e[i] = 0.0;
            data[i * n..(i + 1) * n].copy_from_slice(&row);
        }
        DenseMatrix { rows: m, cols: n, data }
    }
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).apply_into(x, out)
    }
    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        (**self).apply_adjoint_into(y, out)
    }
    fn column_norms_sq(&self) -> Vec<f64> {
        (**self).column_norms_sq()
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix must be nonempty".into()));
        }
        check_len("matrix data", data.len(), rows * cols)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Dimension(format!("row {bad} has length {}, expected {n}", rows[bad].len())));
        }
        Self::from_row_major(m, n, rows.concat())
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            data.extend(m.row(i).iter());
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    /// Headerless row-major CSV.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad matrix entry {s:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        for i in 0..self.rows {
            w.write_record(self.row(i).iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl LinearMap for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = super::dot(self.row(i), x);
        }
    }
    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        out.fill(0.0);
        for (i, yi) in y.iter().enumerate() {
            super::axpy(*yi, self.row(i), out);
        }
    }
    fn column_norms_sq(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (dj, a) in d.iter_mut().zip(self.row(i)) {
                *dj += a * a;
            }
        }
        d
    }
    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }
}

/// The sensing operators supported by the CLI and the instance generator.
#[derive(Clone, Debug)]
pub enum Operator {
    Dense(DenseMatrix),
    PartialDct(PartialDct),
}

impl Operator {
    pub fn spec(&self) -> OperatorSpec {
        match self {
            Operator::Dense(d) => OperatorSpec::Dense { n: d.cols, m: d.rows, csv: None },
            Operator::PartialDct(p) => p.spec(),
        }
    }
}

impl LinearMap for Operator {
    fn rows(&self) -> usize {
        match self {
            Operator::Dense(d) => d.rows(),
            Operator::PartialDct(p) => p.rows(),
        }
    }
    fn cols(&self) -> usize {
        match self {
            Operator::Dense(d) => d.cols(),
            Operator::PartialDct(p) => p.cols(),
        }
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Operator::Dense(d) => d.apply_into(x, out),
            Operator::PartialDct(p) => p.apply_into(x, out),
        }
    }
    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        match self {
            Operator::Dense(d) => d.apply_adjoint_into(y, out),
            Operator::PartialDct(p) => p.apply_adjoint_into(y, out),
        }
    }
    fn column_norms_sq(&self) -> Vec<f64> {
        match self {
            Operator::Dense(d) => d.column_norms_sq(),
            Operator::PartialDct(p) => p.column_norms_sq(),
        }
    }
    fn to_dense(&self) -> DenseMatrix {
        match self {
            Operator::Dense(d) => d.clone(),
            Operator::PartialDct(p) => p.to_dense(),
        }
    }
}

/// Serializable description of an operator.
///
/// Partial DCT row lists are 1-based, matching the row numbering of the
/// full cosine matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Dense {
        #[serde(rename = "N")]
        n: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
    },
    PartialDct {
        #[serde(rename = "N")]
        n: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<usize>>,
    },
}

impl OperatorSpec {
    /// Build the operator. Relative CSV paths resolve against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<Operator> {
        match self {
            OperatorSpec::PartialDct { n, m, seed, rows } => {
                let p = match (rows, seed) {
                    (Some(r), _) => {
                        let zero_based = r
                            .iter()
                            .map(|&i| i.checked_sub(1).ok_or_else(|| Error::IndexOutOfRange("DCT rows are 1-based".into())))
                            .collect::<Result<Vec<_>>>()?;
                        PartialDct::from_rows(*n, zero_based)?
                    }
                    (None, Some(s)) => PartialDct::random(*n, *m, *s)?,
                    (None, None) => return Err(Error::InvalidParameter("partial_dct spec needs seed or rows".into())),
                };
                check_len("partial_dct rows", p.rows(), *m)?;
                Ok(Operator::PartialDct(p))
            }
            OperatorSpec::Dense { n, m, csv } => {
                let csv = csv.as_ref().ok_or_else(|| Error::InvalidParameter("dense spec needs a csv path".into()))?;
                let path = match base {
                    Some(b) if Path::new(csv).is_relative() => b.join(csv),
                    _ => csv.into(),
                };
                let d = DenseMatrix::read_csv(path)?;
                check_len("dense rows", d.rows, *m)?;
                check_len("dense cols", d.cols, *n)?;
                Ok(Operator::Dense(d))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};
    use crate::rng::Stream;

    #[test]
    fn dense_adjoint_consistency() {
        let mut s = Stream::new(1);
        let a = DenseMatrix::from_row_major(7, 13, s.normal_vec(91)).unwrap();
        let x = s.normal_vec(13);
        let y = s.normal_vec(7);
        let lhs = dot(&a.apply(&x), &y);
        let rhs = dot(&x, &a.apply_adjoint(&y));
        let scale = norm(&x) * norm(&y) * a.to_nalgebra().norm();
        assert!((lhs - rhs).abs() <= 1e-12 * scale);
        let d = a.column_norms_sq();
        let generic = <DenseMatrix as LinearMap>::to_dense(&a);
        for j in 0..13 {
            let c: f64 = (0..7).map(|i| generic.get(i, j).powi(2)).sum();
            assert!((c - d[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        let a = DenseMatrix::from_rows(&[vec![1.0, -2.5, 1e-300], vec![0.1, 3.0, 7.0]]).unwrap();
        a.write_csv(&p).unwrap();
        assert_eq!(DenseMatrix::read_csv(&p).unwrap(), a);
        let spec = OperatorSpec::Dense { n: 3, m: 2, csv: Some("a.csv".into()) };
        let op = spec.build(Some(dir.path())).unwrap();
        assert_eq!(op.to_dense(), a);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s = OperatorSpec::PartialDct { n: 8, m: 3, seed: Some(7), rows: None };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"partial_dct","N":8,"m":3,"seed":7}"#);
        assert_eq!(serde_json::from_str::<OperatorSpec>(&j).unwrap(), s);
    }
}
