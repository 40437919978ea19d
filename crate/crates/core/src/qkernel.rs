//! Linear, RBF and quantum-state-overlap kernels plus Gram-matrix assembly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::encodings::FeatureMapSpec;
use crate::error::{Error, Result};
use crate::par;
use crate::simulator::Statevector;

pub fn linear_kernel(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

/// `exp(-γ ‖x − y‖²)`
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    check_dims(x, y)?;
    if !(gamma > 0.0) {
        return Err(Error::Validation(format!("rbf gamma must be positive, got {gamma}")));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-gamma * d2).exp())
}

/// `|⟨φ(x)|φ(y)⟩|²` with both states prepared by `spec`.
pub fn quantum_kernel(x: &[f64], y: &[f64], spec: &FeatureMapSpec) -> Result<f64> {
    check_dims(x, y)?;
    let a = spec.encode(x)?;
    let b = spec.encode(y)?;
    fidelity(&a, &b)
}

fn fidelity(a: &Statevector, b: &Statevector) -> Result<f64> {
    Ok(a.inner_product(b)?.norm_sqr())
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "kernel arguments have dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
    Quantum(FeatureMapSpec),
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            Kernel::Linear => linear_kernel(x, y),
            Kernel::Rbf { gamma } => rbf_kernel(x, y, *gamma),
            Kernel::Quantum(spec) => quantum_kernel(x, y, spec),
        }
    }
}

/// Row-major square Gram matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    n: usize,
    entries: Vec<f64>,
    row_ids: Vec<String>,
}

impl KernelMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, row_ids: Vec<String>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape("empty kernel matrix".into()));
        }
        if row_ids.len() != n {
            return Err(Error::Shape(format!("{} row ids for {n} rows", row_ids.len())));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Shape(format!("kernel row {r} is not of length {n}")));
        }
        Ok(Self { n, entries: rows.into_iter().flatten().collect(), row_ids })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.n)
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    /// Largest |K[i][j] − K[j][i]|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest |K[i][i] − 1|.
    pub fn max_diagonal_deviation(&self) -> f64 {
        (0..self.n).map(|i| (self.get(i, i) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// CSV cache format: header `id,<row ids…>`, then one `<id>,<values…>`
    /// line per row. Values use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(std::iter::once("id").chain(self.row_ids.iter().map(String::as_str)))?;
        for (id, row) in self.row_ids.iter().zip(self.rows()) {
            w.write_record(std::iter::once(id.clone()).chain(row.iter().map(|v| v.to_string())))?;
        }
        w.flush().map_err(|e| Error::io("<kernel csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("id") {
            return Err(Error::Schema("id".into()));
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (row_no, rec) in r.records().enumerate() {
            let rec = rec?;
            ids.push(rec.get(0).unwrap_or_default().to_string());
            let vals = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.parse::<f64>().map_err(|e| Error::Parse { row: row_no + 1, msg: format!("{s:?}: {e}") })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(vals);
        }
        let m = Self::from_rows(rows, ids)?;
        let header_ids: Vec<&str> = header.iter().skip(1).collect();
        if header_ids != m.row_ids.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Shape("kernel CSV header ids do not match row ids".into()));
        }
        Ok(m)
    }
}

/// Precomputed per-sample representation so each pair costs one cheap
/// evaluation. For the quantum kernel that is the encoded statevector.
enum Prepared<'a> {
    Raw(&'a [Vec<f64>]),
    States(Vec<Statevector>),
}

fn prepare<'a>(x: &'a [Vec<f64>], kernel: &Kernel) -> Result<Prepared<'a>> {
    if let Some(d) = x.first().map(Vec::len) {
        if let Some(i) = x.iter().position(|r| r.len() != d) {
            return Err(Error::Shape(format!("sample {i} has dimension {} (expected {d})", x[i].len())));
        }
    }
    match kernel {
        Kernel::Quantum(spec) => Ok(Prepared::States(
            par::map(x, |row| spec.encode(row)).into_iter().collect::<Result<_>>()?,
        )),
        Kernel::Rbf { gamma } if !(*gamma > 0.0) => {
            Err(Error::Validation(format!("rbf gamma must be positive, got {gamma}")))
        }
        _ => Ok(Prepared::Raw(x)),
    }
}

impl Prepared<'_> {
    fn pair(&self, other: &Prepared<'_>, i: usize, j: usize, kernel: &Kernel) -> f64 {
        match (self, other) {
            (Prepared::States(a), Prepared::States(b)) => {
                a[i].inner_product(&b[j]).map(|c| c.norm_sqr()).unwrap_or(f64::NAN)
            }
            (Prepared::Raw(a), Prepared::Raw(b)) => kernel.eval(&a[i], &b[j]).unwrap_or(f64::NAN),
            _ => unreachable!("both sides are prepared with the same kernel"),
        }
    }
}

/// Gram matrix `K[i][j] = kernel(x[i], x[j])`. Only the upper triangle is
/// evaluated and then mirrored.
pub fn kernel_matrix(x: &[Vec<f64>], kernel: &Kernel) -> Result<KernelMatrix> {
    let ids = (0..x.len()).map(|i| i.to_string()).collect();
    kernel_matrix_with_ids(x, ids, kernel)
}

pub fn kernel_matrix_with_ids(x: &[Vec<f64>], row_ids: Vec<String>, kernel: &Kernel) -> Result<KernelMatrix> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Shape("kernel matrix of an empty sample set".into()));
    }
    let prepared = prepare(x, kernel)?;
    let upper: Vec<Vec<f64>> = par::map(&(0..n).collect::<Vec<_>>(), |&i| {
        (i..n).map(|j| prepared.pair(&prepared, i, j, kernel)).collect()
    });
    let mut rows = vec![vec![0.0; n]; n];
    for (i, tail) in upper.into_iter().enumerate() {
        for (off, v) in tail.into_iter().enumerate() {
            rows[i][i + off] = v;
            rows[i + off][i] = v;
        }
    }
    check_finite_entries(&rows)?;
    KernelMatrix::from_rows(rows, row_ids)
}

/// Rectangular kernel between `rows` (e.g. test samples) and `cols`
/// (training samples). Entry `[r][c] = kernel(rows[r], cols[c])`.
pub fn cross_kernel(rows: &[Vec<f64>], cols: &[Vec<f64>], kernel: &Kernel) -> Result<Vec<Vec<f64>>> {
    if let (Some(a), Some(b)) = (rows.first(), cols.first()) {
        check_dims(a, b)?;
    }
    let pr = prepare(rows, kernel)?;
    let pc = prepare(cols, kernel)?;
    let out: Vec<Vec<f64>> = par::map(&(0..rows.len()).collect::<Vec<_>>(), |&i| {
        (0..cols.len()).map(|j| pr.pair(&pc, i, j, kernel)).collect()
    });
    check_finite_entries(&out)?;
    Ok(out)
}

fn check_finite_entries(rows: &[Vec<f64>]) -> Result<()> {
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Validation("kernel produced a non-finite entry".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_examples() {
        assert_eq!(rbf_kernel(&[0.3, 0.2], &[0.3, 0.2], 2.0).unwrap(), 1.0);
        let v = rbf_kernel(&[0.0, 0.0], &[1.0, 0.0], 2.0).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        let mut last = 1.0;
        for g in [0.1, 1.0, 10.0, 100.0] {
            let v = rbf_kernel(&[0.0], &[0.5], g).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(matches!(rbf_kernel(&[0.0], &[0.0, 1.0], 1.0), Err(Error::Shape(_))));
        assert!(rbf_kernel(&[0.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn linear_examples() {
        assert_eq!(linear_kernel(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(linear_kernel(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert!(matches!(linear_kernel(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn quantum_self_overlap() {
        let spec = FeatureMapSpec::zz(8);
        assert!((quantum_kernel(&[0.0; 4], &[0.0; 4], &spec).unwrap() - 1.0).abs() < 1e-12);
        let x = [0.2, 0.9, 0.4, 0.1];
        assert!((quantum_kernel(&x, &x, &spec).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_and_duplicate_samples() {
        let k = kernel_matrix(&[vec![0.3, 0.4]], &Kernel::Rbf { gamma: 2.0 }).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.get(0, 0), 1.0);
        let x = vec![vec![0.1, 0.5], vec![0.7, 0.2], vec![0.1, 0.5]];
        let k = kernel_matrix(&x, &Kernel::Quantum(FeatureMapSpec::zz(4))).unwrap();
        assert!((k.get(0, 2) - 1.0).abs() < 1e-12);
        assert!(matches!(kernel_matrix(&[], &Kernel::Linear), Err(Error::Shape(_))));
    }

    #[test]
    fn ragged_input_rejected() {
        let x = vec![vec![0.1, 0.5], vec![0.7]];
        assert!(matches!(kernel_matrix(&x, &Kernel::Linear), Err(Error::Shape(_))));
    }

    #[test]
    fn csv_round_trip() {
        let x = vec![vec![0.1, 0.5], vec![0.7, 0.2], vec![0.3, 0.3]];
        let k = kernel_matrix(&x, &Kernel::Rbf { gamma: 2.0 }).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,0,1,2\n0,1,"));
        let back = KernelMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, k);
    }
}
