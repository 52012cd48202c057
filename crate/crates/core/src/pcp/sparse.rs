//! Compressed sparse row matrices with the few kernels the solver needs.

use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

const PAR_ROWS: usize = 4096;

impl Csr {
    /// Builds from per-row `(col, value)` lists; duplicates are summed.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n_rows = rows.len();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut last = usize::MAX;
            for (c, v) in row {
                debug_assert!(c < n_cols);
                if c == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|p| v[p]).unwrap_or(0.0)
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (c, v) = self.row(i);
        c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        if self.n_rows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = a;
                next[j] += 1;
            }
        }
        Csr {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `self · other` by row-wise accumulation.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.n_cols, other.n_rows);
        let n = other.n_cols;
        let rows: Vec<Vec<(usize, f64)>> = (0..self.n_rows)
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; n], vec![usize::MAX; n], Vec::new()),
                |(acc, mark, touched), i| {
                    touched.clear();
                    let (c, v) = self.row(i);
                    for (&k, &a) in c.iter().zip(v) {
                        let (c2, v2) = other.row(k);
                        for (&j, &b) in c2.iter().zip(v2) {
                            if mark[j] != i {
                                mark[j] = i;
                                acc[j] = 0.0;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.iter().map(|&j| (j, acc[j])).collect()
                },
            )
            .collect();
        Csr::from_rows(n, rows)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..self.n_rows).all(|i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).all(|(&j, &a)| (a - self.get(j, i)).abs() <= tol * scale)
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                m[(i, j)] = a;
            }
        }
        m
    }
}

/// Chunked so that the summation order, and hence the result, does not
/// depend on how the work is scheduled.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() >= 8 * PAR_ROWS {
        let partial: Vec<f64> = a
            .par_chunks(PAR_ROWS)
            .zip(b.par_chunks(PAR_ROWS))
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
            .collect();
        partial.iter().sum()
    } else {
        a.iter().zip(b).map(|(p, q)| p * q).sum()
    }
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
