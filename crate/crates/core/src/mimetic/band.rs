//! Row-banded storage for the small rectangular and square operators of a column.
//!
//! Row `r` stores the entries in columns `r + lo .. r + lo + width`; anything outside that
//! window is structurally zero. Every operator of the lowest-order vertical discretisation
//! fits in `width <= 3`.

use nalgebra::DMatrix;

use crate::error::{Result, SolverError};

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    nrows: usize,
    ncols: usize,
    lo: isize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(nrows: usize, ncols: usize, lo: isize, width: usize) -> Self {
        Self {
            nrows,
            ncols,
            lo,
            width,
            data: vec![0.0; nrows * width],
        }
    }

    /// Square tridiagonal matrix.
    pub fn tridiagonal(n: usize) -> Self {
        Self::zeros(n, n, -1, 3)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    /// Column range stored for row `r`, clipped to the matrix.
    fn row_span(&self, r: usize) -> (usize, usize) {
        let first = r as isize + self.lo;
        let start = first.max(0) as usize;
        let end = (first + self.width as isize).clamp(0, self.ncols as isize) as usize;
        (start, end.max(start))
    }

    fn slot(&self, r: usize, c: usize) -> Option<usize> {
        if r >= self.nrows || c >= self.ncols {
            return None;
        }
        let k = c as isize - r as isize - self.lo;
        (0..self.width as isize)
            .contains(&k)
            .then(|| r * self.width + k as usize)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.slot(r, c).map_or(0.0, |i| self.data[i])
    }

    /// Accumulates into a stored entry.
    ///
    /// Panics if `(r, c)` lies outside the band.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let i = self
            .slot(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) outside band"));
        self.data[i] += v;
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        let i = self
            .slot(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) outside band"));
        self.data[i] = v;
    }

    /// Iterates the stored, in-range entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = self.row_span(r);
        (s..e).map(move |c| (c, self.get(r, c)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mul_vec dimension mismatch");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `selfᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "tr_mul_vec dimension mismatch");
        let mut out = vec![0.0; self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += v * xr;
            }
        }
        out
    }

    pub fn transpose(&self) -> BandMatrix {
        let lo = -(self.lo + self.width as isize - 1);
        let mut t = BandMatrix::zeros(self.ncols, self.nrows, lo, self.width);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.set(c, r, v);
            }
        }
        t
    }

    pub fn scale(&self, a: f64) -> BandMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[f64]) -> BandMatrix {
        assert_eq!(d.len(), self.nrows);
        let mut out = self.clone();
        for (r, chunk) in out.data.chunks_mut(self.width).enumerate() {
            chunk.iter_mut().for_each(|v| *v *= d[r]);
        }
        out
    }

    /// `self * diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> BandMatrix {
        assert_eq!(d.len(), self.ncols);
        let mut out = self.clone();
        for r in 0..self.nrows {
            let (s, e) = self.row_span(r);
            for c in s..e {
                let i = out.slot(r, c).unwrap();
                out.data[i] *= d[c];
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// `self * m` for a dense right-hand side.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), self.ncols, "mul_dense dimension mismatch");
        let mut out = DMatrix::zeros(self.nrows, m.ncols());
        for j in 0..m.ncols() {
            for r in 0..self.nrows {
                out[(r, j)] = self.row(r).map(|(c, v)| v * m[(c, j)]).sum();
            }
        }
        out
    }

    /// Largest `|c - r|` over stored nonzero entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.nrows)
            .flat_map(|r| {
                self.row(r)
                    .filter(|(_, v)| *v != 0.0)
                    .map(move |(c, _)| r.abs_diff(c))
            })
            .max()
            .unwrap_or(0)
    }

    /// LU factorisation of a square tridiagonal matrix without pivoting.
    ///
    /// The column mass matrices are diagonally dominant, so a vanishing pivot means the
    /// weights that built the matrix were not positive.
    pub fn factor_tridiagonal(&self) -> Result<TridiagonalLu> {
        assert!(
            self.nrows == self.ncols && self.lo >= -1 && self.lo + self.width as isize <= 2,
            "factor_tridiagonal needs a square matrix with bandwidth <= 1"
        );
        let n = self.nrows;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let a = if i > 0 { self.get(i, i - 1) } else { 0.0 };
            let b = self.get(i, i);
            let c = if i + 1 < n { self.get(i, i + 1) } else { 0.0 };
            let l = if i > 0 { a / diag[i - 1] } else { 0.0 };
            let d = b - if i > 0 { l * upper[i - 1] } else { 0.0 };
            if !d.is_finite() || d.abs() <= f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
                return Err(SolverError::SolverBreakdown {
                    stage: "tridiagonal factorisation",
                    column: None,
                });
            }
            lower[i] = l;
            diag[i] = d;
            upper[i] = c;
        }
        Ok(TridiagonalLu { lower, diag, upper })
    }
}

/// Doolittle factors of a tridiagonal matrix: unit lower bidiagonal times upper bidiagonal.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalLu {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// True when every pivot is positive, which for a symmetric matrix means it is
    /// positive definite.
    pub fn all_pivots_positive(&self) -> bool {
        self.diag.iter().all(|&d| d > 0.0)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        for i in 1..n {
            x[i] -= self.lower[i] * x[i - 1];
        }
        for i in (0..n).rev() {
            let next = if i + 1 < n {
                self.upper[i] * x[i + 1]
            } else {
                0.0
            };
            x[i] = (x[i] - next) / self.diag[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves column by column.
    pub fn solve_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = b.clone();
        for mut col in out.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        out
    }
}
