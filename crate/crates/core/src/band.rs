//! Banded matrices and LU factorization with partial pivoting.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major, entry (i, j) stored at i * width + (j + kl - i)
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    /// Build from sparse rows, sizing the band to fit.
    pub fn from_rows(rows: &[Vec<(usize, f64)>]) -> Self {
        let n = rows.len();
        let mut kl = 0;
        let mut ku = 0;
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let mut m = BandMatrix::zeros(n, kl, ku);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                m.add(i, j, v);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j >= self.n || !self.in_band(i, j) {
            0.0
        } else {
            self.data[i * self.width() + j + self.kl - i]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] = v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let w = self.width();
        self.data[i * w..(i + 1) * w].fill(0.0);
    }

    pub fn scale_row(&mut self, i: usize, c: f64) {
        let w = self.width();
        self.data[i * w..(i + 1) * w].iter_mut().for_each(|x| *x *= c);
    }

    fn cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.cols(i).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.cols(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self)
    }
}

/// LU factors of a band matrix. Row interchanges widen the upper band of `U`
/// to at most `kl + ku`; multipliers are kept per pivot without being interchanged.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    // u[k] holds U(k, k..), l[k] holds the multipliers below pivot k
    u: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
    piv: Vec<usize>,
    min_pivot: f64,
}

struct WorkRow {
    start: usize,
    vals: Vec<f64>,
}

impl WorkRow {
    fn get(&self, j: usize) -> f64 {
        if j >= self.start && j < self.start + self.vals.len() {
            self.vals[j - self.start]
        } else {
            0.0
        }
    }

    fn end(&self) -> usize {
        self.start + self.vals.len()
    }

    fn sub(&mut self, j: usize, v: f64) {
        if j >= self.end() {
            self.vals.resize(j + 1 - self.start, 0.0);
        }
        self.vals[j - self.start] -= v;
    }
}

impl BandLu {
    fn new(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let scale = a.max_abs();
        if !scale.is_finite() {
            return Err(Error::NumericalBreakdown("non-finite matrix entry".into()));
        }
        if scale == 0.0 {
            return Err(Error::NonInvertibleOperator("zero matrix".into()));
        }
        let mut rows: Vec<WorkRow> = (0..n)
            .map(|i| {
                let c = a.cols(i);
                WorkRow { start: c.start, vals: c.map(|j| a.get(i, j)).collect() }
            })
            .collect();
        let mut piv = vec![0; n];
        let mut l = vec![Vec::new(); n];
        let mut u = vec![Vec::new(); n];
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[k].get(k).abs();
            for (i, row) in rows.iter().enumerate().take(last + 1).skip(k + 1) {
                let v = row.get(k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            min_pivot = min_pivot.min(best);
            if !(best > 1e-12 * scale) {
                return Err(Error::NonInvertibleOperator(format!(
                    "pivot {best:e} at column {k} below 1e-12 x scale {scale:e}"
                )));
            }
            piv[k] = p;
            rows.swap(k, p);
            let urow: Vec<f64> = (k..rows[k].end().max(k + 1)).map(|j| rows[k].get(j)).collect();
            let pivot = urow[0];
            let mut mults = Vec::with_capacity(last - k);
            for row in rows.iter_mut().take(last + 1).skip(k + 1) {
                let f = row.get(k) / pivot;
                mults.push(f);
                if f != 0.0 {
                    for (d, v) in urow.iter().enumerate().skip(1) {
                        row.sub(k + d, f * v);
                    }
                }
            }
            u[k] = urow;
            l[k] = mults;
        }
        Ok(BandLu { n, u, l, piv, min_pivot })
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for (d, f) in self.l[k].iter().enumerate() {
                x[k + 1 + d] -= f * xk;
            }
        }
        for k in (0..n).rev() {
            let row = &self.u[k];
            let mut s = x[k];
            for (d, v) in row.iter().enumerate().skip(1) {
                s -= v * x[k + d];
            }
            x[k] = s / row[0];
        }
        x
    }
}

/// Smallest singular value of `a` by inverse iteration on `a^T a`.
pub fn smallest_singular_value(a: &BandMatrix) -> Result<f64> {
    let lu = match a.factor() {
        Ok(lu) => lu,
        Err(Error::NonInvertibleOperator(_)) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let lut = a.transpose().factor()?;
    let n = a.size();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    let mut sigma = f64::INFINITY;
    for _ in 0..200 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let y = lu.solve(&lut.solve(&x));
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !ny.is_finite() || ny == 0.0 {
            return Ok(0.0);
        }
        let next = (1.0 / ny).sqrt();
        x = y;
        if (next - sigma).abs() <= 1e-12 * next {
            return Ok(next);
        }
        sigma = next;
    }
    Ok(sigma)
}
