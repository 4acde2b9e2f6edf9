//! Dense matrices over a truncated Witt ring, with Hermite and Smith normal
//! forms for the local ring W/p^N.

use crate::error::{precision, Result};
use crate::witt::{PrimeContext, Witt};

/// Row-major matrix of Witt elements. The context is passed to every
/// operation rather than stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Witt>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Witt::default(); rows * cols] }
    }

    pub fn identity(ctx: &PrimeContext, n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Witt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn diag(entries: &[Witt]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = *e;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(n: usize, cols: &[Vec<Witt>]) -> Self {
        Self::from_fn(n, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> Vec<Witt> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(&Witt) -> Witt) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn mul(&self, ctx: &PrimeContext, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if ctx.is_zero(&a) {
                    continue;
                }
                for j in 0..other.cols {
                    let t = ctx.mul(&a, &other[(l, j)]);
                    out[(i, j)] = ctx.add(&out[(i, j)], &t);
                }
            }
        }
        out
    }

    pub fn add(&self, ctx: &PrimeContext, other: &Mat) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| ctx.add(&self[(i, j)], &other[(i, j)]))
    }

    pub fn neg(&self, ctx: &PrimeContext) -> Mat {
        self.map(|a| ctx.neg(a))
    }

    pub fn scale(&self, ctx: &PrimeContext, s: &Witt) -> Mat {
        self.map(|a| ctx.mul(a, s))
    }

    pub fn shl(&self, ctx: &PrimeContext, v: u32) -> Mat {
        self.map(|a| ctx.shl(a, v))
    }

    /// Entrywise σ^j.
    pub fn frob_pow(&self, ctx: &PrimeContext, j: i64) -> Mat {
        self.map(|a| ctx.frob_pow(a, j))
    }

    /// Entrywise exact division by p^v; `None` if some entry is not divisible.
    pub fn div_p_pow(&self, ctx: &PrimeContext, v: u32) -> Option<Mat> {
        let data = self.data.iter().map(|a| ctx.div_p_pow(a, v)).collect::<Option<Vec<_>>>()?;
        Some(Mat { rows: self.rows, cols: self.cols, data })
    }

    /// Minimal valuation over all entries (N for the zero matrix).
    pub fn valuation(&self, ctx: &PrimeContext) -> u32 {
        self.data.iter().map(|a| ctx.valuation(a)).min().unwrap_or(ctx.precision())
    }

    pub fn hconcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn apply(&self, ctx: &PrimeContext, v: &[Witt]) -> Vec<Witt> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(ctx.zero(), |acc, j| ctx.add(&acc, &ctx.mul(&self[(i, j)], &v[j]))))
            .collect()
    }

    /// Equality modulo p^v.
    pub fn eq_mod(&self, ctx: &PrimeContext, other: &Mat, v: u32) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| ctx.valuation(&ctx.sub(a, b)) >= v)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    // row[dst] -= c * row[src]
    fn row_axpy(&mut self, ctx: &PrimeContext, dst: usize, src: usize, c: &Witt) {
        for j in 0..self.cols {
            let t = ctx.mul(c, &self[(src, j)]);
            self[(dst, j)] = ctx.sub(&self[(dst, j)], &t);
        }
    }

    fn col_axpy(&mut self, ctx: &PrimeContext, dst: usize, src: usize, c: &Witt) {
        for i in 0..self.rows {
            let t = ctx.mul(c, &self[(i, src)]);
            self[(i, dst)] = ctx.sub(&self[(i, dst)], &t);
        }
    }

    fn scale_row(&mut self, ctx: &PrimeContext, r: usize, c: &Witt) {
        for j in 0..self.cols {
            self[(r, j)] = ctx.mul(&self[(r, j)], c);
        }
    }

    fn scale_col(&mut self, ctx: &PrimeContext, col: usize, c: &Witt) {
        for i in 0..self.rows {
            self[(i, col)] = ctx.mul(&self[(i, col)], c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Witt;
    fn index(&self, (i, j): (usize, usize)) -> &Witt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Witt {
        &mut self.data[i * self.cols + j]
    }
}

/// Digits of precision reserved when deciding whether a normal form is exact.
pub const GUARD: u32 = 3;

/// Column-style Hermite normal form of the span of the columns of `gens`
/// (n rows, any number ≥ n of columns).
///
/// Returns the diagonal exponents a_i and the upper-triangular n×n matrix H
/// with H_ii = p^{a_i} and every coordinate of H_ij (j > i) reduced into
/// [0, p^{a_i}). H is a pure function of the column span.
pub fn hnf(ctx: &PrimeContext, gens: &Mat) -> Result<(Vec<u32>, Mat)> {
    let n = gens.rows();
    let mut cols: Vec<Vec<Witt>> = (0..gens.cols()).map(|j| gens.col(j)).collect();
    let mut active: Vec<usize> = (0..cols.len()).collect();
    let mut exps = vec![0u32; n];
    let mut out: Vec<Vec<Witt>> = vec![Vec::new(); n];
    for i in (0..n).rev() {
        let (pos, v) = active
            .iter()
            .enumerate()
            .map(|(pos, &j)| (pos, ctx.valuation(&cols[j][i])))
            .min_by_key(|&(pos, v)| (v, pos))
            .ok_or_else(|| precision("generators do not span a full-rank lattice"))?;
        if v >= ctx.precision() {
            return Err(precision(format!("no pivot in row {i}")));
        }
        let pj = active.remove(pos);
        let unit = ctx.div_p_pow(&cols[pj][i], v).unwrap();
        let uinv = ctx.inv(&unit).unwrap();
        let pivot: Vec<Witt> = cols[pj].iter().map(|a| ctx.mul(a, &uinv)).collect();
        for &j in &active {
            let c = cols[j][i];
            if ctx.is_zero(&c) {
                continue;
            }
            let w = ctx.div_p_pow(&c, v).unwrap();
            for r in 0..=i {
                let t = ctx.mul(&w, &pivot[r]);
                cols[j][r] = ctx.sub(&cols[j][r], &t);
            }
        }
        exps[i] = v;
        out[i] = pivot;
    }
    let total: u32 = exps.iter().sum();
    if total + GUARD > ctx.precision() {
        return Err(precision(format!("lattice index {total} too large for N = {}", ctx.precision())));
    }
    // reduce entries above the diagonal, bottom-up within each column
    for j in 0..n {
        for i in (0..j).rev() {
            let (w, _) = ctx.divmod_p_pow(&out[j][i], exps[i]);
            if ctx.is_zero(&w) {
                continue;
            }
            for r in 0..=i {
                let t = ctx.mul(&w, &out[i][r]);
                out[j][r] = ctx.sub(&out[j][r], &t);
            }
        }
    }
    Ok((exps, Mat::from_cols(n, &out)))
}

/// Smith normal form: left · m · right = diag(p^{a_1}, ..., p^{a_n}) with
/// a_1 ≤ ... ≤ a_n and left, right invertible.
#[derive(Clone, Debug)]
pub struct Snf {
    pub exps: Vec<u32>,
    pub left: Mat,
    pub right: Mat,
}

pub fn snf(ctx: &PrimeContext, m: &Mat) -> Result<Snf> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "snf expects a square matrix");
    let mut a = m.clone();
    let mut left = Mat::identity(ctx, n);
    let mut right = Mat::identity(ctx, n);
    let mut exps = Vec::with_capacity(n);
    for k in 0..n {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..n {
            for j in k..n {
                let v = ctx.valuation(&a[(i, j)]);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (v, r, c) = best.unwrap();
        if v >= ctx.precision() {
            return Err(precision("matrix is singular modulo p^N"));
        }
        a.swap_rows(k, r);
        left.swap_rows(k, r);
        a.swap_cols(k, c);
        right.swap_cols(k, c);
        let unit = ctx.div_p_pow(&a[(k, k)], v).unwrap();
        let uinv = ctx.inv(&unit).unwrap();
        a.scale_row(ctx, k, &uinv);
        left.scale_row(ctx, k, &uinv);
        for i in k + 1..n {
            if let Some(w) = ctx.div_p_pow(&a[(i, k)], v).filter(|w| !ctx.is_zero(w)) {
                a.row_axpy(ctx, i, k, &w);
                left.row_axpy(ctx, i, k, &w);
            }
        }
        for j in k + 1..n {
            if let Some(w) = ctx.div_p_pow(&a[(k, j)], v).filter(|w| !ctx.is_zero(w)) {
                a.col_axpy(ctx, j, k, &w);
                right.col_axpy(ctx, j, k, &w);
            }
        }
        exps.push(v);
    }
    Ok(Snf { exps, left, right })
}

/// p-adic valuation of the determinant, via the Smith form.
pub fn det_valuation(ctx: &PrimeContext, m: &Mat) -> Result<u32> {
    Ok(snf(ctx, m)?.exps.iter().sum())
}

/// Inverse of a matrix that is invertible over W/p^N.
pub fn inverse(ctx: &PrimeContext, m: &Mat) -> Result<Mat> {
    let s = snf(ctx, m)?;
    if s.exps.iter().any(|&e| e > 0) {
        return Err(precision("matrix is not invertible over the ring"));
    }
    // m = left^{-1} right^{-1}  =>  m^{-1} = right · left
    Ok(s.right.mul(ctx, &s.left))
}

/// Scales column `j` so its pivot is exactly the given power of p; exposed
/// for the Gram–Schmidt routine, which performs column operations.
pub(crate) fn scale_col(m: &mut Mat, ctx: &PrimeContext, j: usize, c: &Witt) {
    m.scale_col(ctx, j, c);
}

pub(crate) fn col_axpy(m: &mut Mat, ctx: &PrimeContext, dst: usize, src: usize, c: &Witt) {
    m.col_axpy(ctx, dst, src, c);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::make_context;

    #[test]
    fn snf_of_diagonal_sorts() {
        let ctx = make_context(3, 1, 8).unwrap();
        let m = Mat::diag(&[ctx.p_pow(2), ctx.one(), ctx.p_pow(1)]);
        let s = snf(&ctx, &m).unwrap();
        assert_eq!(s.exps, vec![0, 1, 2]);
        let d = s.left.mul(&ctx, &m).mul(&ctx, &s.right);
        let expect = Mat::diag(&[ctx.one(), ctx.p_pow(1), ctx.p_pow(2)]);
        assert_eq!(d, expect);
    }

    #[test]
    fn hnf_is_span_invariant() {
        let ctx = make_context(3, 1, 10).unwrap();
        let t = ctx.teich_pow(3);
        let g = Mat::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => ctx.p_pow(1),
            (0, 2) => t,
            (1, 1) => ctx.one(),
            (2, 2) => ctx.p_pow(2),
            (1, 2) => ctx.from_int(5),
            _ => ctx.zero(),
        });
        let (e1, h1) = hnf(&ctx, &g).unwrap();
        // add column 0 into column 2 and multiply column 1 by a unit
        let mut g2 = g.clone();
        col_axpy(&mut g2, &ctx, 2, 0, &ctx.from_int(-7));
        scale_col(&mut g2, &ctx, 1, &ctx.teich_pow(5));
        let (e2, h2) = hnf(&ctx, &g2).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(h1, h2);
    }
}
