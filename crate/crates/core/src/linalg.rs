//! Exact integer linear algebra: dense matrices over arbitrary-precision
//! integers, Smith and Hermite normal forms, and integer / modular solvers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Shorthand used throughout the crate.
pub type Int = BigInt;

pub fn int(v: i64) -> Int {
    BigInt::from(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
}

fn mismatch(context: &'static str, expected: usize, found: usize) -> LinalgError {
    LinalgError::DimensionMismatch {
        context,
        expected,
        found,
    }
}

/// Row-major dense integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Int>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(mismatch("IntMatrix::from_vec", rows * cols, data.len()));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Int) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    /// Builds a matrix from small integer rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&v| int(v)));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix with the given columns, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Int>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn diagonal(entries: &[Int]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Int] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Int] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn col(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Int>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = &self[(i, j)];
                    if i == j {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn neg(&self) -> Self {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    pub fn scale(&self, c: &Int) -> Self {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_shape(other, "IntMatrix::add")?;
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_shape(other, "IntMatrix::sub")?;
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    fn same_shape(&self, other: &Self, context: &'static str) -> Result<(), LinalgError> {
        if self.rows != other.rows {
            return Err(mismatch(context, self.rows, other.rows));
        }
        if self.cols != other.cols {
            return Err(mismatch(context, self.cols, other.cols));
        }
        Ok(())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(mismatch("IntMatrix::mul", self.cols, other.rows));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for (k, a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let brow = other.row(k);
                let orow = out.row_mut(i);
                for (o, b) in orow.iter_mut().zip(brow) {
                    if !b.is_zero() {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix product; panics on incompatible shapes.
    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("matrix product shapes")
    }

    pub fn checked_mul_vec(&self, v: &[Int]) -> Result<Vec<Int>, LinalgError> {
        if self.cols != v.len() {
            return Err(mismatch("IntMatrix::mul_vec", self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Int::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect())
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        self.checked_mul_vec(v).expect("matrix-vector shapes")
    }

    pub fn hstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows {
            return Err(mismatch("IntMatrix::hstack", self.rows, other.rows));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        }))
    }

    pub fn vstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.cols {
            return Err(mismatch("IntMatrix::vstack", self.cols, other.cols));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self, LinalgError> {
        a.hstack(b)?.vstack(&c.hstack(d)?)
    }

    pub fn block_diag(blocks: &[&IntMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows.start + i, cols.start + j)].clone()
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> Result<Int, LinalgError> {
        if !self.is_square() {
            return Err(mismatch("IntMatrix::determinant", self.rows, self.cols));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Int::one());
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return Ok(Int::zero());
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * &a[(n - 1, n - 1)])
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c * row[src]
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, c: &Int) {
        if c.is_zero() {
            return;
        }
        let cols = self.cols;
        for j in 0..cols {
            let s = &self.data[src * cols + j];
            if !s.is_zero() {
                let t = s * c;
                self.data[dst * cols + j] += t;
            }
        }
    }

    /// col[dst] += c * col[src]
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, c: &Int) {
        if c.is_zero() {
            return;
        }
        let cols = self.cols;
        for i in 0..self.rows {
            let s = &self.data[i * cols + src];
            if !s.is_zero() {
                let t = s * c;
                self.data[i * cols + dst] += t;
            }
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for v in self.row_mut(i) {
            *v = -std::mem::take(v);
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = &mut self[(i, j)];
            *v = -std::mem::take(v);
        }
    }

    /// Applies the unimodular 2x2 transform `[[a, b], [c, d]]` to rows `(p, q)`:
    /// `row_p, row_q <- a row_p + b row_q, c row_p + d row_q`.
    pub fn combine_rows(&mut self, p: usize, q: usize, a: &Int, b: &Int, c: &Int, d: &Int) {
        for j in 0..self.cols {
            let x = self[(p, j)].clone();
            let y = self[(q, j)].clone();
            if x.is_zero() && y.is_zero() {
                continue;
            }
            self[(p, j)] = a * &x + b * &y;
            self[(q, j)] = c * &x + d * &y;
        }
    }

    /// Column analogue of [`IntMatrix::combine_rows`].
    pub fn combine_cols(&mut self, p: usize, q: usize, a: &Int, b: &Int, c: &Int, d: &Int) {
        for i in 0..self.rows {
            let x = self[(i, p)].clone();
            let y = self[(i, q)].clone();
            if x.is_zero() && y.is_zero() {
                continue;
            }
            self[(i, p)] = a * &x + b * &y;
            self[(i, q)] = c * &x + d * &y;
        }
    }
}

/// Result of [`smith_normal_form`]: `u * m * v == d_mat`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d_mat: IntMatrix,
    pub v: IntMatrix,
    /// Nonzero elementary divisors, each dividing the next.
    pub divisors: Vec<Int>,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }
}

/// Quotient rounded to the nearest integer, so remainders are at most half
/// the divisor in magnitude.
fn nearest_quotient(a: &Int, b: &Int) -> Int {
    let two = int(2);
    let (q, r) = a.div_mod_floor(b);
    // r has the sign of b, and a - (q + 1) b = r - b is the other candidate
    if (&r * &two).abs() > b.abs() {
        q + 1
    } else {
        q
    }
}

struct SnfState {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl SnfState {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.v_inv.swap_rows(i, j);
    }

    /// row[dst] += c row[src]
    fn add_row(&mut self, dst: usize, src: usize, c: &Int) {
        self.a.add_row_multiple(dst, src, c);
        self.u.add_row_multiple(dst, src, c);
        self.u_inv.add_col_multiple(src, dst, &-c);
    }

    /// col[dst] += c col[src]
    fn add_col(&mut self, dst: usize, src: usize, c: &Int) {
        self.a.add_col_multiple(dst, src, c);
        self.v.add_col_multiple(dst, src, c);
        self.v_inv.add_row_multiple(src, dst, &-c);
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }
}

/// Smith normal form with unimodular transforms.
///
/// Pivot rule: the nonzero entry of least absolute value in the remaining
/// block, ties broken in row-major order.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut s = SnfState {
        a: m.clone(),
        u: IntMatrix::identity(rows),
        u_inv: IntMatrix::identity(rows),
        v: IntMatrix::identity(cols),
        v_inv: IntMatrix::identity(cols),
    };
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = min_entry(&s.a, t, t) else {
            break;
        };
        s.swap_rows(t, pi);
        s.swap_cols(t, pj);
        loop {
            clear_cross(&mut s, t);
            // divisibility: fold in any row whose entries the pivot does not divide
            let p = s.a[(t, t)].clone();
            let bad = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !s.a[(i, j)].is_multiple_of(&p))
            });
            match bad {
                Some(i) => s.add_row(t, i, &Int::one()),
                None => break,
            }
        }
        if s.a[(t, t)].is_negative() {
            s.negate_row(t);
        }
        t += 1;
    }
    let divisors = (0..rows.min(cols))
        .map(|i| s.a[(i, i)].clone())
        .take_while(|d| !d.is_zero())
        .collect();
    SmithForm {
        u: s.u,
        d_mat: s.a,
        v: s.v,
        divisors,
        u_inv: s.u_inv,
        v_inv: s.v_inv,
    }
}

fn min_entry(a: &IntMatrix, r0: usize, c0: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in r0..a.rows() {
        for j in c0..a.cols() {
            let v = &a[(i, j)];
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a[(bi, bj)].abs() <= v.abs() => {}
                _ => {
                    best = Some((i, j));
                    if v.abs().is_one() {
                        return best;
                    }
                }
            }
        }
    }
    best
}

/// Clears row `t` and column `t` outside the pivot, re-pivoting on remainders.
fn clear_cross(s: &mut SnfState, t: usize) {
    let (rows, cols) = (s.a.rows(), s.a.cols());
    loop {
        let p = s.a[(t, t)].clone();
        for i in t + 1..rows {
            if !s.a[(i, t)].is_zero() {
                let q = nearest_quotient(&s.a[(i, t)], &p);
                s.add_row(i, t, &-q);
            }
        }
        for j in t + 1..cols {
            if !s.a[(t, j)].is_zero() {
                let q = nearest_quotient(&s.a[(t, j)], &p);
                s.add_col(j, t, &-q);
            }
        }
        // smallest leftover in the cross becomes the new pivot
        let mut best: Option<(usize, usize)> = None;
        let mut best_abs = p.abs();
        for i in t + 1..rows {
            let v = s.a[(i, t)].abs();
            if !v.is_zero() && (best.is_none() || v < best_abs) {
                best = Some((i, t));
                best_abs = v;
            }
        }
        for j in t + 1..cols {
            let v = s.a[(t, j)].abs();
            if !v.is_zero() && (best.is_none() || v < best_abs) {
                best = Some((t, j));
                best_abs = v;
            }
        }
        match best {
            None => return,
            Some((i, j)) => {
                if i != t {
                    s.swap_rows(t, i);
                }
                if j != t {
                    s.swap_cols(t, j);
                }
            }
        }
    }
}

/// Hermite normal form by row operations: returns `(h, u)` with `u * m == h`,
/// `u` unimodular.
///
/// Echelon convention (used everywhere in the crate): `h` is in row echelon
/// form; each nonzero row's leading entry is positive and lies strictly to
/// the right of the one above; entries above a leading entry lie in
/// `[0, leading)`; zero rows come last. Transposing, `hnf(mᵀ)ᵀ = m·uᵀ` is the
/// lower-triangular column-style basis of the column lattice of `m`.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // gcd-combine column c of rows r.. into row r
        for i in r + 1..rows {
            if h[(i, c)].is_zero() {
                continue;
            }
            if h[(r, c)].is_zero() {
                h.swap_rows(r, i);
                u.swap_rows(r, i);
                continue;
            }
            let x = h[(r, c)].clone();
            let y = h[(i, c)].clone();
            let e = x.extended_gcd(&y);
            let (a, b) = (e.x, e.y);
            let (cc, dd) = (-(&y / &e.gcd), &x / &e.gcd);
            h.combine_rows(r, i, &a, &b, &cc, &dd);
            u.combine_rows(r, i, &a, &b, &cc, &dd);
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let p = h[(r, c)].clone();
        for i in 0..r {
            let q = h[(i, c)].div_floor(&p);
            if !q.is_zero() {
                h.add_row_multiple(i, r, &-&q);
                u.add_row_multiple(i, r, &-q);
            }
        }
        r += 1;
    }
    (h, u)
}

/// Some integer `x` with `a x = b`, or `None` when no integer solution exists.
pub fn solve_integer(a: &IntMatrix, b: &[Int]) -> Result<Option<Vec<Int>>, LinalgError> {
    if b.len() != a.rows() {
        return Err(mismatch("solve_integer", a.rows(), b.len()));
    }
    let snf = smith_normal_form(a);
    Ok(solve_with_smith(&snf, b))
}

/// Solves `a x = b` given a precomputed Smith form of `a`.
pub fn solve_with_smith(snf: &SmithForm, b: &[Int]) -> Option<Vec<Int>> {
    let c = snf.u.mul_vec(b);
    let r = snf.rank();
    let mut y = vec![Int::zero(); snf.v.rows()];
    for (i, ci) in c.iter().enumerate() {
        if i < r {
            let (q, rem) = ci.div_mod_floor(&snf.divisors[i]);
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ci.is_zero() {
            return None;
        }
    }
    Some(snf.v.mul_vec(&y))
}

/// Some `x` with `a x - b` in the column lattice of `r`, or `None`.
pub fn solve_mod(a: &IntMatrix, b: &[Int], r: &IntMatrix) -> Result<Option<Vec<Int>>, LinalgError> {
    if b.len() != a.rows() {
        return Err(mismatch("solve_mod", a.rows(), b.len()));
    }
    if r.rows() != a.rows() {
        return Err(mismatch("solve_mod", a.rows(), r.rows()));
    }
    let stacked = a.hstack(r)?;
    Ok(solve_integer(&stacked, b)?.map(|mut x| {
        x.truncate(a.cols());
        x
    }))
}

/// Basis (as columns) of the integer kernel `{x : a x = 0}`.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    let r = snf.rank();
    let idx: Vec<usize> = (r..a.cols()).collect();
    snf.v.select_cols(&idx)
}
