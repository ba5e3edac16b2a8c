//! Lattice kernels behind the group calculus.
//!
//! Everything here works in *canonical coordinates*: a group is
//! `Z^k / (a_0 Z ⊕ … ⊕ a_{k-1} Z)` with `a_i = 0` meaning a free coordinate.
//! Lattices are always taken to contain the relation lattice `aZ^k`, so
//! entries may be reduced modulo `a_i` at will.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::{smith_normal_form, Int, IntMatrix};

pub(crate) fn reduce(x: &Int, m: &Int) -> Int {
    if m.is_zero() {
        x.clone()
    } else {
        x.mod_floor(m)
    }
}

pub(crate) fn reduce_vec(v: &mut [Int], moduli: &[Int]) {
    for (x, m) in v.iter_mut().zip(moduli) {
        if !m.is_zero() && (x.is_negative() || &*x >= m) {
            *x = x.mod_floor(m);
        }
    }
}

/// `(g, s, t)` with `g = s x + t y = gcd(x, y) >= 0`.
pub(crate) fn ext_gcd(x: &Int, y: &Int) -> (Int, Int, Int) {
    let e = x.extended_gcd(y);
    (e.gcd, e.x, e.y)
}

/// `dst += c * src`
pub(crate) fn axpy(dst: &mut [Int], c: &Int, src: &[Int]) {
    if c.is_zero() {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d += c * s;
        }
    }
}

/// Replaces `(u, w)` by `(s u + t w, p u - q w)`.
fn combine(u: &mut [Int], w: &mut [Int], s: &Int, t: &Int, p: &Int, q: &Int) {
    for (x, y) in u.iter_mut().zip(w.iter_mut()) {
        if x.is_zero() && y.is_zero() {
            continue;
        }
        let nx = s * &*x + t * &*y;
        let ny = p * &*x - q * &*y;
        *x = nx;
        *y = ny;
    }
}

/// A sublattice `L ⊇ aZ^k` of `Z^k` in lower-triangular column echelon form.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    moduli: Vec<Int>,
    /// Basis columns; column `j` is zero above row `pivot_rows[j]`.
    basis: Vec<Vec<Int>>,
    pivot_rows: Vec<usize>,
    /// Row index -> basis column with that pivot row.
    pivot_of_row: Vec<Option<usize>>,
}

impl Lattice {
    /// `span(gens) + aZ^k`.
    pub fn new(moduli: &[Int], gens: Vec<Vec<Int>>) -> Self {
        let k = moduli.len();
        let mut work: Vec<Vec<Int>> = gens
            .into_iter()
            .map(|mut g| {
                debug_assert_eq!(g.len(), k);
                reduce_vec(&mut g, moduli);
                g
            })
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .collect();
        let mut basis = Vec::new();
        let mut pivot_rows = Vec::new();
        let mut pivot_of_row = vec![None; k];
        for i in 0..k {
            let a = &moduli[i];
            let mut nz: Vec<usize> = (0..work.len()).filter(|&c| !work[c][i].is_zero()).collect();
            // least entry first keeps the gcd steps short
            nz.sort_by(|&x, &y| work[x][i].abs().cmp(&work[y][i].abs()).then(x.cmp(&y)));
            let mut acc: Option<Vec<Int>> = None;
            for c in nz {
                let col = std::mem::take(&mut work[c]);
                match acc.as_mut() {
                    None => acc = Some(col),
                    Some(u) => {
                        let mut w = col;
                        let x = u[i].clone();
                        let y = w[i].clone();
                        let (g, s, t) = ext_gcd(&x, &y);
                        combine(u, &mut w, &s, &t, &(&y / &g), &(&x / &g));
                        reduce_vec(u, moduli);
                        reduce_vec(&mut w, moduli);
                        debug_assert!(w[i].is_zero() || !a.is_zero());
                        if w.iter().any(|x| !x.is_zero()) {
                            work[c] = w;
                        }
                    }
                }
            }
            let pivot = if a.is_zero() {
                acc.map(|mut u| {
                    if u[i].is_negative() {
                        for x in u.iter_mut() {
                            *x = -std::mem::take(x);
                        }
                    }
                    u
                })
            } else {
                let mut e = vec![Int::zero(); k];
                e[i] = a.clone();
                Some(match acc {
                    None => e,
                    Some(mut u) => {
                        let x = u[i].clone();
                        let (g, s, t) = ext_gcd(&x, a);
                        if g == *a {
                            // u is already a multiple of a at row i: keep it as a generator
                            u[i] = Int::zero();
                            reduce_vec(&mut u, moduli);
                            if u.iter().any(|x| !x.is_zero()) {
                                work.push(u);
                            }
                            e
                        } else {
                            let mut rest: Vec<Int> = u.iter().map(|v| v * (a / &g)).collect();
                            rest[i] = Int::zero();
                            reduce_vec(&mut rest, moduli);
                            let mut p: Vec<Int> = u.iter().map(|v| v * &s).collect();
                            p[i] += &t * a;
                            reduce_vec(&mut p, moduli);
                            if p[i].is_zero() {
                                p[i] = a.clone();
                            }
                            if rest.iter().any(|x| !x.is_zero()) {
                                work.push(rest);
                            }
                            p
                        }
                    }
                })
            };
            work.retain(|c| !c.is_empty());
            if let Some(p) = pivot {
                if !p[i].is_zero() {
                    pivot_of_row[i] = Some(basis.len());
                    pivot_rows.push(i);
                    basis.push(p);
                }
            }
        }
        let mut lat = Lattice {
            moduli: moduli.to_vec(),
            basis,
            pivot_rows,
            pivot_of_row,
        };
        lat.normalize();
        lat
    }

    /// The whole of `Z^k`.
    pub fn full(moduli: &[Int]) -> Self {
        let k = moduli.len();
        let basis: Vec<Vec<Int>> = (0..k)
            .map(|i| {
                let mut e = vec![Int::zero(); k];
                e[i] = Int::one();
                e
            })
            .collect();
        Lattice {
            moduli: moduli.to_vec(),
            basis,
            pivot_rows: (0..k).collect(),
            pivot_of_row: (0..k).map(Some).collect(),
        }
    }

    /// Reduces each pivot row entry of earlier columns into `[0, pivot)`.
    fn normalize(&mut self) {
        for j in 0..self.basis.len() {
            let r = self.pivot_rows[j];
            let h = self.basis[j][r].clone();
            for l in 0..j {
                let q = self.basis[l][r].div_floor(&h);
                if !q.is_zero() {
                    let (head, tail) = self.basis.split_at_mut(j);
                    axpy(&mut head[l], &-q, &tail[0]);
                    // rows below r may be reduced modulo a without leaving the lattice
                    let moduli = &self.moduli;
                    for (x, m) in head[l].iter_mut().zip(moduli).skip(r + 1) {
                        if !m.is_zero() {
                            *x = x.mod_floor(m);
                        }
                    }
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `y` (after reduction modulo `a`) in the basis, or
    /// `None` if `y` is not in the lattice.
    pub fn coords(&self, y: &[Int]) -> Option<Vec<Int>> {
        let mut y = y.to_vec();
        reduce_vec(&mut y, &self.moduli);
        let mut c = vec![Int::zero(); self.basis.len()];
        for r in 0..y.len() {
            if y[r].is_zero() {
                continue;
            }
            let j = self.pivot_of_row[r]?;
            let h = &self.basis[j][r];
            let (q, rem) = y[r].div_mod_floor(h);
            if !rem.is_zero() {
                return None;
            }
            axpy(&mut y, &-&q, &self.basis[j]);
            c[j] = q;
        }
        Some(c)
    }
}

/// Presentation of `L_big / L_small` (with `aZ^k ⊆ L_small ⊆ L_big`) as
/// `Z^m / diag(moduli)` with no trivial factors.
#[derive(Debug, Clone)]
pub(crate) struct Subquotient {
    big: Lattice,
    /// Rows of the Smith transform with nontrivial divisor: basis coords ->
    /// quotient coords.
    to_quot: IntMatrix,
    /// Representatives (in `Z^k`) of the quotient generators.
    lifts: Vec<Vec<Int>>,
    quot_moduli: Vec<Int>,
}

impl Subquotient {
    pub fn new(big: Lattice, small_gens: &[Vec<Int>]) -> Self {
        let k = big.moduli.len();
        let r = big.rank();
        let mut rel_cols: Vec<Vec<Int>> = Vec::new();
        for g in small_gens {
            let c = big
                .coords(g)
                .expect("subquotient: small lattice must lie in the big one");
            if c.iter().any(|x| !x.is_zero()) {
                rel_cols.push(c);
            }
        }
        for i in 0..k {
            let a = &big.moduli[i];
            if a.is_zero() {
                continue;
            }
            let mut e = vec![Int::zero(); k];
            e[i] = a.clone();
            // coordinates of a_i e_i computed exactly, without reducing first
            let c = exact_coords(&big, e).expect("relation lattice lies in every lattice");
            if c.iter().any(|x| !x.is_zero()) {
                rel_cols.push(c);
            }
        }
        let w = IntMatrix::from_columns(r, &rel_cols);
        let snf = smith_normal_form(&w);
        let mut keep = Vec::new();
        let mut quot_moduli = Vec::new();
        for i in 0..r {
            let d = snf.divisors.get(i).cloned().unwrap_or_else(Int::zero);
            if !d.is_one() {
                keep.push(i);
                quot_moduli.push(d);
            }
        }
        let to_quot = snf.u.select_rows(&keep);
        let lifts = keep
            .iter()
            .map(|&i| {
                let mut v = vec![Int::zero(); k];
                for j in 0..r {
                    let c = &snf.u_inv[(j, i)];
                    if !c.is_zero() {
                        axpy(&mut v, c, &big.basis[j]);
                    }
                }
                reduce_vec(&mut v, &big.moduli);
                v
            })
            .collect();
        Subquotient {
            big,
            to_quot,
            lifts,
            quot_moduli,
        }
    }

    pub fn quotient_moduli(&self) -> &[Int] {
        &self.quot_moduli
    }

    pub fn lifts(&self) -> &[Vec<Int>] {
        &self.lifts
    }

    /// Class of `y ∈ L_big` in quotient coordinates (reduced), or `None`
    /// if `y ∉ L_big`.
    pub fn class_of(&self, y: &[Int]) -> Option<Vec<Int>> {
        let c = self.big.coords(y)?;
        let mut q = self.to_quot.mul_vec(&c);
        reduce_vec(&mut q, &self.quot_moduli);
        Some(q)
    }
}

/// Basis coordinates of `y` without reducing modulo `a` first.
fn exact_coords(lat: &Lattice, mut y: Vec<Int>) -> Option<Vec<Int>> {
    let mut c = vec![Int::zero(); lat.basis.len()];
    for r in 0..y.len() {
        if y[r].is_zero() {
            continue;
        }
        let j = lat.pivot_of_row[r]?;
        let h = &lat.basis[j][r];
        let (q, rem) = y[r].div_mod_floor(h);
        if !rem.is_zero() {
            return None;
        }
        axpy(&mut y, &-&q, &lat.basis[j]);
        c[j] = q;
    }
    Some(c)
}

/// Sparse row-major matrix used for canonical morphism matrices.
#[derive(Debug, Clone)]
pub(crate) struct SparseRows {
    pub cols: usize,
    pub rows: Vec<Vec<(usize, Int)>>,
}

impl SparseRows {
    pub fn from_dense(m: &IntMatrix) -> Self {
        SparseRows {
            cols: m.cols(),
            rows: (0..m.rows())
                .map(|i| {
                    m.row(i)
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(j, v)| (j, v.clone()))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn row_dot(&self, i: usize, x: &[Int]) -> Int {
        let mut acc = Int::zero();
        for (j, v) in &self.rows[i] {
            let xj = &x[*j];
            if !xj.is_zero() {
                acc += v * xj;
            }
        }
        acc
    }

    pub fn mul_vec(&self, x: &[Int]) -> Vec<Int> {
        (0..self.rows.len()).map(|i| self.row_dot(i, x)).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .find(|(c, _)| *c == j)
                    .map_or_else(Int::zero, |(_, v)| v.clone())
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct SolvePivot {
    row: usize,
    /// gcd of the pivot value with the row modulus
    g: Int,
    /// multiplier with `s * value ≡ g` modulo the row modulus
    s: Int,
    a_part: Vec<Int>,
    b_part: Vec<Int>,
}

/// Simultaneous kernel / image / preimage data for a map
/// `Z^{k_s}/aZ → Z^{k_t}/bZ` given by a canonical matrix.
#[derive(Debug, Clone)]
pub(crate) struct MapSolver {
    src_moduli: Vec<Int>,
    tgt_moduli: Vec<Int>,
    matrix: SparseRows,
    pivots: Vec<SolvePivot>,
    pivot_of_row: Vec<Option<usize>>,
    kernel_gens: Vec<Vec<Int>>,
}

impl MapSolver {
    pub fn new(matrix: SparseRows, src_moduli: &[Int], tgt_moduli: &[Int]) -> Self {
        let ks = src_moduli.len();
        let kt = tgt_moduli.len();
        debug_assert_eq!(matrix.cols, ks);
        debug_assert_eq!(matrix.rows.len(), kt);
        let mut work: Vec<Vec<Int>> = (0..ks)
            .filter(|&j| !src_moduli[j].is_one())
            .map(|j| {
                let mut e = vec![Int::zero(); ks];
                e[j] = Int::one();
                e
            })
            .collect();
        let mut pivots = Vec::new();
        let mut pivot_of_row = vec![None; kt];
        for i in 0..kt {
            if work.is_empty() {
                break;
            }
            let b = &tgt_moduli[i];
            if matrix.rows[i].is_empty() {
                continue;
            }
            let mut vals: Vec<(usize, Int)> = Vec::new();
            for (c, col) in work.iter().enumerate() {
                let v = reduce(&matrix.row_dot(i, col), b);
                if !v.is_zero() {
                    vals.push((c, v));
                }
            }
            if vals.is_empty() {
                continue;
            }
            vals.sort_by(|x, y| x.1.abs().cmp(&y.1.abs()).then(x.0.cmp(&y.0)));
            let (acc_idx, mut x) = vals[0].clone();
            let mut acc = std::mem::take(&mut work[acc_idx]);
            for (c, y) in vals.into_iter().skip(1) {
                let mut w = std::mem::take(&mut work[c]);
                let (g, s, t) = ext_gcd(&x, &y);
                combine(&mut acc, &mut w, &s, &t, &(&y / &g), &(&x / &g));
                reduce_vec(&mut acc, src_moduli);
                reduce_vec(&mut w, src_moduli);
                x = g;
                work[c] = w;
            }
            // acc carries value x at row i; everything else is now zero there
            let value = reduce(&x, b);
            let (g, s, _) = if b.is_zero() {
                (value.clone(), Int::one(), Int::zero())
            } else {
                ext_gcd(&value, b)
            };
            if !b.is_zero() {
                let mut rest: Vec<Int> = acc.iter().map(|v| v * (b / &g)).collect();
                reduce_vec(&mut rest, src_moduli);
                if rest.iter().any(|x| !x.is_zero()) {
                    work.push(rest);
                }
            }
            let mut b_part = matrix.mul_vec(&acc);
            reduce_vec(&mut b_part, tgt_moduli);
            pivot_of_row[i] = Some(pivots.len());
            pivots.push(SolvePivot {
                row: i,
                g,
                s,
                a_part: acc,
                b_part,
            });
            work.retain(|c| c.iter().any(|x| !x.is_zero()));
        }
        work.retain(|c| c.iter().any(|x| !x.is_zero()));
        MapSolver {
            src_moduli: src_moduli.to_vec(),
            tgt_moduli: tgt_moduli.to_vec(),
            matrix,
            pivots,
            pivot_of_row,
            kernel_gens: work,
        }
    }

    pub fn kernel_gens(&self) -> &[Vec<Int>] {
        &self.kernel_gens
    }

    /// Some canonical source vector mapping to `y` (canonical target
    /// coordinates), or `None`.
    pub fn preimage(&self, y: &[Int]) -> Option<Vec<Int>> {
        let mut y = y.to_vec();
        reduce_vec(&mut y, &self.tgt_moduli);
        let mut x = vec![Int::zero(); self.src_moduli.len()];
        for r in 0..y.len() {
            if y[r].is_zero() {
                continue;
            }
            let p = &self.pivots[self.pivot_of_row[r]?];
            debug_assert_eq!(p.row, r);
            let (q, rem) = y[r].div_mod_floor(&p.g);
            if !rem.is_zero() {
                return None;
            }
            let c = &q * &p.s;
            axpy(&mut y, &-&c, &p.b_part);
            reduce_vec(&mut y, &self.tgt_moduli);
            debug_assert!(y[r].is_zero());
            axpy(&mut x, &c, &p.a_part);
        }
        reduce_vec(&mut x, &self.src_moduli);
        Some(x)
    }

    /// Image columns (canonical target coordinates) of the source generators.
    pub fn image_gens(&self) -> Vec<Vec<Int>> {
        (0..self.matrix.cols)
            .map(|j| {
                let mut c = self.matrix.column(j);
                reduce_vec(&mut c, &self.tgt_moduli);
                c
            })
            .collect()
    }
}
