//! Dense matrices over the prime field GF(p) with exact rank.

use std::fmt;

use crate::arith::Prime;
use crate::error::{Error, Result};
use crate::jordan::JordanType;

#[inline]
fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    let s = a as u64 + b as u64;
    (if s >= p as u64 { s - p as u64 } else { s }) as u32
}

/// Multiplicative inverse of a nonzero residue.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    // Fermat: a^(p-2)
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p as u64 - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Reduces a signed integer into `[0, p)`.
pub fn residue(x: i64, p: Prime) -> u32 {
    x.rem_euclid(p.get() as i64) as u32
}

/// `dst += f * src` on residue slices.
#[inline]
fn axpy(dst: &mut [u32], f: u32, src: &[u32], p: u32) {
    if f == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d = ((*d as u64 + f as u64 * s as u64) % p as u64) as u32;
        }
    }
}

/// Row-reduces `rows` in place to echelon form and returns the nonzero
/// rows (pivots normalized to 1, pivot columns strictly increasing).
fn echelonize(mut rows: Vec<Vec<u32>>, ncols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut rank = 0;
    for c in 0..ncols {
        if rank == rows.len() {
            break;
        }
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = inv_mod(rows[rank][c], p);
        if inv != 1 {
            for x in rows[rank][c..].iter_mut() {
                *x = mul_mod(*x, inv, p);
            }
        }
        let (top, bottom) = rows.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in bottom.iter_mut() {
            let f = row[c];
            if f != 0 {
                axpy(&mut row[c..], p - f, &pivot_row[c..], p);
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// A dense `rows x cols` matrix over GF(p), entries in `[0, p)`, stored
/// row-major. Matrices act on column vectors: entry `(i, j)` is the
/// coefficient of basis vector `i` in the image of basis vector `j`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GFpMatrix {
    p: Prime,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl fmt::Debug for GFpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "GFpMatrix over GF({}) {}x{}",
            self.p, self.rows, self.cols
        )?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl GFpMatrix {
    pub fn zeros(p: Prime, rows: usize, cols: usize) -> Self {
        GFpMatrix {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(p: Prime, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing every entry mod `p`.
    pub fn from_rows(p: Prime, rows: &[Vec<i64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let entries = rows.iter().flatten().map(|&x| residue(x, p)).collect();
        Ok(GFpMatrix {
            p,
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    pub fn from_fn(p: Prime, rows: usize, cols: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let mut m = Self::zeros(p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.entries[i * cols + j] = residue(f(i, j), p);
            }
        }
        m
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: i64) {
        self.entries[i * self.cols + j] = residue(x, self.p);
    }

    /// Adds `x` to entry `(i, j)`.
    pub fn add_to(&mut self, i: usize, j: usize, x: i64) {
        let p = self.p.get();
        let idx = i * self.cols + j;
        self.entries[idx] = add_mod(self.entries[idx], residue(x, self.p), p);
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        let p = self.p.get();
        let mut out = self.clone();
        for x in out.entries.iter_mut() {
            if *x != 0 {
                *x = p - *x;
            }
        }
        out
    }

    fn check_same_field(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::FieldMismatch(self.p.get(), other.p.get()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p.get();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| add_mod(a, b, p))
            .collect();
        Ok(GFpMatrix { entries, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Exact product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p.get();
        let mut out = Self::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0 {
                    axpy(dst, a, other.row(k), p);
                }
            }
        }
        Ok(out)
    }

    /// `self^k` for a square matrix.
    pub fn pow(&self, k: u32) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.p, self.rows);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Matrix-vector product on a column vector of residues.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols, "vector length");
        let p = self.p.get() as u64;
        (0..self.rows)
            .map(|i| {
                let s = self
                    .row(i)
                    .iter()
                    .zip(v)
                    .filter(|(&a, &b)| a != 0 && b != 0)
                    .fold(0u64, |s, (&a, &b)| (s + a as u64 * b as u64) % p);
                s as u32
            })
            .collect()
    }

    /// Row vector times matrix.
    fn left_apply(&self, x: &[u32]) -> Vec<u32> {
        let p = self.p.get();
        let mut out = vec![0u32; self.cols];
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0 {
                axpy(&mut out, xk, self.row(k), p);
            }
        }
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        let mut out = Self::zeros(self.p, self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i * out.cols + j] = self.get(i, j);
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.entries[(self.rows + i) * out.cols + self.cols + j] = other.get(i, j);
            }
        }
        Ok(out)
    }

    /// Kronecker product; with basis index `i * other.rows + k`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        let p = self.p.get();
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Self::zeros(self.p, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if b != 0 {
                            out.entries[(i * other.rows + k) * c + j * other.cols + l] =
                                mul_mod(a, b, p);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exact rank by Gaussian elimination over GF(p).
    pub fn rank(&self) -> usize {
        echelonize(self.row_vecs(), self.cols, self.p.get()).len()
    }

    fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|i| self.row(i).to_vec())
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect()
    }

    /// Whether the row vector `v` lies in the row space. Equivalently, the
    /// functional `v` vanishes on the kernel of `self`.
    pub fn row_space_contains(&self, v: &[u32]) -> bool {
        assert_eq!(v.len(), self.cols, "vector length");
        let mut rows = self.row_vecs();
        let base = echelonize(rows.clone(), self.cols, self.p.get()).len();
        rows.push(v.to_vec());
        echelonize(rows, self.cols, self.p.get()).len() == base
    }

    /// Basis of the (right) null space.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let p = self.p.get();
        let mut ech = echelonize(self.row_vecs(), self.cols, p);
        // reduced form: clear above pivots
        let pivots: Vec<usize> = ech
            .iter()
            .map(|r| r.iter().position(|&x| x != 0).unwrap())
            .collect();
        for k in (0..ech.len()).rev() {
            let (top, rest) = ech.split_at_mut(k);
            let pr = &rest[0];
            let c = pivots[k];
            for row in top.iter_mut() {
                let f = row[c];
                if f != 0 {
                    axpy(&mut row[c..], p - f, &pr[c..], p);
                }
            }
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (row, &c) in ech.iter().zip(&pivots) {
                let x = row[free];
                if x != 0 {
                    v[c] = p - x;
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let p = self.p.get();
        let rows: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| u32::from(i == j)));
                r
            })
            .collect();
        let mut ech = echelonize(rows, 2 * n, p);
        if ech.len() < n || ech[n - 1][..n].iter().all(|&x| x == 0) {
            return Err(Error::Singular);
        }
        // pivots are on the diagonal of the left block; clear above them
        for k in (0..n).rev() {
            let (top, rest) = ech.split_at_mut(k);
            let pr = &rest[0];
            for row in top.iter_mut() {
                let f = row[k];
                if f != 0 {
                    axpy(&mut row[k..], p - f, &pr[k..], p);
                }
            }
        }
        let mut out = Self::zeros(self.p, n, n);
        for (i, row) in ech.iter().enumerate() {
            out.entries[i * n..(i + 1) * n].copy_from_slice(&row[n..]);
        }
        Ok(out)
    }

    /// Ranks of `self^0, self^1, ...` up to and including the first zero.
    ///
    /// Each step pushes an echelon basis of the row space of `self^m`
    /// through `self`, so powers are never formed. A rank that stops
    /// decreasing before reaching zero means the matrix is not nilpotent.
    pub fn nilpotent_rank_sequence(&self) -> Result<Vec<usize>> {
        if !self.is_square() {
            return Err(Error::Shape("rank sequence of a non-square matrix".into()));
        }
        let n = self.rows;
        let p = self.p.get();
        let mut ranks = vec![n];
        let mut basis = echelonize(self.row_vecs(), n, p);
        loop {
            let r = basis.len();
            if r == *ranks.last().unwrap() && r > 0 {
                return Err(Error::NotNilpotent);
            }
            ranks.push(r);
            if r == 0 {
                return Ok(ranks);
            }
            let next: Vec<Vec<u32>> = basis
                .iter()
                .map(|x| self.left_apply(x))
                .filter(|r| r.iter().any(|&x| x != 0))
                .collect();
            basis = echelonize(next, n, p);
        }
    }

    /// Dump format: a header line `p rows cols`, then one line per row of
    /// space-separated residues.
    pub fn to_dump(&self) -> String {
        let mut s = format!("{} {} {}\n", self.p, self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Shape(format!("bad matrix dump: {why}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<u64> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("header is not numeric")))
            .collect::<Result<_>>()?;
        let [p, rows, cols] = header[..] else {
            return Err(bad("header must be `p rows cols`"));
        };
        let p = Prime::new(u32::try_from(p).map_err(|_| bad("p too large"))?)?;
        let mut m = Self::zeros(p, rows as usize, cols as usize);
        let mut count = 0;
        for (i, line) in lines.enumerate() {
            if i >= m.rows {
                return Err(bad("too many rows"));
            }
            let vals: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("entry is not numeric")))
                .collect::<Result<_>>()?;
            if vals.len() != m.cols || vals.iter().any(|&x| x >= p.get()) {
                return Err(bad("row has wrong length or unreduced entry"));
            }
            m.entries[i * m.cols..(i + 1) * m.cols].copy_from_slice(&vals);
            count += 1;
        }
        if count != m.rows {
            return Err(bad("too few rows"));
        }
        Ok(m)
    }
}

/// Free-function form of [`GFpMatrix::mul`].
pub fn mat_mul(a: &GFpMatrix, b: &GFpMatrix) -> Result<GFpMatrix> {
    a.mul(b)
}

pub fn rank(a: &GFpMatrix) -> usize {
    a.rank()
}

/// Jordan type of a nilpotent matrix from the rank identity
/// `r_m = rank(a^{m-1}) - 2 rank(a^m) + rank(a^{m+1})`.
pub fn jordan_type_of_nilpotent(a: &GFpMatrix) -> Result<JordanType> {
    let ranks = a.nilpotent_rank_sequence()?;
    let at = |m: usize| ranks.get(m).copied().unwrap_or(0) as isize;
    let mut jt = JordanType::empty();
    for m in 1..ranks.len() {
        let r = at(m - 1) - 2 * at(m) + at(m + 1);
        debug_assert!(r >= 0, "negative block count");
        jt.add_blocks(m, r as usize);
    }
    Ok(jt)
}

/// Jordan type of a unipotent matrix, via `u - 1`.
pub fn jordan_type_of_unipotent(u: &GFpMatrix) -> Result<JordanType> {
    let id = GFpMatrix::identity(u.p(), u.rows());
    jordan_type_of_nilpotent(&u.sub(&id)?)
}
