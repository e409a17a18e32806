//! Dense complex matrices and the exact combinatorial kernels: permanents,
//! Hafnians, repeated submatrices, and seeded Haar-random unitaries.
//!
//! The two permanent routines and the Hafnian share no code by design; pairs
//! of them serve as mutual oracles (`Haf([[0, A], [Aᵀ, 0]]) = Perm(A)`).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {n} exceeds the guard limit {limit} for {what}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("matrix is not symmetric within {tol:e} (deviation {dev:e})")]
    NotSymmetric { tol: f64, dev: f64 },
    #[error("matrix is not unitary within {tol:e} (deviation {dev:e})")]
    NotUnitary { tol: f64, dev: f64 },
    #[error("occupation vector length {got} does not match mode count {want}")]
    ModeMismatch { got: usize, want: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type LinalgResult<T> = Result<T, LinalgError>;

pub const PERMANENT_NAIVE_LIMIT: usize = 10;
pub const PERMANENT_FAST_LIMIT: usize = 30;
pub const HAFNIAN_LIMIT: usize = 16;
pub const SYMMETRY_TOL: f64 = 1e-10;
pub const UNITARITY_TOL: f64 = 1e-10;

/// Row-major dense complex matrix. Serializes as
/// `{"rows": r, "cols": c, "entries": [[re, im], …]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> LinalgResult<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Real matrix helper, mostly for tests and examples.
    pub fn from_real_rows(rows: &[&[f64]]) -> LinalgResult<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
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

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conjugate()
    }

    pub fn matmul(&self, other: &Self) -> LinalgResult<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise deviation from the identity of `M†M`.
    pub fn unitarity_residual(&self) -> LinalgResult<f64> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let prod = self.adjoint().matmul(self)?;
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((prod[(i, j)] - C64::new(want, 0.0)).norm());
            }
        }
        Ok(dev)
    }

    pub fn symmetry_residual(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                dev = dev.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        dev
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in 0..=i {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = (self[(i, j)] + self[(j, i)]) * 0.5;
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        if j.entries.len() != j.rows * j.cols {
            return Err(serde::de::Error::custom(format!(
                "matrix entry count {} does not match {}x{}",
                j.entries.len(),
                j.rows,
                j.cols
            )));
        }
        Ok(Self {
            rows: j.rows,
            cols: j.cols,
            entries: j.entries.iter().map(|p| C64::new(p[0], p[1])).collect(),
        })
    }
}

/// A square matrix validated to be unitary within [`UNITARITY_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeUnitary(ComplexMatrix);

impl ModeUnitary {
    pub fn new(m: ComplexMatrix) -> LinalgResult<Self> {
        let dev = m.unitarity_residual()?;
        if dev > UNITARITY_TOL {
            return Err(LinalgError::NotUnitary {
                tol: UNITARITY_TOL,
                dev,
            });
        }
        Ok(Self(m))
    }

    pub fn modes(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// Entrywise complex conjugate (also unitary).
    pub fn conjugate(&self) -> Self {
        Self(self.0.conjugate())
    }
}

impl<'de> Deserialize<'de> for ModeUnitary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        ModeUnitary::new(ComplexMatrix::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Permanent by direct permutation sum (Heap's algorithm); exact reference
/// for sizes up to [`PERMANENT_NAIVE_LIMIT`].
pub fn permanent_naive(a: &ComplexMatrix) -> LinalgResult<C64> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > PERMANENT_NAIVE_LIMIT {
        return Err(LinalgError::TooLarge {
            what: "naive permanent",
            n,
            limit: PERMANENT_NAIVE_LIMIT,
        });
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut total = C64::new(0.0, 0.0);
    let product = |p: &[usize]| -> C64 {
        let mut v = C64::new(1.0, 0.0);
        for (i, &j) in p.iter().enumerate() {
            v *= a[(i, j)];
        }
        v
    };
    total += product(&perm);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            total += product(&perm);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// Permanent by the Gray-coded ±1 vertex sum, `O(2ⁿ n)`; sizes up to
/// [`PERMANENT_FAST_LIMIT`]. Deterministic summation order.
pub fn permanent_fast(a: &ComplexMatrix) -> LinalgResult<C64> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > PERMANENT_FAST_LIMIT {
        return Err(LinalgError::TooLarge {
            what: "fast permanent",
            n,
            limit: PERMANENT_FAST_LIMIT,
        });
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    // column sums at delta = (+1, …, +1)
    let mut sums: Vec<C64> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).sum()).collect();
    let mut total: C64 = sums.iter().product();
    let mut sign = 1.0f64;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << (n - 1)) {
        let next = k ^ (k >> 1);
        let bit = (gray ^ next).trailing_zeros() as usize;
        let row = bit + 1; // delta_0 is pinned to +1
        let step = if (next >> bit) & 1 == 1 { -2.0 } else { 2.0 };
        for j in 0..n {
            sums[j] += a[(row, j)] * step;
        }
        sign = -sign;
        let prod: C64 = sums.iter().product();
        total += prod * sign;
        gray = next;
    }
    Ok(total / 2f64.powi(n as i32 - 1))
}

/// Hafnian by full perfect-matching enumeration, `(n−1)!!` terms; validates
/// symmetry within [`SYMMETRY_TOL`]. Odd dimension gives 0, empty gives 1.
pub fn hafnian_naive(a: &ComplexMatrix) -> LinalgResult<C64> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > HAFNIAN_LIMIT {
        return Err(LinalgError::TooLarge {
            what: "hafnian",
            n,
            limit: HAFNIAN_LIMIT,
        });
    }
    let dev = a.symmetry_residual();
    if dev > SYMMETRY_TOL {
        return Err(LinalgError::NotSymmetric {
            tol: SYMMETRY_TOL,
            dev,
        });
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if n % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    fn recurse(a: &ComplexMatrix, unmatched: &[usize]) -> C64 {
        if unmatched.is_empty() {
            return C64::new(1.0, 0.0);
        }
        let first = unmatched[0];
        let mut total = C64::new(0.0, 0.0);
        for idx in 1..unmatched.len() {
            let partner = unmatched[idx];
            let weight = a[(first, partner)];
            let mut rest: Vec<usize> = unmatched[1..].to_vec();
            rest.remove(idx - 1);
            total += weight * recurse(a, &rest);
        }
        total
    }
    let all: Vec<usize> = (0..n).collect();
    Ok(recurse(a, &all))
}

/// The repeated submatrix `Λ[k|l]`: row `j` of `Λ` repeated `k_j` times and
/// column `i` repeated `l_i` times, both in ascending mode order.
pub fn submatrix_repeat(
    lambda: &ComplexMatrix,
    k: &[usize],
    l: &[usize],
) -> LinalgResult<ComplexMatrix> {
    if k.len() != lambda.rows() {
        return Err(LinalgError::ModeMismatch {
            got: k.len(),
            want: lambda.rows(),
        });
    }
    if l.len() != lambda.cols() {
        return Err(LinalgError::ModeMismatch {
            got: l.len(),
            want: lambda.cols(),
        });
    }
    let row_idx: Vec<usize> = k
        .iter()
        .enumerate()
        .flat_map(|(j, &mult)| std::iter::repeat_n(j, mult))
        .collect();
    let col_idx: Vec<usize> = l
        .iter()
        .enumerate()
        .flat_map(|(i, &mult)| std::iter::repeat_n(i, mult))
        .collect();
    let mut out = ComplexMatrix::zeros(row_idx.len(), col_idx.len());
    for (r, &i) in row_idx.iter().enumerate() {
        for (c, &j) in col_idx.iter().enumerate() {
            out[(r, c)] = lambda[(i, j)];
        }
    }
    Ok(out)
}

/// Haar-distributed `M×M` unitary from a seeded ChaCha stream: i.i.d. complex
/// Gaussian entries, QR decomposition, then the R-diagonal phase correction.
/// Deterministic for a given `(m, seed)`.
pub fn haar_unitary(m: usize, seed: u64) -> ModeUnitary {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let g = DMatrix::<C64>::from_fn(m, m, |_, _| {
        let re: f64 = normal.sample(&mut rng);
        let im: f64 = normal.sample(&mut rng);
        C64::new(re, im) / 2f64.sqrt()
    });
    let qr = g.qr();
    let r = qr.r();
    let q = qr.q();
    let mut lambda = DMatrix::<C64>::zeros(m, m);
    for i in 0..m {
        let rii = r[(i, i)];
        lambda[(i, i)] = if rii.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            rii / rii.norm()
        };
    }
    let u = q * lambda;
    ModeUnitary::new(ComplexMatrix::from_nalgebra(&u))
        .expect("QR with phase correction is unitary to machine precision")
}

// --- tests -------------------------------------------------------------------
