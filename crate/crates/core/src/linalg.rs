//! Dense matrices and Gaussian elimination over any [`CoeffRing`] that is a
//! field, plus enumeration of subspaces and affine solution sets over finite
//! fields.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{FiniteField, Fq};
use crate::ring::CoeffRing;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<E>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &E {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: E) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<E> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn map<F, G>(&self, f: G) -> Matrix<F>
    where
        G: FnMut(&E) -> F,
    {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

pub fn identity<R: CoeffRing>(ring: &R, n: usize) -> Matrix<R::Elem> {
    let mut m = Matrix::filled(n, n, ring.zero());
    for i in 0..n {
        m.set(i, i, ring.one());
    }
    m
}

pub fn zeros<R: CoeffRing>(ring: &R, rows: usize, cols: usize) -> Matrix<R::Elem> {
    Matrix::filled(rows, cols, ring.zero())
}

pub fn mat_mul<R: CoeffRing>(
    ring: &R,
    a: &Matrix<R::Elem>,
    b: &Matrix<R::Elem>,
) -> Result<Matrix<R::Elem>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = zeros(ring, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if ring.is_zero(aik) {
                continue;
            }
            for j in 0..b.cols {
                let v = ring.add(out.get(i, j), &ring.mul(aik, b.get(k, j)));
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

pub fn mat_vec<R: CoeffRing>(ring: &R, a: &Matrix<R::Elem>, x: &[R::Elem]) -> Vec<R::Elem> {
    (0..a.rows)
        .map(|r| {
            a.row(r)
                .iter()
                .zip(x)
                .fold(ring.zero(), |acc, (m, v)| ring.add(&acc, &ring.mul(m, v)))
        })
        .collect()
}

fn require_field<R: CoeffRing>(ring: &R) -> Result<()> {
    if ring.is_field() {
        Ok(())
    } else {
        Err(Error::NotAField(ring.to_string()))
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<R: CoeffRing>(ring: &R, rows: &mut [Vec<R::Elem>]) -> Result<Vec<usize>> {
    require_field(ring)?;
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| !ring.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = ring.inv(&rows[r][c]).ok_or(Error::ZeroDivision)?;
        for v in rows[r].iter_mut() {
            *v = ring.mul(v, &inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || ring.is_zero(&row[c]) {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = ring.sub(v, &ring.mul(&f, pv));
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok(pivots)
}

pub fn rank<R: CoeffRing>(ring: &R, m: &Matrix<R::Elem>) -> Result<usize> {
    let mut rows = m.row_vecs();
    Ok(rref(ring, &mut rows)?.len())
}

/// `A = C * B` with `C` of shape `m x r`, `B` of shape `r x n`, `r = rank A`.
pub fn rank_factorization<R: CoeffRing>(
    ring: &R,
    a: &Matrix<R::Elem>,
) -> Result<(Matrix<R::Elem>, Matrix<R::Elem>)> {
    let mut rows = a.row_vecs();
    let pivots = rref(ring, &mut rows)?;
    let r = pivots.len();
    let b = Matrix::from_rows(rows.into_iter().take(r).collect(), a.cols)?;
    // With B in RREF, column `pivots[k]` of A is column k of C.
    let mut c = zeros(ring, a.rows, r);
    for (k, &pc) in pivots.iter().enumerate() {
        for i in 0..a.rows {
            c.set(i, k, a.get(i, pc).clone());
        }
    }
    Ok((c, b))
}

/// Solution set of `A x = b` as `(particular, kernel basis)`, or `None` when
/// inconsistent.
#[allow(clippy::type_complexity)]
pub fn solve_affine<R: CoeffRing>(
    ring: &R,
    a: &Matrix<R::Elem>,
    b: &[R::Elem],
) -> Result<Option<(Vec<R::Elem>, Vec<Vec<R::Elem>>)>> {
    let n = a.cols;
    let mut rows: Vec<Vec<R::Elem>> = (0..a.rows)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();
    let pivots = rref(ring, &mut rows)?;
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = vec![ring.zero(); n];
    for (k, &pc) in pivots.iter().enumerate() {
        x[pc] = rows[k][n].clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![ring.zero(); n];
            v[f] = ring.one();
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = ring.neg(&rows[k][f]);
            }
            v
        })
        .collect();
    Ok(Some((x, kernel)))
}

pub fn kernel_basis<R: CoeffRing>(ring: &R, a: &Matrix<R::Elem>) -> Result<Vec<Vec<R::Elem>>> {
    let zero = vec![ring.zero(); a.rows];
    Ok(solve_affine(ring, a, &zero)?.map(|(_, k)| k).unwrap_or_default())
}

/// Inverse of a square matrix over a field, `None` if singular.
pub fn inverse<R: CoeffRing>(ring: &R, a: &Matrix<R::Elem>) -> Result<Option<Matrix<R::Elem>>> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
    }
    let n = a.rows;
    let mut rows: Vec<Vec<R::Elem>> = (0..n)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.extend((0..n).map(|j| if i == j { ring.one() } else { ring.zero() }));
            r
        })
        .collect();
    let pivots = rref(ring, &mut rows)?;
    if pivots.len() < n || pivots[n - 1] >= n {
        return Ok(None);
    }
    let inv: Vec<Vec<R::Elem>> = rows.into_iter().map(|r| r[n..].to_vec()).collect();
    Ok(Some(Matrix::from_rows(inv, n)?))
}

/// Extends linearly independent `rows` (each of length `n`) to a basis of
/// `k^n` by appending standard basis vectors.
pub fn complete_basis<R: CoeffRing>(ring: &R, rows: &[Vec<R::Elem>], n: usize) -> Result<Vec<Vec<R::Elem>>> {
    let mut basis = rows.to_vec();
    for i in 0..n {
        let mut e = vec![ring.zero(); n];
        e[i] = ring.one();
        let mut trial = basis.clone();
        trial.push(e.clone());
        let mut work = trial.clone();
        if rref(ring, &mut work)?.len() == trial.len() {
            basis.push(e);
        }
        if basis.len() == n {
            break;
        }
    }
    Ok(basis)
}

/// Every subspace of `F_q^n` of dimension `dim`, each given by its reduced
/// row echelon basis (`dim` rows of length `n`), in a deterministic order.
pub fn subspaces(field: &FiniteField, n: usize, dim: usize) -> Vec<Vec<Vec<Fq>>> {
    let mut out = Vec::new();
    if dim > n {
        return out;
    }
    let q = field.order();
    for pivots in combinations(n, dim) {
        // Free positions: row r, column c > pivots[r], c not a pivot.
        let free: Vec<(usize, usize)> = (0..dim)
            .flat_map(|r| {
                let pivots = &pivots;
                ((pivots[r] + 1)..n)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let total = (q as u64).pow(free.len() as u32);
        for mut idx in 0..total {
            let mut rows = vec![vec![Fq(0); n]; dim];
            for (r, &pc) in pivots.iter().enumerate() {
                rows[r][pc] = Fq(1);
            }
            for &(r, c) in &free {
                rows[r][c] = Fq((idx % q as u64) as u32);
                idx /= q as u64;
            }
            out.push(rows);
        }
    }
    out
}

/// Number of `dim`-dimensional subspaces of `F_q^n` (Gaussian binomial).
pub fn subspace_count(q: u64, n: usize, dim: usize) -> u128 {
    if dim > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..dim {
        num = num.saturating_mul((q as u128).pow((n - i) as u32) - 1);
        den = den.saturating_mul((q as u128).pow((i + 1) as u32) - 1);
    }
    num / den
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every point of `x0 + span(basis)` over a finite field, in packed order of
/// the coefficient tuple.
pub fn affine_points(field: &FiniteField, x0: &[Fq], basis: &[Vec<Fq>]) -> Vec<Vec<Fq>> {
    let q = field.order() as u64;
    let total = q.pow(basis.len() as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = x0.to_vec();
            for b in basis {
                let c = Fq((idx % q) as u32);
                idx /= q;
                if c.0 != 0 {
                    for (xi, bi) in x.iter_mut().zip(b) {
                        *xi = field.add(*xi, field.mul(c, *bi));
                    }
                }
            }
            x
        })
        .collect()
}

/// The `idx`-th point of `F_q^len` in lexicographic order (first
/// coordinate most significant).
pub fn point_from_index(q: u32, len: usize, mut idx: u64) -> Vec<Fq> {
    let mut v = vec![Fq(0); len];
    for slot in v.iter_mut().rev() {
        *slot = Fq((idx % q as u64) as u32);
        idx /= q as u64;
    }
    v
}

pub fn matrix_to_json<R: CoeffRing>(ring: &R, m: &Matrix<R::Elem>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array(m.row(r).iter().map(|e| ring.elem_to_json(e)).collect()))
            .collect(),
    )
}

pub fn matrix_from_json<R: CoeffRing>(ring: &R, v: &Value) -> Result<Matrix<R::Elem>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let parsed = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                .iter()
                .map(|e| ring.elem_from_json(e))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cols = parsed.first().map_or(0, |r| r.len());
    Matrix::from_rows(parsed, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Rationals;

    #[test]
    fn rank_over_rationals() {
        let q = Rationals;
        let m = Matrix::from_rows(
            vec![vec![q.from_int(1), q.from_int(2)], vec![q.from_int(2), q.from_int(4)]],
            2,
        )
        .unwrap();
        assert_eq!(rank(&q, &m).unwrap(), 1);
        let (c, b) = rank_factorization(&q, &m).unwrap();
        assert_eq!(mat_mul(&q, &c, &b).unwrap(), m);
    }

    #[test]
    fn rank_requires_field() {
        let z = crate::ring::Integers;
        let m = Matrix::from_rows(vec![vec![z.from_int(2)]], 1).unwrap();
        assert!(matches!(rank(&z, &m), Err(Error::NotAField(_))));
    }

    #[test]
    fn subspace_counts_match_gaussian_binomials() {
        for p in [2u32, 3, 5] {
            let f = FiniteField::prime(p).unwrap();
            for n in 0..=3 {
                for k in 0..=n {
                    assert_eq!(subspaces(&f, n, k).len() as u128, subspace_count(p as u64, n, k));
                }
            }
        }
        let f2 = FiniteField::prime(2).unwrap();
        assert_eq!(subspaces(&f2, 3, 1).len(), 7);
    }

    #[test]
    fn affine_solutions() {
        let f3 = FiniteField::prime(3).unwrap();
        // x + y = 1 over F_3: three solutions
        let a = Matrix::from_rows(vec![vec![Fq(1), Fq(1)]], 2).unwrap();
        let (x0, ker) = solve_affine(&f3, &a, &[Fq(1)]).unwrap().unwrap();
        let pts = affine_points(&f3, &x0, &ker);
        assert_eq!(pts.len(), 3);
        for p in pts {
            assert_eq!(f3.add(p[0], p[1]), Fq(1));
        }
        // 0 = 1 is inconsistent
        let z = Matrix::from_rows(vec![vec![Fq(0), Fq(0)]], 2).unwrap();
        assert!(solve_affine(&f3, &z, &[Fq(1)]).unwrap().is_none());
    }

    #[test]
    fn inverse_and_basis_completion() {
        let f5 = FiniteField::prime(5).unwrap();
        let a = Matrix::from_rows(vec![vec![Fq(1), Fq(2)], vec![Fq(3), Fq(4)]], 2).unwrap();
        let inv = inverse(&f5, &a).unwrap().unwrap();
        assert_eq!(mat_mul(&f5, &a, &inv).unwrap(), identity(&f5, 2));
        let singular = Matrix::from_rows(vec![vec![Fq(1), Fq(2)], vec![Fq(2), Fq(4)]], 2).unwrap();
        assert!(inverse(&f5, &singular).unwrap().is_none());
        let basis = complete_basis(&f5, &[vec![Fq(0), Fq(1), Fq(1)]], 3).unwrap();
        assert_eq!(basis.len(), 3);
        let m = Matrix::from_rows(basis, 3).unwrap();
        assert_eq!(rank(&f5, &m).unwrap(), 3);
    }
}
