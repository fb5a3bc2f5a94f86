//! Small nonzero kernel vectors by Cramer's rule, without division.

use crate::descent::norm::NormedDomain;
use crate::error::{Error, Result};
use crate::linalg::combinations;

/// Laplace expansion along the first row; fine for the small sizes used here.
pub fn determinant<R: NormedDomain>(ring: &R, m: &[Vec<R::Elem>]) -> R::Elem {
    let n = m.len();
    match n {
        0 => ring.one(),
        1 => m[0][0].clone(),
        2 => ring.sub(&ring.mul(&m[0][0], &m[1][1]), &ring.mul(&m[0][1], &m[1][0])),
        _ => {
            let mut acc = ring.zero();
            for j in 0..n {
                if ring.is_zero(&m[0][j]) {
                    continue;
                }
                let minor: Vec<Vec<R::Elem>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = ring.mul(&m[0][j], &determinant(ring, &minor));
                acc = if j % 2 == 0 { ring.add(&acc, &term) } else { ring.sub(&acc, &term) };
            }
            acc
        }
    }
}

fn submatrix<E: Clone>(m: &[Vec<E>], rows: &[usize], cols: &[usize]) -> Vec<Vec<E>> {
    rows.iter()
        .map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect())
        .collect()
}

/// Rank over the fraction field with the first (lexicographic in rows, then
/// columns) nonzero maximal minor.
pub fn rank_by_minors<R: NormedDomain>(ring: &R, m: &[Vec<R::Elem>], ncols: usize) -> (usize, Vec<usize>, Vec<usize>) {
    for k in (1..=m.len().min(ncols)).rev() {
        for rows in combinations(m.len(), k) {
            for cols in combinations(ncols, k) {
                if !ring.is_zero(&determinant(ring, &submatrix(m, &rows, &cols))) {
                    return (k, rows, cols);
                }
            }
        }
    }
    (0, Vec::new(), Vec::new())
}

/// A nonzero `a` in `A^n` with `M a = 0`, for `M` with `n` columns and rank
/// below `n` over the fraction field.
///
/// Keeps the rows of a nonzero maximal minor, appends standard basis rows
/// for the remaining columns to get an invertible `M'`, and returns the
/// cofactors of the last row of `M'`: the solution of
/// `M' a = (0, .., 0, det M')`. The zero matrix gets `e_1`.
pub fn small_kernel_vector<R: NormedDomain>(ring: &R, m: &[Vec<R::Elem>], ncols: usize) -> Result<Vec<R::Elem>> {
    if m.iter().any(|row| row.len() != ncols) {
        return Err(Error::DimensionMismatch(format!("rows must have {ncols} entries")));
    }
    if ncols == 0 {
        return Err(Error::FullRank);
    }
    let (k, rows, cols) = rank_by_minors(ring, m, ncols);
    if k == ncols {
        return Err(Error::FullRank);
    }
    if k == 0 {
        let mut a = vec![ring.zero(); ncols];
        a[0] = ring.one();
        return Ok(a);
    }
    let mut mp: Vec<Vec<R::Elem>> = rows.iter().map(|&r| m[r].clone()).collect();
    for c in (0..ncols).filter(|c| !cols.contains(c)) {
        let mut e = vec![ring.zero(); ncols];
        e[c] = ring.one();
        mp.push(e);
    }
    let last = ncols - 1;
    let top = &mp[..last];
    Ok((0..ncols)
        .map(|i| {
            let keep: Vec<usize> = (0..ncols).filter(|&c| c != i).collect();
            let minor = submatrix(top, &(0..last).collect::<Vec<_>>(), &keep);
            let det = determinant(ring, &minor);
            if (last + i).is_multiple_of(2) {
                det
            } else {
                ring.neg(&det)
            }
        })
        .collect())
}

/// `M a` over the ring.
pub fn apply<R: NormedDomain>(ring: &R, m: &[Vec<R::Elem>], a: &[R::Elem]) -> Vec<R::Elem> {
    m.iter()
        .map(|row| row.iter().zip(a).fold(ring.zero(), |acc, (x, y)| ring.add(&acc, &ring.mul(x, y))))
        .collect()
}

/// Largest norm of an entry.
pub fn max_norm<R: NormedDomain>(ring: &R, m: &[Vec<R::Elem>]) -> u128 {
    m.iter().flatten().map(|x| ring.phi(x)).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::norm::{BasisRing, PolyBasisRing};
    use crate::ring::Integers;
    use num_bigint::BigInt;

    fn int(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn examples() {
        let a = small_kernel_vector(&Integers, &int(&[&[2, 4]]), 2).unwrap();
        assert_eq!(a, vec![BigInt::from(-4), BigInt::from(2)]);
        let a = small_kernel_vector(&Integers, &int(&[&[0, 0, 0], &[0, 0, 0]]), 3).unwrap();
        assert_eq!(a, vec![BigInt::from(1), BigInt::from(0), BigInt::from(0)]);
        assert_eq!(small_kernel_vector(&Integers, &int(&[&[1, 0], &[0, 1]]), 2), Err(Error::FullRank));
    }

    #[test]
    fn rank_deficient_square() {
        let m = int(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let a = small_kernel_vector(&Integers, &m, 3).unwrap();
        assert!(apply(&Integers, &m, &a).iter().all(|x| *x == BigInt::from(0)));
        assert!(a.iter().any(|x| *x != BigInt::from(0)));
    }

    #[test]
    fn other_rings() {
        let g = BasisRing::gaussian_integers();
        let e = |a: i64, b: i64| vec![BigInt::from(a), BigInt::from(b)];
        let m = vec![vec![e(1, 1), e(2, 0), e(0, 3)]];
        let a = small_kernel_vector(&g, &m, 3).unwrap();
        assert!(apply(&g, &m, &a).iter().all(|x| g.is_zero(x)));
        assert!(a.iter().any(|x| !g.is_zero(x)));

        let f = PolyBasisRing::polynomials(3).unwrap();
        let m = vec![vec![vec![vec![1, 1]], vec![vec![0, 2]]]];
        let a = small_kernel_vector(&f, &m, 2).unwrap();
        assert!(apply(&f, &m, &a).iter().all(|x| f.is_zero(x)));
    }
}
