use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::forms::multilinear::{checked_volume, MultiIndex, MultilinearForm};
use crate::ring::CoeffRing;

/// A homogeneous polynomial of degree `d` in `s` variables, stored as a map
/// from exponent vectors (lexicographic order) to nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct HomogeneousForm<R: CoeffRing> {
    ring: R,
    degree: usize,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, R::Elem>,
}

impl<R: CoeffRing> fmt::Debug for HomogeneousForm<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogeneousForm[{} d={} s={}]{{", self.ring, self.degree, self.nvars)?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:?}*x^{e:?}")?;
        }
        write!(f, "}}")
    }
}

/// `alpha!` as an integer, the product of factorials of the exponents.
pub fn multi_factorial(exp: &[u32]) -> u128 {
    exp.iter()
        .map(|&e| (1..=e as u128).product::<u128>())
        .product()
}

/// All exponent vectors of total degree `d` in `s` variables, lexicographic.
pub fn monomials(s: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    if s == 0 {
        return out;
    }
    rec(0, d as u32, &mut vec![0; s], &mut out);
    out
}

impl<R: CoeffRing> HomogeneousForm<R> {
    /// Builds a form, summing repeated exponents and dropping zero coefficients.
    pub fn new(ring: R, degree: usize, nvars: usize, terms: Vec<(Vec<u32>, R::Elem)>) -> Result<Self> {
        if nvars == 0 {
            return Err(Error::InvalidInput("a form needs at least one variable".into()));
        }
        let mut map: BTreeMap<Vec<u32>, R::Elem> = BTreeMap::new();
        for (exp, c) in terms {
            if exp.len() != nvars {
                return Err(Error::DimensionMismatch(format!(
                    "exponent {exp:?} has {} entries, expected {nvars}",
                    exp.len()
                )));
            }
            let total: u64 = exp.iter().map(|&e| e as u64).sum();
            if total != degree as u64 {
                return Err(Error::InvalidInput(format!(
                    "exponent {exp:?} has degree {total}, expected {degree}"
                )));
            }
            let e = map.entry(exp).or_insert_with(|| ring.zero());
            *e = ring.add(e, &c);
        }
        map.retain(|_, c| !ring.is_zero(c));
        Ok(HomogeneousForm {
            ring,
            degree,
            nvars,
            terms: map,
        })
    }

    pub fn zero(ring: R, degree: usize, nvars: usize) -> Result<Self> {
        Self::new(ring, degree, nvars, Vec::new())
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(ring: R, degree: usize, nvars: usize, terms: &[(i64, Vec<u32>)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|(c, e)| (e.clone(), ring.from_int(*c)))
            .collect();
        Self::new(ring, degree, nvars, terms)
    }

    /// The linear form `sum c_i x_i`.
    pub fn linear(ring: R, coeffs: &[R::Elem]) -> Result<Self> {
        let s = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut e = vec![0; s];
                e[i] = 1;
                (e, c.clone())
            })
            .collect();
        Self::new(ring, 1, s, terms)
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, R::Elem> {
        &self.terms
    }

    pub fn coeff(&self, exp: &[u32]) -> R::Elem {
        self.terms.get(exp).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, x: &[R::Elem]) -> Result<R::Elem> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "form in {} variables evaluated at a point of length {}",
                self.nvars,
                x.len()
            )));
        }
        let r = &self.ring;
        Ok(self.terms.iter().fold(r.zero(), |acc, (exp, c)| {
            let mono = exp
                .iter()
                .zip(x)
                .fold(c.clone(), |m, (&e, xi)| r.mul(&m, &r.pow(xi, e as usize)));
            r.add(&acc, &mono)
        }))
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars || self.ring != other.ring {
            return Err(Error::DimensionMismatch(format!(
                "forms in {} and {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        if self.degree != other.degree {
            return Err(Error::DimensionMismatch(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        let terms = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self::new(self.ring.clone(), self.degree, self.nvars, terms)
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, a)| (e.clone(), self.ring.mul(a, c)))
            .collect();
        Self::new(self.ring.clone(), self.degree, self.nvars, terms).expect("same shape")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                terms.push((e, self.ring.mul(ca, cb)));
            }
        }
        Self::new(self.ring.clone(), self.degree + other.degree, self.nvars, terms)
    }

    /// `dQ/dx_i`, a form of degree `d - 1`. Requires `d >= 1`.
    pub fn partial(&self, i: usize) -> Result<Self> {
        if self.degree == 0 || i >= self.nvars {
            return Err(Error::InvalidInput(format!(
                "cannot differentiate a degree {} form in x_{i}",
                self.degree
            )));
        }
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[i] > 0)
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, self.ring.mul(c, &self.ring.from_int(e[i] as i64)))
            })
            .collect();
        Self::new(self.ring.clone(), self.degree - 1, self.nvars, terms)
    }

    pub fn gradient(&self) -> Result<Vec<Self>> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// The symmetric multilinear form `D_{x_1} ... D_{x_d} Q` with
    /// `d! Q(x) = Q~(x, ..., x)`. Its coefficient at `(k_1, ..., k_d)` is
    /// `c_alpha * alpha!` where `alpha` counts the indices.
    pub fn polarize(&self) -> Result<MultilinearForm<R>> {
        let d = self.degree;
        let ch = self.ring.characteristic();
        if ch != 0 && ch <= d as u64 {
            return Err(Error::SmallCharacteristic {
                characteristic: ch,
                degree: d,
            });
        }
        if d == 0 {
            return Err(Error::InvalidInput("polarization needs degree >= 1".into()));
        }
        let s = self.nvars;
        let dims = vec![s; d];
        checked_volume(&dims)?;
        let mut exp = vec![0u32; s];
        MultilinearForm::from_fn(self.ring.clone(), dims, |idx| {
            exp.iter_mut().for_each(|e| *e = 0);
            for &k in idx {
                exp[k] += 1;
            }
            match self.terms.get(&exp) {
                Some(c) => {
                    let f = exp
                        .iter()
                        .fold(self.ring.one(), |acc, &e| self.ring.mul(&acc, &self.ring.factorial(e as usize)));
                    self.ring.mul(c, &f)
                }
                None => self.ring.zero(),
            }
        })
    }

    /// Substitutes `x = A y` for an `s x t` matrix given by rows.
    pub fn substitute(&self, a: &[Vec<R::Elem>]) -> Result<Self> {
        if a.len() != self.nvars {
            return Err(Error::DimensionMismatch("substitution matrix rows".into()));
        }
        let t = a.first().map_or(0, |r| r.len());
        let images: Vec<Self> = a
            .iter()
            .map(|row| Self::linear(self.ring.clone(), row))
            .collect::<Result<_>>()?;
        let one = Self::new(self.ring.clone(), 0, t, vec![(vec![0; t], self.ring.one())])?;
        let mut acc = Self::zero(self.ring.clone(), self.degree, t)?;
        for (exp, c) in &self.terms {
            let mut m = one.scale(c);
            for (i, &e) in exp.iter().enumerate() {
                for _ in 0..e {
                    m = m.mul(&images[i])?;
                }
            }
            acc = acc.add(&m)?;
        }
        Ok(acc)
    }

    pub fn map_ring<S, F>(&self, target: S, f: F) -> HomogeneousForm<S>
    where
        S: CoeffRing,
        F: Fn(&R::Elem) -> S::Elem,
    {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect();
        HomogeneousForm::new(target, self.degree, self.nvars, terms).expect("same shape")
    }

    /// Evaluates on every point of `F_q^s` in packed order.
    pub fn all_values(&self) -> Result<Vec<R::Elem>>
    where
        R: CoeffRing<Elem = crate::field::Fq>,
    {
        let field = self
            .ring
            .as_finite()
            .ok_or_else(|| Error::InfiniteRing(self.ring.to_string()))?;
        let q = field.order() as usize;
        let dims = vec![q; self.nvars];
        MultiIndex::new(&dims)
            .map(|idx| {
                let x: Vec<_> = idx.iter().map(|&v| crate::field::Fq(v as u32)).collect();
                self.evaluate(&x)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::ring::{Integers, Rationals};
    use num_bigint::BigInt;

    #[test]
    fn polarize_examples() {
        let z = Integers;
        let q = HomogeneousForm::from_int_terms(z.clone(), 2, 2, &[(1, vec![1, 1])]).unwrap();
        let p = q.polarize().unwrap();
        let expect =
            MultilinearForm::from_terms(z.clone(), vec![2, 2], &[(1, vec![0, 1]), (1, vec![1, 0])]).unwrap();
        assert_eq!(p, expect);

        let cube = HomogeneousForm::from_int_terms(z.clone(), 3, 1, &[(1, vec![3])]).unwrap();
        let p = cube.polarize().unwrap();
        assert_eq!(p.coeff(&[0, 0, 0]), &BigInt::from(6));

        let q = HomogeneousForm::from_int_terms(z.clone(), 3, 2, &[(1, vec![2, 1])]).unwrap();
        let p = q.polarize().unwrap();
        let expect = MultilinearForm::from_terms(
            z,
            vec![2, 2, 2],
            &[(2, vec![0, 0, 1]), (2, vec![0, 1, 0]), (2, vec![1, 0, 0])],
        )
        .unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn polarize_rejects_small_characteristic() {
        let f3 = FiniteField::prime(3).unwrap();
        let q = HomogeneousForm::from_int_terms(f3, 3, 1, &[(1, vec![3])]).unwrap();
        assert!(matches!(q.polarize(), Err(Error::SmallCharacteristic { .. })));
    }

    #[test]
    fn monomial_enumeration() {
        let m = monomials(2, 2);
        assert_eq!(m, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(monomials(3, 3).len(), 10);
    }

    #[test]
    fn derivative_and_product() {
        let q = Rationals;
        let a = HomogeneousForm::from_int_terms(q.clone(), 1, 2, &[(1, vec![1, 0])]).unwrap();
        let b = HomogeneousForm::from_int_terms(q.clone(), 1, 2, &[(1, vec![0, 1])]).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.partial(0).unwrap(), b);
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.partial(0).unwrap(), a.scale(&q.from_int(2)));
        assert!(HomogeneousForm::from_int_terms(q, 2, 2, &[(1, vec![1, 0])]).is_err());
    }

    #[test]
    fn substitution() {
        let z = Integers;
        // (y1 + y2)^2 from x^2 with x = y1 + y2
        let q = HomogeneousForm::from_int_terms(z.clone(), 2, 1, &[(1, vec![2])]).unwrap();
        let a = vec![vec![z.from_int(1), z.from_int(1)]];
        let r = q.substitute(&a).unwrap();
        let expect = HomogeneousForm::from_int_terms(
            z,
            2,
            2,
            &[(1, vec![2, 0]), (2, vec![1, 1]), (1, vec![0, 2])],
        )
        .unwrap();
        assert_eq!(r, expect);
    }
}
