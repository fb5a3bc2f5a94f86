//! Multilinear and homogeneous forms, linear substitutions, collections, and
//! the generators used by tests and corpora.

pub mod homogeneous;
pub mod multilinear;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_cap, sat_pow, Error, Result};
use crate::field::{FiniteField, Fq};
use crate::linalg::{identity, mat_mul, Matrix};
use crate::ring::{CoeffRing, Integers};

pub use homogeneous::{monomials, multi_factorial, HomogeneousForm};
pub use multilinear::{MultiIndex, MultilinearForm, MAX_FORM_ENTRIES};

/// Linear maps `T_i(y) = A_i y` from `k^t` into the slots of a form; `A_i`
/// has `s_i` rows and `t` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMapTuple<R: CoeffRing> {
    t: usize,
    maps: Vec<Matrix<R::Elem>>,
}

impl<R: CoeffRing> LinearMapTuple<R> {
    pub fn new(t: usize, maps: Vec<Matrix<R::Elem>>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidInput("need at least one map".into()));
        }
        if let Some(m) = maps.iter().find(|m| m.cols() != t) {
            return Err(Error::DimensionMismatch(format!(
                "map has {} columns, expected t = {t}",
                m.cols()
            )));
        }
        Ok(LinearMapTuple { t, maps })
    }

    pub fn identity(ring: &R, dims: &[usize]) -> Result<Self> {
        let s = dims[0];
        if dims.iter().any(|&d| d != s) {
            return Err(Error::DimensionMismatch("identity maps need equal dims".into()));
        }
        Self::new(s, dims.iter().map(|_| identity(ring, s)).collect())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn maps(&self) -> &[Matrix<R::Elem>] {
        &self.maps
    }

    /// `(T_i o T'_i)_i`, i.e. `A_i A'_i`.
    pub fn then(&self, ring: &R, inner: &Self) -> Result<Self> {
        if self.maps.len() != inner.maps.len() {
            return Err(Error::DimensionMismatch("map tuples of different arity".into()));
        }
        let maps = self
            .maps
            .iter()
            .zip(&inner.maps)
            .map(|(a, b)| mat_mul(ring, a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(inner.t, maps)
    }

    pub fn random<G: rand::Rng + ?Sized>(ring: &R, dims: &[usize], t: usize, rng: &mut G) -> Self {
        let maps = dims
            .iter()
            .map(|&s| {
                let data = (0..s * t).map(|_| ring.random_elem(rng)).collect();
                Matrix::from_vec(s, t, data).expect("sized")
            })
            .collect();
        LinearMapTuple { t, maps }
    }
}

/// Multilinear forms sharing ring, arity and slot dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct FormCollection<R: CoeffRing> {
    members: Vec<MultilinearForm<R>>,
}

impl<R: CoeffRing> FormCollection<R> {
    pub fn new(members: Vec<MultilinearForm<R>>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidInput("empty collection".into()))?;
        for m in &members[1..] {
            if m.dims() != first.dims() || m.ring() != first.ring() {
                return Err(Error::DimensionMismatch(format!(
                    "collection members with dims {:?} and {:?}",
                    first.dims(),
                    m.dims()
                )));
            }
        }
        Ok(FormCollection { members })
    }

    pub fn members(&self) -> &[MultilinearForm<R>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ring(&self) -> &R {
        self.members[0].ring()
    }

    pub fn dims(&self) -> &[usize] {
        self.members[0].dims()
    }

    pub fn arity(&self) -> usize {
        self.members[0].arity()
    }

    pub fn combination(&self, a: &[R::Elem]) -> Result<MultilinearForm<R>> {
        MultilinearForm::combination(&self.members, a)
    }

    pub fn compose(&self, maps: &LinearMapTuple<R>) -> Result<Self> {
        Self::new(
            self.members
                .iter()
                .map(|m| m.compose(maps))
                .collect::<Result<_>>()?,
        )
    }

    pub fn push(&mut self, form: MultilinearForm<R>) -> Result<()> {
        let mut all = std::mem::take(&mut self.members);
        all.push(form);
        *self = Self::new(all)?;
        Ok(())
    }
}

/// One representative per point of `P^{n-1}(F_q)`: first nonzero coordinate
/// equal to 1. Ordered by the position of that coordinate (earliest first),
/// then lexicographically in the remaining coordinates.
pub fn projective_points(field: &FiniteField, n: usize, cap: u128) -> Result<Vec<Vec<Fq>>> {
    let q = field.order() as u128;
    check_cap("projective points", sat_pow(q, n), cap)?;
    let mut out = Vec::new();
    for lead in 0..n {
        let free = n - lead - 1;
        for idx in MultiIndex::new(&vec![q as usize; free]) {
            let mut v = vec![Fq(0); n];
            v[lead] = field.one();
            for (j, &x) in idx.iter().enumerate() {
                v[lead + 1 + j] = Fq(x as u32);
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// The diagonal forms `D_j = sum_{k in block j} prod_i x_i(k)` for
/// `j = 1..n`, on slot dimension `n * rbar` with blocks of size `rbar`.
pub fn diagonal_collection<R: CoeffRing>(ring: &R, n: usize, rbar: usize, d: usize) -> Result<FormCollection<R>> {
    if n == 0 || rbar == 0 || d == 0 {
        return Err(Error::InvalidInput("diagonal collection needs n, rbar, d >= 1".into()));
    }
    let s = n * rbar;
    let members = (0..n)
        .map(|j| {
            MultilinearForm::from_fn(ring.clone(), vec![s; d], |idx| {
                let k = idx[0];
                if idx.iter().all(|&x| x == k) && k / rbar == j {
                    ring.one()
                } else {
                    ring.zero()
                }
            })
        })
        .collect::<Result<_>>()?;
    FormCollection::new(members)
}

/// `sum_{k < r} prod_i x_i(k)` on slot dimensions `dims` (each >= r).
pub fn diagonal_form<R: CoeffRing>(ring: &R, dims: &[usize], r: usize) -> Result<MultilinearForm<R>> {
    if dims.iter().any(|&s| s < r) {
        return Err(Error::DimensionMismatch(format!("rank {r} diagonal in dims {dims:?}")));
    }
    MultilinearForm::from_fn(ring.clone(), dims.to_vec(), |idx| {
        if idx[0] < r && idx.iter().all(|&x| x == idx[0]) {
            ring.one()
        } else {
            ring.zero()
        }
    })
}

fn residue(c: &BigInt, p: u32) -> Fq {
    Fq(c.mod_floor(&BigInt::from(p)).to_u32().expect("residue fits"))
}

/// Entrywise reduction of an integer form modulo the prime `p`.
pub fn reduce_mod_p(form: &MultilinearForm<Integers>, p: u32) -> Result<MultilinearForm<FiniteField>> {
    let field = FiniteField::prime(p)?;
    Ok(form.map_ring(field, |c| residue(c, p)))
}

pub fn reduce_homogeneous_mod_p(form: &HomogeneousForm<Integers>, p: u32) -> Result<HomogeneousForm<FiniteField>> {
    let field = FiniteField::prime(p)?;
    Ok(form.map_ring(field, |c| residue(c, p)))
}

/// Deterministic random multilinear form; coefficients drawn with
/// [`CoeffRing::random_elem`] from a ChaCha stream seeded by `seed`.
pub fn random_form<R: CoeffRing>(ring: &R, d: usize, dims: &[usize], seed: u64) -> Result<MultilinearForm<R>> {
    if dims.len() != d {
        return Err(Error::DimensionMismatch(format!("{} dims for arity {d}", dims.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MultilinearForm::from_fn(ring.clone(), dims.to_vec(), |_| ring.random_elem(&mut rng))
}

/// Deterministic random homogeneous form: every monomial of degree `d` in
/// `s` variables gets a random coefficient, in lexicographic order.
pub fn random_homogeneous<R: CoeffRing>(ring: &R, d: usize, s: usize, seed: u64) -> Result<HomogeneousForm<R>> {
    if s == 0 {
        return Err(Error::InvalidInput("random form needs at least one variable".into()));
    }
    let mons = monomials(s, d);
    check_cap("monomials", mons.len() as u128, MAX_FORM_ENTRIES as u128)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = mons
        .into_iter()
        .map(|e| {
            let c = ring.random_elem(&mut rng);
            (e, c)
        })
        .collect();
    HomogeneousForm::new(ring.clone(), d, s, terms)
}
