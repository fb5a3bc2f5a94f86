//! Pseudo-normed rings: the integers, `Z^m` with a multiplication table, and
//! `F_p[t]^m` with a multiplication table.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{check_cap, sat_pow, Error, Result};
use crate::field::is_prime;
use crate::forms::MultiIndex;
use crate::ring::Integers;

/// A commutative ring with a function `phi: A -> Z>=0` that is subadditive
/// and submultiplicative up to [`NormedDomain::mult_constant`].
pub trait NormedDomain: Debug + Sync {
    type Elem: Clone + Debug + PartialEq + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn phi(&self, a: &Self::Elem) -> u128;

    /// `c` with `phi(xy) <= c phi(x) phi(y)`, fixed when the ring is built.
    fn mult_constant(&self) -> f64;

    /// `|B_R|` without enumerating.
    fn ball_size(&self, r: u128) -> u128;

    /// `B_R` in a fixed order.
    fn ball(&self, r: u128, cap: u128) -> Result<Vec<Self::Elem>>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    /// Bound on `phi` of an `(n-1) x (n-1)` minor whose rows have entries of
    /// norm at most `t` or are standard basis rows. Leibniz expansion gives
    /// `(n-1)! c^{n-2} t^{n-1}`.
    fn minor_bound(&self, n: usize, t: u128) -> f64 {
        let k = n.saturating_sub(1);
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        fact * self.mult_constant().powi(k.saturating_sub(1) as i32) * (t.max(1) as f64).powi(k as i32)
    }
}

impl NormedDomain for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::from(1)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn phi(&self, a: &BigInt) -> u128 {
        a.abs().to_u128().unwrap_or(u128::MAX)
    }
    fn mult_constant(&self) -> f64 {
        1.0
    }
    fn ball_size(&self, r: u128) -> u128 {
        r.saturating_mul(2).saturating_add(1)
    }
    fn ball(&self, r: u128, cap: u128) -> Result<Vec<BigInt>> {
        check_cap("ball", self.ball_size(r), cap)?;
        let r = r as i128;
        Ok((-r..=r).map(BigInt::from).collect())
    }
    /// Hadamard: `n^{n/2} t^{n-1}`.
    fn minor_bound(&self, n: usize, t: u128) -> f64 {
        (n as f64).powf(n as f64 / 2.0) * (t.max(1) as f64).powi(n.saturating_sub(1) as i32)
    }
}

/// `Z^m` with the max-norm and `e_i e_j = sum_k table[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisRing {
    table: Vec<Vec<Vec<i64>>>,
    one: Vec<BigInt>,
    constant: i64,
}

fn check_table<T>(table: &[Vec<Vec<T>>]) -> Result<usize> {
    let m = table.len();
    if m == 0 || table.iter().any(|row| row.len() != m || row.iter().any(|v| v.len() != m)) {
        return Err(Error::DimensionMismatch("multiplication table must be m x m x m".into()));
    }
    Ok(m)
}

impl BasisRing {
    /// `one` gives the coordinates of the identity element.
    pub fn new(table: Vec<Vec<Vec<i64>>>, one: Vec<i64>) -> Result<Self> {
        let m = check_table(&table)?;
        if one.len() != m {
            return Err(Error::DimensionMismatch("identity has the wrong length".into()));
        }
        let constant = (0..m)
            .map(|k| table.iter().flatten().map(|v| v[k].abs()).sum::<i64>())
            .max()
            .unwrap_or(0)
            .max(1);
        let ring = BasisRing {
            table,
            one: one.into_iter().map(BigInt::from).collect(),
            constant,
        };
        for i in 0..m {
            let mut e = vec![BigInt::zero(); m];
            e[i] = BigInt::from(1);
            if ring.mul(&ring.one, &e) != e || ring.mul(&e, &ring.one) != e {
                return Err(Error::InvalidInput("identity does not act as one".into()));
            }
        }
        Ok(ring)
    }

    /// `Z[i]` on the basis `(1, i)`.
    pub fn gaussian_integers() -> Self {
        Self::new(
            vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![-1, 0]]],
            vec![1, 0],
        )
        .expect("valid table")
    }

    pub fn rank(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<Vec<i64>>] {
        &self.table
    }
}

impl NormedDomain for BasisRing {
    type Elem = Vec<BigInt>;

    fn zero(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.rank()]
    }
    fn one(&self) -> Vec<BigInt> {
        self.one.clone()
    }
    fn add(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn neg(&self, a: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().map(|x| -x).collect()
    }
    fn mul(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        let m = self.rank();
        let mut out = vec![BigInt::zero(); m];
        for i in 0..m {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..m {
                if b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.table[i][j][k];
                    if c != 0 {
                        *o += &ab * c;
                    }
                }
            }
        }
        out
    }
    fn phi(&self, a: &Vec<BigInt>) -> u128 {
        a.iter().map(|x| x.abs().to_u128().unwrap_or(u128::MAX)).max().unwrap_or(0)
    }
    fn mult_constant(&self) -> f64 {
        self.constant as f64
    }
    fn ball_size(&self, r: u128) -> u128 {
        sat_pow(r.saturating_mul(2).saturating_add(1), self.rank())
    }
    fn ball(&self, r: u128, cap: u128) -> Result<Vec<Vec<BigInt>>> {
        check_cap("ball", self.ball_size(r), cap)?;
        let side = 2 * r as usize + 1;
        Ok(MultiIndex::new(&vec![side; self.rank()])
            .map(|idx| idx.iter().map(|&k| BigInt::from(k as i128 - r as i128)).collect())
            .collect())
    }
}

/// `F_p[t]^m` with `phi = max_i p^{deg f_i}` (and `phi(0) = 0`) and
/// multiplication table entries in `F_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyBasisRing {
    p: u32,
    table: Vec<Vec<Vec<u32>>>,
    one: Vec<Vec<u32>>,
}

/// Polynomial over `F_p`, coefficients low to high, no trailing zeros.
pub type Poly = Vec<u32>;

fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_add(p: u32, a: &[u32], b: &[u32]) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

fn poly_mul(p: u32, a: &[u32], b: &[u32]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

impl PolyBasisRing {
    pub fn new(p: u32, table: Vec<Vec<Vec<u32>>>, one: Vec<Poly>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let m = check_table(&table)?;
        if one.len() != m {
            return Err(Error::DimensionMismatch("identity has the wrong length".into()));
        }
        let table = table
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.into_iter().map(|c| c % p).collect()).collect())
            .collect();
        let ring = PolyBasisRing {
            p,
            table,
            one: one.into_iter().map(|f| trim(f.into_iter().map(|c| c % p).collect())).collect(),
        };
        for i in 0..m {
            let mut e = vec![Vec::new(); m];
            e[i] = vec![1];
            if ring.mul(&ring.one, &e) != e {
                return Err(Error::InvalidInput("identity does not act as one".into()));
            }
        }
        Ok(ring)
    }

    /// `F_p[t]` itself.
    pub fn polynomials(p: u32) -> Result<Self> {
        Self::new(p, vec![vec![vec![1]]], vec![vec![1]])
    }

    pub fn rank(&self) -> usize {
        self.table.len()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Largest degree allowed in `B_R`, or `None` when `B_R = {0}`.
    fn max_degree(&self, r: u128) -> Option<u32> {
        if r == 0 {
            return None;
        }
        let mut deg = 0;
        let mut pw = self.p as u128;
        while pw <= r {
            deg += 1;
            pw = pw.saturating_mul(self.p as u128);
        }
        Some(deg)
    }
}

impl NormedDomain for PolyBasisRing {
    type Elem = Vec<Poly>;

    fn zero(&self) -> Vec<Poly> {
        vec![Vec::new(); self.rank()]
    }
    fn one(&self) -> Vec<Poly> {
        self.one.clone()
    }
    fn add(&self, a: &Vec<Poly>, b: &Vec<Poly>) -> Vec<Poly> {
        a.iter().zip(b).map(|(x, y)| poly_add(self.p, x, y)).collect()
    }
    fn neg(&self, a: &Vec<Poly>) -> Vec<Poly> {
        a.iter()
            .map(|f| trim(f.iter().map(|&c| (self.p - c) % self.p).collect()))
            .collect()
    }
    fn mul(&self, a: &Vec<Poly>, b: &Vec<Poly>) -> Vec<Poly> {
        let m = self.rank();
        let mut out = self.zero();
        for i in 0..m {
            for j in 0..m {
                let ab = poly_mul(self.p, &a[i], &b[j]);
                if ab.is_empty() {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.table[i][j][k];
                    if c != 0 {
                        *o = poly_add(self.p, o, &poly_mul(self.p, &ab, &[c]));
                    }
                }
            }
        }
        out
    }
    fn phi(&self, a: &Vec<Poly>) -> u128 {
        a.iter()
            .filter(|f| !f.is_empty())
            .map(|f| sat_pow(self.p as u128, f.len() - 1))
            .max()
            .unwrap_or(0)
    }
    fn mult_constant(&self) -> f64 {
        1.0
    }
    fn ball_size(&self, r: u128) -> u128 {
        match self.max_degree(r) {
            None => 1,
            Some(deg) => sat_pow(self.p as u128, (deg as usize + 1) * self.rank()),
        }
    }
    fn ball(&self, r: u128, cap: u128) -> Result<Vec<Vec<Poly>>> {
        check_cap("ball", self.ball_size(r), cap)?;
        let Some(deg) = self.max_degree(r) else {
            return Ok(vec![self.zero()]);
        };
        let per = (self.p as usize).pow(deg + 1);
        let unpack = |mut k: usize| {
            let mut f = Vec::with_capacity(deg as usize + 1);
            for _ in 0..=deg {
                f.push((k % self.p as usize) as u32);
                k /= self.p as usize;
            }
            trim(f)
        };
        Ok(MultiIndex::new(&vec![per; self.rank()])
            .map(|idx| idx.iter().map(|&k| unpack(k)).collect())
            .collect())
    }
}

/// JSON ring model: `{"kind": "integers"}`, `{"kind": "integral-basis",
/// "m": 2, "table": [...], "one": [1, 0]}` or `{"kind": "polynomial-basis",
/// "p": 2, "m": 1, "table": [...], "one": [[1]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RingModelDescriptor {
    Integers,
    IntegralBasis {
        m: usize,
        table: Vec<Vec<Vec<i64>>>,
        #[serde(default)]
        one: Option<Vec<i64>>,
    },
    PolynomialBasis {
        p: u32,
        m: usize,
        table: Vec<Vec<Vec<u32>>>,
        #[serde(default)]
        one: Option<Vec<Poly>>,
    },
}

#[derive(Clone, Debug)]
pub enum RingModel {
    Integers(Integers),
    Basis(BasisRing),
    Poly(PolyBasisRing),
}

impl RingModel {
    pub fn from_descriptor(desc: &RingModelDescriptor) -> Result<Self> {
        match desc {
            RingModelDescriptor::Integers => Ok(RingModel::Integers(Integers)),
            RingModelDescriptor::IntegralBasis { m, table, one } => {
                if table.len() != *m {
                    return Err(Error::DimensionMismatch(format!("table for m = {m}")));
                }
                let one = one.clone().unwrap_or_else(|| {
                    let mut e = vec![0; *m];
                    e[0] = 1;
                    e
                });
                Ok(RingModel::Basis(BasisRing::new(table.clone(), one)?))
            }
            RingModelDescriptor::PolynomialBasis { p, m, table, one } => {
                if table.len() != *m {
                    return Err(Error::DimensionMismatch(format!("table for m = {m}")));
                }
                let one = one.clone().unwrap_or_else(|| {
                    let mut e = vec![Vec::new(); *m];
                    e[0] = vec![1];
                    e
                });
                Ok(RingModel::Poly(PolyBasisRing::new(*p, table.clone(), one)?))
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        Self::from_descriptor(&serde_json::from_value(v.clone())?)
    }

    pub fn name(&self) -> String {
        match self {
            RingModel::Integers(_) => "Z".into(),
            RingModel::Basis(b) => format!("Z^{}", b.rank()),
            RingModel::Poly(r) => format!("F_{}[t]^{}", r.p(), r.rank()),
        }
    }
}

/// Sampled pseudo-norm axioms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub pairs: usize,
    pub subadditive: bool,
    /// Largest observed `phi(xy) / (phi(x) phi(y))` over nonzero pairs.
    pub max_ratio: f64,
    pub constant: f64,
    pub submultiplicative: bool,
}

/// Checks both axioms on `pairs` random pairs from `B_radius`.
pub fn check_pseudo_norm<R: NormedDomain>(ring: &R, radius: u128, pairs: usize, seed: u64) -> Result<AxiomCheck> {
    let ball = ring.ball(radius, 1 << 20)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subadditive = true;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..pairs {
        let x = &ball[rng.gen_range(0..ball.len())];
        let y = &ball[rng.gen_range(0..ball.len())];
        let (px, py) = (ring.phi(x), ring.phi(y));
        if ring.phi(&ring.add(x, y)) > px.saturating_add(py) {
            subadditive = false;
        }
        if px > 0 && py > 0 {
            max_ratio = max_ratio.max(ring.phi(&ring.mul(x, y)) as f64 / (px as f64 * py as f64));
        }
    }
    let constant = ring.mult_constant();
    Ok(AxiomCheck {
        pairs,
        subadditive,
        max_ratio,
        constant,
        submultiplicative: max_ratio <= constant,
    })
}

/// `|B_{C R}| / |B_R|` along `ladder`.
pub fn linear_growth_ratios<R: NormedDomain>(ring: &R, c: u128, ladder: &[u128]) -> Vec<(u128, f64)> {
    ladder
        .iter()
        .map(|&r| (r, ring.ball_size(c.saturating_mul(r)) as f64 / ring.ball_size(r) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balls() {
        let z = Integers.ball(2, 100).unwrap();
        assert_eq!(z, (-2..=2).map(BigInt::from).collect::<Vec<_>>());
        let f2t = PolyBasisRing::polynomials(2).unwrap();
        let b = f2t.ball(2, 100).unwrap();
        assert_eq!(b, vec![vec![vec![]], vec![vec![1]], vec![vec![0, 1]], vec![vec![1, 1]]]);
        assert_eq!(f2t.ball(0, 100).unwrap().len(), 1);
        assert_eq!(f2t.ball(1, 100).unwrap().len(), 2);
        let z2 = BasisRing::new(
            vec![vec![vec![1, 0], vec![0, 0]], vec![vec![0, 0], vec![0, 1]]],
            vec![1, 1],
        )
        .unwrap();
        assert_eq!(z2.ball(1, 100).unwrap().len(), 9);
        assert!(Integers.ball(100, 10).is_err());
    }

    #[test]
    fn gaussian_arithmetic() {
        let g = BasisRing::gaussian_integers();
        let i = vec![BigInt::from(0), BigInt::from(1)];
        assert_eq!(g.mul(&i, &i), vec![BigInt::from(-1), BigInt::from(0)]);
        assert_eq!(g.mult_constant(), 2.0);
    }

    #[test]
    fn axioms_hold_on_samples() {
        let g = BasisRing::gaussian_integers();
        for check in [
            check_pseudo_norm(&Integers, 50, 1000, 1).unwrap(),
            check_pseudo_norm(&g, 20, 1000, 2).unwrap(),
            check_pseudo_norm(&PolyBasisRing::polynomials(3).unwrap(), 81, 1000, 3).unwrap(),
        ] {
            assert!(check.subadditive && check.submultiplicative, "{check:?}");
        }
    }

    #[test]
    fn growth_is_linear() {
        for (_, ratio) in linear_growth_ratios(&Integers, 2, &[1, 10, 100, 1000]) {
            assert!(ratio <= 3.0);
        }
        let f2t = PolyBasisRing::polynomials(2).unwrap();
        for (_, ratio) in linear_growth_ratios(&f2t, 2, &[1, 2, 4, 8, 16]) {
            assert!(ratio <= 2.0);
        }
    }

    #[test]
    fn descriptors() {
        let v: Value = serde_json::from_str(
            r#"{"kind": "integral-basis", "m": 2, "table": [[[1,0],[0,1]],[[0,1],[-1,0]]]}"#,
        )
        .unwrap();
        assert!(matches!(RingModel::from_json(&v).unwrap(), RingModel::Basis(_)));
        let v: Value = serde_json::from_str(r#"{"kind": "polynomial-basis", "p": 2, "m": 1, "table": [[[1]]]}"#).unwrap();
        assert_eq!(RingModel::from_json(&v).unwrap().name(), "F_2[t]^1");
        let v: Value = serde_json::from_str(r#"{"kind": "integers"}"#).unwrap();
        assert_eq!(RingModel::from_json(&v).unwrap().name(), "Z");
    }
}
