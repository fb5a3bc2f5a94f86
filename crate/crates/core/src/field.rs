//! Finite fields `F_p` and `F_{p^k}` with table-driven arithmetic, and the
//! trace character used by every bias computation.
//!
//! Elements are packed integers: the residue for prime fields, and
//! `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` for the coefficient sequence of an
//! extension element (low-to-high, reduced modulo the defining polynomial).

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on `q`; the addition and multiplication tables are `q^2`.
pub const MAX_FIELD_ORDER: u32 = 1024;

/// Default limits for extension fields.
pub const DEFAULT_MAX_EXTENSION_DEGREE: u32 = 4;
pub const DEFAULT_MAX_EXTENSION_ORDER: u32 = 64;

/// Element of a [`FiniteField`], stored as its packed representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq(pub u32);

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point `e^{2 pi i theta}` on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacterValue {
    pub re: f64,
    pub im: f64,
}

impl CharacterValue {
    pub const ONE: CharacterValue = CharacterValue { re: 1.0, im: 0.0 };

    pub fn from_turns(numerator: u32, denominator: u32) -> Self {
        let theta = TAU * numerator as f64 / denominator as f64;
        CharacterValue {
            re: theta.cos(),
            im: theta.sin(),
        }
    }

    pub fn mul(self, other: CharacterValue) -> CharacterValue {
        CharacterValue {
            re: self.re * other.re - self.im * other.im,
            im: self.re * other.im + self.im * other.re,
        }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// JSON descriptor `{"p": 3}` or `{"p": 2, "k": 2, "modulus": [1, 1, 1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

struct FieldData {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    trace: Vec<u32>,
}

/// A finite field of order `q = p^k`. Cloning is cheap.
#[derive(Clone)]
pub struct FiniteField {
    data: Arc<FieldData>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.p == other.data.p && self.data.modulus == other.data.modulus)
    }
}

impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.data.k == 1 {
            write!(f, "F_{}", self.data.p)
        } else {
            write!(f, "F_{}^{}{:?}", self.data.p, self.data.k, self.data.modulus)
        }
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.data.k == 1 {
            write!(f, "F{}", self.data.p)
        } else {
            write!(f, "F{}^{}", self.data.p, self.data.k)
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomials over F_p, low-to-high, not necessarily trimmed.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let m = poly_trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    let mut r = poly_trim(a.to_vec());
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &mi) in m.iter().enumerate() {
            let sub = (c as u64 * mi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    out.into_iter().map(|c| c as u32).collect()
}

fn mod_inv(a: u32, p: u32) -> u32 {
    // p is prime and small; Fermat.
    let mut base = a as u64 % p as u64;
    let mut exp = p as u64 - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

fn unpack(x: u32, p: u32, k: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(k as usize);
    let mut x = x;
    for _ in 0..k {
        v.push(x % p);
        x /= p;
    }
    v
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// True iff the monic polynomial `m` (low-to-high) has no monic factor of
/// degree between 1 and `deg m / 2`.
pub fn is_irreducible(m: &[u32], p: u32) -> bool {
    let m = poly_trim(m.to_vec());
    if m.len() < 2 {
        return false;
    }
    let deg = m.len() - 1;
    for e in 1..=deg / 2 {
        let count = (p as u64).pow(e as u32);
        for idx in 0..count {
            let mut f = unpack(idx as u32, p, e as u32);
            f.push(1);
            if poly_rem(&m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if p > MAX_FIELD_ORDER {
            return Err(Error::CapExceeded {
                what: "field order",
                needed: p as u128,
                cap: MAX_FIELD_ORDER as u128,
            });
        }
        Self::build(p, 1, vec![0, 1])
    }

    /// `F_p[t]/(modulus)` under the default degree and order limits.
    pub fn extension(p: u32, k: u32, modulus: &[u32]) -> Result<Self> {
        Self::extension_with_limits(
            p,
            k,
            modulus,
            DEFAULT_MAX_EXTENSION_DEGREE,
            DEFAULT_MAX_EXTENSION_ORDER,
        )
    }

    pub fn extension_with_limits(
        p: u32,
        k: u32,
        modulus: &[u32],
        max_degree: u32,
        max_order: u32,
    ) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if k == 0 {
            return Err(Error::InvalidModulus("extension degree must be >= 1".into()));
        }
        if k == 1 && modulus.len() <= 1 {
            return Self::prime(p);
        }
        if k > max_degree {
            return Err(Error::CapExceeded {
                what: "extension degree",
                needed: k as u128,
                cap: max_degree as u128,
            });
        }
        let q = (p as u128).pow(k);
        let cap = max_order.min(MAX_FIELD_ORDER) as u128;
        if q > cap {
            return Err(Error::CapExceeded {
                what: "field order",
                needed: q,
                cap,
            });
        }
        if modulus.len() != k as usize + 1 {
            return Err(Error::InvalidModulus(format!(
                "expected {} coefficients, got {}",
                k + 1,
                modulus.len()
            )));
        }
        if modulus[k as usize] != 1 {
            return Err(Error::InvalidModulus("modulus must be monic".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidModulus("coefficients must lie in [0, p)".into()));
        }
        if !is_irreducible(modulus, p) {
            return Err(Error::Reducible { p });
        }
        Self::build(p, k, modulus.to_vec())
    }

    /// `F_{p^k}` defined by the first monic irreducible polynomial of degree
    /// `k` in packed order.
    pub fn default_extension(p: u32, k: u32) -> Result<Self> {
        if k == 1 {
            return Self::prime(p);
        }
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let count = (p as u64).pow(k);
        for idx in 0..count {
            let mut m = unpack(idx as u32, p, k);
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::extension(p, k, &m);
            }
        }
        Err(Error::Reducible { p })
    }

    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<Self> {
        match (desc.k, &desc.modulus) {
            (None | Some(1), None) => Self::prime(desc.p),
            (k, Some(m)) => Self::extension(desc.p, k.unwrap_or((m.len() as u32).saturating_sub(1)), m),
            (Some(k), None) => Self::default_extension(desc.p, k),
        }
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        if self.data.k == 1 {
            FieldDescriptor {
                p: self.data.p,
                k: None,
                modulus: None,
            }
        } else {
            FieldDescriptor {
                p: self.data.p,
                k: Some(self.data.k),
                modulus: Some(self.data.modulus.clone()),
            }
        }
    }

    fn build(p: u32, k: u32, modulus: Vec<u32>) -> Result<Self> {
        let q = p.pow(k);
        let qs = q as usize;
        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        let digits: Vec<Vec<u32>> = (0..q).map(|x| unpack(x, p, k)).collect();
        for a in 0..qs {
            for b in 0..qs {
                let sum: Vec<u32> = digits[a]
                    .iter()
                    .zip(&digits[b])
                    .map(|(x, y)| (x + y) % p)
                    .collect();
                add[a * qs + b] = pack(&sum, p);
                let prod = poly_rem(&poly_mul(&digits[a], &digits[b], p), &modulus, p);
                let mut prod = prod;
                prod.resize(k as usize, 0);
                mul[a * qs + b] = pack(&prod, p);
            }
        }
        let mut neg = vec![0u32; qs];
        let mut inv = vec![0u32; qs];
        for a in 0..qs {
            for b in 0..qs {
                if add[a * qs + b] == 0 {
                    neg[a] = b as u32;
                }
                if mul[a * qs + b] == 1 {
                    inv[a] = b as u32;
                }
            }
        }
        let mut data = FieldData {
            p,
            k,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
            trace: Vec::new(),
        };
        // Tr(x) = x + x^p + ... + x^{p^{k-1}}
        let trace = (0..q)
            .map(|x| {
                let mut acc = 0u32;
                let mut power = x;
                for _ in 0..k {
                    acc = data.add[acc as usize * qs + power as usize];
                    let mut next = 1u32;
                    for _ in 0..p {
                        next = data.mul[next as usize * qs + power as usize];
                    }
                    power = next;
                }
                acc
            })
            .collect();
        data.trace = trace;
        Ok(FiniteField {
            data: Arc::new(data),
        })
    }

    pub fn characteristic(&self) -> u32 {
        self.data.p
    }

    pub fn degree(&self) -> u32 {
        self.data.k
    }

    pub fn order(&self) -> u32 {
        self.data.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.data.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.data.k == 1
    }

    #[inline]
    pub fn zero(&self) -> Fq {
        Fq(0)
    }

    #[inline]
    pub fn one(&self) -> Fq {
        Fq(1)
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.data.add[(a.0 * self.data.q + b.0) as usize])
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.data.mul[(a.0 * self.data.q + b.0) as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.data.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Fq) -> Result<Fq> {
        if a.0 == 0 {
            Err(Error::ZeroDivision)
        } else {
            Ok(Fq(self.data.inv[a.0 as usize]))
        }
    }

    pub fn pow(&self, a: Fq, mut exp: u64) -> Fq {
        let mut base = a;
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.data.p as i64) as u32)
    }

    /// The element with coefficient sequence `coeffs` (low-to-high).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fq> {
        if coeffs.len() > self.data.k as usize || coeffs.iter().any(|&c| c >= self.data.p) {
            return Err(Error::InvalidInput(format!(
                "{coeffs:?} is not an element of {self:?}"
            )));
        }
        Ok(Fq(pack(coeffs, self.data.p)))
    }

    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        unpack(a.0, self.data.p, self.data.k)
    }

    pub fn contains(&self, a: Fq) -> bool {
        a.0 < self.data.q
    }

    /// Absolute trace `F_q -> F_p`, returned as a residue in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: Fq) -> u32 {
        self.data.trace[a.0 as usize]
    }

    /// The additive character `x -> e^{2 pi i Tr(x) / p}`.
    pub fn character(&self, a: Fq) -> CharacterValue {
        CharacterValue::from_turns(self.trace(a), self.data.p)
    }

    /// All elements in packed order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.data.q).map(Fq)
    }
}

/// All `q` elements exactly once, in packed order, refusing fields above `cap`.
pub fn enumerate_field(field: &FiniteField, cap: u32) -> Result<Vec<Fq>> {
    if field.order() > cap {
        return Err(Error::CapExceeded {
            what: "field enumeration",
            needed: field.order() as u128,
            cap: cap as u128,
        });
    }
    Ok(field.elements().collect())
}
