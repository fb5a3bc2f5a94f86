//! Coefficient rings: the integers, the rationals and finite fields behind a
//! single trait so that forms, certificates and elimination are written once.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{FieldDescriptor, FiniteField, Fq};

pub trait CoeffRing: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync {
    type Elem: Clone + fmt::Debug + PartialEq + Eq + Hash + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn from_int(&self, n: i64) -> Self::Elem;

    /// 0 for the integers and rationals.
    fn characteristic(&self) -> u64;

    /// Multiplicative inverse, `None` when `a` is not a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn is_field(&self) -> bool;

    fn descriptor(&self) -> RingDescriptor;

    fn as_finite(&self) -> Option<&FiniteField> {
        None
    }

    /// Sample used by random generators: uniform on finite fields, uniform
    /// integers in `[-9, 9]` otherwise.
    fn random_elem<G: Rng + ?Sized>(&self, rng: &mut G) -> Self::Elem;

    fn elem_to_json(&self, a: &Self::Elem) -> Value;
    fn elem_from_json(&self, v: &Value) -> Result<Self::Elem>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, exp: usize) -> Self::Elem {
        (0..exp).fold(self.one(), |acc, _| self.mul(&acc, a))
    }

    /// `n!` as a ring element.
    fn factorial(&self, n: usize) -> Self::Elem {
        (1..=n).fold(self.one(), |acc, i| self.mul(&acc, &self.from_int(i as i64)))
    }

    fn sum<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }
}

/// Serialized ring handle: `"Z"`, `"Q"`, or a field descriptor object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RingDescriptor {
    Named(String),
    Finite(FieldDescriptor),
}

impl RingDescriptor {
    pub fn integers() -> Self {
        RingDescriptor::Named("Z".into())
    }

    pub fn rationals() -> Self {
        RingDescriptor::Named("Q".into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Integers;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl fmt::Display for Integers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Z")
    }
}

impl fmt::Display for Rationals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Q")
    }
}

fn json_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("expected an integer, got {n}"))),
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}"))),
        other => Err(Error::Parse(format!("expected an integer, got {other}"))),
    }
}

fn bigint_to_json(a: &BigInt) -> Value {
    match a.to_i64() {
        Some(n) => Value::from(n),
        None => Value::String(a.to_string()),
    }
}

impl CoeffRing for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn from_int(&self, n: i64) -> BigInt {
        BigInt::from(n)
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        if a.abs().is_one() {
            Some(a.clone())
        } else {
            None
        }
    }
    fn is_field(&self) -> bool {
        false
    }
    fn descriptor(&self) -> RingDescriptor {
        RingDescriptor::integers()
    }
    fn random_elem<G: Rng + ?Sized>(&self, rng: &mut G) -> BigInt {
        BigInt::from(rng.gen_range(-9i64..=9))
    }
    fn elem_to_json(&self, a: &BigInt) -> Value {
        bigint_to_json(a)
    }
    fn elem_from_json(&self, v: &Value) -> Result<BigInt> {
        json_int(v)
    }
}

impl CoeffRing for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_int(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_field(&self) -> bool {
        true
    }
    fn descriptor(&self) -> RingDescriptor {
        RingDescriptor::rationals()
    }
    fn random_elem<G: Rng + ?Sized>(&self, rng: &mut G) -> BigRational {
        let num = BigInt::from(rng.gen_range(-9i64..=9));
        let den = BigInt::from(rng.gen_range(1i64..=4));
        BigRational::new(num, den)
    }
    fn elem_to_json(&self, a: &BigRational) -> Value {
        if a.is_integer() {
            bigint_to_json(a.numer())
        } else {
            Value::String(format!("{}/{}", a.numer(), a.denom()))
        }
    }
    fn elem_from_json(&self, v: &Value) -> Result<BigRational> {
        if let Value::String(s) = v {
            if let Some((n, d)) = s.split_once('/') {
                let n = json_int(&Value::String(n.into()))?;
                let d = json_int(&Value::String(d.into()))?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                return Ok(BigRational::new(n, d));
            }
        }
        Ok(BigRational::from_integer(json_int(v)?))
    }
}

impl CoeffRing for FiniteField {
    type Elem = Fq;

    fn zero(&self) -> Fq {
        Fq(0)
    }
    fn one(&self) -> Fq {
        Fq(1)
    }
    fn add(&self, a: &Fq, b: &Fq) -> Fq {
        FiniteField::add(self, *a, *b)
    }
    fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        FiniteField::mul(self, *a, *b)
    }
    fn neg(&self, a: &Fq) -> Fq {
        FiniteField::neg(self, *a)
    }
    fn is_zero(&self, a: &Fq) -> bool {
        a.0 == 0
    }
    fn from_int(&self, n: i64) -> Fq {
        FiniteField::from_int(self, n)
    }
    fn characteristic(&self) -> u64 {
        FiniteField::characteristic(self) as u64
    }
    fn inv(&self, a: &Fq) -> Option<Fq> {
        FiniteField::inv(self, *a).ok()
    }
    fn is_field(&self) -> bool {
        true
    }
    fn descriptor(&self) -> RingDescriptor {
        RingDescriptor::Finite(FiniteField::descriptor(self))
    }
    fn as_finite(&self) -> Option<&FiniteField> {
        Some(self)
    }
    fn random_elem<G: Rng + ?Sized>(&self, rng: &mut G) -> Fq {
        Fq(rng.gen_range(0..self.order()))
    }
    fn elem_to_json(&self, a: &Fq) -> Value {
        if self.is_prime_field() {
            Value::from(a.0)
        } else {
            Value::from(self.coeffs(*a))
        }
    }
    fn elem_from_json(&self, v: &Value) -> Result<Fq> {
        match v {
            Value::Array(items) => {
                let coeffs = items
                    .iter()
                    .map(|c| {
                        c.as_u64()
                            .map(|c| c as u32)
                            .ok_or_else(|| Error::Parse(format!("bad coefficient {c}")))
                    })
                    .collect::<Result<Vec<u32>>>()?;
                self.from_coeffs(&coeffs)
            }
            _ => {
                let n = json_int(v)?;
                if self.is_prime_field() {
                    let p = BigInt::from(self.characteristic());
                    let r = ((n % &p) + &p) % &p;
                    Ok(Fq(r.to_u32().unwrap_or(0)))
                } else {
                    let x = n
                        .to_u32()
                        .filter(|&x| x < self.order())
                        .ok_or_else(|| Error::Parse(format!("{n} is not a packed element of {self:?}")))?;
                    Ok(Fq(x))
                }
            }
        }
    }
}

/// A ring chosen at runtime from a descriptor.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyRing {
    Integers,
    Rationals,
    Finite(FiniteField),
}

impl AnyRing {
    pub fn from_descriptor(desc: &RingDescriptor) -> Result<Self> {
        match desc {
            RingDescriptor::Named(name) => match name.as_str() {
                "Z" | "ZZ" | "integers" => Ok(AnyRing::Integers),
                "Q" | "QQ" | "rationals" => Ok(AnyRing::Rationals),
                other => Err(Error::Parse(format!("unknown ring {other:?}"))),
            },
            RingDescriptor::Finite(f) => Ok(AnyRing::Finite(FiniteField::from_descriptor(f)?)),
        }
    }
}

/// Exact conversion of an integer into any coefficient ring.
pub fn embed_integer<R: CoeffRing>(ring: &R, n: &BigInt) -> R::Elem {
    match n.to_i64() {
        Some(v) => ring.from_int(v),
        None => {
            // Horner in base 2^32.
            let (sign, digits) = n.to_u32_digits();
            let base = ring.from_int(1i64 << 32);
            let mut acc = ring.zero();
            for d in digits.iter().rev() {
                acc = ring.add(&ring.mul(&acc, &base), &ring.from_int(*d as i64));
            }
            if sign == num_bigint::Sign::Minus {
                ring.neg(&acc)
            } else {
                acc
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_round_trip() {
        let z: RingDescriptor = serde_json::from_str("\"Z\"").unwrap();
        assert_eq!(AnyRing::from_descriptor(&z).unwrap(), AnyRing::Integers);
        let f: RingDescriptor = serde_json::from_str(r#"{"p":2,"k":2,"modulus":[1,1,1]}"#).unwrap();
        match AnyRing::from_descriptor(&f).unwrap() {
            AnyRing::Finite(field) => assert_eq!(field.order(), 4),
            other => panic!("{other:?}"),
        }
        let bad: RingDescriptor = serde_json::from_str("\"R\"").unwrap();
        assert!(AnyRing::from_descriptor(&bad).is_err());
    }

    #[test]
    fn rational_json() {
        let q = Rationals;
        let half = q.elem_from_json(&Value::String("1/2".into())).unwrap();
        assert_eq!(q.mul(&half, &q.from_int(2)), q.one());
        assert_eq!(q.elem_to_json(&half), Value::String("1/2".into()));
        assert_eq!(q.elem_to_json(&q.from_int(-3)), Value::from(-3));
    }

    #[test]
    fn big_integers_embed() {
        let f7 = FiniteField::prime(7).unwrap();
        let n: BigInt = "123456789012345678901234567890".parse().unwrap();
        let expected = (&n % BigInt::from(7)).to_i64().unwrap();
        assert_eq!(embed_integer(&f7, &n), f7.from_int(expected));
        assert_eq!(embed_integer(&f7, &-n.clone()), f7.from_int(-expected));
    }
}
