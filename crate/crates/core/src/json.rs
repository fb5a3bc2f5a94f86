//! JSON encodings of forms and collections.
//!
//! Multilinear: `{"kind":"multilinear","d":2,"dims":[2,2],"ring":{"p":3},"coeffs":[[1,0],[0,1]]}`
//! with coefficients as nested arrays, last slot innermost.
//!
//! Homogeneous: `{"kind":"homogeneous","d":3,"s":2,"ring":"Z","monomials":[{"exp":[2,1],"c":2}]}`.
//!
//! Collection: `{"kind":"collection","members":[<form>, ...]}` with every
//! member of the same kind, ring and shape.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{FormCollection, HomogeneousForm, MultilinearForm};
use crate::ring::{AnyRing, CoeffRing, RingDescriptor};

fn nested<R: CoeffRing>(ring: &R, dims: &[usize], coeffs: &[R::Elem]) -> Value {
    if dims.len() == 1 {
        return Value::Array(coeffs.iter().map(|c| ring.elem_to_json(c)).collect());
    }
    let chunk = coeffs.len() / dims[0];
    Value::Array(
        coeffs
            .chunks(chunk)
            .map(|c| nested(ring, &dims[1..], c))
            .collect(),
    )
}

fn flatten<R: CoeffRing>(ring: &R, v: &Value, depth: usize, dims: &mut Vec<usize>, out: &mut Vec<R::Elem>) -> Result<()> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("expected nested array of depth {}", dims.len() + depth)))?;
    let level = dims.len() - depth;
    if dims[level] == usize::MAX {
        dims[level] = arr.len();
    } else if dims[level] != arr.len() {
        return Err(Error::Parse(format!(
            "ragged coefficient array at depth {level}: {} vs {}",
            arr.len(),
            dims[level]
        )));
    }
    for item in arr {
        if depth == 1 {
            out.push(ring.elem_from_json(item)?);
        } else {
            flatten(ring, item, depth - 1, dims, out)?;
        }
    }
    Ok(())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("field \"{key}\" must be a nonnegative integer")))
}

fn usize_list(v: &Value, key: &str) -> Result<Vec<usize>> {
    field(v, key)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("field \"{key}\" must be an array")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("entries of \"{key}\" must be nonnegative integers")))
        })
        .collect()
}

/// The `kind` tag of a form document.
pub fn kind(v: &Value) -> Result<&str> {
    field(v, "kind")?
        .as_str()
        .ok_or_else(|| Error::Parse("\"kind\" must be a string".into()))
}

/// Ring of a form or collection document (the first member's for collections).
pub fn ring_of(v: &Value) -> Result<AnyRing> {
    if kind(v)? == "collection" {
        let first = field(v, "members")?
            .as_array()
            .and_then(|m| m.first())
            .ok_or_else(|| Error::Parse("collection needs at least one member".into()))?;
        return ring_of(first);
    }
    let desc: RingDescriptor = serde_json::from_value(field(v, "ring")?.clone())?;
    AnyRing::from_descriptor(&desc)
}

pub fn multilinear_to_json<R: CoeffRing>(form: &MultilinearForm<R>) -> Value {
    json!({
        "kind": "multilinear",
        "d": form.arity(),
        "dims": form.dims(),
        "ring": form.ring().descriptor(),
        "coeffs": nested(form.ring(), form.dims(), form.coeffs()),
    })
}

pub fn multilinear_from_json<R: CoeffRing>(ring: &R, v: &Value) -> Result<MultilinearForm<R>> {
    if kind(v)? != "multilinear" {
        return Err(Error::Parse(format!("expected a multilinear form, got kind {}", kind(v)?)));
    }
    let d = usize_field(v, "d")?;
    if d == 0 {
        return Err(Error::Parse("arity must be at least 1".into()));
    }
    let mut dims = vec![usize::MAX; d];
    let mut coeffs = Vec::new();
    flatten(ring, field(v, "coeffs")?, d, &mut dims, &mut coeffs)?;
    if let Some(declared) = v.get("dims") {
        let declared: Vec<usize> = serde_json::from_value(declared.clone())?;
        if declared != dims {
            return Err(Error::Parse(format!(
                "declared dims {declared:?} do not match coefficient array shape {dims:?}"
            )));
        }
    }
    MultilinearForm::new(ring.clone(), dims, coeffs)
}

pub fn homogeneous_to_json<R: CoeffRing>(form: &HomogeneousForm<R>) -> Value {
    let monomials: Vec<Value> = form
        .terms()
        .iter()
        .map(|(e, c)| json!({"exp": e, "c": form.ring().elem_to_json(c)}))
        .collect();
    json!({
        "kind": "homogeneous",
        "d": form.degree(),
        "s": form.nvars(),
        "ring": form.ring().descriptor(),
        "monomials": monomials,
    })
}

pub fn homogeneous_from_json<R: CoeffRing>(ring: &R, v: &Value) -> Result<HomogeneousForm<R>> {
    if kind(v)? != "homogeneous" {
        return Err(Error::Parse(format!("expected a homogeneous form, got kind {}", kind(v)?)));
    }
    let d = usize_field(v, "d")?;
    let s = usize_field(v, "s")?;
    let terms = field(v, "monomials")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"monomials\" must be an array".into()))?
        .iter()
        .map(|m| {
            let exp: Vec<u32> = usize_list(m, "exp")?.into_iter().map(|e| e as u32).collect();
            let c = ring.elem_from_json(field(m, "c")?)?;
            Ok((exp, c))
        })
        .collect::<Result<Vec<_>>>()?;
    HomogeneousForm::new(ring.clone(), d, s, terms)
}

pub fn collection_to_json<R: CoeffRing>(c: &FormCollection<R>) -> Value {
    json!({
        "kind": "collection",
        "members": c.members().iter().map(multilinear_to_json).collect::<Vec<_>>(),
    })
}

fn members(v: &Value) -> Result<&Vec<Value>> {
    field(v, "members")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"members\" must be an array".into()))
}

/// Reads a multilinear collection; a single multilinear form is accepted as
/// a collection of one.
pub fn collection_from_json<R: CoeffRing>(ring: &R, v: &Value) -> Result<FormCollection<R>> {
    match kind(v)? {
        "multilinear" => FormCollection::new(vec![multilinear_from_json(ring, v)?]),
        "collection" => FormCollection::new(
            members(v)?
                .iter()
                .map(|m| multilinear_from_json(ring, m))
                .collect::<Result<_>>()?,
        ),
        k => Err(Error::Parse(format!("expected a multilinear collection, got kind {k}"))),
    }
}

pub fn homogeneous_collection_to_json<R: CoeffRing>(forms: &[HomogeneousForm<R>]) -> Value {
    json!({
        "kind": "collection",
        "members": forms.iter().map(homogeneous_to_json).collect::<Vec<_>>(),
    })
}

/// Reads homogeneous forms from a single form or a collection document.
pub fn homogeneous_collection_from_json<R: CoeffRing>(ring: &R, v: &Value) -> Result<Vec<HomogeneousForm<R>>> {
    match kind(v)? {
        "homogeneous" => Ok(vec![homogeneous_from_json(ring, v)?]),
        "collection" => members(v)?
            .iter()
            .map(|m| homogeneous_from_json(ring, m))
            .collect(),
        k => Err(Error::Parse(format!("expected homogeneous forms, got kind {k}"))),
    }
}

/// True when a document holds homogeneous forms (directly or as members).
pub fn is_homogeneous(v: &Value) -> Result<bool> {
    match kind(v)? {
        "homogeneous" => Ok(true),
        "multilinear" => Ok(false),
        "collection" => match members(v)?.first() {
            Some(m) => is_homogeneous(m),
            None => Err(Error::Parse("collection needs at least one member".into())),
        },
        k => Err(Error::Parse(format!("unknown form kind {k}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FiniteField, Fq};
    use crate::ring::Integers;

    #[test]
    fn multilinear_round_trip() {
        let v: Value = serde_json::from_str(
            r#"{"kind":"multilinear","d":2,"dims":[2,2],"ring":{"p":3},"coeffs":[[1,0],[0,1]]}"#,
        )
        .unwrap();
        let f3 = FiniteField::prime(3).unwrap();
        let p = multilinear_from_json(&f3, &v).unwrap();
        assert_eq!(p.coeffs(), &[Fq(1), Fq(0), Fq(0), Fq(1)]);
        assert_eq!(multilinear_to_json(&p), v);
        assert!(matches!(ring_of(&v).unwrap(), AnyRing::Finite(_)));
    }

    #[test]
    fn homogeneous_round_trip() {
        let v: Value = serde_json::from_str(
            r#"{"kind":"homogeneous","d":3,"s":2,"ring":"Z","monomials":[{"exp":[2,1],"c":2}]}"#,
        )
        .unwrap();
        let q = homogeneous_from_json(&Integers, &v).unwrap();
        assert_eq!(q.coeff(&[2, 1]), 2.into());
        assert_eq!(homogeneous_to_json(&q), v);
    }

    #[test]
    fn malformed_documents() {
        let f3 = FiniteField::prime(3).unwrap();
        let ragged: Value =
            serde_json::from_str(r#"{"kind":"multilinear","d":2,"ring":{"p":3},"coeffs":[[1,0],[0]]}"#).unwrap();
        assert!(multilinear_from_json(&f3, &ragged).is_err());
        let bad_dims: Value = serde_json::from_str(
            r#"{"kind":"multilinear","d":2,"dims":[3,2],"ring":{"p":3},"coeffs":[[1,0],[0,1]]}"#,
        )
        .unwrap();
        assert!(multilinear_from_json(&f3, &bad_dims).is_err());
        let bad_degree: Value = serde_json::from_str(
            r#"{"kind":"homogeneous","d":3,"s":2,"ring":"Z","monomials":[{"exp":[1,1],"c":2}]}"#,
        )
        .unwrap();
        assert!(homogeneous_from_json(&Integers, &bad_degree).is_err());
    }
}
