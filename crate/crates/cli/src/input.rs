//! Loading form documents and ring overrides.

use std::fs;
use std::path::Path;

use serde_json::Value;
use strength::json::{
    collection_from_json, homogeneous_collection_from_json, is_homogeneous, kind, multilinear_from_json, ring_of,
};
use strength::{AnyRing, Error, FiniteField, FormCollection, HomogeneousForm, Integers, MultilinearForm, Rationals, Result};

/// A parsed input document with its instance id (the file stem).
pub struct Doc {
    pub id: String,
    pub value: Value,
    pub ring: AnyRing,
}

/// `Z`, `Q`, `F5`, `F2^3`, or a bare prime power `5`, `2^3`.
pub fn parse_ring(s: &str) -> Result<AnyRing> {
    match s {
        "Z" | "ZZ" | "integers" => return Ok(AnyRing::Integers),
        "Q" | "QQ" | "rationals" => return Ok(AnyRing::Rationals),
        _ => {}
    }
    let body = s.strip_prefix("F_").or_else(|| s.strip_prefix('F')).unwrap_or(s);
    let (p, k) = match body.split_once('^') {
        Some((p, k)) => (p, k),
        None => (body, "1"),
    };
    let bad = || Error::Parse(format!("cannot read ring {s:?}"));
    let p: u32 = p.parse().map_err(|_| bad())?;
    let k: u32 = k.parse().map_err(|_| bad())?;
    let field = if k == 1 {
        FiniteField::prime(p)?
    } else {
        FiniteField::default_extension(p, k)?
    };
    Ok(AnyRing::Finite(field))
}

pub fn load(path: &Path, ring: Option<&AnyRing>) -> Result<Doc> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)?;
    let ring = match ring {
        Some(r) => r.clone(),
        None => ring_of(&value)?,
    };
    let id = path
        .file_stem()
        .map_or_else(|| "input".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Doc { id, value, ring })
}

impl Doc {
    pub fn homogeneous(&self) -> Result<bool> {
        is_homogeneous(&self.value)
    }

    pub fn field(&self) -> Result<&FiniteField> {
        match &self.ring {
            AnyRing::Finite(f) => Ok(f),
            AnyRing::Integers => Err(Error::InfiniteRing("Z".into())),
            AnyRing::Rationals => Err(Error::InfiniteRing("Q".into())),
        }
    }

    pub fn finite_collection(&self) -> Result<FormCollection<FiniteField>> {
        collection_from_json(self.field()?, &self.value)
    }

    pub fn finite_homogeneous(&self) -> Result<Vec<HomogeneousForm<FiniteField>>> {
        homogeneous_collection_from_json(self.field()?, &self.value)
    }

    pub fn integer_form(&self) -> Result<MultilinearForm<Integers>> {
        if self.ring != AnyRing::Integers {
            return Err(Error::InvalidInput(format!("{}: expected a form over Z", self.id)));
        }
        if kind(&self.value)? == "collection" {
            return Err(Error::InvalidInput(format!("{}: expected a single form", self.id)));
        }
        multilinear_from_json(&Integers, &self.value)
    }

    pub fn integer_collection(&self) -> Result<FormCollection<Integers>> {
        if self.ring != AnyRing::Integers {
            return Err(Error::InvalidInput(format!("{}: expected forms over Z", self.id)));
        }
        collection_from_json(&Integers, &self.value)
    }

    pub fn integer_homogeneous(&self) -> Result<Vec<HomogeneousForm<Integers>>> {
        homogeneous_collection_from_json(&Integers, &self.value)
    }

    /// Multilinear forms over `Q`, reading integer documents exactly.
    pub fn rational_collection(&self) -> Result<FormCollection<Rationals>> {
        collection_from_json(&Rationals, &self.value)
    }

    pub fn rational_homogeneous(&self) -> Result<Vec<HomogeneousForm<Rationals>>> {
        homogeneous_collection_from_json(&Rationals, &self.value)
    }
}
