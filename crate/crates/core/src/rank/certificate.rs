use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{MultiIndex, MultilinearForm};
use crate::json::{multilinear_from_json, multilinear_to_json};
use crate::ring::CoeffRing;

/// One product `R(x_I) * S(x_J)` with `I` a nonempty proper subset of the
/// slots and `J` its complement. `left` lists `I` in increasing order; `r`
/// has the slots of `I` and `s` those of `J`, both in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateTerm<R: CoeffRing> {
    pub left: Vec<usize>,
    pub r: MultilinearForm<R>,
    pub s: MultilinearForm<R>,
}

impl<R: CoeffRing> CertificateTerm<R> {
    pub fn new(left: Vec<usize>, r: MultilinearForm<R>, s: MultilinearForm<R>) -> Self {
        CertificateTerm { left, r, s }
    }

    /// Slots of `J`, the complement of `left` in `0..d`.
    pub fn right(&self, d: usize) -> Vec<usize> {
        (0..d).filter(|i| !self.left.contains(i)).collect()
    }

    fn check(&self, dims: &[usize]) -> Result<()> {
        let d = dims.len();
        let mut sorted = self.left.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() || sorted.len() >= d || sorted.len() != self.left.len() || sorted != self.left {
            return Err(Error::MalformedPartition(format!(
                "{:?} is not a nonempty proper increasing subset of 0..{d}",
                self.left
            )));
        }
        if *sorted.last().unwrap() >= d {
            return Err(Error::MalformedPartition(format!("{:?} exceeds arity {d}", self.left)));
        }
        let right = self.right(d);
        let want_r: Vec<usize> = self.left.iter().map(|&i| dims[i]).collect();
        let want_s: Vec<usize> = right.iter().map(|&i| dims[i]).collect();
        if self.r.dims() != want_r.as_slice() || self.s.dims() != want_s.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "term factors have dims {:?} and {:?}, expected {want_r:?} and {want_s:?}",
                self.r.dims(),
                self.s.dims()
            )));
        }
        Ok(())
    }

    /// The full coefficient tensor of the product on `dims`.
    pub fn expand(&self, dims: &[usize]) -> Result<MultilinearForm<R>> {
        self.check(dims)?;
        let ring = self.r.ring().clone();
        let right = self.right(dims.len());
        let mut ri = vec![0; self.left.len()];
        let mut si = vec![0; right.len()];
        MultilinearForm::from_fn(ring.clone(), dims.to_vec(), |idx| {
            for (a, &i) in self.left.iter().enumerate() {
                ri[a] = idx[i];
            }
            for (b, &j) in right.iter().enumerate() {
                si[b] = idx[j];
            }
            ring.mul(self.r.coeff(&ri), self.s.coeff(&si))
        })
    }
}

/// A sum of partition-rank-one products; its length bounds the partition
/// rank of the form it reproduces.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionRankCertificate<R: CoeffRing> {
    pub dims: Vec<usize>,
    pub terms: Vec<CertificateTerm<R>>,
}

impl<R: CoeffRing> PartitionRankCertificate<R> {
    pub fn empty(dims: &[usize]) -> Self {
        PartitionRankCertificate {
            dims: dims.to_vec(),
            terms: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum_t R_t S_t` as a dense form.
    pub fn expand(&self, ring: &R) -> Result<MultilinearForm<R>> {
        let mut acc = MultilinearForm::zero(ring.clone(), self.dims.clone())?;
        for t in &self.terms {
            acc = acc.add(&t.expand(&self.dims)?)?;
        }
        Ok(acc)
    }

    /// Certificate for the sum of the two certified forms.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("certificates for different shapes".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(PartitionRankCertificate {
            dims: self.dims.clone(),
            terms,
        })
    }

    /// Certificate for `c * P`, scaling each right factor.
    pub fn scale(&self, c: &R::Elem) -> Self {
        PartitionRankCertificate {
            dims: self.dims.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| CertificateTerm::new(t.left.clone(), t.r.clone(), t.s.scale(c)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dims": self.dims,
            "terms": self.terms.iter().map(|t| json!({
                "left": t.left,
                "r": multilinear_to_json(&t.r),
                "s": multilinear_to_json(&t.s),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ring: &R, v: &Value) -> Result<Self> {
        let dims: Vec<usize> = serde_json::from_value(
            v.get("dims").cloned().ok_or_else(|| Error::Parse("certificate needs dims".into()))?,
        )?;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("certificate needs a terms array".into()))?
            .iter()
            .map(|t| {
                let left: Vec<usize> = serde_json::from_value(
                    t.get("left").cloned().ok_or_else(|| Error::Parse("term needs left".into()))?,
                )?;
                let r = multilinear_from_json(ring, t.get("r").ok_or_else(|| Error::Parse("term needs r".into()))?)?;
                let s = multilinear_from_json(ring, t.get("s").ok_or_else(|| Error::Parse("term needs s".into()))?)?;
                Ok(CertificateTerm::new(left, r, s))
            })
            .collect::<Result<_>>()?;
        Ok(PartitionRankCertificate { dims, terms })
    }
}

/// True iff the certificate sums exactly to `p`. Malformed partitions and
/// shape mismatches are errors.
pub fn verify_certificate<R: CoeffRing>(p: &MultilinearForm<R>, cert: &PartitionRankCertificate<R>) -> Result<bool> {
    if cert.dims != p.dims() {
        return Err(Error::DimensionMismatch(format!(
            "certificate dims {:?} vs form dims {:?}",
            cert.dims,
            p.dims()
        )));
    }
    Ok(cert.expand(p.ring())? == *p)
}

/// Splits `p` along the bipartition `left | rest` and returns the matrix
/// with rows indexed by `left` slots and columns by the others.
pub fn flattening<R: CoeffRing>(p: &MultilinearForm<R>, left: &[usize]) -> crate::linalg::Matrix<R::Elem> {
    let d = p.arity();
    let right: Vec<usize> = (0..d).filter(|i| !left.contains(i)).collect();
    let ldims: Vec<usize> = left.iter().map(|&i| p.dims()[i]).collect();
    let rdims: Vec<usize> = right.iter().map(|&i| p.dims()[i]).collect();
    let rows: usize = ldims.iter().product();
    let cols: usize = rdims.iter().product();
    let mut data = Vec::with_capacity(rows * cols);
    let mut idx = vec![0; d];
    for li in MultiIndex::new(&ldims) {
        for (a, &i) in left.iter().enumerate() {
            idx[i] = li[a];
        }
        for ri in MultiIndex::new(&rdims) {
            for (b, &j) in right.iter().enumerate() {
                idx[j] = ri[b];
            }
            data.push(p.coeff(&idx).clone());
        }
    }
    crate::linalg::Matrix::from_vec(rows, cols, data).expect("sized")
}
