use std::fmt;

use crate::error::{Error, Result};
use crate::forms::homogeneous::HomogeneousForm;
use crate::forms::LinearMapTuple;
use crate::linalg::Matrix;
use crate::ring::CoeffRing;

/// Desk-scale cap on the number of stored coefficients.
pub const MAX_FORM_ENTRIES: usize = 1_000_000;

/// Odometer over `[0, d_1) x ... x [0, d_n)`, last coordinate fastest.
#[derive(Clone, Debug)]
pub struct MultiIndex {
    dims: Vec<usize>,
    cur: Vec<usize>,
    done: bool,
}

impl MultiIndex {
    pub fn new(dims: &[usize]) -> Self {
        MultiIndex {
            dims: dims.to_vec(),
            cur: vec![0; dims.len()],
            done: dims.contains(&0),
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut i = self.dims.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.cur[i] += 1;
            if self.cur[i] < self.dims[i] {
                break;
            }
            self.cur[i] = 0;
        }
        Some(out)
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

pub(crate) fn checked_volume(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidInput("a form needs at least one slot".into()));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidInput(format!(
            "slot dimensions must be positive, got {dims:?}"
        )));
    }
    let mut vol: u128 = 1;
    for &s in dims {
        vol = vol.saturating_mul(s as u128);
    }
    crate::error::check_cap("form entries", vol, MAX_FORM_ENTRIES as u128)?;
    Ok(vol as usize)
}

/// A multilinear form `P(x_1, ..., x_d) = sum a_{k_1..k_d} x_1(k_1) ... x_d(k_d)`
/// with a dense coefficient tensor.
#[derive(Clone, PartialEq)]
pub struct MultilinearForm<R: CoeffRing> {
    ring: R,
    dims: Vec<usize>,
    coeffs: Vec<R::Elem>,
}

impl<R: CoeffRing> fmt::Debug for MultilinearForm<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultilinearForm[{} {:?}]{:?}", self.ring, self.dims, self.coeffs)
    }
}

impl<R: CoeffRing> MultilinearForm<R> {
    pub fn new(ring: R, dims: Vec<usize>, coeffs: Vec<R::Elem>) -> Result<Self> {
        let vol = checked_volume(&dims)?;
        if coeffs.len() != vol {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {vol} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(MultilinearForm { ring, dims, coeffs })
    }

    pub fn zero(ring: R, dims: Vec<usize>) -> Result<Self> {
        let vol = checked_volume(&dims)?;
        let coeffs = vec![ring.zero(); vol];
        Ok(MultilinearForm { ring, dims, coeffs })
    }

    pub fn from_fn<F>(ring: R, dims: Vec<usize>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> R::Elem,
    {
        checked_volume(&dims)?;
        let coeffs = MultiIndex::new(&dims).map(|idx| f(&idx)).collect();
        Ok(MultilinearForm { ring, dims, coeffs })
    }

    /// Sum of the given monomials `(coefficient, index)`.
    pub fn from_terms(ring: R, dims: Vec<usize>, terms: &[(i64, Vec<usize>)]) -> Result<Self> {
        let mut p = Self::zero(ring, dims)?;
        for (c, idx) in terms {
            let pos = p.position(idx)?;
            let c = p.ring.from_int(*c);
            p.coeffs[pos] = p.ring.add(&p.coeffs[pos], &c);
        }
        Ok(p)
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn coeffs(&self) -> &[R::Elem] {
        &self.coeffs
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    fn position(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.dims.len() || idx.iter().zip(&self.dims).any(|(k, s)| k >= s) {
            return Err(Error::DimensionMismatch(format!(
                "index {idx:?} out of range for dims {:?}",
                self.dims
            )));
        }
        Ok(idx
            .iter()
            .zip(strides(&self.dims))
            .map(|(k, st)| k * st)
            .sum())
    }

    pub fn coeff(&self, idx: &[usize]) -> &R::Elem {
        &self.coeffs[self.position(idx).expect("index in range")]
    }

    pub fn set_coeff(&mut self, idx: &[usize], v: R::Elem) -> Result<()> {
        let pos = self.position(idx)?;
        self.coeffs[pos] = v;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.ring.is_zero(c))
    }

    /// Nonzero coefficients with their indices.
    pub fn support(&self) -> Vec<(Vec<usize>, R::Elem)> {
        MultiIndex::new(&self.dims)
            .zip(&self.coeffs)
            .filter(|(_, c)| !self.ring.is_zero(c))
            .map(|(i, c)| (i, c.clone()))
            .collect()
    }

    fn check_args(&self, args: &[Vec<R::Elem>]) -> Result<()> {
        if args.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} arguments, got {}",
                self.dims.len(),
                args.len()
            )));
        }
        for (i, (a, &s)) in args.iter().zip(&self.dims).enumerate() {
            if a.len() != s {
                return Err(Error::DimensionMismatch(format!(
                    "argument {i} has length {}, slot dimension is {s}",
                    a.len()
                )));
            }
        }
        Ok(())
    }

    /// Contracts `slot` against `x`, dropping that slot. Requires arity >= 2.
    pub fn contract(&self, slot: usize, x: &[R::Elem]) -> Result<Self> {
        if self.arity() < 2 {
            return Err(Error::InvalidInput("cannot contract a linear form to a scalar form".into()));
        }
        if x.len() != self.dims[slot] {
            return Err(Error::DimensionMismatch(format!(
                "slot {slot} has dimension {}, vector has length {}",
                self.dims[slot],
                x.len()
            )));
        }
        let outer: usize = self.dims[..slot].iter().product();
        let inner: usize = self.dims[slot + 1..].iter().product();
        let s = self.dims[slot];
        let mut out = vec![self.ring.zero(); outer * inner];
        for o in 0..outer {
            for (k, xk) in x.iter().enumerate() {
                if self.ring.is_zero(xk) {
                    continue;
                }
                let base = (o * s + k) * inner;
                for i in 0..inner {
                    let v = &mut out[o * inner + i];
                    *v = self.ring.add(v, &self.ring.mul(xk, &self.coeffs[base + i]));
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.remove(slot);
        Ok(MultilinearForm {
            ring: self.ring.clone(),
            dims,
            coeffs: out,
        })
    }

    /// `sum a_k prod x_i(k_i)`.
    pub fn evaluate(&self, args: &[Vec<R::Elem>]) -> Result<R::Elem> {
        self.check_args(args)?;
        let last = self.arity() - 1;
        let mut cur = self.clone();
        for a in &args[..last] {
            cur = cur.contract(0, a)?;
        }
        Ok(cur
            .coeffs
            .iter()
            .zip(&args[last])
            .fold(self.ring.zero(), |acc, (c, x)| self.ring.add(&acc, &self.ring.mul(c, x))))
    }

    /// Coefficients of the linear form `P(x_1, ..., x_{d-1}, .)`.
    pub fn slice(&self, args: &[Vec<R::Elem>]) -> Result<Vec<R::Elem>> {
        if self.arity() < 2 {
            return Err(Error::InvalidInput("slice needs arity >= 2".into()));
        }
        if args.len() != self.arity() - 1 {
            return Err(Error::DimensionMismatch(format!(
                "slice takes {} arguments, got {}",
                self.arity() - 1,
                args.len()
            )));
        }
        let mut cur = self.clone();
        for a in args {
            cur = cur.contract(0, a)?;
        }
        Ok(cur.coeffs)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims || self.ring != other.ring {
            return Err(Error::DimensionMismatch(format!(
                "forms over {} {:?} and {} {:?}",
                self.ring, self.dims, other.ring, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| self.ring.add(a, b))
            .collect();
        Ok(MultilinearForm {
            ring: self.ring.clone(),
            dims: self.dims.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&self.ring.neg(&self.ring.one())))
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        MultilinearForm {
            ring: self.ring.clone(),
            dims: self.dims.clone(),
            coeffs: self.coeffs.iter().map(|a| self.ring.mul(a, c)).collect(),
        }
    }

    /// Multiplies slot `slot` by the `s_slot x t` matrix `m`:
    /// new coefficient at `j` in that slot is `sum_k a_{..k..} m[k][j]`.
    pub fn mode_product(&self, slot: usize, m: &Matrix<R::Elem>) -> Result<Self> {
        if m.rows() != self.dims[slot] {
            return Err(Error::DimensionMismatch(format!(
                "map for slot {slot} has {} rows, slot dimension is {}",
                m.rows(),
                self.dims[slot]
            )));
        }
        let t = m.cols();
        let outer: usize = self.dims[..slot].iter().product();
        let inner: usize = self.dims[slot + 1..].iter().product();
        let s = self.dims[slot];
        let mut dims = self.dims.clone();
        dims[slot] = t;
        checked_volume(&dims)?;
        let mut out = vec![self.ring.zero(); outer * t * inner];
        for o in 0..outer {
            for k in 0..s {
                let src = (o * s + k) * inner;
                for j in 0..t {
                    let mkj = m.get(k, j);
                    if self.ring.is_zero(mkj) {
                        continue;
                    }
                    let dst = (o * t + j) * inner;
                    for i in 0..inner {
                        let v = &mut out[dst + i];
                        *v = self.ring.add(v, &self.ring.mul(mkj, &self.coeffs[src + i]));
                    }
                }
            }
        }
        Ok(MultilinearForm {
            ring: self.ring.clone(),
            dims,
            coeffs: out,
        })
    }

    /// `P o (A_1 x ... x A_d)`, a form on `(k^t)^d`.
    pub fn compose(&self, maps: &LinearMapTuple<R>) -> Result<Self> {
        if maps.maps().len() != self.arity() {
            return Err(Error::DimensionMismatch(format!(
                "{} maps for a form of arity {}",
                maps.maps().len(),
                self.arity()
            )));
        }
        let mut cur = self.clone();
        for (slot, m) in maps.maps().iter().enumerate() {
            cur = cur.mode_product(slot, m)?;
        }
        Ok(cur)
    }

    /// Reorders slots: slot `i` of the result is slot `perm[i]` of `self`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        let d = self.arity();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&p| p >= d || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput(format!("{perm:?} is not a permutation of {d} slots")));
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut src = vec![0; d];
        MultilinearForm::from_fn(self.ring.clone(), dims, |idx| {
            for (i, &p) in perm.iter().enumerate() {
                src[p] = idx[i];
            }
            self.coeff(&src).clone()
        })
    }

    /// Form on `V_1 + V_1' , ..., V_d + V_d'` equal to `P` on the first
    /// blocks plus `P'` on the second blocks.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.arity() != other.arity() || self.ring != other.ring {
            return Err(Error::DimensionMismatch("direct sum needs equal arity and ring".into()));
        }
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        MultilinearForm::from_fn(self.ring.clone(), dims, |idx| {
            if idx.iter().zip(&self.dims).all(|(k, s)| k < s) {
                self.coeff(idx).clone()
            } else if idx.iter().zip(&self.dims).all(|(k, s)| k >= s) {
                let shifted: Vec<usize> = idx.iter().zip(&self.dims).map(|(k, s)| k - s).collect();
                other.coeff(&shifted).clone()
            } else {
                self.ring.zero()
            }
        })
    }

    /// Coefficientwise image in another ring.
    pub fn map_ring<S, F>(&self, target: S, f: F) -> MultilinearForm<S>
    where
        S: CoeffRing,
        F: Fn(&R::Elem) -> S::Elem,
    {
        MultilinearForm {
            ring: target,
            dims: self.dims.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// `P(x, ..., x)` as a homogeneous form; requires equal slot dimensions.
    pub fn diagonal_restriction(&self) -> Result<HomogeneousForm<R>> {
        let s = self.dims[0];
        if self.dims.iter().any(|&d| d != s) {
            return Err(Error::DimensionMismatch(format!(
                "diagonal restriction needs equal slot dimensions, got {:?}",
                self.dims
            )));
        }
        let d = self.arity();
        let mut terms: std::collections::BTreeMap<Vec<u32>, R::Elem> = Default::default();
        for (idx, c) in self.support() {
            let mut exp = vec![0u32; s];
            for k in idx {
                exp[k] += 1;
            }
            let e = terms.entry(exp).or_insert_with(|| self.ring.zero());
            *e = self.ring.add(e, &c);
        }
        HomogeneousForm::new(self.ring.clone(), d, s, terms.into_iter().collect())
    }

    /// Linear combination `sum c_i P_i` of forms with a common shape.
    pub fn combination(forms: &[Self], coeffs: &[R::Elem]) -> Result<Self> {
        let first = forms
            .first()
            .ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
        if forms.len() != coeffs.len() {
            return Err(Error::DimensionMismatch("coefficient count".into()));
        }
        let mut acc = MultilinearForm::zero(first.ring.clone(), first.dims.clone())?;
        for (f, c) in forms.iter().zip(coeffs) {
            f.same_shape(first)?;
            if first.ring.is_zero(c) {
                continue;
            }
            for (a, b) in acc.coeffs.iter_mut().zip(&f.coeffs) {
                *a = first.ring.add(a, &first.ring.mul(c, b));
            }
        }
        Ok(acc)
    }
}
