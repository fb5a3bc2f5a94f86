//! Partition rank and Schmidt rank: certificates, bounds, collective rank,
//! and the comparison audit between a field and its algebraic closure.

pub mod certificate;
pub mod constants;
pub mod schmidt;
pub mod search;
pub mod theorem;

use std::fmt;

use serde::Serialize;

use crate::bias::{bias_exact, prk_lower_from_bias, DEFAULT_BIAS_CAP};
use crate::error::{check_cap, sat_pow, Error, Result};
use crate::field::{FiniteField, Fq};
use crate::forms::{projective_points, FormCollection, MultilinearForm};

pub use certificate::{verify_certificate, CertificateTerm, PartitionRankCertificate};
pub use constants::{Constant, ConstantsTable, FieldClass, RegimeConstants};
pub use schmidt::{
    central_binomial, prk_certificate_from_schmidt, schmidt_from_prk_certificate, schmidt_upper_from_prk,
    sum_of_powers_decomposition, verify_schmidt, SchmidtDecomposition,
};
pub use search::{
    best_flattening_certificate, prk_exact_d2, prk_upper_search, SearchOptions, SearchOutcome, DEFAULT_SEARCH_BUDGET,
};
pub use theorem::{main_theorem_audit_finite, main_theorem_audit_integers};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerSource {
    Bias,
    Exact,
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperSource {
    Certificate,
    D2Elimination,
    TrivialMinDim,
}

impl fmt::Display for LowerSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LowerSource::Bias => "bias",
            LowerSource::Exact => "exact",
            LowerSource::Trivial => "trivial",
        })
    }
}

impl fmt::Display for UpperSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpperSource::Certificate => "certificate",
            UpperSource::D2Elimination => "d2-elimination",
            UpperSource::TrivialMinDim => "trivial-min-dim",
        })
    }
}

/// `lower <= prk <= upper`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankBounds {
    pub lower: usize,
    pub lower_source: LowerSource,
    pub upper: usize,
    pub upper_source: UpperSource,
}

impl RankBounds {
    pub fn gap(&self) -> usize {
        self.upper - self.lower
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Clone, Debug)]
pub struct RankOptions {
    pub budget: u64,
    pub bias_cap: u128,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            budget: DEFAULT_SEARCH_BUDGET,
            bias_cap: DEFAULT_BIAS_CAP,
        }
    }
}

/// Bounds on the partition rank of `p` over its finite field, with the
/// certificate behind the upper bound.
pub fn rank_bounds(
    p: &MultilinearForm<FiniteField>,
    opts: &RankOptions,
) -> Result<(RankBounds, PartitionRankCertificate<FiniteField>)> {
    if p.is_zero() {
        let b = RankBounds {
            lower: 0,
            lower_source: LowerSource::Exact,
            upper: 0,
            upper_source: UpperSource::Certificate,
        };
        return Ok((b, PartitionRankCertificate::empty(p.dims())));
    }
    if p.arity() == 1 {
        return Err(Error::InfiniteRank(1));
    }
    if p.arity() == 2 {
        let (r, cert) = prk_exact_d2(p)?;
        let b = RankBounds {
            lower: r,
            lower_source: LowerSource::Exact,
            upper: r,
            upper_source: UpperSource::D2Elimination,
        };
        return Ok((b, cert));
    }
    let (lower, lower_source) = match bias_exact(p, opts.bias_cap) {
        Ok(b) => (prk_lower_from_bias(&b).unwrap_or(1).max(1), LowerSource::Bias),
        Err(Error::CapExceeded { .. }) => (1, LowerSource::Trivial),
        Err(e) => return Err(e),
    };
    let out = prk_upper_search(
        p,
        &SearchOptions {
            budget: opts.budget,
            lower_bound: lower,
        },
    )?;
    let upper = out.upper();
    let min_dim = *p.dims().iter().min().expect("arity >= 2");
    let upper_source = if upper == min_dim {
        UpperSource::TrivialMinDim
    } else {
        UpperSource::Certificate
    };
    let (lower, lower_source) = if out.exact { (upper, LowerSource::Exact) } else { (lower, lower_source) };
    Ok((
        RankBounds {
            lower,
            lower_source,
            upper,
            upper_source,
        },
        out.certificate,
    ))
}

/// `min_{a != 0} rank_fn(sum a_l P_l)` over one representative per projective
/// point, returning the first minimizing combination in the order of
/// [`projective_points`].
pub fn collective_prk<F>(c: &FormCollection<FiniteField>, cap: u128, mut rank_fn: F) -> Result<(usize, Vec<Fq>)>
where
    F: FnMut(&MultilinearForm<FiniteField>) -> Result<usize>,
{
    let field = c.ring();
    check_cap("combinations", sat_pow(field.order() as u128, c.len()), cap)?;
    let mut best: Option<(usize, Vec<Fq>)> = None;
    for a in projective_points(field, c.len(), cap)? {
        let r = rank_fn(&c.combination(&a)?)?;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, a));
        }
    }
    Ok(best.expect("nonempty collection"))
}

/// Bounds on the collective partition rank: the minimum of the per-combination
/// lower and upper bounds, with the combination achieving the upper bound.
#[derive(Clone, Debug)]
pub struct CollectiveBounds {
    pub lower: usize,
    pub upper: usize,
    pub witness: Vec<Fq>,
    pub certificate: PartitionRankCertificate<FiniteField>,
}

pub fn collective_rank_bounds(
    c: &FormCollection<FiniteField>,
    cap: u128,
    opts: &RankOptions,
) -> Result<CollectiveBounds> {
    let field = c.ring();
    check_cap("combinations", sat_pow(field.order() as u128, c.len()), cap)?;
    let mut lower = usize::MAX;
    let mut best: Option<(usize, Vec<Fq>, PartitionRankCertificate<FiniteField>)> = None;
    for a in projective_points(field, c.len(), cap)? {
        let (b, cert) = rank_bounds(&c.combination(&a)?, opts)?;
        lower = lower.min(b.lower);
        if best.as_ref().is_none_or(|(u, _, _)| b.upper < *u) {
            best = Some((b.upper, a, cert));
        }
    }
    let (upper, witness, certificate) = best.expect("nonempty collection");
    Ok(CollectiveBounds {
        lower,
        upper,
        witness,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{diagonal_collection, diagonal_form};

    #[test]
    fn collective_examples() {
        let f2 = FiniteField::prime(2).unwrap();
        let q1 = MultilinearForm::from_terms(f2.clone(), vec![2, 2], &[(1, vec![0, 0])]).unwrap();
        let q2 = MultilinearForm::from_terms(f2.clone(), vec![2, 2], &[(1, vec![0, 1])]).unwrap();
        let c = FormCollection::new(vec![q1.clone(), q2]).unwrap();
        let (r, a) = collective_prk(&c, 1 << 20, |p| Ok(prk_exact_d2(p)?.0)).unwrap();
        assert_eq!(r, 1);
        assert_eq!(a, vec![Fq(1), Fq(0)]);

        let diag = diagonal_collection(&f2, 2, 1, 2).unwrap();
        let (r, a) = collective_prk(&diag, 1 << 20, |p| Ok(prk_exact_d2(p)?.0)).unwrap();
        assert_eq!(r, 1);
        assert_eq!(a, vec![Fq(1), Fq(0)]);

        let single = FormCollection::new(vec![q1.clone()]).unwrap();
        assert_eq!(collective_prk(&single, 1 << 20, |p| Ok(prk_exact_d2(p)?.0)).unwrap().0, 1);
    }

    #[test]
    fn bounds_on_diagonals() {
        let f3 = FiniteField::prime(3).unwrap();
        for r in 0..=3 {
            let p = diagonal_form(&f3, &[3, 3, 3], r).unwrap();
            let (b, cert) = rank_bounds(&p, &RankOptions::default()).unwrap();
            assert_eq!((b.lower, b.upper), (r, r));
            assert!(verify_certificate(&p, &cert).unwrap());
        }
    }
}
