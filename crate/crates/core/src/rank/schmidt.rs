//! Schmidt decompositions `Q = sum R_i S_i` and the two translations between
//! them and partition-rank certificates of the polarization.

use crate::error::{Error, Result};
use crate::forms::HomogeneousForm;
use crate::linalg::combinations;
use crate::rank::certificate::{CertificateTerm, PartitionRankCertificate};
use crate::ring::CoeffRing;

/// `Q = sum_i R_i S_i` with `R_i`, `S_i` of positive degree.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition<R: CoeffRing> {
    pub terms: Vec<(HomogeneousForm<R>, HomogeneousForm<R>)>,
}

impl<R: CoeffRing> SchmidtDecomposition<R> {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn expand(&self, ring: &R, degree: usize, nvars: usize) -> Result<HomogeneousForm<R>> {
        let mut acc = HomogeneousForm::zero(ring.clone(), degree, nvars)?;
        for (r, s) in &self.terms {
            if r.degree() == 0 || s.degree() == 0 {
                return Err(Error::InvalidInput("Schmidt factors need positive degree".into()));
            }
            acc = acc.add(&r.mul(s)?)?;
        }
        Ok(acc)
    }
}

/// True iff every factor has positive degree and the products sum to `q`.
pub fn verify_schmidt<R: CoeffRing>(q: &HomogeneousForm<R>, dec: &SchmidtDecomposition<R>) -> Result<bool> {
    Ok(dec.expand(q.ring(), q.degree(), q.nvars())? == *q)
}

fn check_characteristic<R: CoeffRing>(ring: &R, d: usize) -> Result<()> {
    let ch = ring.characteristic();
    if ch != 0 && ch <= d as u64 {
        return Err(Error::SmallCharacteristic {
            characteristic: ch,
            degree: d,
        });
    }
    Ok(())
}

/// Partition-rank certificate for `Q~` from a Schmidt decomposition of `Q`:
/// `(RS)~(x_1..x_d) = sum_{|J| = deg R} R~(x_J) S~(x_{J^c})`, giving at most
/// `binom(d, floor(d/2))` terms per product.
pub fn prk_certificate_from_schmidt<R: CoeffRing>(
    q: &HomogeneousForm<R>,
    dec: &SchmidtDecomposition<R>,
) -> Result<PartitionRankCertificate<R>> {
    let d = q.degree();
    check_characteristic(q.ring(), d)?;
    let s = q.nvars();
    let mut terms = Vec::new();
    for (r, sf) in &dec.terms {
        if r.degree() + sf.degree() != d || r.degree() == 0 || sf.degree() == 0 {
            return Err(Error::InvalidInput(format!(
                "factor degrees {} + {} do not split degree {d}",
                r.degree(),
                sf.degree()
            )));
        }
        let rt = r.polarize()?;
        let st = sf.polarize()?;
        for left in combinations(d, r.degree()) {
            terms.push(CertificateTerm::new(left, rt.clone(), st.clone()));
        }
    }
    Ok(PartitionRankCertificate {
        dims: vec![s; d],
        terms,
    })
}

/// Schmidt decomposition of `Q` from a certificate for `Q~`, by restricting
/// each product to the diagonal: `Q(x) = (1/d!) sum R(x,..,x) S(x,..,x)`.
/// Products vanishing on the diagonal are dropped. Needs a field of
/// characteristic 0 or greater than `d`.
pub fn schmidt_from_prk_certificate<R: CoeffRing>(
    q: &HomogeneousForm<R>,
    cert: &PartitionRankCertificate<R>,
) -> Result<SchmidtDecomposition<R>> {
    let d = q.degree();
    let ring = q.ring();
    check_characteristic(ring, d)?;
    if !ring.is_field() {
        return Err(Error::NotAField(ring.to_string()));
    }
    if cert.dims != vec![q.nvars(); d] {
        return Err(Error::DimensionMismatch(format!(
            "certificate dims {:?} for a form in {} variables of degree {d}",
            cert.dims,
            q.nvars()
        )));
    }
    let inv = ring.inv(&ring.factorial(d)).ok_or(Error::ZeroDivision)?;
    let mut terms = Vec::new();
    for t in &cert.terms {
        let r = t.r.diagonal_restriction()?;
        let s = t.s.diagonal_restriction()?;
        if r.is_zero() || s.is_zero() {
            continue;
        }
        terms.push((r.scale(&inv), s));
    }
    Ok(SchmidtDecomposition { terms })
}

/// `x_1^d + ... + x_s^d` as a Schmidt decomposition: for odd `d` pairs use
/// `x^d + y^d = (x + y) sum_j (-1)^j x^{d-1-j} y^j`, for even `d` each power
/// splits as `x * x^{d-1}`.
pub fn sum_of_powers_decomposition<R: CoeffRing>(ring: &R, d: usize, s: usize) -> Result<SchmidtDecomposition<R>> {
    if d < 2 {
        return Err(Error::InvalidInput("Schmidt decompositions need degree >= 2".into()));
    }
    let unit = |i: usize, e: u32| {
        let mut v = vec![0u32; s];
        v[i] = e;
        v
    };
    let mut terms = Vec::new();
    let mut i = 0;
    while i < s {
        if d % 2 == 1 && i + 1 < s {
            let j = i + 1;
            let lin = HomogeneousForm::from_int_terms(ring.clone(), 1, s, &[(1, unit(i, 1)), (1, unit(j, 1))])?;
            let cof: Vec<(i64, Vec<u32>)> = (0..d)
                .map(|k| {
                    let mut e = vec![0u32; s];
                    e[i] = (d - 1 - k) as u32;
                    e[j] = k as u32;
                    (if k % 2 == 0 { 1 } else { -1 }, e)
                })
                .collect();
            terms.push((lin, HomogeneousForm::from_int_terms(ring.clone(), d - 1, s, &cof)?));
            i += 2;
        } else {
            let lin = HomogeneousForm::from_int_terms(ring.clone(), 1, s, &[(1, unit(i, 1))])?;
            let rest = HomogeneousForm::from_int_terms(ring.clone(), d - 1, s, &[(1, unit(i, d as u32 - 1))])?;
            terms.push((lin, rest));
            i += 1;
        }
    }
    Ok(SchmidtDecomposition { terms })
}

/// Schmidt-rank upper bound for `Q` from a partition-rank certificate of its
/// polarization (the restricted decomposition's length).
pub fn schmidt_upper_from_prk<R: CoeffRing>(
    q: &HomogeneousForm<R>,
    cert: &PartitionRankCertificate<R>,
) -> Result<(usize, SchmidtDecomposition<R>)> {
    let dec = schmidt_from_prk_certificate(q, cert)?;
    Ok((dec.len(), dec))
}

/// `binom(n, k)`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `binom(d, floor(d/2))`, the blow-up factor from Schmidt to partition rank.
pub fn central_binomial(d: usize) -> u128 {
    binomial(d, d / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::rank::certificate::verify_certificate;
    use crate::ring::{Integers, Rationals};

    #[test]
    fn monomial_xyz() {
        let z = Integers;
        let x1 = HomogeneousForm::from_int_terms(z.clone(), 1, 3, &[(1, vec![1, 0, 0])]).unwrap();
        let x2x3 = HomogeneousForm::from_int_terms(z.clone(), 2, 3, &[(1, vec![0, 1, 1])]).unwrap();
        let q = x1.mul(&x2x3).unwrap();
        let dec = SchmidtDecomposition { terms: vec![(x1, x2x3)] };
        assert!(verify_schmidt(&q, &dec).unwrap());
        let cert = prk_certificate_from_schmidt(&q, &dec).unwrap();
        assert!(cert.len() <= 3);
        assert!(verify_certificate(&q.polarize().unwrap(), &cert).unwrap());
        // Diagonal restriction needs a field.
        assert!(matches!(
            schmidt_from_prk_certificate(&q, &cert),
            Err(Error::NotAField(_))
        ));
    }

    #[test]
    fn round_trip_over_rationals() {
        let r = Rationals;
        for d in 2..=4 {
            let q = HomogeneousForm::from_int_terms(
                r.clone(),
                d,
                2,
                &[(1, vec![d as u32, 0]), (1, vec![0, d as u32])],
            )
            .unwrap();
            let dec = sum_of_powers_decomposition(&r, d, 2).unwrap();
            assert!(verify_schmidt(&q, &dec).unwrap());
            let cert = prk_certificate_from_schmidt(&q, &dec).unwrap();
            assert!(verify_certificate(&q.polarize().unwrap(), &cert).unwrap());
            let back = schmidt_from_prk_certificate(&q, &cert).unwrap();
            assert!(verify_schmidt(&q, &back).unwrap());
            assert!(back.len() <= cert.len());
        }
        let zero = HomogeneousForm::zero(r.clone(), 3, 2).unwrap();
        let empty = PartitionRankCertificate::empty(&[2, 2, 2]);
        assert_eq!(schmidt_from_prk_certificate(&zero, &empty).unwrap().len(), 0);
    }

    #[test]
    fn sum_of_powers() {
        let f7 = FiniteField::prime(7).unwrap();
        for d in 2..=5 {
            for s in 1..=4 {
                let dec = sum_of_powers_decomposition(&f7, d, s).unwrap();
                let terms: Vec<(i64, Vec<u32>)> = (0..s)
                    .map(|i| {
                        let mut e = vec![0; s];
                        e[i] = d as u32;
                        (1, e)
                    })
                    .collect();
                let q = HomogeneousForm::from_int_terms(f7.clone(), d, s, &terms).unwrap();
                assert!(verify_schmidt(&q, &dec).unwrap());
                let want = if d % 2 == 1 { s.div_ceil(2) } else { s };
                assert_eq!(dec.len(), want);
            }
        }
    }

    #[test]
    fn small_characteristic_rejected() {
        let f3 = FiniteField::prime(3).unwrap();
        let q = HomogeneousForm::from_int_terms(f3.clone(), 3, 1, &[(1, vec![3])]).unwrap();
        let dec = sum_of_powers_decomposition(&f3, 3, 1).unwrap();
        assert!(matches!(
            prk_certificate_from_schmidt(&q, &dec),
            Err(Error::SmallCharacteristic { .. })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(central_binomial(3), 3);
        assert_eq!(central_binomial(4), 6);
        assert_eq!(binomial(5, 2), 10);
    }
}
