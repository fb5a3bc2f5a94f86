//! Partition-rank upper bounds with certificates.
//!
//! Over any field the rank of a flattening `P: (V_I) x (V_J) -> k` bounds the
//! partition rank, and a rank factorization of the flattening is a
//! certificate. Over finite fields we also search for subspaces
//! `W_i <= V_i` with `P` vanishing on `W_1 x ... x W_d`: such subspaces give a
//! certificate of length `sum codim W_i` by splitting off the coordinates
//! cutting out each `W_i`. For `d <= 3` every partition-rank-one product has
//! a single-slot factor, so the minimum of `sum codim W_i` is the partition
//! rank and an exhausted search is exact.

use crate::error::{Error, Result};
use crate::field::{FiniteField, Fq};
use crate::forms::MultilinearForm;
use crate::linalg::{complete_basis, inverse, kernel_basis, rank_factorization, rref, subspaces, Matrix};
use crate::rank::certificate::{flattening, CertificateTerm, PartitionRankCertificate};
use crate::ring::CoeffRing;

/// Default cap on visited subspace tuples.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome<R: CoeffRing> {
    pub certificate: PartitionRankCertificate<R>,
    /// The certificate length equals the partition rank.
    pub exact: bool,
    /// The search stopped on its node budget.
    pub budget_exhausted: bool,
    pub nodes: u64,
}

impl<R: CoeffRing> SearchOutcome<R> {
    pub fn upper(&self) -> usize {
        self.certificate.len()
    }
}

fn reshape<R: CoeffRing>(ring: &R, dims: Vec<usize>, data: Vec<R::Elem>) -> MultilinearForm<R> {
    MultilinearForm::new(ring.clone(), dims, data).expect("flattening shape")
}

/// Certificate from a rank factorization of the flattening along
/// `left | complement`; `left` must be sorted, nonempty and proper.
pub fn flattening_certificate<R: CoeffRing>(
    p: &MultilinearForm<R>,
    left: &[usize],
) -> Result<PartitionRankCertificate<R>> {
    let ring = p.ring();
    let m = flattening(p, left);
    let (c, b) = rank_factorization(ring, &m)?;
    let right: Vec<usize> = (0..p.arity()).filter(|i| !left.contains(i)).collect();
    let ldims: Vec<usize> = left.iter().map(|&i| p.dims()[i]).collect();
    let rdims: Vec<usize> = right.iter().map(|&i| p.dims()[i]).collect();
    let terms = (0..b.rows())
        .map(|j| {
            CertificateTerm::new(
                left.to_vec(),
                reshape(ring, ldims.clone(), c.column(j)),
                reshape(ring, rdims.clone(), b.row(j).to_vec()),
            )
        })
        .collect();
    Ok(PartitionRankCertificate {
        dims: p.dims().to_vec(),
        terms,
    })
}

/// The bipartitions `{0} + T | rest` with `T` a proper subset of `1..d`.
pub fn bipartitions(d: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << (d - 1)) - 1)
        .map(|mask| {
            let mut left = vec![0];
            left.extend((1..d).filter(|&i| mask & (1 << (i - 1)) != 0));
            left
        })
        .collect()
}

/// Shortest flattening certificate over all bipartitions (first in
/// [`bipartitions`] order on ties). Requires a field and arity >= 2.
pub fn best_flattening_certificate<R: CoeffRing>(p: &MultilinearForm<R>) -> Result<PartitionRankCertificate<R>> {
    if p.arity() < 2 {
        return Err(Error::InvalidInput("flattenings need arity >= 2".into()));
    }
    let mut best: Option<PartitionRankCertificate<R>> = None;
    for left in bipartitions(p.arity()) {
        let cert = flattening_certificate(p, &left)?;
        if best.as_ref().is_none_or(|b| cert.len() < b.len()) {
            best = Some(cert);
        }
    }
    Ok(best.expect("at least one bipartition"))
}

/// Matrix rank of a bilinear form with a certificate of that length.
pub fn prk_exact_d2<R: CoeffRing>(p: &MultilinearForm<R>) -> Result<(usize, PartitionRankCertificate<R>)> {
    if p.arity() != 2 {
        return Err(Error::InvalidInput(format!("expected a bilinear form, got arity {}", p.arity())));
    }
    if !p.ring().is_field() {
        return Err(Error::NotAField(p.ring().to_string()));
    }
    let cert = flattening_certificate(p, &[0])?;
    Ok((cert.len(), cert))
}

/// Given, for each slot, linear functionals whose common kernel `W_i`
/// satisfies `P|_{W_1 x ... x W_d} = 0`, returns a certificate with one term
/// per functional (terms with a zero cofactor dropped).
pub fn certificate_from_annihilators<R: CoeffRing>(
    p: &MultilinearForm<R>,
    ann: &[Vec<Vec<R::Elem>>],
) -> Result<PartitionRankCertificate<R>> {
    let ring = p.ring();
    let d = p.arity();
    if ann.len() != d {
        return Err(Error::DimensionMismatch("one annihilator list per slot".into()));
    }
    let mut bases = Vec::with_capacity(d);
    let mut inverses = Vec::with_capacity(d);
    for (i, a) in ann.iter().enumerate() {
        let s = p.dims()[i];
        let rows = complete_basis(ring, a, s)?;
        if rows.len() != s || rows[..a.len()] != a[..] {
            return Err(Error::InvalidInput(format!("annihilator of slot {i} is not independent")));
        }
        let b = Matrix::from_rows(rows, s)?;
        let inv = inverse(ring, &b)?.ok_or_else(|| Error::InvalidInput("singular basis".into()))?;
        bases.push(b);
        inverses.push(inv);
    }
    let mut pp = p.clone();
    for (i, inv) in inverses.iter().enumerate() {
        pp = pp.mode_product(i, inv)?;
    }
    let c: Vec<usize> = ann.iter().map(Vec::len).collect();
    // cofactors[i][j]: the (d-1)-form multiplying the j-th new coordinate of slot i
    let mut cofactors: Vec<Vec<Option<MultilinearForm<R>>>> = c.iter().map(|&ci| vec![None; ci]).collect();
    for (idx, a) in pp.support() {
        let Some(i) = (0..d).find(|&i| idx[i] < c[i]) else {
            return Err(Error::InvalidInput(
                "form does not vanish on the common kernel of the annihilators".into(),
            ));
        };
        let slot = &mut cofactors[i][idx[i]];
        let mut rest_dims = p.dims().to_vec();
        rest_dims.remove(i);
        let f = slot.get_or_insert_with(|| MultilinearForm::zero(ring.clone(), rest_dims).expect("shape"));
        let mut rest = idx.clone();
        rest.remove(i);
        let v = ring.add(f.coeff(&rest), &a);
        f.set_coeff(&rest, v)?;
    }
    let mut terms = Vec::new();
    for (i, row) in cofactors.into_iter().enumerate() {
        for (j, cof) in row.into_iter().enumerate() {
            let Some(mut s) = cof else { continue };
            // Substitute y_l = B_l x_l back in every other slot.
            let others: Vec<usize> = (0..d).filter(|&l| l != i).collect();
            for (pos, &l) in others.iter().enumerate() {
                s = s.mode_product(pos, &bases[l])?;
            }
            let r = MultilinearForm::new(ring.clone(), vec![p.dims()[i]], bases[i].row(j).to_vec())?;
            terms.push(CertificateTerm::new(vec![i], r, s));
        }
    }
    Ok(PartitionRankCertificate {
        dims: p.dims().to_vec(),
        terms,
    })
}

/// Options for [`prk_upper_search`].
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub budget: u64,
    /// A known lower bound; the search stops as soon as it is met.
    pub lower_bound: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_SEARCH_BUDGET,
            lower_bound: 0,
        }
    }
}

struct Search<'a> {
    field: &'a FiniteField,
    free: usize,
    order: Vec<usize>,
    spaces: Vec<Vec<Vec<Vec<Vec<Fq>>>>>,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    best: usize,
    stop_at: usize,
    best_choice: Option<Vec<Option<Vec<Vec<Fq>>>>>,
}

impl Search<'_> {
    fn record(&mut self, total: usize, chosen: &[Option<Vec<Vec<Fq>>>]) {
        if total < self.best {
            self.best = total;
            self.best_choice = Some(chosen.to_vec());
        }
    }

    fn dfs(&mut self, level: usize, form: &MultilinearForm<FiniteField>, codim: usize, chosen: &mut Vec<Option<Vec<Vec<Fq>>>>) {
        if self.exhausted || self.best <= self.stop_at {
            return;
        }
        if form.is_zero() {
            self.record(codim, chosen);
            return;
        }
        if level == self.order.len() {
            let rows: Vec<usize> = (0..form.arity()).filter(|&i| i != self.free).collect();
            let m = flattening(form, &rows);
            let r = crate::linalg::rank(self.field, &m).expect("finite field");
            self.record(codim + r, chosen);
            return;
        }
        let slot = self.order[level];
        let s = form.dims()[slot];
        for c in 0..=s {
            if codim + c >= self.best {
                break;
            }
            if c == s {
                // W = 0: the restriction vanishes.
                self.nodes += 1;
                chosen[level] = Some(Vec::new());
                self.record(codim + c, chosen);
                chosen[level] = None;
                break;
            }
            let n_spaces = self.spaces[level][s - c].len();
            for w in 0..n_spaces {
                self.nodes += 1;
                if self.nodes > self.budget {
                    self.exhausted = true;
                    return;
                }
                let basis = self.spaces[level][s - c][w].clone();
                let restricted = if c == 0 {
                    form.clone()
                } else {
                    let rows: Vec<Vec<Fq>> = (0..s).map(|k| basis.iter().map(|b| b[k]).collect()).collect();
                    let m = Matrix::from_rows(rows, s - c).expect("basis shape");
                    form.mode_product(slot, &m).expect("restriction")
                };
                chosen[level] = if c == 0 { None } else { Some(basis) };
                self.dfs(level + 1, &restricted, codim + c, chosen);
                chosen[level] = None;
                if self.exhausted || self.best <= self.stop_at || codim + c >= self.best {
                    break;
                }
            }
        }
    }
}

/// Partition-rank upper bound over a finite field with a verified-shape
/// certificate. Starts from the best flattening, then searches vanishing
/// subspace tuples within `opts.budget` nodes.
pub fn prk_upper_search(
    p: &MultilinearForm<FiniteField>,
    opts: &SearchOptions,
) -> Result<SearchOutcome<FiniteField>> {
    let d = p.arity();
    if p.is_zero() {
        return Ok(SearchOutcome {
            certificate: PartitionRankCertificate::empty(p.dims()),
            exact: true,
            budget_exhausted: false,
            nodes: 0,
        });
    }
    if d == 1 {
        return Err(Error::InfiniteRank(1));
    }
    let field = p.ring();
    let flat = best_flattening_certificate(p)?;
    if flat.len() <= opts.lower_bound.max(1) {
        return Ok(SearchOutcome {
            certificate: flat,
            exact: true,
            budget_exhausted: false,
            nodes: 0,
        });
    }
    // The largest slot is handled by a rank computation instead of enumeration.
    let free = (0..d).rev().max_by_key(|&i| p.dims()[i]).expect("arity >= 2");
    let order: Vec<usize> = (0..d).filter(|&i| i != free).collect();
    let spaces = order
        .iter()
        .map(|&i| {
            let s = p.dims()[i];
            (0..=s).map(|dim| subspaces(field, s, dim)).collect()
        })
        .collect();
    let mut search = Search {
        field,
        free,
        order: order.clone(),
        spaces,
        budget: opts.budget,
        nodes: 0,
        exhausted: false,
        best: flat.len(),
        stop_at: opts.lower_bound.max(1),
        best_choice: None,
    };
    let mut chosen = vec![None; order.len()];
    search.dfs(0, p, 0, &mut chosen);
    let complete = !search.exhausted;
    let certificate = match &search.best_choice {
        None => flat,
        Some(choice) => {
            let mut ann: Vec<Vec<Vec<Fq>>> = vec![Vec::new(); d];
            let mut restricted = p.clone();
            for (level, &slot) in order.iter().enumerate() {
                let s = p.dims()[slot];
                match &choice[level] {
                    None => {}
                    Some(basis) if basis.is_empty() => {
                        ann[slot] = (0..s)
                            .map(|k| (0..s).map(|j| if j == k { Fq(1) } else { Fq(0) }).collect())
                            .collect();
                    }
                    Some(basis) => {
                        let w = Matrix::from_rows(basis.clone(), s)?;
                        ann[slot] = kernel_basis(field, &w)?;
                    }
                }
            }
            // Functionals on the free slot: the span of the restricted slices.
            let mut zero_slot = false;
            for (level, &slot) in order.iter().enumerate() {
                let s = p.dims()[slot];
                match &choice[level] {
                    None => {}
                    Some(basis) if basis.is_empty() => zero_slot = true,
                    Some(basis) => {
                        let rows: Vec<Vec<Fq>> = (0..s).map(|k| basis.iter().map(|b| b[k]).collect()).collect();
                        restricted = restricted.mode_product(slot, &Matrix::from_rows(rows, basis.len())?)?;
                    }
                }
            }
            if !zero_slot && !restricted.is_zero() {
                let rows: Vec<usize> = (0..d).filter(|&i| i != free).collect();
                let mut m = flattening(&restricted, &rows).row_vecs();
                let r = rref(field, &mut m)?.len();
                m.truncate(r);
                ann[free] = m;
            }
            certificate_from_annihilators(p, &ann)?
        }
    };
    let exact = certificate.len() <= opts.lower_bound.max(1) || (complete && d <= 3);
    Ok(SearchOutcome {
        certificate,
        exact,
        budget_exhausted: !complete,
        nodes: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{diagonal_form, random_form};
    use crate::rank::certificate::verify_certificate;
    use crate::ring::Rationals;

    #[test]
    fn d2_examples() {
        let f2 = FiniteField::prime(2).unwrap();
        let id = diagonal_form(&f2, &[3, 3], 3).unwrap();
        let (r, cert) = prk_exact_d2(&id).unwrap();
        assert_eq!(r, 3);
        assert!(verify_certificate(&id, &cert).unwrap());
        let zero = MultilinearForm::zero(f2, vec![3, 3]).unwrap();
        assert_eq!(prk_exact_d2(&zero).unwrap().0, 0);
        let q = Rationals;
        let m = MultilinearForm::from_terms(
            q,
            vec![2, 2],
            &[(1, vec![0, 0]), (2, vec![0, 1]), (2, vec![1, 0]), (4, vec![1, 1])],
        )
        .unwrap();
        assert_eq!(prk_exact_d2(&m).unwrap().0, 1);
        let z = MultilinearForm::zero(crate::ring::Integers, vec![2, 2]).unwrap();
        assert!(matches!(prk_exact_d2(&z), Err(Error::NotAField(_))));
    }

    #[test]
    fn search_examples() {
        let f2 = FiniteField::prime(2).unwrap();
        let one = diagonal_form(&f2, &[1, 1, 1], 1).unwrap();
        let out = prk_upper_search(&one, &SearchOptions::default()).unwrap();
        assert_eq!((out.upper(), out.exact), (1, true));

        let two = diagonal_form(&f2, &[2, 2, 2], 2).unwrap();
        let out = prk_upper_search(&two, &SearchOptions::default()).unwrap();
        assert_eq!((out.upper(), out.exact), (2, true));
        assert!(verify_certificate(&two, &out.certificate).unwrap());

        let zero = MultilinearForm::zero(f2.clone(), vec![2, 2, 2]).unwrap();
        assert_eq!(prk_upper_search(&zero, &SearchOptions::default()).unwrap().upper(), 0);
        let lin = MultilinearForm::from_terms(f2, vec![2], &[(1, vec![0])]).unwrap();
        assert!(matches!(
            prk_upper_search(&lin, &SearchOptions::default()),
            Err(Error::InfiniteRank(1))
        ));
    }

    #[test]
    fn search_beats_flattening() {
        // x1 y1 z1 + x2 y2 z2 + x1 y2 z3 ... build a form whose flattenings
        // all have rank 3 but which vanishes on a codim-2 subspace tuple:
        // P = x1 * A(y, z) + y1 * B(x, z) with generic A, B.
        let f3 = FiniteField::prime(3).unwrap();
        let a = random_form(&f3, 2, &[3, 3], 11).unwrap();
        let b = random_form(&f3, 2, &[3, 3], 12).unwrap();
        let p = MultilinearForm::from_fn(f3.clone(), vec![3, 3, 3], |idx| {
            let mut v = Fq(0);
            if idx[0] == 0 {
                v = f3.add(v, *a.coeff(&[idx[1], idx[2]]));
            }
            if idx[1] == 0 {
                v = f3.add(v, *b.coeff(&[idx[0], idx[2]]));
            }
            v
        })
        .unwrap();
        let out = prk_upper_search(&p, &SearchOptions::default()).unwrap();
        assert!(out.upper() <= 2);
        assert!(verify_certificate(&p, &out.certificate).unwrap());
    }

    #[test]
    fn certificates_from_annihilators_verify() {
        let f5 = FiniteField::prime(5).unwrap();
        for seed in 0..20 {
            let p = random_form(&f5, 3, &[2, 3, 2], seed).unwrap();
            let out = prk_upper_search(&p, &SearchOptions::default()).unwrap();
            assert!(verify_certificate(&p, &out.certificate).unwrap(), "seed {seed}");
            assert!(out.exact);
        }
    }
}
