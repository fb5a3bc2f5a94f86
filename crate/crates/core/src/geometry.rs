//! Point counts of singular and gradient loci over finite fields, and the
//! codimension estimates and audits built on them.
//!
//! Every count here is a literal enumeration of the locus; nothing goes
//! through rank shortcuts, so these counts are an independent route to the
//! numbers [`crate::bias`] computes.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::audit::{AuditReport, Verdict};
use crate::error::{check_cap, sat_pow, Error, Result};
use crate::field::{FiniteField, Fq};
use crate::forms::{FormCollection, HomogeneousForm, MultilinearForm};
use crate::linalg::{mat_vec, point_from_index, rank, Matrix};
use crate::rank::theorem::{collective_schmidt_bounds, largest_extension_degree};
use crate::rank::RankOptions;

/// Below this field size codimension verdicts are labeled low-confidence.
pub const MIN_CONFIDENT_Q: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confidence {
    Normal,
    Low,
}

impl std::fmt::Display for Confidence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Confidence::Normal => "normal",
            Confidence::Low => "low-confidence",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocusCount {
    pub total_points: u128,
    pub ambient_dim: usize,
    pub q: u32,
    pub codim_estimate: usize,
    pub confidence: Confidence,
}

impl LocusCount {
    pub fn new(total_points: u128, ambient_dim: usize, q: u32) -> Self {
        let mut c = LocusCount {
            total_points,
            ambient_dim,
            q,
            codim_estimate: 0,
            confidence: if q < MIN_CONFIDENT_Q { Confidence::Low } else { Confidence::Normal },
        };
        c.codim_estimate = codim_from_counts(&c, 1.0);
        c
    }

    /// `total_points / q^ambient_dim`.
    pub fn density(&self) -> f64 {
        self.total_points as f64 / (self.q as f64).powi(self.ambient_dim as i32)
    }
}

/// Smallest `t` with `total >= D q^{s - t}`; `s + 1` for an empty locus.
pub fn codim_from_counts(count: &LocusCount, d_threshold: f64) -> usize {
    let s = count.ambient_dim;
    if count.total_points == 0 {
        return s + 1;
    }
    let total = count.total_points as f64;
    (0..=s)
        .find(|&t| total >= d_threshold * (count.q as f64).powi((s - t) as i32))
        .unwrap_or(s + 1)
}

/// Counts prefix tuples `(x_1, .., x_{d-1})` by contracting one slot at a
/// time; `pred` sees the members reduced to linear forms in the last slot.
fn count_prefix<F>(members: &[MultilinearForm<FiniteField>], pred: &F) -> u128
where
    F: Fn(&[MultilinearForm<FiniteField>]) -> bool + Sync,
{
    if members[0].arity() == 1 {
        return u128::from(pred(members));
    }
    let field = members[0].ring();
    let s = members[0].dims()[0];
    let total = sat_pow(field.order() as u128, s) as u64;
    let step = |i: u64| {
        let x = point_from_index(field.order(), s, i);
        let next: Vec<_> = members
            .iter()
            .map(|m| m.contract(0, &x).expect("dims"))
            .collect();
        count_prefix(&next, pred)
    };
    if members[0].arity() >= 3 {
        (0..total).into_par_iter().map(step).sum()
    } else {
        (0..total).map(step).sum()
    }
}

fn slice_rank_deficient(members: &[MultilinearForm<FiniteField>]) -> bool {
    let field = members[0].ring();
    let cols = members[0].dims()[0];
    let rows: Vec<Vec<Fq>> = members.iter().map(|m| m.coeffs().to_vec()).collect();
    let m = Matrix::from_rows(rows, cols).expect("equal slice lengths");
    rank(field, &m).expect("finite field") < members.len()
}

fn prefix_dim(dims: &[usize]) -> usize {
    dims[..dims.len() - 1].iter().sum()
}

/// `Z_P`: tuples `(x_1, .., x_{d-1})` with `P(x_1, .., x_{d-1}, .) = 0`.
pub fn singular_locus_count(p: &MultilinearForm<FiniteField>, cap: u128) -> Result<LocusCount> {
    singular_locus_count_collection(&FormCollection::new(vec![p.clone()])?, cap)
}

/// Tuples whose last-slot slices of the members are linearly dependent.
pub fn singular_locus_count_collection(c: &FormCollection<FiniteField>, cap: u128) -> Result<LocusCount> {
    if c.arity() < 2 {
        return Err(Error::InvalidInput("singular locus needs arity >= 2".into()));
    }
    let q = c.ring().order();
    let ambient = prefix_dim(c.dims());
    check_cap("singular locus enumeration", sat_pow(q as u128, ambient), cap)?;
    let total = count_prefix(c.members(), &slice_rank_deficient);
    Ok(LocusCount::new(total, ambient, q))
}

/// The points of the singular locus of a collection, each the concatenation
/// `x_1 || .. || x_{d-1}`, in lexicographic order.
pub fn singular_locus_points(c: &FormCollection<FiniteField>, cap: u128) -> Result<Vec<Vec<Fq>>> {
    let q = c.ring().order();
    let ambient = prefix_dim(c.dims());
    let total = sat_pow(q as u128, ambient);
    check_cap("singular locus enumeration", total, cap)?;
    let dims = &c.dims()[..c.arity() - 1];
    let pts = (0..total as u64)
        .into_par_iter()
        .filter_map(|i| {
            let flat = point_from_index(q, ambient, i);
            let mut args = Vec::with_capacity(dims.len());
            let mut off = 0;
            for &s in dims {
                args.push(flat[off..off + s].to_vec());
                off += s;
            }
            let slices: Vec<Vec<Fq>> = c
                .members()
                .iter()
                .map(|m| m.slice(&args).expect("dims"))
                .collect();
            let m = Matrix::from_rows(slices, c.dims()[c.arity() - 1]).expect("dims");
            (rank(c.ring(), &m).expect("finite field") < c.len()).then_some(flat)
        })
        .collect();
    Ok(pts)
}

/// `2^{d-1} * codim Z_P`, the upper bound on `prk(P)` from the singular
/// locus. The estimate is only as good as the codimension estimate.
pub fn prk_upper_from_codim(p: &MultilinearForm<FiniteField>, cap: u128) -> Result<usize> {
    let count = singular_locus_count(p, cap)?;
    Ok((1usize << (p.arity() - 1)) * count.codim_estimate)
}

/// Exact size of `Z_P` for a combination of `m` blocks of the diagonal
/// collection: each of the `m * rbar` support coordinates needs a vanishing
/// factor among its `d - 1` prefix entries, the rest are free.
pub fn diagonal_locus_closed_form(q: u32, d: usize, s: usize, support: usize) -> u128 {
    let q = q as u128;
    let per = sat_pow(q, d - 1) - sat_pow(q - 1, d - 1);
    sat_pow(per, support) * sat_pow(q, (d - 1) * (s - support))
}

/// Exact size of the singular locus of the diagonal collection `D_1..D_n`.
/// Slices of different blocks have disjoint supports, so they are dependent
/// exactly when one of them vanishes.
pub fn diagonal_collection_locus_closed_form(q: u32, n: usize, rbar: usize, d: usize) -> u128 {
    let q = q as u128;
    let block = sat_pow(q, (d - 1) * rbar);
    let zero = sat_pow(sat_pow(q, d - 1) - sat_pow(q - 1, d - 1), rbar);
    sat_pow(block, n) - sat_pow(block - zero, n)
}

fn require_derivable(q: &HomogeneousForm<FiniteField>) -> Result<()> {
    let ch = q.ring().characteristic() as usize;
    if ch <= q.degree() {
        return Err(Error::SmallCharacteristic {
            characteristic: ch as u64,
            degree: q.degree(),
        });
    }
    Ok(())
}

/// Points where the Jacobian of the forms has rank `< n`; for one form, the
/// zeros of its gradient.
pub fn birch_rank_estimate(forms: &[HomogeneousForm<FiniteField>], cap: u128) -> Result<LocusCount> {
    let first = forms
        .first()
        .ok_or_else(|| Error::InvalidInput("empty collection".into()))?;
    for f in forms {
        require_derivable(f)?;
        if f.nvars() != first.nvars() {
            return Err(Error::DimensionMismatch("forms in different numbers of variables".into()));
        }
    }
    let field = first.ring();
    let q = field.order();
    let s = first.nvars();
    check_cap("gradient locus enumeration", sat_pow(q as u128, s), cap)?;
    let grads: Vec<Vec<HomogeneousForm<FiniteField>>> = forms.iter().map(|f| f.gradient()).collect::<Result<_>>()?;
    let n = forms.len();
    let total = (0..sat_pow(q as u128, s) as u64)
        .into_par_iter()
        .filter(|&i| {
            let x = point_from_index(q, s, i);
            let rows: Vec<Vec<Fq>> = grads
                .iter()
                .map(|g| g.iter().map(|p| p.evaluate(&x).expect("arity")).collect())
                .collect();
            let m = Matrix::from_rows(rows, s).expect("dims");
            rank(field, &m).expect("finite field") < n
        })
        .count() as u128;
    Ok(LocusCount::new(total, s, q))
}

pub fn gradient_locus_count(q: &HomogeneousForm<FiniteField>, cap: u128) -> Result<LocusCount> {
    birch_rank_estimate(std::slice::from_ref(q), cap)
}

#[derive(Clone, Debug)]
pub struct GeometryOptions {
    pub rank: RankOptions,
    pub cap: u128,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        GeometryOptions {
            rank: RankOptions::default(),
            cap: 1 << 20,
        }
    }
}

/// The largest extension of a prime field on which the gradient locus is
/// still enumerable within `cap`.
fn count_field(base: &FiniteField, s: usize, cap: u128) -> Result<FiniteField> {
    if !base.is_prime_field() {
        return Ok(base.clone());
    }
    let p = base.characteristic();
    let mut k = largest_extension_degree(p);
    while k > 1 && sat_pow((p as u128).pow(k), s) > cap {
        k -= 1;
    }
    FiniteField::default_extension(p, k)
}

/// Records `rk_B <= 2 rk` and `rk <= (d - 1)(rk_B + n - 1)` with the Schmidt
/// rank bounded by certificates and the Birch rank estimated by counting
/// points over the largest feasible extension of the base field.
pub fn geometry_inequality_audit(
    instance: &str,
    forms: &[HomogeneousForm<FiniteField>],
    opts: &GeometryOptions,
) -> Result<Vec<AuditReport>> {
    let first = forms
        .first()
        .ok_or_else(|| Error::InvalidInput("empty collection".into()))?;
    let d = first.degree();
    let n = forms.len();
    let (lower, upper, _) = collective_schmidt_bounds(forms, &opts.rank, opts.cap)?;
    let base = first.ring();
    let ext = count_field(base, first.nvars(), opts.cap)?;
    let lifted: Vec<HomogeneousForm<FiniteField>> = forms
        .iter()
        .map(|f| {
            f.map_ring(ext.clone(), |c| {
                if base.is_prime_field() {
                    ext.from_int(c.0 as i64)
                } else {
                    *c
                }
            })
        })
        .collect();
    let birch = birch_rank_estimate(&lifted, opts.cap)?;
    let rk_b = birch.codim_estimate;

    let rhs1 = 2 * upper;
    let v1 = if rk_b <= 2 * lower {
        Verdict::Consistent
    } else if rk_b > rhs1 {
        Verdict::Violation
    } else {
        Verdict::Inconclusive
    };
    let first_report = AuditReport::new("birch-vs-rank", instance, rk_b as f64, rhs1 as f64, v1)
        .constants("factor=2")
        .detail("rk_lower", lower)
        .detail("rk_upper", upper)
        .detail("count_field", &ext)
        .detail("points", birch.total_points)
        .detail("codim", "estimate")
        .detail("confidence", birch.confidence);

    let rhs2 = (d - 1) * (rk_b + n - 1);
    let v2 = if upper <= rhs2 {
        Verdict::Consistent
    } else if lower > rhs2 {
        Verdict::Violation
    } else {
        Verdict::Inconclusive
    };
    let second = AuditReport::new("rank-vs-birch", instance, upper as f64, rhs2 as f64, v2)
        .constants(format!("d-1={}", d - 1))
        .detail("rk_lower", lower)
        .detail("rk_b", rk_b)
        .detail("n", n)
        .detail("count_field", &ext)
        .detail("codim", "estimate")
        .detail("confidence", birch.confidence);
    Ok(vec![first_report, second])
}

/// Projects `points` along random `(s - t) x s` matrices and records the
/// largest fiber. `lhs` is the best projection's largest fiber, i.e. the
/// smallest maximum over the trials. `rhs` is the trivial bound `|points|`.
pub fn noether_fiber_audit(
    instance: &str,
    field: &FiniteField,
    points: &[Vec<Fq>],
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<AuditReport> {
    let s = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != s) {
        return Err(Error::DimensionMismatch("points of different lengths".into()));
    }
    if t > s {
        return Err(Error::InvalidInput(format!("codimension {t} exceeds dimension {s}")));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial".into()));
    }
    let q = field.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = usize::MAX;
    let mut worst = 0;
    for _ in 0..trials {
        let data: Vec<Fq> = (0..(s - t) * s).map(|_| Fq(rng.gen_range(0..q))).collect();
        let m = Matrix::from_vec(s - t, s, data)?;
        let mut fibers: HashMap<Vec<Fq>, usize> = HashMap::new();
        for p in points {
            *fibers.entry(mat_vec(field, &m, p)).or_default() += 1;
        }
        let max = fibers.values().copied().max().unwrap_or(0);
        best = best.min(max);
        worst = worst.max(max);
    }
    Ok(AuditReport::new("noether-fiber", instance, best as f64, points.len() as f64, Verdict::Recorded)
        .detail("q", q)
        .detail("s", s)
        .detail("t", t)
        .detail("points", points.len())
        .detail("trials", trials)
        .detail("max_over_trials", worst))
}

/// CSV rows `locus-id,q,points,codim-estimate,confidence`.
pub fn locus_csv(rows: &[(String, LocusCount)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
    w.write_record(["locus-id", "q", "points", "codim-estimate", "confidence"])
        .map_err(io)?;
    for (id, c) in rows {
        w.write_record([
            id.clone(),
            c.q.to_string(),
            c.total_points.to_string(),
            c.codim_estimate.to_string(),
            c.confidence.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf8"))
}
