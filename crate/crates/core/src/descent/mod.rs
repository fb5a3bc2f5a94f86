//! Box counting over the integers, the scaling lemma, small kernel vectors
//! and descent of rank bounds from `F_p` to `Q`.

pub mod kernel;
pub mod norm;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::audit::{AuditReport, Verdict};
use crate::bias::{bias_exact, prk_lower_from_bias};
use crate::error::{check_cap, sat_pow, Error, Result};
use crate::forms::{reduce_mod_p, MultilinearForm};
use crate::rank::{best_flattening_certificate, rank_bounds, verify_certificate, RankOptions};
use crate::ring::{CoeffRing, Integers, Rationals};

pub use kernel::{apply, determinant, max_norm, rank_by_minors, small_kernel_vector};
pub use norm::{
    check_pseudo_norm, linear_growth_ratios, AxiomCheck, BasisRing, NormedDomain, PolyBasisRing, RingModel,
    RingModelDescriptor,
};

/// Target group of a box-counting system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Group {
    Integers,
    Modulo(u64),
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Group::Integers => f.write_str("Z"),
            Group::Modulo(p) => write!(f, "Z/{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxVariant {
    /// `0 <= x_j < R`.
    Closed,
    /// `-R < x_j < R`.
    Symmetric,
}

/// `N = N_{LR}` (closed box) and `N' = N'_R` (symmetric box).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoxCountResult {
    pub n: u128,
    pub n_prime: u128,
    pub r: u64,
    pub l: u64,
    pub s: usize,
}

/// Integer multilinear system flattened to monomials in global variable
/// indices.
struct Compiled {
    s: usize,
    equations: Vec<Vec<(Vec<usize>, i128)>>,
}

fn compile(system: &[MultilinearForm<Integers>]) -> Result<Compiled> {
    let first = system
        .first()
        .ok_or_else(|| Error::InvalidInput("empty system".into()))?;
    if system.iter().any(|f| f.dims() != first.dims()) {
        return Err(Error::DimensionMismatch("equations on different spaces".into()));
    }
    let mut offsets = Vec::with_capacity(first.arity());
    let mut acc = 0;
    for &s in first.dims() {
        offsets.push(acc);
        acc += s;
    }
    let equations = system
        .iter()
        .map(|f| {
            f.support()
                .into_iter()
                .map(|(idx, c)| {
                    let c = c
                        .to_i128()
                        .ok_or_else(|| Error::InvalidInput("coefficient too large for box counting".into()))?;
                    Ok((idx.iter().zip(&offsets).map(|(i, o)| i + o).collect(), c))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Compiled { s: acc, equations })
}

fn vanishes(eqs: &Compiled, group: Group, x: &[i128]) -> bool {
    eqs.equations.iter().all(|terms| {
        let v: i128 = terms
            .iter()
            .map(|(vars, c)| vars.iter().fold(*c, |acc, &j| acc * x[j]))
            .sum();
        match group {
            Group::Integers => v == 0,
            Group::Modulo(p) => v.rem_euclid(p as i128) == 0,
        }
    })
}

/// Exact number of common zeros of `system` (all slots concatenated into
/// `x in Z^s`) in the box.
pub fn count_box_solutions(
    system: &[MultilinearForm<Integers>],
    group: Group,
    r: u64,
    variant: BoxVariant,
    cap: u128,
) -> Result<u128> {
    if let Group::Modulo(p) = group {
        if p < 2 {
            return Err(Error::InvalidInput("modulus must be at least 2".into()));
        }
    }
    let eqs = compile(system)?;
    let (lo, side) = match variant {
        BoxVariant::Closed => (0i128, r),
        BoxVariant::Symmetric => (1 - r as i128, (2 * r).saturating_sub(1)),
    };
    let total = sat_pow(side as u128, eqs.s);
    check_cap("box enumeration", total, cap)?;
    if side == 0 {
        return Ok(0);
    }
    let s = eqs.s;
    Ok((0..total as u64)
        .into_par_iter()
        .filter(|&i| {
            let mut x = vec![0i128; s];
            let mut k = i;
            for slot in x.iter_mut().rev() {
                *slot = lo + (k % side) as i128;
                k /= side;
            }
            vanishes(&eqs, group, &x)
        })
        .count() as u128)
}

pub fn box_counts(system: &[MultilinearForm<Integers>], group: Group, r: u64, l: u64, cap: u128) -> Result<BoxCountResult> {
    let n = count_box_solutions(system, group, l * r, BoxVariant::Closed, cap)?;
    let n_prime = count_box_solutions(system, group, r, BoxVariant::Symmetric, cap)?;
    Ok(BoxCountResult {
        n,
        n_prime,
        r,
        l,
        s: system[0].total_dim(),
    })
}

/// `N_{LR} <= L^s N'_R`, a proved inequality: a violation is a bug.
pub fn scaling_lemma_audit(
    instance: &str,
    system: &[MultilinearForm<Integers>],
    group: Group,
    r: u64,
    l: u64,
    cap: u128,
) -> Result<AuditReport> {
    if r == 0 || l == 0 {
        return Err(Error::InvalidInput("R and L must be positive".into()));
    }
    let b = box_counts(system, group, r, l, cap)?;
    let rhs = sat_pow(l as u128, b.s).saturating_mul(b.n_prime);
    let verdict = if b.n <= rhs { Verdict::Holds } else { Verdict::Violation };
    Ok(AuditReport::new("scaling", instance, b.n as f64, rhs as f64, verdict)
        .proved()
        .constants(format!("L={l}"))
        .detail("R", r)
        .detail("s", b.s)
        .detail("group", group)
        .detail("n_prime", b.n_prime))
}

/// A random system for the scaling-lemma fuzz corpus: up to two integer
/// maps of arity 1 or 2 in at most 4 variables, `R <= 4`, `L <= 3`, into `Z`
/// or `Z/p`.
#[derive(Clone, Debug)]
pub struct ScalingInstance {
    pub system: Vec<MultilinearForm<Integers>>,
    pub group: Group,
    pub r: u64,
    pub l: u64,
}

pub fn fuzz_scaling_instance(seed: u64) -> Result<ScalingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=2);
    let dims: Vec<usize> = if d == 1 {
        vec![rng.gen_range(1..=4)]
    } else {
        let a = rng.gen_range(1..=2);
        vec![a, rng.gen_range(1..=4 - a)]
    };
    let n = rng.gen_range(1..=2);
    let system = (0..n)
        .map(|_| {
            MultilinearForm::from_fn(Integers, dims.clone(), |_| {
                // Sparse coefficients keep the solution sets nontrivial.
                if rng.gen_bool(0.5) {
                    Integers.from_int(0)
                } else {
                    Integers.from_int(rng.gen_range(-3..=3))
                }
            })
        })
        .collect::<Result<_>>()?;
    let group = if rng.gen_bool(0.5) {
        Group::Integers
    } else {
        Group::Modulo([2, 3, 5, 7][rng.gen_range(0..4)])
    };
    Ok(ScalingInstance {
        system,
        group,
        r: rng.gen_range(1..=4),
        l: rng.gen_range(1..=3),
    })
}

/// Per-prime line of a descent report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentRow {
    pub p: u32,
    pub bias: f64,
    /// `prk_lower_from_bias` of the reduction.
    pub bias_lower: Option<usize>,
    pub lower: usize,
    pub upper: usize,
    /// `2^{d-1} d upper`.
    pub ceiling: usize,
    /// `p <= d max|coeff|`.
    pub below_threshold: bool,
    /// The reduction's upper bound falls below another prime's lower bound,
    /// so rank was lost modulo this prime.
    pub bad_prime: bool,
}

/// One replay of the counting step at a prime: bias gives many vanishing
/// slices, and the scaling lemma with `R = floor(p^{1/d})` transfers the
/// count to a small symmetric box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainRow {
    pub p: u32,
    pub r: usize,
    /// `|Z_P(F_p)|`.
    pub zero_slices: u128,
    /// `p^{s' - r}` with `s'` the prefix dimension.
    pub count_floor: u128,
    pub radius: u64,
    pub l: u64,
    /// Symmetric-box zeros of the slice system modulo `p` and over `Z`.
    pub n_prime_mod_p: u128,
    pub n_prime_integer: u128,
    /// `L^{s'} N'_R` modulo `p`.
    pub scaled_bound: u128,
    pub scaling_holds: bool,
    /// Zeros modulo `p` in the small box are integer zeros.
    pub lift_sound: bool,
}

#[derive(Clone, Debug)]
pub struct DescentReport {
    pub rows: Vec<DescentRow>,
    pub chain: Vec<ChainRow>,
    /// Certified upper bound on the rank over `Q`.
    pub q_upper: usize,
    /// `2^{d-1} d min_p upper` over all primes and over unflagged primes.
    pub ceiling_all: usize,
    pub ceiling_good: Option<usize>,
    pub audit: AuditReport,
}

impl DescentReport {
    /// CSV rows `p,bias,lower,upper,ceiling`.
    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
        w.write_record(["instance", "p", "bias", "lower", "upper", "ceiling", "below_threshold", "bad_prime"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                self.audit.instance.clone(),
                r.p.to_string(),
                format!("{}", r.bias),
                r.lower.to_string(),
                r.upper.to_string(),
                r.ceiling.to_string(),
                r.below_threshold.to_string(),
                r.bad_prime.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
        Ok(String::from_utf8(bytes).expect("utf8"))
    }
}

/// Largest `R >= 1` with `R^d <= p`.
fn integer_root(p: u32, d: usize) -> u64 {
    let mut r = 1u64;
    while sat_pow((r + 1) as u128, d) <= p as u128 {
        r += 1;
    }
    r
}

fn replay_chain(p: &MultilinearForm<Integers>, prime: u32, r: usize, zero_slices: u128, cap: u128) -> Result<ChainRow> {
    let d = p.arity();
    let prefix: usize = p.dims()[..d - 1].iter().sum();
    let last = p.dims()[d - 1];
    let slices: Vec<MultilinearForm<Integers>> = (0..last)
        .map(|i| {
            let mut e = vec![Integers.from_int(0); last];
            e[i] = Integers.from_int(1);
            p.contract(d - 1, &e)
        })
        .collect::<Result<_>>()?;
    let radius = integer_root(prime, d);
    let l = (prime as u64).div_ceil(radius);
    let mod_p = count_box_solutions(&slices, Group::Modulo(prime as u64), radius, BoxVariant::Symmetric, cap)?;
    let integer = count_box_solutions(&slices, Group::Integers, radius, BoxVariant::Symmetric, cap)?;
    let scaled_bound = sat_pow(l as u128, prefix).saturating_mul(mod_p);
    Ok(ChainRow {
        p: prime,
        r,
        zero_slices,
        count_floor: sat_pow(prime as u128, prefix.saturating_sub(r)),
        radius,
        l,
        n_prime_mod_p: mod_p,
        n_prime_integer: integer,
        scaled_bound,
        scaling_holds: zero_slices <= scaled_bound,
        lift_sound: mod_p == integer,
    })
}

/// Per-prime rank bounds of `P mod p`, the ceiling `2^{d-1} d min_p upper`
/// on the rank over `Q`, and a replay of the counting step with `eta = 1/d`.
pub fn mod_p_descent_report(
    instance: &str,
    p: &MultilinearForm<Integers>,
    primes: &[u32],
    opts: &RankOptions,
    cap: u128,
) -> Result<DescentReport> {
    if primes.is_empty() {
        return Err(Error::InvalidInput("empty prime list".into()));
    }
    let d = p.arity();
    if d < 2 {
        return Err(Error::InfiniteRank(d));
    }
    let factor = (1usize << (d - 1)) * d;
    let max_coeff = p
        .coeffs()
        .iter()
        .map(|c| c.abs().to_u128().unwrap_or(u128::MAX))
        .max()
        .unwrap_or(0);
    let per_prime = primes
        .par_iter()
        .map(|&prime| {
            let red = reduce_mod_p(p, prime)?;
            let b = bias_exact(&red, opts.bias_cap)?;
            let (bounds, cert) = rank_bounds(&red, opts)?;
            debug_assert!(verify_certificate(&red, &cert)?);
            let chain = replay_chain(p, prime, bounds.upper, b.zero_slices, cap)?;
            Ok((prime, b, bounds, chain))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_lower = per_prime.iter().map(|(_, _, b, _)| b.lower).max().unwrap_or(0);
    let mut rows = Vec::new();
    let mut chain = Vec::new();
    for (prime, b, bounds, c) in per_prime {
        rows.push(DescentRow {
            p: prime,
            bias: b.value,
            bias_lower: prk_lower_from_bias(&b),
            lower: bounds.lower,
            upper: bounds.upper,
            ceiling: factor * bounds.upper,
            below_threshold: (prime as u128) <= d as u128 * max_coeff,
            bad_prime: bounds.upper < max_lower,
        });
        chain.push(c);
    }

    let q_upper = if p.is_zero() {
        0
    } else {
        let pq = p.map_ring(Rationals, |c| num_rational::BigRational::from_integer(c.clone()));
        let cert = best_flattening_certificate(&pq)?;
        if !verify_certificate(&pq, &cert)? {
            return Err(Error::InvalidInput("rational certificate failed verification".into()));
        }
        cert.len()
    };
    let ceiling_all = rows.iter().map(|r| r.ceiling).min().expect("nonempty");
    let ceiling_good = rows.iter().filter(|r| !r.bad_prime).map(|r| r.ceiling).min();
    let verdict = match ceiling_good {
        Some(c) if q_upper <= c => Verdict::Consistent,
        _ => Verdict::Inconclusive,
    };
    let flagged: Vec<String> = rows.iter().filter(|r| r.bad_prime).map(|r| r.p.to_string()).collect();
    let below: Vec<String> = rows.iter().filter(|r| r.below_threshold).map(|r| r.p.to_string()).collect();
    let audit = AuditReport::new(
        "descent",
        instance,
        q_upper as f64,
        ceiling_good.map_or(f64::NAN, |c| c as f64),
        verdict,
    )
    .constants(format!("2^(d-1)*d={factor}"))
    .detail("d", d)
    .detail("primes", primes.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
    .detail("ceiling_all", ceiling_all)
    .detail("bad_primes", flagged.join(" "))
    .detail("below_threshold", below.join(" "))
    .detail("max_coeff", max_coeff);
    Ok(DescentReport {
        rows,
        chain,
        q_upper,
        ceiling_all,
        ceiling_good,
        audit,
    })
}

/// `Ma = 0`, `a != 0` and the norm bound for an integer matrix; the audit
/// row used by the kernel gate.
pub fn small_kernel_audit(instance: &str, m: &[Vec<num_bigint::BigInt>], ncols: usize) -> Result<AuditReport> {
    let a = small_kernel_vector(&Integers, m, ncols)?;
    let t = max_norm(&Integers, m);
    let bound = Integers.minor_bound(ncols, t);
    let worst = a.iter().map(|x| Integers.phi(x)).max().unwrap_or(0);
    let exact = apply(&Integers, m, &a).iter().all(Zero::is_zero) && a.iter().any(|x| !x.is_zero());
    let verdict = if exact && worst as f64 <= bound { Verdict::Holds } else { Verdict::Violation };
    Ok(AuditReport::new("small-kernel", instance, worst as f64, bound, verdict)
        .proved()
        .detail("n", ncols)
        .detail("T", t)
        .detail(
            "a",
            a.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
        ))
}

/// A random `m x n` integer matrix with entries in `[-9, 9]` and rank below
/// `n`: `n <= 5`, and when `m = n` the last row is `+-` the first.
pub fn random_rank_deficient(seed: u64) -> (Vec<Vec<num_bigint::BigInt>>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=5);
    let m = rng.gen_range(1..=n);
    let mut rows: Vec<Vec<i64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect())
        .collect();
    if m == n {
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        rows[m - 1] = rows[0].iter().map(|v| sign * v).collect();
    }
    let big = rows
        .into_iter()
        .map(|r| r.into_iter().map(num_bigint::BigInt::from).collect())
        .collect();
    (big, n)
}
