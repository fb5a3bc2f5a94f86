//! Bias `|E_x chi(P(x))|` of multilinear forms over finite fields.
//!
//! Averaging the character over the last slot kills every nonzero slice, so
//! `bias(P) = #{(x_1..x_{d-1}) : P(x_1, .., x_{d-1}, .) = 0} / q^{s_1+..+s_{d-1}}`.
//! Counts are exact integers; the final slot pair is counted through a rank
//! (`q^{dim ker}` zero slices for a fixed prefix).

use rayon::prelude::*;
use num_integer::Integer;

use crate::error::{check_cap, sat_pow, Error, Result};
use crate::field::{CharacterValue, FiniteField, Fq};
use crate::forms::{FormCollection, MultiIndex, MultilinearForm};
use crate::linalg::{point_from_index, rank};
use crate::rank::certificate::flattening;

/// Default cap on enumerated points.
pub const DEFAULT_BIAS_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BiasResult {
    /// `#{prefixes with zero slice}`.
    pub zero_slices: u128,
    /// `s_1 + ... + s_{d-1}`.
    pub prefix_dim: usize,
    pub q: u32,
    /// `zero_slices / q^prefix_dim`.
    pub value: f64,
    /// `q^{s_1 + ... + s_d}`, the full sample space.
    pub sample_space: u128,
}

impl BiasResult {
    fn new(zero_slices: u128, prefix_dim: usize, q: u32, total_dim: usize) -> Self {
        let value = zero_slices as f64 / (q as f64).powi(prefix_dim as i32);
        BiasResult {
            zero_slices,
            prefix_dim,
            q,
            value,
            sample_space: sat_pow(q as u128, total_dim),
        }
    }

    /// The exact value `zero_slices / q^prefix_dim` in lowest terms.
    pub fn fraction(&self) -> (u128, u128) {
        let den = sat_pow(self.q as u128, self.prefix_dim);
        let g = self.zero_slices.gcd(&den).max(1);
        (self.zero_slices / g, den / g)
    }

    /// `-log_q(bias)`; infinite when the bias is zero.
    pub fn analytic_rank(&self) -> f64 {
        if self.zero_slices == 0 {
            f64::INFINITY
        } else {
            -self.value.ln() / (self.q as f64).ln()
        }
    }
}

/// Zero slices below a fixed prefix: contracts slots until two remain, then
/// counts `q^{s_{d-1} - rank}`.
fn count_rec(form: &MultilinearForm<FiniteField>) -> u128 {
    let field = form.ring();
    let q = field.order() as u128;
    match form.arity() {
        1 => u128::from(form.is_zero()),
        2 => {
            let m = flattening(form, &[1]);
            let r = rank(field, &m).expect("finite field");
            sat_pow(q, form.dims()[0] - r)
        }
        _ => {
            let s = form.dims()[0];
            let total = sat_pow(q, s) as u64;
            (0..total)
                .map(|i| {
                    let x = point_from_index(field.order(), s, i);
                    count_rec(&form.contract(0, &x).expect("dims"))
                })
                .sum()
        }
    }
}

/// Number of `(x_1, .., x_{d-1})` whose slice vanishes; `cap` bounds
/// `q^{s_1 + .. + s_{d-1}}`.
pub fn count_zero_slices(p: &MultilinearForm<FiniteField>, cap: u128) -> Result<u128> {
    let field = p.ring();
    let d = p.arity();
    let prefix: usize = p.dims()[..d - 1].iter().sum();
    check_cap("slice enumeration", sat_pow(field.order() as u128, prefix), cap)?;
    if d <= 2 {
        return Ok(count_rec(p));
    }
    let s = p.dims()[0];
    let total = sat_pow(field.order() as u128, s) as u64;
    Ok((0..total)
        .into_par_iter()
        .map(|i| {
            let x = point_from_index(field.order(), s, i);
            count_rec(&p.contract(0, &x).expect("dims"))
        })
        .sum())
}

/// Exact bias through the slice identity.
pub fn bias_exact(p: &MultilinearForm<FiniteField>, cap: u128) -> Result<BiasResult> {
    let q = p.ring().order();
    let zero = count_zero_slices(p, cap)?;
    let prefix: usize = p.dims()[..p.arity() - 1].iter().sum();
    Ok(BiasResult::new(zero, prefix, q, p.total_dim()))
}

/// `|E_x chi(f(x))|` from the list of all values of `f`.
pub fn bias_of_values(field: &FiniteField, values: &[Fq]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (re, im) = values.iter().fold((0.0, 0.0), |(re, im), &v| {
        let c: CharacterValue = field.character(v);
        (re + c.re, im + c.im)
    });
    (re * re + im * im).sqrt() / values.len() as f64
}

/// Bias by summing the character over every point of `V_1 x ... x V_d`.
pub fn bias_full_enumeration(p: &MultilinearForm<FiniteField>, cap: u128) -> Result<f64> {
    let field = p.ring();
    let q = field.order();
    check_cap("full enumeration", sat_pow(q as u128, p.total_dim()), cap)?;
    let d = p.arity();
    let s0 = p.dims()[0];
    let total0 = sat_pow(q as u128, s0) as u64;
    let rest: Vec<usize> = p.dims()[1..].to_vec();
    let (re, im) = (0..total0)
        .into_par_iter()
        .map(|i| {
            let x0 = point_from_index(q, s0, i);
            if d == 1 {
                let v = p.evaluate(&[x0]).expect("dims");
                let c = field.character(v);
                return (c.re, c.im);
            }
            let sub = p.contract(0, &x0).expect("dims");
            let counts: Vec<usize> = rest.iter().map(|&s| sat_pow(q as u128, s) as usize).collect();
            let mut acc = (0.0, 0.0);
            for idx in MultiIndex::new(&counts) {
                let args: Vec<Vec<Fq>> = idx
                    .iter()
                    .zip(&rest)
                    .map(|(&k, &s)| point_from_index(q, s, k as u64))
                    .collect();
                let c = field.character(sub.evaluate(&args).expect("dims"));
                acc.0 += c.re;
                acc.1 += c.im;
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = (q as f64).powi(p.total_dim() as i32);
    Ok((re * re + im * im).sqrt() / n)
}

/// `floor(log_q n)` for `n >= 1`, exactly.
pub fn floor_log(q: u128, n: u128) -> usize {
    let mut k = 0;
    let mut pw = q;
    while pw <= n {
        k += 1;
        match pw.checked_mul(q) {
            Some(v) => pw = v,
            None => break,
        }
    }
    k
}

/// `bias >= q^{-prk}` turned around: the smallest integer `r` with
/// `q^{-r} <= bias`. `None` when the bias is zero (a nonzero linear form).
pub fn prk_lower_from_bias(b: &BiasResult) -> Option<usize> {
    if b.zero_slices == 0 {
        return None;
    }
    Some(b.prefix_dim - floor_log(b.q as u128, b.zero_slices).min(b.prefix_dim))
}

/// Largest bias over nonzero combinations of the members (one per projective
/// point, first in [`crate::forms::projective_points`] order on ties) with the maximizing
/// combination.
pub fn collective_bias(c: &FormCollection<FiniteField>, cap: u128) -> Result<(BiasResult, Vec<Fq>)> {
    let field = c.ring();
    let combos = crate::forms::projective_points(field, c.len(), cap)?;
    let results = combos
        .par_iter()
        .map(|a| Ok((bias_exact(&c.combination(a)?, cap)?, a.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(BiasResult, Vec<Fq>)> = None;
    for (b, a) in results {
        if best.as_ref().is_none_or(|(bb, _)| b.zero_slices * sat_pow(b.q as u128, bb.prefix_dim) > bb.zero_slices * sat_pow(b.q as u128, b.prefix_dim)) {
            best = Some((b, a));
        }
    }
    Ok(best.expect("at least one combination"))
}

/// Lower bound `q^{-m} (1 - sum_{a != 0} bias(sum a_l P_l))` on the density of
/// solutions of `P_l(x) = r_l` for `l = 1..m`. Positive means a solution
/// exists.
pub fn counting_lower_bound(system: &[MultilinearForm<FiniteField>], targets: &[Fq], cap: u128) -> Result<f64> {
    if system.is_empty() || system.len() != targets.len() {
        return Err(Error::DimensionMismatch("one target per equation".into()));
    }
    let field = system[0].ring();
    let q = field.order();
    let m = system.len();
    let combos = sat_pow(q as u128, m);
    check_cap("combinations", combos, cap)?;
    let coll = FormCollection::new(system.to_vec())?;
    // bias(c P) = bias(P) for c != 0, so each projective point counts q - 1 times.
    let reps = crate::forms::projective_points(field, m, cap)?;
    let total = reps
        .par_iter()
        .map(|a| Ok(bias_exact(&coll.combination(a)?, cap)?.value))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum::<f64>()
        * (q - 1) as f64;
    Ok((1.0 - total) / (q as f64).powi(m as i32))
}

/// Exact density of solutions of `P_l(x) = r_l` by enumeration.
pub fn solution_density(system: &[MultilinearForm<FiniteField>], targets: &[Fq], cap: u128) -> Result<f64> {
    if system.is_empty() || system.len() != targets.len() {
        return Err(Error::DimensionMismatch("one target per equation".into()));
    }
    let field = system[0].ring();
    let q = field.order();
    let dims = system[0].dims().to_vec();
    let total_dim: usize = dims.iter().sum();
    check_cap("solution enumeration", sat_pow(q as u128, total_dim), cap)?;
    let counts: Vec<usize> = dims.iter().map(|&s| sat_pow(q as u128, s) as usize).collect();
    let mut hits: u128 = 0;
    let mut all: u128 = 0;
    for idx in MultiIndex::new(&counts) {
        let args: Vec<Vec<Fq>> = idx
            .iter()
            .zip(&dims)
            .map(|(&k, &s)| point_from_index(q, s, k as u64))
            .collect();
        all += 1;
        let ok = system
            .iter()
            .zip(targets)
            .all(|(p, &r)| p.evaluate(&args).expect("dims") == r);
        hits += u128::from(ok);
    }
    Ok(hits as f64 / all as f64)
}
