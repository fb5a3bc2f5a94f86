//! Embedding target forms into a collection by linear maps: the coefficient
//! system on matrix spaces, its relabeling and restriction checks, and a
//! column-by-column backtracking solver.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::audit::{AuditReport, Verdict};
use crate::bias::{bias_exact, collective_bias, counting_lower_bound};
use crate::error::{check_cap, sat_pow, Error, Result};
use crate::field::{FiniteField, Fq};
use crate::forms::{projective_points, FormCollection, LinearMapTuple, MultiIndex, MultilinearForm};
use crate::linalg::{matrix_to_json, point_from_index, solve_affine, Matrix};
use crate::rank::constants::{ConstantsTable, FieldClass};
use crate::rank::{collective_rank_bounds, RankOptions};

/// One equation `P^l_{j_1..j_d}(A_1, .., A_d) = r^l_{j_1..j_d}`. Slot `i`
/// has the entries of the `s_i x t` matrix `A_i`, row-major.
#[derive(Clone, Debug)]
pub struct Equation {
    pub l: usize,
    pub j: Vec<usize>,
    pub form: MultilinearForm<FiniteField>,
    pub target: Option<Fq>,
}

#[derive(Clone, Debug)]
pub struct CoefficientSystem {
    pub source: FormCollection<FiniteField>,
    pub targets: Option<FormCollection<FiniteField>>,
    pub t: usize,
    pub equations: Vec<Equation>,
}

impl CoefficientSystem {
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }
}

/// The `n t^d` equations whose solutions are the tuples `(A_i)` with
/// `P_l o (A_1 x .. x A_d) = R_l`.
pub fn build_system(
    source: &FormCollection<FiniteField>,
    t: usize,
    targets: Option<&FormCollection<FiniteField>>,
) -> Result<CoefficientSystem> {
    if t == 0 {
        return Err(Error::InvalidInput("target dimension must be positive".into()));
    }
    let d = source.arity();
    if let Some(r) = targets {
        if r.len() != source.len() || r.dims() != vec![t; d].as_slice() || r.ring() != source.ring() {
            return Err(Error::DimensionMismatch(format!(
                "targets must be {} forms on (k^{t})^{d}",
                source.len()
            )));
        }
    }
    let field = source.ring().clone();
    let dims: Vec<usize> = source.dims().iter().map(|s| s * t).collect();
    let mut equations = Vec::with_capacity(source.len() * t.pow(d as u32));
    for (l, p) in source.members().iter().enumerate() {
        for j in MultiIndex::new(&vec![t; d]) {
            let j = j.to_vec();
            let mut form = MultilinearForm::zero(field.clone(), dims.clone())?;
            for (k, c) in p.support() {
                let idx: Vec<usize> = k.iter().zip(&j).map(|(ki, ji)| ki * t + ji).collect();
                form.set_coeff(&idx, c)?;
            }
            let target = targets.map(|r| *r.members()[l].coeff(&j));
            equations.push(Equation { l, j, form, target });
        }
    }
    Ok(CoefficientSystem {
        source: source.clone(),
        targets: targets.cloned(),
        t,
        equations,
    })
}

/// Entries of `A_1, .., A_d` laid out as the slots of the equation forms.
pub fn maps_to_args(maps: &LinearMapTuple<FiniteField>) -> Vec<Vec<Fq>> {
    maps.maps().iter().map(|m| m.data().to_vec()).collect()
}

/// The restriction of a form on matrix slots to column `col` of every
/// matrix: the entries `(k, col)`.
fn restrict_to_column(form: &MultilinearForm<FiniteField>, src_dims: &[usize], t: usize, col: usize) -> Result<MultilinearForm<FiniteField>> {
    MultilinearForm::from_fn(form.ring().clone(), src_dims.to_vec(), |k| {
        let idx: Vec<usize> = k.iter().map(|ki| ki * t + col).collect();
        *form.coeff(&idx)
    })
}

fn biases_equal(a: &crate::bias::BiasResult, b: &crate::bias::BiasResult) -> bool {
    // zero_a / q^pa == zero_b / q^pb
    let q = a.q as u128;
    a.zero_slices.saturating_mul(sat_pow(q, b.prefix_dim)) == b.zero_slices.saturating_mul(sat_pow(q, a.prefix_dim))
}

/// Checks that each equation form is `P_l` with relabeled and free
/// variables (equal bias), that restricting to the first columns turns
/// `sum c_l P^l_{1..1}` into `sum c_l P_l`, and that no combination of the
/// system is more biased than the collection.
pub fn relabel_rank_check(instance: &str, sys: &CoefficientSystem, cap: u128) -> Result<AuditReport> {
    let field = sys.source.ring();
    let src_dims = sys.source.dims().to_vec();
    let base: Vec<_> = sys
        .source
        .members()
        .iter()
        .map(|p| bias_exact(p, cap))
        .collect::<Result<_>>()?;
    let mut relabel_ok = true;
    for e in &sys.equations {
        let b = bias_exact(&e.form, cap)?;
        relabel_ok &= biases_equal(&b, &base[e.l]);
    }

    let first: Vec<&Equation> = sys.equations.iter().filter(|e| e.j.iter().all(|&j| j == 0)).collect();
    let mut restrict_ok = true;
    for c in projective_points(field, sys.source.len(), cap)? {
        let forms: Vec<MultilinearForm<FiniteField>> = first.iter().map(|e| e.form.clone()).collect();
        let combo = MultilinearForm::combination(&forms, &c)?;
        restrict_ok &= restrict_to_column(&combo, &src_dims, sys.t, 0)? == sys.source.combination(&c)?;
    }

    // Rank preservation: every combination of the whole system is at most
    // as biased as the most biased combination of the collection.
    let (coll, _) = collective_bias(&sys.source, cap)?;
    let system_forms = FormCollection::new(sys.equations.iter().map(|e| e.form.clone()).collect())?;
    let preserve = match collective_bias(&system_forms, cap) {
        Ok((sb, _)) => Some(sb.zero_slices * sat_pow(sb.q as u128, coll.prefix_dim) <= coll.zero_slices * sat_pow(sb.q as u128, sb.prefix_dim)),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };

    let ok = relabel_ok && restrict_ok && preserve != Some(false);
    Ok(AuditReport::new(
        "relabel",
        instance,
        f64::from(u8::from(ok)),
        1.0,
        if ok { Verdict::Holds } else { Verdict::Violation },
    )
    .proved()
    .detail("t", sys.t)
    .detail("equations", sys.len())
    .detail("relabel", relabel_ok)
    .detail("restriction", restrict_ok)
    .detail("preservation", preserve.map_or("skipped".to_string(), |b| b.to_string())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Depth-first over every solution of the column constraints.
    Exhaustive,
    /// Independent restarts that sample solutions of the column constraints.
    Randomized { restarts: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub maps: LinearMapTuple<FiniteField>,
    pub verified: bool,
}

/// Embedding as `{"t": .., "maps": [matrix, ..]}` with row-major matrices.
pub fn embedding_to_json(field: &FiniteField, e: &Embedding) -> Value {
    json!({
        "t": e.maps.t(),
        "verified": e.verified,
        "maps": e.maps.maps().iter().map(|m| matrix_to_json(field, m)).collect::<Vec<_>>(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Found(Embedding),
    /// `certified` when the search space was exhausted.
    NotFound { certified: bool },
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    pub nodes: u64,
}

/// `P_l o A = R_l` for all `l`, exactly.
pub fn verify_embedding(
    source: &FormCollection<FiniteField>,
    targets: &FormCollection<FiniteField>,
    maps: &LinearMapTuple<FiniteField>,
) -> Result<bool> {
    Ok(source.compose(maps)?.members() == targets.members())
}

struct Solver<'a> {
    field: &'a FiniteField,
    source: &'a FormCollection<FiniteField>,
    targets: &'a FormCollection<FiniteField>,
    t: usize,
    d: usize,
    /// Equations `(l, j)` completed when the column at each position is set.
    due: Vec<Vec<(usize, Vec<usize>)>>,
    columns: Vec<Vec<Fq>>,
    nodes: u64,
    budget: u64,
    rng: Option<ChaCha8Rng>,
}

enum Step {
    Found,
    Exhausted,
    Budget,
}

impl Solver<'_> {
    fn position(&self, slot: usize, col: usize) -> usize {
        col * self.d + slot
    }

    /// Coefficients of `y -> P_l(.., y at slot, ..)` with the other slots at
    /// the already chosen columns `j`.
    fn linear_part(&self, l: usize, slot: usize, j: &[usize]) -> Result<Vec<Fq>> {
        let mut cur = self.source.members()[l].clone();
        for other in (0..self.d).rev().filter(|&o| o != slot) {
            let x = &self.columns[self.position(other, j[other])];
            cur = cur.contract(other, x)?;
        }
        Ok(cur.coeffs().to_vec())
    }

    fn dfs(&mut self, pos: usize) -> Result<Step> {
        if pos == self.d * self.t {
            return Ok(Step::Found);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Ok(Step::Budget);
        }
        let slot = pos % self.d;
        let s = self.source.dims()[slot];
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (l, j) in self.due[pos].clone() {
            rows.push(self.linear_part(l, slot, &j)?);
            rhs.push(*self.targets.members()[l].coeff(&j));
        }
        let (x0, basis) = if rows.is_empty() {
            (vec![Fq(0); s], (0..s).map(|i| {
                let mut e = vec![Fq(0); s];
                e[i] = Fq(1);
                e
            }).collect())
        } else {
            let m = Matrix::from_rows(rows, s)?;
            match solve_affine(self.field, &m, &rhs)? {
                Some(sol) => sol,
                None => return Ok(Step::Exhausted),
            }
        };
        let q = self.field.order();
        let total = sat_pow(q as u128, basis.len());
        let order: Vec<u64> = match &mut self.rng {
            None => (0..total.min(u64::MAX as u128) as u64).collect(),
            Some(rng) => {
                if total <= 64 {
                    let mut v: Vec<u64> = (0..total as u64).collect();
                    v.shuffle(rng);
                    v
                } else {
                    (0..16).map(|_| rng.gen_range(0..total.min(u64::MAX as u128) as u64)).collect()
                }
            }
        };
        for idx in order {
            let coeffs = point_from_index(q, basis.len(), idx);
            let mut x = x0.clone();
            for (c, b) in coeffs.iter().zip(&basis) {
                if c.0 != 0 {
                    for (xi, bi) in x.iter_mut().zip(b) {
                        *xi = self.field.add(*xi, self.field.mul(*c, *bi));
                    }
                }
            }
            self.columns[pos] = x;
            match self.dfs(pos + 1)? {
                Step::Found => return Ok(Step::Found),
                Step::Budget => return Ok(Step::Budget),
                Step::Exhausted => {}
            }
        }
        Ok(Step::Exhausted)
    }

    fn maps(&self) -> Result<LinearMapTuple<FiniteField>> {
        let maps = (0..self.d)
            .map(|slot| {
                let s = self.source.dims()[slot];
                let mut m = Matrix::filled(s, self.t, Fq(0));
                for col in 0..self.t {
                    for (k, v) in self.columns[self.position(slot, col)].iter().enumerate() {
                        m.set(k, col, *v);
                    }
                }
                m
            })
            .collect();
        LinearMapTuple::new(self.t, maps)
    }
}

fn due_lists(d: usize, t: usize, n: usize) -> Vec<Vec<(usize, Vec<usize>)>> {
    let mut due = vec![Vec::new(); d * t];
    for j in MultiIndex::new(&vec![t; d]) {
        let last = (0..d).map(|i| j[i] * d + i).max().expect("d >= 1");
        for l in 0..n {
            due[last].push((l, j.to_vec()));
        }
    }
    due
}

/// Searches for `A_1, .., A_d` with `P_l o (A_1 x .. x A_d) = R_l`.
///
/// Columns are fixed in the order `(col, slot)`; once every other column an
/// equation touches is fixed, the equation is linear in the current column,
/// so each node enumerates the solutions of a linear system.
pub fn solve_embedding(
    source: &FormCollection<FiniteField>,
    targets: &FormCollection<FiniteField>,
    strategy: Strategy,
    seed: u64,
    budget: u64,
) -> Result<SolveResult> {
    let d = source.arity();
    let t = targets.dims()[0];
    if targets.len() != source.len() || targets.dims() != vec![t; d].as_slice() || targets.ring() != source.ring() {
        return Err(Error::DimensionMismatch("targets must match the collection".into()));
    }
    let run = |rng: Option<ChaCha8Rng>, budget: u64| -> Result<(Step, u64, Option<LinearMapTuple<FiniteField>>)> {
        let mut solver = Solver {
            field: source.ring(),
            source,
            targets,
            t,
            d,
            due: due_lists(d, t, source.len()),
            columns: vec![Vec::new(); d * t],
            nodes: 0,
            budget,
            rng,
        };
        let step = solver.dfs(0)?;
        let maps = matches!(step, Step::Found).then(|| solver.maps()).transpose()?;
        Ok((step, solver.nodes, maps))
    };
    let finish = |maps: LinearMapTuple<FiniteField>, nodes: u64| -> Result<SolveResult> {
        let verified = verify_embedding(source, targets, &maps)?;
        if !verified {
            return Err(Error::InvalidInput("solver produced a non-solution".into()));
        }
        Ok(SolveResult {
            outcome: SolveOutcome::Found(Embedding { maps, verified }),
            nodes,
        })
    };
    match strategy {
        Strategy::Exhaustive => {
            let (step, nodes, maps) = run(None, budget)?;
            match step {
                Step::Found => finish(maps.expect("found"), nodes),
                Step::Exhausted => Ok(SolveResult {
                    outcome: SolveOutcome::NotFound { certified: true },
                    nodes,
                }),
                Step::Budget => Ok(SolveResult {
                    outcome: SolveOutcome::BudgetExhausted,
                    nodes,
                }),
            }
        }
        Strategy::Randomized { restarts } => {
            let restarts = restarts.max(1);
            let each = (budget / restarts as u64).max(1);
            let results = (0..restarts)
                .into_par_iter()
                .map(|k| run(Some(ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64))), each))
                .collect::<Result<Vec<_>>>()?;
            let nodes = results.iter().map(|r| r.1).sum();
            // Earliest restart wins, independent of scheduling.
            match results.into_iter().find_map(|r| r.2) {
                Some(maps) => finish(maps, nodes),
                None => Ok(SolveResult {
                    outcome: SolveOutcome::NotFound { certified: false },
                    nodes,
                }),
            }
        }
    }
}

/// Solves with a system built by [`build_system`].
pub fn solve_system(sys: &CoefficientSystem, strategy: Strategy, seed: u64, budget: u64) -> Result<SolveResult> {
    let targets = sys
        .targets
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("system has no targets".into()))?;
    solve_embedding(&sys.source, targets, strategy, seed, budget)
}

#[derive(Clone, Debug)]
pub struct UniversalityOptions {
    pub rank: RankOptions,
    pub budget: u64,
    pub cap: u128,
}

impl Default for UniversalityOptions {
    fn default() -> Self {
        UniversalityOptions {
            rank: RankOptions::default(),
            budget: 1_000_000,
            cap: 1 << 20,
        }
    }
}

/// Compares the certified collective rank with `C (n t^d)^D` and runs the
/// solver for `targets`. Above the threshold an embedding must exist; below
/// it the outcome is recorded.
pub fn universality_audit(
    instance: &str,
    source: &FormCollection<FiniteField>,
    targets: &FormCollection<FiniteField>,
    constants: &ConstantsTable,
    opts: &UniversalityOptions,
) -> Result<AuditReport> {
    let n = source.len();
    let t = targets.dims()[0];
    let threshold = constants
        .embedding_threshold(FieldClass::Global, n, t)
        .ok_or_else(|| Error::InvalidInput("embedding constants are symbolic".into()))?;
    let bounds = collective_rank_bounds(source, opts.cap, &opts.rank)?;
    let result = solve_embedding(source, targets, Strategy::Exhaustive, 0, opts.budget)?;
    let equations = build_system(source, t, Some(targets))?.equations;
    let values: Vec<Fq> = equations.iter().map(|e| e.target.expect("targets given")).collect();
    let system: Vec<MultilinearForm<FiniteField>> = equations.into_iter().map(|e| e.form).collect();
    let density = match check_cap("equation combinations", sat_pow(source.ring().order() as u128, system.len()), opts.cap) {
        Ok(()) => counting_lower_bound(&system, &values, opts.cap).ok(),
        Err(_) => None,
    };
    let (found, certified) = match &result.outcome {
        SolveOutcome::Found(_) => (true, true),
        SolveOutcome::NotFound { certified } => (false, *certified),
        SolveOutcome::BudgetExhausted => (false, false),
    };
    let above = bounds.lower as f64 > threshold;
    let verdict = match (above, &result.outcome) {
        (false, _) => Verdict::Recorded,
        (true, SolveOutcome::Found(_)) => Verdict::Holds,
        (true, SolveOutcome::NotFound { certified: true }) => Verdict::Violation,
        (true, _) => Verdict::Inconclusive,
    };
    let mut report = AuditReport::new("universality", instance, bounds.lower as f64, threshold, verdict)
        .constants(constants.regime(FieldClass::Global).describe())
        .detail("prk_upper", bounds.upper)
        .detail("t", t)
        .detail("found", found)
        .detail("certified", certified)
        .detail("nodes", result.nodes);
    if let Some(dens) = density {
        report = report.detail("density_lower_bound", dens);
    }
    if above {
        report = report.proved();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{diagonal_collection, diagonal_form, random_form};

    fn f(p: u32) -> FiniteField {
        FiniteField::prime(p).unwrap()
    }

    fn single(p: MultilinearForm<FiniteField>) -> FormCollection<FiniteField> {
        FormCollection::new(vec![p]).unwrap()
    }

    #[test]
    fn system_shapes() {
        let uv = MultilinearForm::from_terms(f(2), vec![1, 1], &[(1, vec![0, 0])]).unwrap();
        let s1 = build_system(&single(uv.clone()), 1, None).unwrap();
        assert_eq!(s1.len(), 1);
        assert_eq!(s1.equations[0].form, uv);
        let s2 = build_system(&single(uv), 2, None).unwrap();
        assert_eq!(s2.len(), 4);
        assert_eq!(s2.equations[3].form.dims(), &[2, 2]);
    }

    #[test]
    fn equations_match_composition() {
        let field = f(3);
        let p = random_form(&field, 3, &[2, 2, 2], 5).unwrap();
        let sys = build_system(&single(p.clone()), 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let maps = LinearMapTuple::random(&field, &[2, 2, 2], 2, &mut rng);
            let comp = p.compose(&maps).unwrap();
            let args = maps_to_args(&maps);
            for e in &sys.equations {
                assert_eq!(e.form.evaluate(&args).unwrap(), *comp.coeff(&e.j));
            }
        }
    }

    #[test]
    fn relabel_checks_pass() {
        let uv = MultilinearForm::from_terms(f(2), vec![1, 1], &[(1, vec![0, 0])]).unwrap();
        for t in 1..=2 {
            let sys = build_system(&single(uv.clone()), t, None).unwrap();
            let r = relabel_rank_check("uv", &sys, 1 << 20).unwrap();
            assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        }
        let diag = diagonal_collection(&f(2), 2, 1, 2).unwrap();
        let sys = build_system(&diag, 1, None).unwrap();
        assert_eq!(relabel_rank_check("diag", &sys, 1 << 20).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn solver_examples() {
        let field = f(2);
        let p = diagonal_form(&field, &[2, 2], 2).unwrap();
        let r = diagonal_form(&field, &[1, 1], 1).unwrap();
        let out = solve_embedding(&single(p), &single(r), Strategy::Exhaustive, 0, 1 << 20).unwrap();
        assert!(matches!(out.outcome, SolveOutcome::Found(Embedding { verified: true, .. })));

        let uv = diagonal_form(&field, &[2, 2], 1).unwrap();
        let r2 = diagonal_form(&field, &[2, 2], 2).unwrap();
        let out = solve_embedding(&single(uv), &single(r2), Strategy::Exhaustive, 0, 1 << 20).unwrap();
        assert_eq!(out.outcome, SolveOutcome::NotFound { certified: true });
    }

    #[test]
    fn randomized_finds_and_is_deterministic() {
        let field = f(3);
        let p = diagonal_form(&field, &[4, 4], 4).unwrap();
        let r = diagonal_form(&field, &[1, 1], 1).unwrap();
        let a = solve_embedding(&single(p.clone()), &single(r.clone()), Strategy::Randomized { restarts: 4 }, 7, 10_000).unwrap();
        let b = solve_embedding(&single(p), &single(r), Strategy::Randomized { restarts: 4 }, 7, 10_000).unwrap();
        assert!(matches!(a.outcome, SolveOutcome::Found(_)));
        assert_eq!(a, b);
    }

    #[test]
    fn audit_above_threshold() {
        let field = f(2);
        let p = diagonal_form(&field, &[3, 3], 3).unwrap();
        let r = diagonal_form(&field, &[1, 1], 1).unwrap();
        let table = ConstantsTable::defaults(2);
        let rep = universality_audit("rank3", &single(p), &single(r.clone()), &table, &UniversalityOptions::default()).unwrap();
        assert_eq!(rep.rhs, 2.0);
        assert_eq!(rep.verdict, Verdict::Holds);
        let z = MultilinearForm::zero(field, vec![3, 3]).unwrap();
        let rep = universality_audit("zero", &single(z), &single(r), &table, &UniversalityOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Recorded);
        assert_eq!(rep.get("found"), Some("false"));
    }
}
