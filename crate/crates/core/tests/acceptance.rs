//! Acceptance gates. Each criterion prints one PASS/FAIL line with its wall
//! time against the limit; any failure makes the process exit nonzero.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strength::audit::Verdict;
use strength::bias::{bias_exact, bias_full_enumeration};
use strength::corpus::{corpus_generate, planted_diagonal, small_field_instances, CorpusParams, Profile};
use strength::descent::{
    fuzz_scaling_instance, mod_p_descent_report, random_rank_deficient, scaling_lemma_audit, small_kernel_audit,
};
use strength::forms::{diagonal_collection, diagonal_form, projective_points, random_form, random_homogeneous};
use strength::geometry::{
    diagonal_collection_locus_closed_form, diagonal_locus_closed_form, geometry_inequality_audit, gradient_locus_count,
    singular_locus_count, singular_locus_count_collection, GeometryOptions,
};
use strength::json::multilinear_from_json;
use strength::rank::schmidt::{
    central_binomial, prk_certificate_from_schmidt, schmidt_from_prk_certificate, sum_of_powers_decomposition,
    verify_schmidt, SchmidtDecomposition,
};
use strength::rank::{rank_bounds, verify_certificate, RankOptions};
use strength::universality::{solve_embedding, SolveOutcome, Strategy};
use strength::{CoeffRing, FiniteField, FormCollection, HomogeneousForm, LinearMapTuple, Rationals};

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn prime(q: u32) -> FiniteField {
    FiniteField::prime(q).expect("prime")
}

fn polarization_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut points = 0;
    for k in 0..100u64 {
        let d = rng.gen_range(1..=4);
        let s = rng.gen_range(1..=6);
        let q = random_homogeneous(&Rationals, d, s, k).map_err(err)?;
        let pol = q.polarize().map_err(err)?;
        let fact = Rationals.factorial(d);
        for _ in 0..20 {
            let x: Vec<_> = (0..s).map(|_| Rationals.random_elem(&mut rng)).collect();
            let lhs = Rationals.mul(&fact, &q.evaluate(&x).map_err(err)?);
            let rhs = pol.evaluate(&vec![x.clone(); d]).map_err(err)?;
            ensure(lhs == rhs, || format!("form {k} (d={d}, s={s}) at {x:?}"))?;
            points += 1;
        }
    }
    Ok(format!("100 forms, {points} points"))
}

/// `sum_{i<r} R_i S_i` with random factors of positive degree.
fn constructed_schmidt(d: usize, s: usize, r: usize, rng: &mut ChaCha8Rng) -> SchmidtDecomposition<Rationals> {
    let terms = (0..r)
        .map(|_| {
            let a = rng.gen_range(1..d);
            let left = random_homogeneous(&Rationals, a, s, rng.gen()).expect("form");
            let right = random_homogeneous(&Rationals, d - a, s, rng.gen()).expect("form");
            (left, right)
        })
        .collect();
    SchmidtDecomposition { terms }
}

fn rank_bridge() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases: Vec<(HomogeneousForm<Rationals>, SchmidtDecomposition<Rationals>)> = Vec::new();
    for d in 2..=4 {
        for s in 2..=3 {
            let dec = sum_of_powers_decomposition(&Rationals, d, s).map_err(err)?;
            cases.push((dec.expand(&Rationals, d, s).map_err(err)?, dec));
        }
    }
    while cases.len() < 50 {
        let d = rng.gen_range(2..=4);
        let s = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=3);
        let dec = constructed_schmidt(d, s, r, &mut rng);
        cases.push((dec.expand(&Rationals, d, s).map_err(err)?, dec));
    }
    for (k, (q, dec)) in cases.iter().enumerate() {
        let d = q.degree();
        let cert = prk_certificate_from_schmidt(q, dec).map_err(err)?;
        let pol = q.polarize().map_err(err)?;
        ensure(verify_certificate(&pol, &cert).map_err(err)?, || format!("case {k}: certificate does not verify"))?;
        let limit = central_binomial(d) as usize * dec.len();
        ensure(cert.len() <= limit, || format!("case {k}: {} terms > {limit}", cert.len()))?;
        let back = schmidt_from_prk_certificate(q, &cert).map_err(err)?;
        ensure(verify_schmidt(q, &back).map_err(err)?, || format!("case {k}: restriction does not verify"))?;
        ensure(back.len() <= cert.len(), || format!("case {k}: restriction longer than certificate"))?;
    }
    Ok(format!("{} decompositions", cases.len()))
}

fn bias_slice_equality() -> Check {
    let corpus = small_field_instances(3, 300).map_err(err)?;
    for inst in &corpus {
        let p = &inst.form;
        let b = bias_exact(p, 1 << 24).map_err(err)?;
        let z = singular_locus_count(p, 1 << 24).map_err(err)?;
        let density = z.total_points as f64 / (z.q as f64).powi(z.ambient_dim as i32);
        ensure((b.value - density).abs() < 1e-9, || format!("{}: {} vs {density}", inst.id, b.value))?;
        let full = bias_full_enumeration(p, 1 << 24).map_err(err)?;
        ensure((b.value - full).abs() < 1e-9, || format!("{}: slice {} vs character sum {full}", inst.id, b.value))?;
    }
    Ok(format!("{} instances", corpus.len()))
}

fn diagonal_bias_law() -> Check {
    let mut checked = 0;
    for q in [2, 3, 5] {
        let f = prime(q);
        for d in [2, 3] {
            let block = diagonal_form(&f, &vec![1; d], 1).map_err(err)?;
            let beta = bias_full_enumeration(&block, 1 << 20).map_err(err)?;
            if d == 2 {
                ensure((beta - 1.0 / q as f64).abs() < 1e-12, || format!("beta({q},2) = {beta}"))?;
            }
            for r in 0..=3 {
                let p = diagonal_form(&f, &vec![r.max(1); d], r).map_err(err)?;
                let b = bias_exact(&p, 1 << 20).map_err(err)?.value;
                ensure((b - beta.powi(r as i32)).abs() < 1e-9, || format!("q={q} d={d} r={r}: {b} vs {beta}^{r}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} diagonals"))
}

fn rank_corpus() -> Result<Vec<strength::corpus::Instance>, String> {
    let mut all = small_field_instances(3, 300).map_err(err)?;
    let c = corpus_generate(Profile::RandomSmallfield, 5, &CorpusParams { count: 60, ..CorpusParams::default() })
        .map_err(err)?;
    for (name, v) in &c.files {
        let f = match strength::json::ring_of(v).map_err(err)? {
            strength::AnyRing::Finite(f) => f,
            _ => return Err(format!("{name}: not over a finite field")),
        };
        all.push(strength::corpus::Instance {
            id: name.clone(),
            form: multilinear_from_json(&f, v).map_err(err)?,
            constructed_rank: None,
        });
    }
    Ok(all)
}

fn bias_rank_direction() -> Check {
    let corpus = rank_corpus()?;
    let opts = RankOptions::default();
    for inst in &corpus {
        let (b, cert) = rank_bounds(&inst.form, &opts).map_err(err)?;
        ensure(verify_certificate(&inst.form, &cert).map_err(err)?, || format!("{}: bad certificate", inst.id))?;
        let bias = bias_exact(&inst.form, 1 << 24).map_err(err)?;
        let q = bias.q as u128;
        // bias >= q^-upper, i.e. zero_slices q^upper >= q^prefix.
        let lhs = bias.zero_slices * q.pow(b.upper as u32);
        ensure(lhs >= q.pow(bias.prefix_dim as u32), || format!("{}: bias {} < q^-{}", inst.id, bias.value, b.upper))?;
    }
    Ok(format!("{} instances, 0 violations", corpus.len()))
}

fn codim_and_diagonals() -> Check {
    let corpus = rank_corpus()?;
    let opts = RankOptions::default();
    for inst in &corpus {
        let (b, _) = rank_bounds(&inst.form, &opts).map_err(err)?;
        let z = singular_locus_count(&inst.form, 1 << 24).map_err(err)?;
        ensure(z.codim_estimate <= b.upper, || format!("{}: codim {} > prk {}", inst.id, z.codim_estimate, b.upper))?;
    }
    let cap: u128 = 1 << 22;
    let mut collections = 0;
    let mut combos = 0;
    for q in [2, 3, 5, 7] {
        let f = prime(q);
        for d in [2, 3] {
            for rbar in 1..=2 {
                for n in 1..=3 {
                    let s = n * rbar;
                    if (q as u128).pow(((d - 1) * s) as u32) > cap {
                        continue;
                    }
                    let c = diagonal_collection(&f, n, rbar, d).map_err(err)?;
                    let got = singular_locus_count_collection(&c, cap).map_err(err)?.total_points;
                    let want = diagonal_collection_locus_closed_form(q, n, rbar, d);
                    ensure(got == want, || format!("collection q={q} d={d} n={n} rbar={rbar}: {got} vs {want}"))?;
                    collections += 1;
                    for a in projective_points(&f, n, cap).map_err(err)? {
                        let m = a.iter().filter(|x| x.0 != 0).count();
                        let got = singular_locus_count(&c.combination(&a).map_err(err)?, cap).map_err(err)?.total_points;
                        let want = diagonal_locus_closed_form(q, d, s, m * rbar);
                        ensure(got == want, || format!("q={q} d={d} n={n} rbar={rbar} a={a:?}: {got} vs {want}"))?;
                        combos += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{} instances, {collections} collections, {combos} combinations", corpus.len()))
}

fn scaling_gate() -> Check {
    let mut groups = [0usize; 2];
    for seed in 0..200 {
        let inst = fuzz_scaling_instance(seed).map_err(err)?;
        groups[usize::from(inst.group != strength::descent::Group::Integers)] += 1;
        let r = scaling_lemma_audit(&format!("fuzz-{seed}"), &inst.system, inst.group, inst.r, inst.l, 1 << 26)
            .map_err(err)?;
        ensure(r.verdict == Verdict::Holds, || format!("seed {seed}: {} > {}", r.lhs, r.rhs))?;
    }
    Ok(format!("200 systems ({} over Z, {} modular)", groups[0], groups[1]))
}

fn kernel_gate() -> Check {
    for seed in 0..200 {
        let (m, n) = random_rank_deficient(seed);
        let r = small_kernel_audit(&format!("kernel-{seed}"), &m, n).map_err(err)?;
        ensure(r.verdict == Verdict::Holds, || format!("seed {seed}: {} > {}", r.lhs, r.rhs))?;
    }
    Ok("200 matrices".into())
}

fn universality() -> Check {
    let opts = RankOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut solved = 0;
    let mut diagonal = 0;
    let mut attempts = 0;
    while solved < 50 {
        attempts += 1;
        if attempts > 500 {
            return Err(format!("only {solved} qualifying instances"));
        }
        let q = [2, 3][rng.gen_range(0..2)];
        let f = prime(q);
        let is_diagonal = solved % 3 == 0;
        let (src, tgt) = if is_diagonal {
            // A diagonal target D_t inside a larger diagonal.
            let d = rng.gen_range(2..=3);
            let big = rng.gen_range(2..=3);
            let t = rng.gen_range(1..=big.min(2));
            let p = diagonal_form(&f, &vec![big; d], big).map_err(err)?;
            let r = diagonal_form(&f, &vec![t; d], t).map_err(err)?;
            (FormCollection::new(vec![p]).map_err(err)?, FormCollection::new(vec![r]).map_err(err)?)
        } else {
            let d = rng.gen_range(2..=3);
            let dims: Vec<usize> = (0..d).map(|_| rng.gen_range(2..=3)).collect();
            let n = rng.gen_range(1..=2);
            let t = rng.gen_range(1..=2);
            let members = (0..n).map(|_| random_form(&f, d, &dims, rng.gen())).collect::<Result<_, _>>().map_err(err)?;
            let src = FormCollection::new(members).map_err(err)?;
            let maps = LinearMapTuple::random(&f, &dims, t, &mut rng);
            let tgt = src.compose(&maps).map_err(err)?;
            (src, tgt)
        };
        // Only instances where the source rank exceeds what the target needs.
        let mut src_lower = usize::MAX;
        let mut tgt_upper = 0;
        for (p, r) in src.members().iter().zip(tgt.members()) {
            src_lower = src_lower.min(rank_bounds(p, &opts).map_err(err)?.0.lower);
            tgt_upper = tgt_upper.max(rank_bounds(r, &opts).map_err(err)?.0.upper);
        }
        if src_lower <= tgt_upper {
            continue;
        }
        let res = solve_embedding(&src, &tgt, Strategy::Exhaustive, 0, 1_000_000).map_err(err)?;
        match res.outcome {
            SolveOutcome::Found(e) => {
                ensure(e.verified, || format!("instance {solved}: unverified embedding"))?;
                ensure(src.compose(&e.maps).map_err(err)?.members() == tgt.members(), || {
                    format!("instance {solved}: composition differs from targets")
                })?;
            }
            other => return Err(format!("instance {solved}: {other:?} after {} nodes", res.nodes)),
        }
        solved += 1;
        diagonal += usize::from(is_diagonal);
    }
    let f2 = prime(2);
    let one = FormCollection::new(vec![diagonal_form(&f2, &[1, 1], 1).map_err(err)?]).map_err(err)?;
    let two = FormCollection::new(vec![diagonal_form(&f2, &[2, 2], 2).map_err(err)?]).map_err(err)?;
    let res = solve_embedding(&one, &two, Strategy::Exhaustive, 0, 1_000_000).map_err(err)?;
    ensure(res.outcome == SolveOutcome::NotFound { certified: true }, || format!("rank 1 to 2: {:?}", res.outcome))?;
    Ok(format!("{solved} embeddings ({diagonal} diagonal), rank 1 to 2 certified impossible"))
}

fn descent() -> Check {
    let primes = [5, 7, 11, 13];
    let opts = RankOptions::default();
    for d in 2..=3 {
        for r in 0..=3 {
            let p = planted_diagonal(d, r, None).map_err(err)?;
            let rep = mod_p_descent_report("diag", &p, &primes, &opts, 1 << 22).map_err(err)?;
            for row in &rep.rows {
                ensure(row.lower == r && row.upper == r, || {
                    format!("d={d} r={r} p={}: bounds ({}, {})", row.p, row.lower, row.upper)
                })?;
                ensure(!row.bad_prime, || format!("d={d} r={r}: p={} flagged", row.p))?;
            }
            let ceiling = (1usize << (d - 1)) * d * r;
            ensure(rep.q_upper == r, || format!("d={d} r={r}: Q upper {}", rep.q_upper))?;
            ensure(rep.ceiling_good == Some(ceiling) && rep.q_upper <= ceiling, || {
                format!("d={d} r={r}: ceiling {:?} vs {ceiling}", rep.ceiling_good)
            })?;
            ensure(rep.audit.verdict != Verdict::Violation, || format!("d={d} r={r}: violation"))?;
        }
    }
    let mut planted = 0;
    for d in 2..=3 {
        for r in 1..=3 {
            for bad in primes {
                let p = planted_diagonal(d, r, Some(bad)).map_err(err)?;
                let rep = mod_p_descent_report("planted", &p, &primes, &opts, 1 << 22).map_err(err)?;
                let flagged: Vec<u32> = rep.rows.iter().filter(|x| x.bad_prime).map(|x| x.p).collect();
                ensure(flagged == vec![bad], || format!("d={d} r={r} planted {bad}: flagged {flagged:?}"))?;
                planted += 1;
            }
        }
    }
    Ok(format!("8 diagonals x 4 primes, {planted} planted forms flagged exactly"))
}

fn sum_of_powers(f: &FiniteField, d: usize, s: usize) -> HomogeneousForm<FiniteField> {
    let terms: Vec<(i64, Vec<u32>)> = (0..s)
        .map(|i| {
            let mut e = vec![0; s];
            e[i] = d as u32;
            (1, e)
        })
        .collect();
    HomogeneousForm::from_int_terms(f.clone(), d, s, &terms).expect("form")
}

fn geometry() -> Check {
    let f = prime(5);
    let mut corpus: Vec<(String, HomogeneousForm<FiniteField>)> = Vec::new();
    for d in 2..=3 {
        corpus.push((format!("powers_d{d}"), sum_of_powers(&f, d, 3)));
        for k in 0..20 {
            corpus.push((format!("rand_d{d}_{k}"), random_homogeneous(&f, d, 3, 100 + k).map_err(err)?));
        }
        let mono = |e: Vec<u32>| HomogeneousForm::from_int_terms(f.clone(), d, 3, &[(1, e)]).expect("form");
        corpus.push((format!("xpow_d{d}"), mono(vec![d as u32, 0, 0])));
        corpus.push((format!("mixed_d{d}"), mono(vec![1, d as u32 - 1, 0])));
    }
    corpus.push(("xyz".into(), HomogeneousForm::from_int_terms(f.clone(), 3, 3, &[(1, vec![1, 1, 1])]).map_err(err)?));
    let opts = GeometryOptions::default();
    let mut consistent = 0;
    for (id, q) in &corpus {
        let rows = geometry_inequality_audit(id, std::slice::from_ref(q), &opts).map_err(err)?;
        for r in &rows {
            ensure(r.verdict != Verdict::Violation, || format!("{id}: {} violated ({} vs {})", r.kind, r.lhs, r.rhs))?;
            if r.verdict == Verdict::Consistent {
                consistent += 1;
            }
        }
        let birch = &rows[0];
        ensure(birch.lhs <= birch.rhs, || format!("{id}: rk_B {} > 2 rk {}", birch.lhs, birch.rhs))?;
    }
    for d in 2..=3 {
        for s in 1..=3 {
            let c = gradient_locus_count(&sum_of_powers(&f, d, s), 1 << 20).map_err(err)?;
            ensure(c.total_points == 1 && c.codim_estimate == s, || {
                format!("sum of {s} powers, d={d}: {} points, codim {}", c.total_points, c.codim_estimate)
            })?;
        }
    }
    Ok(format!("{} forms, {consistent} consistent rows, no violations", corpus.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("polarization identity", 10, polarization_identity),
        ("schmidt/partition rank bridge", 30, rank_bridge),
        ("bias equals slice locus density", 60, bias_slice_equality),
        ("diagonal bias law", 30, diagonal_bias_law),
        ("bias at least q^-prk", 60, bias_rank_direction),
        ("locus codimension and diagonal counts", 60, codim_and_diagonals),
        ("scaling lemma gate", 60, scaling_gate),
        ("small kernel gate", 10, kernel_gate),
        ("embedding solver", 300, universality),
        ("mod-p descent", 60, descent),
        ("geometry audits", 120, geometry),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(*limit);
        let (ok, note) = match outcome {
            Ok(note) if elapsed <= limit => (true, note),
            Ok(note) => (false, format!("{note}; over time limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name} ({:.2}s / {}s): {note}",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
