use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use serde_json::{json, Value};
use strength::audit::{write_csv, AuditReport};
use strength::bias::{bias_exact, bias_of_values, collective_bias, BiasResult};
use strength::corpus::{corpus_generate, CorpusParams, Profile};
use strength::descent::{
    check_pseudo_norm, fuzz_scaling_instance, mod_p_descent_report, random_rank_deficient, scaling_lemma_audit,
    small_kernel_audit, Group, NormedDomain, RingModel,
};
use strength::geometry::{
    birch_rank_estimate, geometry_inequality_audit, locus_csv, noether_fiber_audit, singular_locus_count_collection,
    singular_locus_points, GeometryOptions,
};
use strength::rank::theorem::{collective_schmidt_bounds, TheoremOptions};
use strength::rank::{
    best_flattening_certificate, collective_rank_bounds, main_theorem_audit_finite, main_theorem_audit_integers,
    prk_exact_d2, rank_bounds, ConstantsTable, RankOptions,
};
use strength::universality::{
    build_system, embedding_to_json, relabel_rank_check, solve_embedding, universality_audit, SolveOutcome, Strategy,
    UniversalityOptions,
};
use strength::{AnyRing, Error, FiniteField, Fq, MultilinearForm, Rationals, Result};

use crate::input::{load, parse_ring, Doc};
use crate::{AuditKind, Cli, Command, Global};

pub enum Status {
    Clean,
    ProvedViolation,
}

const DEFAULT_PRIMES: [u32; 4] = [5, 7, 11, 13];

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf8"))
}

fn ring_override(g: &Global) -> Result<Option<AnyRing>> {
    g.ring.as_deref().map(parse_ring).transpose()
}

fn input(g: &Global) -> Result<Doc> {
    let path = g
        .form
        .as_ref()
        .or(g.collection.as_ref())
        .ok_or_else(|| Error::Parse("one of --form or --collection is required".into()))?;
    load(path, ring_override(g)?.as_ref())
}

fn targets(g: &Global) -> Result<Doc> {
    let path = g
        .targets
        .as_ref()
        .ok_or_else(|| Error::Parse("--targets is required".into()))?;
    load(path, ring_override(g)?.as_ref())
}

fn rank_opts(g: &Global) -> RankOptions {
    RankOptions {
        budget: g.budget,
        bias_cap: g.bias_cap,
    }
}

fn constants(g: &Global, d: usize) -> Result<ConstantsTable> {
    match &g.constants {
        None => Ok(ConstantsTable::defaults(d)),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            ConstantsTable::with_overrides(d, &serde_json::from_str(&text)?)
        }
    }
}

fn primes(g: &Global) -> Vec<u32> {
    if g.primes.is_empty() {
        g.prime.map_or_else(|| DEFAULT_PRIMES.to_vec(), |p| vec![p])
    } else {
        g.primes.clone()
    }
}

fn witness(a: &[Fq]) -> String {
    a.iter().map(|x| x.0.to_string()).collect::<Vec<_>>().join(" ")
}

fn audits(g: &Global, reports: &[AuditReport]) -> Result<Status> {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf)?;
    emit(g, &String::from_utf8(buf).expect("csv is utf8"))?;
    Ok(if reports.iter().any(AuditReport::is_proved_violation) {
        Status::ProvedViolation
    } else {
        Status::Clean
    })
}

pub fn run(cli: &Cli) -> Result<Status> {
    let g = &cli.global;
    match &cli.command {
        Command::Rank { cert } => rank(g, cert.as_deref()),
        Command::Bias => bias(g),
        Command::Geometry => geometry(g),
        Command::Descent { chain } => descent(g, chain.as_deref()),
        Command::Embed { strategy, restarts } => embed(g, strategy, *restarts),
        Command::Audit { kind } => audit(g, kind),
        Command::Corpus {
            profile,
            d,
            max_rank,
            p,
            count,
        } => {
            let profile: Profile = profile.parse()?;
            let dir = g
                .out
                .as_ref()
                .ok_or_else(|| Error::Parse("corpus needs --out DIR".into()))?;
            let params = CorpusParams {
                d: *d,
                max_rank: *max_rank,
                p: *p,
                count: *count,
            };
            let c = corpus_generate(profile, g.seed, &params)?;
            c.write(dir)?;
            println!("wrote {} forms and manifest.json to {}", c.files.len(), dir.display());
            Ok(Status::Clean)
        }
    }
}

const RANK_HEADER: [&str; 7] = ["instance", "quantity", "lower", "lower_source", "upper", "upper_source", "witness"];

fn rank(g: &Global, cert_path: Option<&Path>) -> Result<Status> {
    let doc = input(g)?;
    let opts = rank_opts(g);
    let mut rows = Vec::new();
    let mut cert: Option<Value> = None;
    match &doc.ring {
        AnyRing::Finite(_) if doc.homogeneous()? => {
            let forms = doc.finite_homogeneous()?;
            let (lower, upper, w) = collective_schmidt_bounds(&forms, &opts, g.cap)?;
            rows.push(vec![
                doc.id.clone(),
                "schmidt".into(),
                lower.to_string(),
                "polarization".into(),
                upper.to_string(),
                "restricted-certificate".into(),
                witness(&w),
            ]);
            if let [q] = forms.as_slice() {
                let (b, c) = rank_bounds(&q.polarize()?, &opts)?;
                rows.push(bounds_row(&doc.id, "prk-polarization", &b, ""));
                cert = Some(c.to_json());
            }
        }
        AnyRing::Finite(_) => {
            let c = doc.finite_collection()?;
            if c.len() == 1 {
                let (b, certificate) = rank_bounds(&c.members()[0], &opts)?;
                rows.push(bounds_row(&doc.id, "prk", &b, ""));
                cert = Some(certificate.to_json());
            } else {
                let b = collective_rank_bounds(&c, g.cap, &opts)?;
                rows.push(vec![
                    doc.id.clone(),
                    "collective-prk".into(),
                    b.lower.to_string(),
                    "min-over-combinations".into(),
                    b.upper.to_string(),
                    "certificate".into(),
                    witness(&b.witness),
                ]);
                cert = Some(b.certificate.to_json());
            }
        }
        AnyRing::Integers | AnyRing::Rationals => {
            let forms: Vec<MultilinearForm<Rationals>> = if doc.homogeneous()? {
                doc.rational_homogeneous()?
                    .iter()
                    .map(|q| q.polarize())
                    .collect::<Result<_>>()?
            } else {
                doc.rational_collection()?.members().to_vec()
            };
            let quantity = if doc.homogeneous()? { "prk-polarization" } else { "prk" };
            for (k, p) in forms.iter().enumerate() {
                let id = if forms.len() == 1 { doc.id.clone() } else { format!("{}#{k}", doc.id) };
                let (row, c) = rational_bounds(&id, quantity, p)?;
                rows.push(row);
                if forms.len() == 1 {
                    cert = Some(c);
                }
            }
        }
    }
    if let (Some(path), Some(c)) = (cert_path, cert) {
        write_file(path, &(serde_json::to_string_pretty(&c)? + "\n"))?;
    }
    emit(g, &table(&RANK_HEADER, &rows)?)?;
    Ok(Status::Clean)
}

fn bounds_row(id: &str, quantity: &str, b: &strength::rank::RankBounds, w: &str) -> Vec<String> {
    vec![
        id.into(),
        quantity.into(),
        b.lower.to_string(),
        b.lower_source.to_string(),
        b.upper.to_string(),
        b.upper_source.to_string(),
        w.into(),
    ]
}

/// Bounds over `Q`: exact for bilinear forms, flattening certificates above.
fn rational_bounds(id: &str, quantity: &str, p: &MultilinearForm<Rationals>) -> Result<(Vec<String>, Value)> {
    let row = |lower: usize, ls: &str, upper: usize, us: &str| {
        vec![
            id.to_string(),
            quantity.to_string(),
            lower.to_string(),
            ls.to_string(),
            upper.to_string(),
            us.to_string(),
            String::new(),
        ]
    };
    if p.is_zero() {
        let cert = strength::rank::PartitionRankCertificate::<Rationals>::empty(p.dims());
        return Ok((row(0, "exact", 0, "certificate"), cert.to_json()));
    }
    if p.arity() < 2 {
        return Err(Error::InfiniteRank(p.arity()));
    }
    if p.arity() == 2 {
        let (r, cert) = prk_exact_d2(p)?;
        return Ok((row(r, "exact", r, "d2-elimination"), cert.to_json()));
    }
    let cert = best_flattening_certificate(p)?;
    Ok((row(1, "trivial", cert.len(), "certificate"), cert.to_json()))
}

fn fraction(b: &BiasResult) -> String {
    let (n, d) = b.fraction();
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

const BIAS_HEADER: [&str; 7] = ["instance", "bias", "value", "zero_slices", "prefix_dim", "q", "witness"];

fn bias(g: &Global) -> Result<Status> {
    let doc = input(g)?;
    let field = doc.field()?.clone();
    let mut rows = Vec::new();
    if doc.homogeneous()? {
        for (k, q) in doc.finite_homogeneous()?.iter().enumerate() {
            let needed = (field.order() as u128).saturating_pow(q.nvars() as u32);
            if needed > g.bias_cap {
                return Err(Error::CapExceeded {
                    what: "bias enumeration",
                    needed,
                    cap: g.bias_cap,
                });
            }
            let v = bias_of_values(&field, &q.all_values()?);
            rows.push(vec![format!("{}#{k}", doc.id), String::new(), v.to_string(), String::new(), String::new(), field.order().to_string(), String::new()]);
        }
    } else {
        let c = doc.finite_collection()?;
        let (b, w) = if c.len() == 1 {
            (bias_exact(&c.members()[0], g.bias_cap)?, String::new())
        } else {
            let (b, w) = collective_bias(&c, g.bias_cap)?;
            (b, witness(&w))
        };
        rows.push(vec![
            doc.id.clone(),
            fraction(&b),
            b.value.to_string(),
            b.zero_slices.to_string(),
            b.prefix_dim.to_string(),
            b.q.to_string(),
            w,
        ]);
    }
    emit(g, &table(&BIAS_HEADER, &rows)?)?;
    Ok(Status::Clean)
}

fn geometry(g: &Global) -> Result<Status> {
    let doc = input(g)?;
    let rows = if doc.homogeneous()? {
        vec![(format!("{}:birch", doc.id), birch_rank_estimate(&doc.finite_homogeneous()?, g.cap)?)]
    } else {
        vec![(doc.id.clone(), singular_locus_count_collection(&doc.finite_collection()?, g.cap)?)]
    };
    emit(g, &locus_csv(&rows)?)?;
    Ok(Status::Clean)
}

fn descent(g: &Global, chain: Option<&Path>) -> Result<Status> {
    let doc = input(g)?;
    let report = mod_p_descent_report(&doc.id, &doc.integer_form()?, &primes(g), &rank_opts(g), g.cap)?;
    if let Some(path) = chain {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &report.chain {
            w.serialize(row).map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
        write_file(path, &String::from_utf8(bytes).expect("csv is utf8"))?;
    }
    emit(g, &report.csv()?)?;
    Ok(if report.audit.is_proved_violation() {
        Status::ProvedViolation
    } else {
        Status::Clean
    })
}

fn embed(g: &Global, strategy: &str, restarts: usize) -> Result<Status> {
    let src = input(g)?;
    let tgt = targets(g)?;
    let strategy = match strategy {
        "exhaustive" => Strategy::Exhaustive,
        "randomized" => Strategy::Randomized { restarts },
        other => return Err(Error::Parse(format!("unknown strategy {other:?}"))),
    };
    let field: FiniteField = src.field()?.clone();
    let res = solve_embedding(&src.finite_collection()?, &tgt.finite_collection()?, strategy, g.seed, g.budget)?;
    let (outcome, certified, embedding, sound) = match &res.outcome {
        SolveOutcome::Found(e) => ("found", Value::Null, embedding_to_json(&field, e), e.verified),
        SolveOutcome::NotFound { certified } => ("not-found", json!(certified), Value::Null, true),
        SolveOutcome::BudgetExhausted => ("budget-exhausted", Value::Null, Value::Null, true),
    };
    let doc = json!({
        "instance": src.id,
        "targets": tgt.id,
        "outcome": outcome,
        "certified": certified,
        "nodes": res.nodes,
        "embedding": embedding,
    });
    emit(g, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(if sound { Status::Clean } else { Status::ProvedViolation })
}

fn audit(g: &Global, kind: &AuditKind) -> Result<Status> {
    let opts = rank_opts(g);
    let reports = match kind {
        AuditKind::Scaling {
            seeds,
            modulus,
            radius,
            scale,
        } => match &g.collection.as_ref().or(g.form.as_ref()) {
            Some(_) => {
                let doc = input(g)?;
                let group = modulus.map_or(Group::Integers, Group::Modulo);
                let c = doc.integer_collection()?;
                vec![scaling_lemma_audit(&doc.id, c.members(), group, *radius, *scale, g.cap)?]
            }
            None => (g.seed..g.seed + seeds)
                .map(|s| {
                    let inst = fuzz_scaling_instance(s)?;
                    scaling_lemma_audit(&format!("fuzz-{s}"), &inst.system, inst.group, inst.r, inst.l, g.cap)
                })
                .collect::<Result<_>>()?,
        },
        AuditKind::Kernel { seeds, matrix } => match matrix {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                let rows: Vec<Vec<BigInt>> = serde_json::from_str(&text)?;
                let ncols = rows.first().map_or(0, Vec::len);
                let id = path.file_stem().map_or("matrix".into(), |s| s.to_string_lossy().into_owned());
                vec![small_kernel_audit(&id, &rows, ncols)?]
            }
            None => (g.seed..g.seed + seeds)
                .map(|s| {
                    let (m, n) = random_rank_deficient(s);
                    small_kernel_audit(&format!("kernel-{s}"), &m, n)
                })
                .collect::<Result<_>>()?,
        },
        AuditKind::Main => {
            let doc = input(g)?;
            let topts = TheoremOptions {
                rank: opts,
                cap: g.cap,
                ..TheoremOptions::default()
            };
            match &doc.ring {
                AnyRing::Finite(_) => {
                    let forms = doc.finite_homogeneous()?;
                    let table = constants(g, forms[0].degree())?;
                    vec![main_theorem_audit_finite(&doc.id, &forms, &table, &topts)?]
                }
                AnyRing::Integers => {
                    let forms = doc.integer_homogeneous()?;
                    let table = constants(g, forms[0].degree())?;
                    let p = g.prime.unwrap_or(DEFAULT_PRIMES[0]);
                    vec![main_theorem_audit_integers(&doc.id, &forms, p, &table, &topts)?]
                }
                AnyRing::Rationals => {
                    return Err(Error::InvalidInput("clear denominators and pass the forms over Z".into()));
                }
            }
        }
        AuditKind::Universality => {
            let src = input(g)?;
            let tgt = targets(g)?;
            let source = src.finite_collection()?;
            let table = constants(g, source.arity())?;
            let uopts = UniversalityOptions {
                rank: opts,
                budget: g.budget,
                cap: g.cap,
            };
            vec![universality_audit(&src.id, &source, &tgt.finite_collection()?, &table, &uopts)?]
        }
        AuditKind::Relabel { t } => {
            let src = input(g)?;
            let tgt = g.targets.as_ref().map(|_| targets(g)?.finite_collection()).transpose()?;
            let t = tgt.as_ref().map_or(*t, |c| c.dims()[0]);
            let sys = build_system(&src.finite_collection()?, t, tgt.as_ref())?;
            vec![relabel_rank_check(&src.id, &sys, g.bias_cap)?]
        }
        AuditKind::Geometry => {
            let doc = input(g)?;
            let gopts = GeometryOptions { rank: opts, cap: g.cap };
            geometry_inequality_audit(&doc.id, &doc.finite_homogeneous()?, &gopts)?
        }
        AuditKind::Descent => {
            let doc = input(g)?;
            vec![mod_p_descent_report(&doc.id, &doc.integer_form()?, &primes(g), &opts, g.cap)?.audit]
        }
        AuditKind::Noether { t, trials } => {
            let doc = input(g)?;
            let c = doc.finite_collection()?;
            let points = singular_locus_points(&c, g.cap)?;
            vec![noether_fiber_audit(&doc.id, c.ring(), &points, *t, *trials, g.seed)?]
        }
        AuditKind::Norm { model, radius, pairs } => {
            let text = fs::read_to_string(model).map_err(|e| Error::Parse(format!("{}: {e}", model.display())))?;
            let m = RingModel::from_json(&serde_json::from_str(&text)?)?;
            let id = model.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
            vec![norm_audit(&id, &m, *radius, *pairs, g.seed)?]
        }
    };
    audits(g, &reports)
}

fn norm_audit(id: &str, m: &RingModel, radius: u128, pairs: usize, seed: u64) -> Result<AuditReport> {
    fn go<R: NormedDomain>(id: &str, name: String, r: &R, radius: u128, pairs: usize, seed: u64) -> Result<AuditReport> {
        let c = check_pseudo_norm(r, radius, pairs, seed)?;
        let verdict = if c.subadditive && c.submultiplicative {
            strength::audit::Verdict::Holds
        } else {
            strength::audit::Verdict::Violation
        };
        Ok(AuditReport::new("pseudo-norm", id, c.max_ratio, c.constant, verdict)
            .constants(format!("c={}", c.constant))
            .detail("ring", name)
            .detail("subadditive", c.subadditive)
            .detail("pairs", c.pairs)
            .detail("radius", radius))
    }
    match m {
        RingModel::Integers(r) => go(id, m.name(), r, radius, pairs, seed),
        RingModel::Basis(r) => go(id, m.name(), r, radius, pairs, seed),
        RingModel::Poly(r) => go(id, m.name(), r, radius, pairs, seed),
    }
}
