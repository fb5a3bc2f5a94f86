//! Reproducible corpora of forms with a manifest.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::forms::{diagonal_form, random_form, MultilinearForm};
use crate::json::multilinear_to_json;
use crate::ring::{CoeffRing, Integers};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    DiagonalLadder,
    RandomSmallfield,
    IntegerDescent,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal-ladder" => Ok(Profile::DiagonalLadder),
            "random-smallfield" => Ok(Profile::RandomSmallfield),
            "integer-descent" => Ok(Profile::IntegerDescent),
            _ => Err(Error::Parse(format!("unknown corpus profile {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub ring: String,
    pub d: usize,
    pub dims: Vec<usize>,
    /// Partition rank when known by construction.
    pub known_prk: Option<usize>,
    /// The prime dividing a planted coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_prime: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub profile: Profile,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub manifest: Manifest,
    pub files: Vec<(String, Value)>,
}

#[derive(Clone, Debug)]
pub struct CorpusParams {
    pub d: usize,
    pub max_rank: usize,
    pub p: u32,
    pub count: usize,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            d: 3,
            max_rank: 3,
            p: 3,
            count: 12,
        }
    }
}

fn entry<R: CoeffRing>(id: String, form: &MultilinearForm<R>, known: Option<usize>, planted: Option<u32>) -> (ManifestEntry, (String, Value)) {
    let file = format!("{id}.json");
    (
        ManifestEntry {
            id,
            file: file.clone(),
            ring: form.ring().to_string(),
            d: form.arity(),
            dims: form.dims().to_vec(),
            known_prk: known,
            planted_prime: planted,
        },
        (file, multilinear_to_json(form)),
    )
}

/// A diagonal integer form `sum_k c_k prod_i x_i(k)` with unit coefficients
/// except `c_{r-1} = planted` when given.
pub fn planted_diagonal(d: usize, r: usize, planted: Option<u32>) -> Result<MultilinearForm<Integers>> {
    let s = r.max(1);
    let terms: Vec<(i64, Vec<usize>)> = (0..r)
        .map(|k| {
            let c = if k + 1 == r { planted.map_or(1, i64::from) } else { 1 };
            (c, vec![k; d])
        })
        .collect();
    MultilinearForm::from_terms(Integers, vec![s; d], &terms)
}

pub fn corpus_generate(profile: Profile, seed: u64, params: &CorpusParams) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    match profile {
        Profile::DiagonalLadder => {
            let field = FiniteField::prime(params.p)?;
            let dims = vec![params.max_rank.max(1); params.d];
            for r in 1..=params.max_rank {
                let form = diagonal_form(&field, &dims, r)?;
                pairs.push(entry(format!("diag_r{r}_d{}_p{}", params.d, params.p), &form, Some(r), None));
            }
        }
        Profile::RandomSmallfield => {
            for k in 0..params.count {
                let q = [2, 3, 5][rng.gen_range(0..3)];
                let d = rng.gen_range(2..=params.d.max(2));
                let dims: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=3)).collect();
                let field = FiniteField::prime(q)?;
                let form = random_form(&field, d, &dims, rng.gen())?;
                pairs.push(entry(format!("rand_{k:03}_d{d}_p{q}"), &form, None, None));
            }
        }
        Profile::IntegerDescent => {
            for d in 2..=params.d.max(2) {
                for r in 0..=params.max_rank {
                    let form = planted_diagonal(d, r, None)?;
                    pairs.push(entry(format!("zdiag_r{r}_d{d}"), &form, Some(r), None));
                }
            }
            for k in 0..params.count.min(4) {
                let p = [5, 7, 11, 13][k];
                let d = rng.gen_range(2..=params.d.max(2));
                let r = rng.gen_range(1..=params.max_rank.max(1));
                let form = planted_diagonal(d, r, Some(p))?;
                pairs.push(entry(format!("planted_p{p}_r{r}_d{d}"), &form, Some(r), Some(p)));
            }
        }
    }
    let (entries, files) = pairs.into_iter().unzip();
    Ok(Corpus {
        manifest: Manifest { profile, seed, entries },
        files,
    })
}

impl Corpus {
    /// Writes every form and `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        for (name, v) in &self.files {
            fs::write(dir.join(name), serde_json::to_string_pretty(v)? + "\n").map_err(io)?;
        }
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest)? + "\n",
        )
        .map_err(io)?;
        Ok(())
    }
}

/// A labeled multilinear instance over a small prime field.
#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub form: MultilinearForm<FiniteField>,
    /// Upper bound on the partition rank known by construction.
    pub constructed_rank: Option<usize>,
}

/// Random forms, diagonals and sums of `r` random products over
/// `q in {2, 3, 5}`, `d in {2, 3}`, dims at most 3.
pub fn small_field_instances(seed: u64, count: usize) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let q = [2, 3, 5][k % 3];
        let field = FiniteField::prime(q)?;
        let d = rng.gen_range(2..=3);
        let dims: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=3)).collect();
        let (form, constructed) = match k % 4 {
            0 => (random_form(&field, d, &dims, rng.gen())?, None),
            1 => {
                let r = rng.gen_range(0..=*dims.iter().min().expect("d >= 2"));
                (diagonal_form(&field, &dims, r)?, Some(r))
            }
            _ => {
                let r = rng.gen_range(1..=2);
                let mut acc = MultilinearForm::zero(field.clone(), dims.clone())?;
                for _ in 0..r {
                    acc = acc.add(&random_product(&field, &dims, &mut rng)?)?;
                }
                (acc, Some(r))
            }
        };
        out.push(Instance {
            id: format!("sf_{seed}_{k:03}_q{q}_d{d}"),
            form,
            constructed_rank: constructed,
        });
    }
    Ok(out)
}

/// `R(x_S) S(x_{S^c})` for a random proper nonempty slot set `S` containing
/// slot 0 and random forms `R`, `S`.
fn random_product<G: Rng>(field: &FiniteField, dims: &[usize], rng: &mut G) -> Result<MultilinearForm<FiniteField>> {
    let d = dims.len();
    let mut left = vec![0];
    for i in 1..d {
        if rng.gen_bool(0.5) && left.len() + 1 < d {
            left.push(i);
        }
    }
    let right: Vec<usize> = (0..d).filter(|i| !left.contains(i)).collect();
    let ldims: Vec<usize> = left.iter().map(|&i| dims[i]).collect();
    let rdims: Vec<usize> = right.iter().map(|&i| dims[i]).collect();
    let r = random_form(field, left.len(), &ldims, rng.gen())?;
    let s = random_form(field, right.len(), &rdims, rng.gen())?;
    MultilinearForm::from_fn(field.clone(), dims.to_vec(), |idx| {
        let li: Vec<usize> = left.iter().map(|&i| idx[i]).collect();
        let ri: Vec<usize> = right.iter().map(|&i| idx[i]).collect();
        field.mul(*r.coeff(&li), *s.coeff(&ri))
    })
}
