use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use strength::audit::Verdict;
use strength::bias::{bias_exact, bias_full_enumeration};
use strength::descent::{apply, fuzz_scaling_instance, random_rank_deficient, scaling_lemma_audit, small_kernel_vector};
use strength::forms::{random_form, random_homogeneous};
use strength::geometry::singular_locus_count;
use strength::linalg::{inverse, Matrix};
use strength::rank::{rank_bounds, verify_certificate, RankOptions};
use strength::universality::{build_system, maps_to_args, verify_embedding};
use strength::{CoeffRing, FiniteField, FormCollection, Integers, LinearMapTuple, Rationals};

fn field(q: u32) -> FiniteField {
    FiniteField::prime(q).unwrap()
}

fn dims_for(d: usize, seed: u64) -> Vec<usize> {
    (0..d).map(|i| 1 + ((seed >> (2 * i)) % 3) as usize).collect()
}

/// Random invertible `s x s` matrices by rejection.
fn invertible(f: &FiniteField, s: usize, rng: &mut ChaCha8Rng) -> Matrix<strength::Fq> {
    loop {
        let data = (0..s * s).map(|_| f.random_elem(rng)).collect();
        let m = Matrix::from_vec(s, s, data).unwrap();
        if inverse(f, &m).unwrap().is_some() {
            return m;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polarization_identity(d in 1usize..=4, s in 1usize..=4, seed in any::<u64>(), pt in proptest::collection::vec(-5i64..=5, 4)) {
        let q = random_homogeneous(&Rationals, d, s, seed).unwrap();
        let x: Vec<_> = pt[..s].iter().map(|&v| Rationals.from_int(v)).collect();
        let lhs = Rationals.mul(&Rationals.factorial(d), &q.evaluate(&x).unwrap());
        let rhs = q.polarize().unwrap().evaluate(&vec![x; d]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn certificates_expand_to_the_form(qi in 0usize..3, d in 2usize..=3, seed in any::<u64>()) {
        let f = field([2, 3, 5][qi]);
        let p = random_form(&f, d, &dims_for(d, seed), seed).unwrap();
        let (b, cert) = rank_bounds(&p, &RankOptions::default()).unwrap();
        prop_assert!(verify_certificate(&p, &cert).unwrap());
        prop_assert_eq!(cert.len(), b.upper);
        prop_assert!(b.lower <= b.upper);
    }

    #[test]
    fn bias_is_locus_density(qi in 0usize..3, d in 2usize..=3, seed in any::<u64>()) {
        let f = field([2, 3, 5][qi]);
        let p = random_form(&f, d, &dims_for(d, seed), seed).unwrap();
        let b = bias_exact(&p, 1 << 20).unwrap();
        let z = singular_locus_count(&p, 1 << 20).unwrap();
        prop_assert_eq!(b.zero_slices, z.total_points);
        let full = bias_full_enumeration(&p, 1 << 22).unwrap();
        prop_assert!((full - b.value).abs() < 1e-9);
    }

    #[test]
    fn bias_dominates_rank_bound(qi in 0usize..3, d in 2usize..=3, seed in any::<u64>()) {
        let f = field([2, 3, 5][qi]);
        let p = random_form(&f, d, &dims_for(d, seed), seed).unwrap();
        let (b, _) = rank_bounds(&p, &RankOptions::default()).unwrap();
        let bias = bias_exact(&p, 1 << 20).unwrap();
        // bias >= q^-upper, compared on integers: zero_slices * q^upper >= q^prefix
        let q = f.order() as u128;
        prop_assert!(bias.zero_slices * q.pow(b.upper as u32) >= q.pow(bias.prefix_dim as u32));
    }

    #[test]
    fn bias_multiplies_over_direct_sums(qi in 0usize..3, seed in any::<u64>()) {
        let f = field([2, 3, 5][qi]);
        let a = random_form(&f, 2, &dims_for(2, seed), seed).unwrap();
        let b = random_form(&f, 2, &dims_for(2, seed >> 8), seed ^ 1).unwrap();
        let sum = a.direct_sum(&b).unwrap();
        let (ba, bb, bs) = (
            bias_exact(&a, 1 << 20).unwrap(),
            bias_exact(&b, 1 << 20).unwrap(),
            bias_exact(&sum, 1 << 20).unwrap(),
        );
        prop_assert_eq!(bs.zero_slices, ba.zero_slices * bb.zero_slices);
    }

    #[test]
    fn bias_invariant_under_invertible_maps(qi in 0usize..3, d in 2usize..=3, seed in any::<u64>()) {
        let f = field([2, 3, 5][qi]);
        let s = 1 + (seed % 3) as usize;
        let p = random_form(&f, d, &vec![s; d], seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let maps = LinearMapTuple::new(s, (0..d).map(|_| invertible(&f, s, &mut rng)).collect()).unwrap();
        let q = p.compose(&maps).unwrap();
        prop_assert_eq!(bias_exact(&p, 1 << 20).unwrap().zero_slices, bias_exact(&q, 1 << 20).unwrap().zero_slices);
    }

    #[test]
    fn scaling_lemma(seed in any::<u64>()) {
        let inst = fuzz_scaling_instance(seed).unwrap();
        let r = scaling_lemma_audit("p", &inst.system, inst.group, inst.r, inst.l, 1 << 24).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn kernel_vectors(seed in any::<u64>()) {
        let (m, n) = random_rank_deficient(seed);
        let a = small_kernel_vector(&Integers, &m, n).unwrap();
        prop_assert!(apply(&Integers, &m, &a).iter().all(|x| *x == BigInt::from(0)));
        prop_assert!(a.iter().any(|x| *x != BigInt::from(0)));
    }

    #[test]
    fn system_matches_composition(qi in 0usize..2, d in 2usize..=3, t in 1usize..=2, seed in any::<u64>()) {
        let f = field([2, 3][qi]);
        let dims = dims_for(d, seed);
        let members = (0..2).map(|k| random_form(&f, d, &dims, seed.wrapping_add(k)).unwrap()).collect();
        let src = FormCollection::new(members).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let maps = LinearMapTuple::random(&f, &dims, t, &mut rng);
        let tgt = src.compose(&maps).unwrap();
        prop_assert!(verify_embedding(&src, &tgt, &maps).unwrap());
        let sys = build_system(&src, t, Some(&tgt)).unwrap();
        prop_assert_eq!(sys.len(), 2 * t.pow(d as u32));
        let args = maps_to_args(&maps);
        for eq in &sys.equations {
            prop_assert_eq!(Some(eq.form.evaluate(&args).unwrap()), eq.target);
        }
    }
}
