use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdnb_core::complexity::TraceKernel;
use sdnb_core::construct::{base_field, construct, solve_semisimple_traced, verify_sdnb, SelfPairedCase};
use sdnb_core::fourier::FourierCtx;
use sdnb_core::orthogonal::{all_sdnb_generators, GroupSpec};
use sdnb_core::search::{merge_reports, search_min, SearchOptions, SearchReport, Searcher};
use sdnb_core::{FieldCtx, FieldElement};

fn random_element(f: &FieldCtx, rng: &mut ChaCha8Rng) -> FieldElement {
    f.element((0..f.degree()).map(|_| rng.gen_range(0..f.characteristic())).collect()).unwrap()
}

#[test]
fn every_self_paired_case_is_reached_and_solves() {
    let mut seen = BTreeSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (q, n) in [(3u64, 5usize), (7, 3), (3, 7), (11, 3), (7, 5), (19, 3), (9, 5), (3, 13)] {
        let fq = base_field(q).unwrap();
        let big = FieldCtx::extension(&fq, n).unwrap();
        let fourier = FourierCtx::new(fq, n).unwrap();
        let mut tries = 0;
        while tries < 60 {
            let alpha = random_element(&big, &mut rng);
            if !big.is_normal(&alpha) {
                continue;
            }
            tries += 1;
            // The solver asserts v conj(v) = R internally.
            let (v, cases) = solve_semisimple_traced(&fourier, &big, &alpha).unwrap();
            let ga = fourier.algebra();
            let gamma = ga.act(&ga.inverse(&v).unwrap(), &alpha, &big).unwrap();
            assert!(verify_sdnb(&big, &gamma), "q={q} n={n}");
            seen.extend(cases.iter().map(|c| format!("{c:?}")));
        }
    }
    for case in [SelfPairedCase::RootFixed, SelfPairedCase::NegRootMoved, SelfPairedCase::Combined] {
        assert!(seen.contains(&format!("{case:?}")), "{case:?} never reached");
    }
}

#[test]
fn stream_lengths_match_closed_forms() {
    let matrix = [(2u64, 3usize), (2, 5), (2, 7), (2, 9), (3, 5), (3, 7), (5, 3), (3, 3), (3, 9), (5, 5), (7, 7)];
    for (q, n) in matrix {
        let spec = GroupSpec::new(q, n).unwrap();
        let mut count = 0u64;
        let mut distinct = BTreeSet::new();
        for item in spec.iter() {
            distinct.insert(item.unwrap().1);
            count += 1;
        }
        assert_eq!(BigUint::from(count), spec.cardinality, "q={q} n={n}");
        assert_eq!(distinct.len() as u64, count);
    }
}

#[test]
fn products_of_enumerated_elements_stay_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (q, n) in [(3u64, 7usize), (5, 5), (13, 9), (4, 5)] {
        let spec = GroupSpec::new(q, n).unwrap();
        let ga = spec.algebra();
        let len = spec.len().unwrap();
        for _ in 0..20 {
            let a = spec.element(rng.gen_range(0..len)).unwrap();
            let b = spec.element(rng.gen_range(0..len)).unwrap();
            let ab = ga.mul(&a, &b).unwrap();
            assert_eq!(ga.mul(&ab, &ga.conjugate(&ab)).unwrap(), ga.one());
        }
    }
}

#[test]
fn generators_are_distinct_self_dual_and_closed_under_the_orbit() {
    for (q, n) in [(2u64, 5usize), (3, 5), (5, 3), (3, 3), (4, 3)] {
        let cert = construct(q, n).unwrap();
        let spec = GroupSpec::new(q, n).unwrap();
        let gens: Vec<FieldElement> = all_sdnb_generators(&spec, &cert).unwrap().map(|g| g.unwrap()).collect();
        let set: BTreeSet<FieldElement> = gens.iter().cloned().collect();
        assert_eq!(set.len(), gens.len());
        assert_eq!(BigUint::from(gens.len()), spec.cardinality);
        let f = &cert.field;
        for g in &gens {
            assert!(verify_sdnb(f, g));
            assert!(set.contains(&f.frobenius(g, 1)));
            if q % 2 == 1 {
                assert!(set.contains(&f.neg(g)));
            }
        }
    }
}

#[test]
fn complexity_is_invariant_on_the_conjugate_orbit() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (q, n) in [(2u64, 9usize), (3, 7), (13, 9), (5, 5), (8, 5)] {
        let cert = construct(q, n).unwrap();
        let s = Searcher::new(&cert).unwrap();
        let kern = TraceKernel::new(&cert.field).unwrap();
        let f: &Arc<FieldCtx> = &cert.field;
        for _ in 0..10 {
            let g = s.generator(rng.gen_range(0..s.len())).unwrap();
            let c = kern.complexity(&g).unwrap();
            assert_eq!(kern.complexity(&f.frobenius(&g, 1)).unwrap(), c);
            if q % 2 == 1 {
                assert_eq!(kern.complexity(&f.neg(&g)).unwrap(), c);
            }
        }
    }
}

#[test]
fn search_minimum_bounds_the_constructed_basis() {
    for (q, n) in [(2u64, 7usize), (3, 5), (7, 3), (9, 3)] {
        let cert = construct(q, n).unwrap();
        let opts = SearchOptions { verify_every: 1, ..SearchOptions::for_degree(n) };
        let r = search_min(&cert, &opts).unwrap();
        assert!(r.min_complexity.unwrap() <= cert.complexity());
        assert!(r.min_complexity.unwrap() >= 2 * n as u64 - 1);
        assert_eq!(r.visited, r.group_cardinality);
    }
}

fn shard_reports(cuts: &[u64]) -> Vec<SearchReport> {
    let cert = construct(2, 9).unwrap();
    let s = Searcher::new(&cert).unwrap();
    let mut bounds = vec![0];
    bounds.extend(cuts.iter().map(|c| c % (s.len() + 1)));
    bounds.push(s.len());
    bounds.sort();
    bounds
        .windows(2)
        .map(|w| {
            let opts = SearchOptions { range: Some((w[0], w[1])), ..SearchOptions::for_degree(9) };
            s.run(&opts).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn merge_is_associative_and_commutative(cuts in proptest::collection::vec(0u64..64, 2)) {
        let r = shard_reports(&cuts);
        let (a, b, c) = (&r[0], &r[1], &r[2]);
        let left = merge_reports(&merge_reports(a, b).unwrap(), c).unwrap();
        let right = merge_reports(a, &merge_reports(b, c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(merge_reports(a, b).unwrap(), merge_reports(b, a).unwrap());
        let swapped = merge_reports(&merge_reports(c, a).unwrap(), b).unwrap();
        prop_assert_eq!(&left, &swapped);
        prop_assert!(left.complete);
        prop_assert_eq!(left.min_complexity, Some(17));
    }
}
