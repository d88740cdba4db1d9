use std::collections::HashSet;
use std::sync::OnceLock;

use nodecomp::dp::{compute_tables, Cost, PhiEtaTables};
use nodecomp::math::{ceil_log2, complexity_upper_bound, min_latency, saturation_latency};
use nodecomp::oracle::enumerate_dbts;
use nodecomp::structure::{leave_one_out_fold, two_input, BinaryOperator, Structure, StructureBuilder};
use nodecomp::synthesis::{compose, composition_latency_bound, construct_general, Part};
use nodecomp::transforms::{grow_g, shrink_f};
use nodecomp::ttree::{construct_complexity_optimal, enumerate_ttrees};
use proptest::prelude::*;

const N_MAX: usize = 24;

fn tables() -> &'static PhiEtaTables {
    static T: OnceLock<PhiEtaTables> = OnceLock::new();
    T.get_or_init(|| compute_tables(64, 12).unwrap())
}

fn feasible() -> impl Strategy<Value = (usize, usize)> {
    (2..=N_MAX).prop_flat_map(|n| (Just(n), min_latency(n)..=saturation_latency(n) + 1))
}

fn check_all_ops(s: &Structure, x: &[i64]) -> Result<(), TestCaseError> {
    for op in [BinaryOperator::min(), BinaryOperator::max(), BinaryOperator::sum(), BinaryOperator::xor()] {
        prop_assert_eq!(s.evaluate(&op, x).unwrap(), leave_one_out_fold(&op, x), "{}", op.name());
    }
    Ok(())
}

/// One structure per subset of outputs, every output using the same tree everywhere.
fn partial(n: usize, trees: &[nodecomp::structure::CanonicalForm], outputs: &[bool]) -> Structure {
    let mut b = StructureBuilder::new(n);
    for (j, t) in trees.iter().enumerate().filter(|(j, _)| outputs[*j]) {
        let root = t.insert_into(&mut b);
        b.label_output(root, j + 1).unwrap();
    }
    b.build()
}

fn output_trees(n: usize) -> impl Strategy<Value = Vec<nodecomp::structure::CanonicalForm>> {
    let per_output: Vec<_> = (1..=n)
        .map(|j| {
            let leaves: Vec<usize> = (1..=n).filter(|&i| i != j).collect();
            prop::sample::select(enumerate_dbts(&leaves, None).unwrap())
        })
        .collect();
    per_output
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesized_structures_evaluate_correctly(
        (n, tau) in feasible(),
        seed in prop::collection::vec(-1_000_000i64..1_000_000, N_MAX),
    ) {
        let s = construct_general(n, tau, tables()).unwrap().structure;
        let r = s.validate();
        prop_assert!(r.is_for_y, "{:?}", r);
        prop_assert!(s.latency() <= tau);
        prop_assert!(s.latency() >= min_latency(n));
        prop_assert!(n < 3 || s.complexity() >= 3 * n - 6);
        check_all_ops(&s, &seed[..n])?;
    }

    #[test]
    fn union_laws(
        trees in output_trees(6),
        a in prop::collection::vec(any::<bool>(), 6),
        b in prop::collection::vec(any::<bool>(), 6),
        c in prop::collection::vec(any::<bool>(), 6),
    ) {
        let (sa, sb, sc) = (partial(6, &trees, &a), partial(6, &trees, &b), partial(6, &trees, &c));
        let ab = sa.union(&sb).unwrap();
        prop_assert_eq!(ab.signature(), sb.union(&sa).unwrap().signature());
        prop_assert_eq!(sa.union(&sa).unwrap().signature(), sa.signature());
        let left = ab.union(&sc).unwrap();
        let right = sa.union(&sb.union(&sc).unwrap()).unwrap();
        prop_assert_eq!(left.signature(), right.signature());
        let all: Vec<bool> = a.iter().zip(&b).zip(&c).map(|((x, y), z)| *x || *y || *z).collect();
        prop_assert_eq!(left.signature(), partial(6, &trees, &all).signature());
    }

    #[test]
    fn table_monotone_and_bounded(n in 3usize..=64, tau in 0usize..12) {
        let t = tables();
        let here = t.phi(n, tau).unwrap();
        let next = t.phi(n, tau + 1).unwrap();
        prop_assert!(next <= here);
        if tau < min_latency(n) {
            prop_assert_eq!(here, Cost::Infinite);
        } else {
            prop_assert!(here >= Cost::Finite(3 * n as i64 - 6));
            prop_assert!(here <= Cost::Finite(complexity_upper_bound(n) as i64));
        }
        if tau >= saturation_latency(n) {
            prop_assert_eq!(here, Cost::Finite(3 * n as i64 - 6));
        }
    }

    #[test]
    fn grow_then_shrink_is_identity(n in 4usize..=8, pick in any::<prop::sample::Index>(), pair in any::<prop::sample::Index>()) {
        let trees: Vec<_> = enumerate_ttrees(n).unwrap().collect();
        let s = trees[pick.index(trees.len())].h();
        let pairs = s.complement_pairs();
        let p = &pairs[pair.index(pairs.len())];
        let grown = grow_g(p.a, p.b, &s).unwrap();
        prop_assert!(grown.validate().is_for_y);
        prop_assert_eq!(grown.complexity(), 3 * (n + 1) - 6);
        prop_assert!(shrink_f(&grown).unwrap().same_as(&s));
    }

    #[test]
    fn composition_costs(
        n0 in 2usize..=7,
        sizes in prop::collection::vec(2usize..=7, 1..=7),
        seed in prop::collection::vec(-1000i64..1000, 64),
    ) {
        let m = sizes.len().min(n0);
        let build = |k: usize| if k == 2 { two_input() } else { construct_complexity_optimal(k).unwrap() };
        let base = build(n0);
        let parts: Vec<Structure> = sizes[..m].iter().map(|&k| build(k)).collect();
        let joins: Vec<Part<'_>> = parts.iter().map(Part::new).collect();
        let s = compose(&base, &joins).unwrap();
        let expected = base.complexity() + parts.iter().map(|p| p.complexity() + p.n() + 1).sum::<usize>();
        prop_assert_eq!(s.complexity(), expected);
        prop_assert!(s.latency() <= composition_latency_bound(&base, &joins));
        let part_pi = parts.iter().map(|p| p.pi().unwrap().value).max().unwrap();
        prop_assert!(s.pi().unwrap().value <= base.pi().unwrap().value + part_pi);
        let canon = if s.validate().is_for_y { s } else { s.canonicalize().unwrap() };
        prop_assert!(canon.validate().is_for_y);
        check_all_ops(&canon, &seed[..canon.n()])?;
    }
}

#[test]
fn grow_covers_every_optimal_structure() {
    for n in 4..=7 {
        let want: HashSet<_> = enumerate_ttrees(n).unwrap().map(|t| t.h().signature()).collect();
        let mut got = HashSet::new();
        for t in enumerate_ttrees(n - 1).unwrap() {
            let s = t.h();
            for p in s.complement_pairs() {
                got.insert(grow_g(p.a, p.b, &s).unwrap().signature());
            }
        }
        assert_eq!(got, want, "n = {n}");
    }
}

#[test]
fn shrink_then_grow_recovers() {
    for n in 4..=6 {
        for t in enumerate_ttrees(n).unwrap() {
            let s = t.h();
            let small = shrink_f(&s).unwrap();
            let back = small.complement_pairs().iter().any(|p| grow_g(p.a, p.b, &small).unwrap().same_as(&s));
            assert!(back, "n = {n}");
        }
    }
}

#[test]
fn simultaneous_optimality_only_at_three_four_six() {
    for n in 3..=64 {
        let s = construct_general(n, min_latency(n), tables()).unwrap().structure;
        let both = s.complexity() == 3 * n - 6;
        assert_eq!(both, [3, 4, 6].contains(&n), "n = {n}");
    }
}

#[test]
fn synthesized_pi_is_ceil_log_n() {
    for n in 2..=64 {
        for tau in min_latency(n)..=12 {
            let s = construct_general(n, tau, tables()).unwrap().structure;
            assert_eq!(s.pi().unwrap().value, ceil_log2(n).max(1), "({n}, {tau})");
        }
    }
}
