use std::collections::BTreeSet;

use arrowsym::coloring::{deduplicate, model_to_coloring, Canonicalizer, Coloring};
use arrowsym::encode::{encode, encode_restricted, witness_oracle, ArrowingInstance};
use arrowsym::graph::{
    complete_graph, cycle_graph, path_graph, EdgeIndexer, Graph, VertexPermutation,
};
use arrowsym::solver::enumerate_models;
use proptest::prelude::*;

const MAX_EDGES: usize = 12;

fn arb_host() -> impl Strategy<Value = Graph> {
    (4usize..=6).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let k = pairs.len().min(MAX_EDGES);
        prop::sample::subsequence(pairs, 1..=k)
            .prop_map(move |es| Graph::from_edges(n, &es).unwrap())
    })
}

fn arb_pattern() -> impl Strategy<Value = Graph> {
    prop_oneof![
        Just(path_graph(2).unwrap()),
        Just(path_graph(3).unwrap()),
        Just(complete_graph(3).unwrap()),
        Just(cycle_graph(4).unwrap()),
    ]
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn automorphisms(g: &Graph) -> Vec<VertexPermutation> {
    permutations(g.order())
        .into_iter()
        .map(|p| VertexPermutation::new(p).unwrap())
        .filter(|p| {
            g.edges()
                .iter()
                .all(|&(u, v)| g.has_edge(p.apply(u), p.apply(v)))
        })
        .collect()
}

fn as_mask(c: &Coloring) -> u64 {
    c.colors()
        .iter()
        .enumerate()
        .fold(0, |m, (i, &b)| m | (b as u64) << i)
}

fn solver_witnesses(inst: &ArrowingInstance) -> BTreeSet<u64> {
    let enc = encode(inst);
    enumerate_models(&enc.formula)
        .models
        .iter()
        .map(|m| as_mask(&model_to_coloring(m, &enc.indexer, &enc.var_edges).unwrap()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_matches_oracle(host in arb_host(), g in arb_pattern(), h in arb_pattern()) {
        let inst = ArrowingInstance::new(host, g, h);
        let oracle: BTreeSet<u64> = witness_oracle(&inst).unwrap().into_iter().collect();
        prop_assert_eq!(solver_witnesses(&inst), oracle);
    }

    #[test]
    fn clause_polarity(host in arb_host(), g in arb_pattern(), h in arb_pattern()) {
        let enc = encode(&ArrowingInstance::new(host, g, h));
        let clauses = enc.formula.clauses();
        let positive = clauses.iter().take_while(|c| c.lits().iter().all(|l| l.is_positive())).count();
        prop_assert!(clauses[positive..].iter().all(|c| c.lits().iter().all(|l| !l.is_positive())));
    }

    #[test]
    fn restriction_scales_by_excluded_edges(host in arb_host(), g in arb_pattern(), h in arb_pattern()) {
        let inst = ArrowingInstance::new(host, g, h);
        let full = encode(&inst);
        let restricted = encode_restricted(&inst);
        let excluded = restricted.excluded_edges().len();
        prop_assert_eq!(excluded + restricted.participating_edges.len(), full.indexer.num_edges());
        let rc = enumerate_models(&restricted.formula).models.len();
        let fc = enumerate_models(&full.formula).models.len();
        prop_assert_eq!(rc << excluded, fc);
    }

    #[test]
    fn classes_are_automorphism_orbits(host in arb_host(), g in arb_pattern(), h in arb_pattern()) {
        let inst = ArrowingInstance::new(host.clone(), g, h);
        let indexer = EdgeIndexer::new(&host);
        let auts = automorphisms(&host);
        let colorings: Vec<Coloring> = witness_oracle(&inst)
            .unwrap()
            .iter()
            .map(|&w| Coloring::new(&host, (0..host.size()).map(|i| w >> i & 1 == 1).collect()).unwrap())
            .collect();
        let orbit_mins: BTreeSet<u64> = colorings
            .iter()
            .map(|c| auts.iter().map(|p| as_mask(&c.relabeled(&indexer, p).unwrap())).min().unwrap())
            .collect();
        let canon = Canonicalizer::new(&host).unwrap();
        prop_assert_eq!(deduplicate(&canon, &colorings).len(), orbit_mins.len());
        for c in &colorings {
            let form = canon.canonical_form(c);
            for p in &auts {
                prop_assert_eq!(&canon.canonical_form(&c.relabeled(&indexer, p).unwrap()), &form);
            }
        }
    }
}
