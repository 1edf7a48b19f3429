use std::collections::{BTreeSet, HashSet, VecDeque};

use arrowsym::cnf::{Assignment, Clause, CnfFormula, Lit};
use arrowsym::pipeline::{break_symmetries, Breaking, BreakingOptions};
use arrowsym::sbp::SbpMode;
use arrowsym::solver::enumerate_models;
use arrowsym::symmetry::{validate_symmetry, LiteralPermutation};
use proptest::prelude::*;

/// Group elements beyond this are not closed by brute force.
const GROUP_LIMIT: usize = 5000;

/// Base-formula models by brute force.
fn models(f: &CnfFormula) -> Vec<Assignment> {
    let n = f.num_vars();
    (0u64..1 << n)
        .map(|b| Assignment::from_bits(n, b))
        .filter(|a| f.evaluate(a))
        .collect()
}

/// SBP-formula models by the solver; brute force over aux variables is
/// out of reach.
fn sbp_models(f: &CnfFormula) -> Vec<Assignment> {
    enumerate_models(f)
        .models
        .iter()
        .map(|m| m.to_assignment(f.num_vars()).unwrap())
        .collect()
}

fn projected(f: &CnfFormula, n: u32) -> BTreeSet<Vec<bool>> {
    sbp_models(f)
        .iter()
        .map(|a| a.values()[..n as usize].to_vec())
        .collect()
}

fn closure(gens: &[LiteralPermutation], n: u32) -> Option<Vec<LiteralPermutation>> {
    let id = LiteralPermutation::identity(n);
    let mut seen: HashSet<LiteralPermutation> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = g.compose(&p);
            if seen.insert(q.clone()) {
                if seen.len() > GROUP_LIMIT {
                    return None;
                }
                queue.push_back(q);
            }
        }
    }
    Some(seen.into_iter().collect())
}

/// Formulas over `used` clause variables plus `free` declared-only ones.
fn arb_formula() -> impl Strategy<Value = (CnfFormula, u32)> {
    (2u32..=6, 0u32..=2).prop_flat_map(|(used, free)| {
        let clause =
            prop::sample::subsequence((1..=used).collect::<Vec<_>>(), 2..=3.min(used as usize))
                .prop_flat_map(|vars| {
                    prop::collection::vec(any::<bool>(), vars.len()).prop_map(move |signs| {
                        let lits: Vec<i32> = vars
                            .iter()
                            .zip(&signs)
                            .map(|(&v, &s)| if s { v as i32 } else { -(v as i32) })
                            .collect();
                        Clause::from_i32s(&lits).unwrap()
                    })
                });
        prop::collection::vec(clause, 1..=8)
            .prop_map(move |cs| (CnfFormula::new(used + free, cs).unwrap(), used))
    })
}

fn broken(f: &CnfFormula, mode: SbpMode) -> Breaking {
    let opts = BreakingOptions {
        flip_free_vars: true,
        ..Default::default()
    };
    break_symmetries(f, mode, &opts, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generators_map_models_to_models((f, _) in arb_formula()) {
        let b = broken(&f, SbpMode::Exact);
        let Some(report) = &b.report else { return Ok(()); };
        let base = models(&f);
        let set: HashSet<Vec<bool>> = base.iter().map(|a| a.values().to_vec()).collect();
        for g in &report.generators {
            prop_assert!(validate_symmetry(&f, g));
            for a in &base {
                prop_assert!(set.contains(g.pull_back(a).values()), "{g}");
            }
        }
    }

    #[test]
    fn exact_projection_is_the_lex_leader_set((f, _) in arb_formula()) {
        let n = f.num_vars();
        let b = broken(&f, SbpMode::Exact);
        let plan: Vec<LiteralPermutation> = plan_permutations(&f, &b);
        let expect: BTreeSet<Vec<bool>> = models(&f)
            .iter()
            .filter(|a| plan.iter().all(|p| a.values() <= p.pull_back(a).values()))
            .map(|a| a.values().to_vec())
            .collect();
        prop_assert_eq!(projected(&b.result.formula, n), expect);
    }

    #[test]
    fn lex_min_of_each_orbit_survives((f, _) in arb_formula()) {
        let n = f.num_vars();
        let b = broken(&f, SbpMode::Exact);
        let plan = plan_permutations(&f, &b);
        let Some(group) = closure(&plan, n) else { return Ok(()); };
        let kept = projected(&b.result.formula, n);
        for a in models(&f) {
            let min = group.iter().map(|g| g.pull_back(&a).values().to_vec()).min().unwrap();
            prop_assert!(kept.contains(&min));
        }
    }

    #[test]
    fn satisfiability_and_monotonicity((f, _) in arb_formula()) {
        let n = f.num_vars();
        let ex = broken(&f, SbpMode::Exact);
        let rx = broken(&f, SbpMode::Relaxed);
        let base_sat = !models(&f).is_empty();
        let pe = projected(&ex.result.formula, n);
        let pr = projected(&rx.result.formula, n);
        prop_assert_eq!(base_sat, !pe.is_empty());
        prop_assert_eq!(base_sat, !pr.is_empty());
        prop_assert!(pe.is_subset(&pr));
        prop_assert!(sbp_models(&rx.result.formula).len() >= pr.len());
    }

    #[test]
    fn exact_projection_is_injective((f, _) in arb_formula()) {
        let n = f.num_vars();
        let ex = broken(&f, SbpMode::Exact);
        prop_assert_eq!(sbp_models(&ex.result.formula).len(), projected(&ex.result.formula, n).len());
    }

    #[test]
    fn free_variables_are_forced_false((f, used) in arb_formula()) {
        let free: Vec<u32> = arrowsym::cnf::free_variables(&f).into_iter().collect();
        prop_assert!((used + 1..=f.num_vars()).all(|v| free.contains(&v)));
        for mode in [SbpMode::Exact, SbpMode::Relaxed] {
            for a in sbp_models(&broken(&f, mode).result.formula) {
                for &v in &free {
                    prop_assert!(!a.value(v), "{mode}: free var {v} true");
                }
            }
        }
    }
}

/// The permutations the predicate was built from, rebuilt from the aux map.
fn plan_permutations(f: &CnfFormula, b: &Breaking) -> Vec<LiteralPermutation> {
    let n = f.num_vars();
    let mut perms = b
        .report
        .as_ref()
        .map(|r| r.generators.clone())
        .unwrap_or_default();
    for v in arrowsym::cnf::free_variables(f) {
        let flip = LiteralPermutation::flip(n, v);
        if !perms.contains(&flip) {
            perms.push(flip);
        }
    }
    // every block's recorded images must agree with the rebuilt list
    for block in &b.result.aux_var_map.blocks {
        let p = &perms[block.permutation];
        for pos in &block.positions {
            assert_eq!(p.apply(Lit::pos(pos.var)).to_i32(), pos.image);
        }
    }
    perms
}
