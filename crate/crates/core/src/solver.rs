//! AllSAT by DPLL with two watched literals and blocking clauses.
//!
//! Branching takes the lowest-index unassigned projection variable, then
//! the lowest-index other variable, ⊥ first. After a model the search
//! returns to the deepest unflipped decision on a projection variable, so
//! each projected assignment is reached once. The blocking clause over the
//! projection is recorded for every model; the search order already
//! guarantees it stays satisfied, so it is never watched.
//!
//! Blocking clauses negate the projection decisions rather than the whole
//! projected model, which excludes the same assignments with fewer
//! literals.

use std::collections::BTreeSet;

use crate::cnf::{CnfFormula, Lit, Model};
use crate::error::SolverError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverInstance {
    pub formula: CnfFormula,
    /// Variables to enumerate modulo; `None` means all of `1..=num_vars`.
    pub projection: Option<BTreeSet<u32>>,
    /// Stop after this many models.
    pub max_models: Option<usize>,
}

impl SolverInstance {
    pub fn new(formula: CnfFormula) -> Self {
        SolverInstance {
            formula,
            projection: None,
            max_models: None,
        }
    }

    pub fn projected(mut self, vars: impl IntoIterator<Item = u32>) -> Self {
        self.projection = Some(vars.into_iter().collect());
        self
    }

    pub fn with_max_models(mut self, max: Option<usize>) -> Self {
        self.max_models = max;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelStream {
    /// Emission order; projected when the instance has a projection.
    pub models: Vec<Model>,
    /// False when the model budget cut the search short.
    pub complete: bool,
    pub stats: SearchStats,
}

impl ModelStream {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub blocking_clauses: u64,
}

/// Boundary for plugging in other model enumerators.
pub trait ModelEnumerator {
    fn name(&self) -> &str;
    fn enumerate(&self, inst: &SolverInstance) -> Result<ModelStream, SolverError>;
}

/// The built-in DPLL engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dpll;

impl ModelEnumerator for Dpll {
    fn name(&self) -> &str {
        "dpll"
    }

    fn enumerate(&self, inst: &SolverInstance) -> Result<ModelStream, SolverError> {
        enumerate(inst)
    }
}

/// Exhaustive enumeration of all `2^n` assignments; for cross-checks on
/// formulas with at most 24 variables.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForce;

impl BruteForce {
    pub const VAR_LIMIT: u32 = 24;
}

impl ModelEnumerator for BruteForce {
    fn name(&self) -> &str {
        "brute-force"
    }

    fn enumerate(&self, inst: &SolverInstance) -> Result<ModelStream, SolverError> {
        let f = &inst.formula;
        let keep = projection_set(inst)?;
        assert!(
            f.num_vars() <= Self::VAR_LIMIT,
            "brute force over too many variables"
        );
        let mut seen = BTreeSet::new();
        let mut models = Vec::new();
        for bits in 0u64..1 << f.num_vars() {
            let a = crate::cnf::Assignment::from_bits(f.num_vars(), bits);
            if f.evaluate(&a) {
                let m = a.to_model().restrict(&keep);
                if seen.insert(m.clone()) {
                    if inst.max_models.is_some_and(|max| models.len() == max) {
                        return Ok(ModelStream {
                            models,
                            complete: false,
                            stats: SearchStats::default(),
                        });
                    }
                    models.push(m);
                }
            }
        }
        models.sort();
        Ok(ModelStream {
            models,
            complete: true,
            stats: SearchStats::default(),
        })
    }
}

fn projection_set(inst: &SolverInstance) -> Result<BTreeSet<u32>, SolverError> {
    let n = inst.formula.num_vars();
    match &inst.projection {
        None => Ok((1..=n).collect()),
        Some(p) if p.is_empty() => Err(SolverError::EmptyProjection),
        Some(p) => match p.iter().find(|&&v| v == 0 || v > n) {
            Some(&var) => Err(SolverError::ProjectionOutOfRange { var, num_vars: n }),
            None => Ok(p.clone()),
        },
    }
}

/// Runs the DPLL engine to completion or to the model budget.
pub fn enumerate(inst: &SolverInstance) -> Result<ModelStream, SolverError> {
    let mut it = AllSat::new(inst)?;
    let mut models = Vec::new();
    let mut complete = true;
    for m in it.by_ref() {
        if inst.max_models.is_some_and(|max| models.len() == max) {
            complete = false;
            break;
        }
        models.push(m);
    }
    Ok(ModelStream {
        models,
        complete,
        stats: it.stats,
    })
}

/// All full models of `f`.
pub fn enumerate_models(f: &CnfFormula) -> ModelStream {
    enumerate(&SolverInstance::new(f.clone())).expect("no projection to validate")
}

/// Distinct restrictions of models of `f` to `vars`.
pub fn enumerate_projected(
    f: &CnfFormula,
    vars: impl IntoIterator<Item = u32>,
) -> Result<ModelStream, SolverError> {
    enumerate(&SolverInstance::new(f.clone()).projected(vars))
}

pub fn count_models(inst: &SolverInstance) -> Result<u64, SolverError> {
    enumerate(inst).map(|s| s.models.len() as u64)
}

pub fn is_satisfiable(f: &CnfFormula) -> bool {
    AllSat::new(&SolverInstance::new(f.clone()))
        .expect("no projection to validate")
        .next()
        .is_some()
}

#[derive(Debug, Clone, Copy)]
struct Level {
    trail_start: usize,
    decision: Lit,
    flipped: bool,
}

/// Incremental model enumerator; yields each (projected) model once.
#[derive(Debug, Clone)]
pub struct AllSat {
    clauses: Vec<Vec<Lit>>,
    blocking: Vec<Vec<Lit>>,
    /// Clause ids watching each literal code.
    watches: Vec<Vec<usize>>,
    /// Indexed by variable: 1 true, -1 false, 0 unassigned.
    value: Vec<i8>,
    /// Trail index of each assigned variable.
    trail_pos: Vec<usize>,
    trail: Vec<Lit>,
    qhead: usize,
    levels: Vec<Level>,
    order: Vec<u32>,
    in_proj: Vec<bool>,
    proj: Vec<u32>,
    done: bool,
    pub stats: SearchStats,
}

impl AllSat {
    pub fn new(inst: &SolverInstance) -> Result<Self, SolverError> {
        let f = &inst.formula;
        let n = f.num_vars() as usize;
        let proj: Vec<u32> = projection_set(inst)?.into_iter().collect();
        let mut in_proj = vec![false; n + 1];
        for &v in &proj {
            in_proj[v as usize] = true;
        }
        let order = proj
            .iter()
            .copied()
            .chain((1..=n as u32).filter(|&v| !in_proj[v as usize]))
            .collect();
        let mut s = AllSat {
            clauses: Vec::new(),
            blocking: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![0; n + 1],
            trail_pos: vec![0; n + 1],
            trail: Vec::new(),
            qhead: 0,
            levels: Vec::new(),
            order,
            in_proj,
            proj,
            done: false,
            stats: SearchStats::default(),
        };
        for c in f.clauses() {
            if c.is_tautology() {
                continue;
            }
            if c.len() == 1 {
                let l = c.lits()[0];
                match s.lit_value(l) {
                    0 => s.assign(l),
                    v if v < 0 => s.done = true,
                    _ => {}
                }
            } else {
                s.attach(c.lits().to_vec());
            }
        }
        Ok(s)
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.var() as usize];
        if l.is_positive() {
            v
        } else {
            -v
        }
    }

    fn assign(&mut self, l: Lit) {
        self.value[l.var() as usize] = if l.is_positive() { 1 } else { -1 };
        self.trail_pos[l.var() as usize] = self.trail.len();
        self.trail.push(l);
    }

    /// Adds a clause whose first two literals are the watches. A one-literal
    /// clause watches its literal once.
    fn attach(&mut self, lits: Vec<Lit>) {
        let id = self.clauses.len();
        self.watches[lits[0].code()].push(id);
        if lits.len() > 1 {
            self.watches[lits[1].code()].push(id);
        }
        self.clauses.push(lits);
    }

    /// Returns true on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let falsified = -self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let mut ws = std::mem::take(&mut self.watches[falsified.code()]);
            let mut i = 0;
            let mut conflict = false;
            while i < ws.len() {
                let cid = ws[i];
                let clause = &mut self.clauses[cid];
                if clause.len() == 1 {
                    conflict = true;
                    break;
                }
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                let other_val = {
                    let v = self.value[other.var() as usize];
                    if other.is_positive() {
                        v
                    } else {
                        -v
                    }
                };
                if other_val > 0 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.value[l.var() as usize];
                    let lv = if l.is_positive() { v } else { -v };
                    if lv >= 0 {
                        clause.swap(1, k);
                        self.watches[clause[1].code()].push(cid);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if other_val == 0 {
                    self.assign(other);
                    i += 1;
                } else {
                    conflict = true;
                    break;
                }
            }
            let rest = std::mem::take(&mut self.watches[falsified.code()]);
            ws.extend(rest);
            self.watches[falsified.code()] = ws;
            if conflict {
                self.stats.conflicts += 1;
                return true;
            }
        }
        false
    }

    fn backtrack_to(&mut self, depth: usize) {
        let start = self
            .levels
            .get(depth)
            .map_or(self.trail.len(), |l| l.trail_start);
        for l in self.trail.drain(start..) {
            self.value[l.var() as usize] = 0;
        }
        self.levels.truncate(depth);
        self.qhead = self.trail.len();
    }

    /// Flips the deepest unflipped decision accepted by `pred`. False when
    /// there is none, i.e. the search space is exhausted.
    fn flip_last(&mut self, pred: impl Fn(&AllSat, Lit) -> bool) -> bool {
        let Some(i) = (0..self.levels.len())
            .rev()
            .find(|&i| !self.levels[i].flipped && pred(self, self.levels[i].decision))
        else {
            return false;
        };
        let d = self.levels[i].decision;
        self.backtrack_to(i);
        self.levels.push(Level {
            trail_start: self.trail.len(),
            decision: -d,
            flipped: true,
        });
        self.assign(-d);
        true
    }

    fn pick_branch(&self) -> Option<u32> {
        self.order
            .iter()
            .copied()
            .find(|&v| self.value[v as usize] == 0)
    }

    /// Records the clause negating the current decisions on `P`.
    ///
    /// It is kept out of the watch lists: every later assignment lies in a
    /// region opened by flipping one of those decisions, and that flipped
    /// literal satisfies the clause for as long as the region lasts.
    fn add_blocking(&mut self, decisions: &[Lit]) {
        self.stats.blocking_clauses += 1;
        self.blocking.push(decisions.iter().map(|&l| -l).collect());
    }

    /// Blocking clauses in emission order; clause `i` excludes model `i`.
    pub fn blocking_clauses(&self) -> &[Vec<Lit>] {
        &self.blocking
    }
}

impl Iterator for AllSat {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        while !self.done {
            if self.propagate() {
                if !self.flip_last(|_, _| true) {
                    self.done = true;
                }
                continue;
            }
            match self.pick_branch() {
                Some(v) => {
                    self.stats.decisions += 1;
                    self.levels.push(Level {
                        trail_start: self.trail.len(),
                        decision: Lit::neg(v),
                        flipped: false,
                    });
                    self.assign(Lit::neg(v));
                }
                None => {
                    let model = Model::new(
                        self.proj
                            .iter()
                            .map(|&v| Lit::with_value(v, self.value[v as usize] > 0))
                            .collect(),
                    );
                    let decisions: Vec<Lit> = self
                        .levels
                        .iter()
                        .map(|l| l.decision)
                        .filter(|d| self.in_proj[d.var() as usize])
                        .collect();
                    if !self.flip_last(|s, d| s.in_proj[d.var() as usize]) {
                        self.done = true;
                    }
                    self.add_blocking(&decisions);
                    return Some(model);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, Clause};
    use proptest::prelude::*;

    fn dimacs(s: &str) -> CnfFormula {
        parse_dimacs(s.as_bytes()).unwrap()
    }

    #[test]
    fn single_clause() {
        let s = enumerate_models(&dimacs("p cnf 2 1\n1 2 0\n"));
        assert!(s.complete);
        let lines: Vec<String> = s.models.iter().map(Model::to_line).collect();
        assert_eq!(lines, vec!["-1 2", "1 -2", "1 2"]);
        assert_eq!(s.stats.blocking_clauses, 3);
    }

    #[test]
    fn unsat_and_trivial() {
        assert!(enumerate_models(&dimacs("p cnf 1 2\n1 0\n-1 0\n")).is_empty());
        assert_eq!(enumerate_models(&dimacs("p cnf 0 0\n")).len(), 1);
        assert_eq!(enumerate_models(&dimacs("p cnf 3 0\n")).len(), 8);
        assert!(!is_satisfiable(&dimacs(
            "p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n"
        )));
    }

    #[test]
    fn projection_of_tautology() {
        let s = enumerate_projected(&dimacs("p cnf 2 0\n"), [1]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.stats.blocking_clauses, 2);
    }

    #[test]
    fn projection_errors() {
        let f = dimacs("p cnf 2 0\n");
        assert_eq!(
            enumerate_projected(&f, []).unwrap_err(),
            SolverError::EmptyProjection
        );
        assert_eq!(
            enumerate_projected(&f, [3]).unwrap_err(),
            SolverError::ProjectionOutOfRange {
                var: 3,
                num_vars: 2
            }
        );
    }

    #[test]
    fn budget_flags_incomplete() {
        let inst = SolverInstance::new(dimacs("p cnf 3 0\n")).with_max_models(Some(5));
        let s = enumerate(&inst).unwrap();
        assert_eq!(s.len(), 5);
        assert!(!s.complete);
        let inst = inst.with_max_models(Some(8));
        assert!(enumerate(&inst).unwrap().complete);
    }

    #[test]
    fn lexicographic_emission() {
        let s = enumerate_models(&dimacs("p cnf 4 2\n1 2 3 0\n-2 -4 0\n"));
        let mut sorted = s.models.clone();
        sorted.sort();
        assert_eq!(s.models, sorted);
    }

    fn arb_formula() -> impl Strategy<Value = CnfFormula> {
        (1u32..=9).prop_flat_map(|n| {
            let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
            let clause =
                prop::collection::vec(lit, 1..=4).prop_map(|ls| Clause::from_i32s(&ls).unwrap());
            prop::collection::vec(clause, 0..=14)
                .prop_map(move |cs| CnfFormula::new(n, cs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(f in arb_formula()) {
            let inst = SolverInstance::new(f.clone());
            let dpll = Dpll.enumerate(&inst).unwrap();
            let bf = BruteForce.enumerate(&inst).unwrap();
            let set: BTreeSet<Model> = dpll.models.iter().cloned().collect();
            prop_assert_eq!(set.len(), dpll.models.len());
            prop_assert_eq!(set.into_iter().collect::<Vec<_>>(), bf.models);
            for m in &dpll.models {
                prop_assert!(f.evaluate(&m.to_assignment(f.num_vars()).unwrap()));
            }
        }

        #[test]
        fn projection_matches_brute_force(f in arb_formula(), mask in 1u32..512) {
            let p: BTreeSet<u32> = (1..=f.num_vars()).filter(|v| mask >> (v - 1) & 1 == 1).collect();
            prop_assume!(!p.is_empty());
            let inst = SolverInstance::new(f).projected(p);
            let dpll = Dpll.enumerate(&inst).unwrap();
            let bf = BruteForce.enumerate(&inst).unwrap();
            let set: BTreeSet<Model> = dpll.models.iter().cloned().collect();
            prop_assert_eq!(set.len(), dpll.models.len());
            prop_assert_eq!(set.into_iter().collect::<Vec<_>>(), bf.models);
            prop_assert_eq!(dpll.stats.blocking_clauses, dpll.models.len() as u64);
        }

        #[test]
        fn blocking_clause_excludes_only_its_model(f in arb_formula(), mask in 1u32..512) {
            let p: BTreeSet<u32> = (1..=f.num_vars()).filter(|v| mask >> (v - 1) & 1 == 1).collect();
            prop_assume!(!p.is_empty());
            let mut it = AllSat::new(&SolverInstance::new(f).projected(p)).unwrap();
            let models: Vec<Model> = it.by_ref().collect();
            let blocking = it.blocking_clauses();
            prop_assert_eq!(blocking.len(), models.len());
            for (i, m) in models.iter().enumerate() {
                for (j, c) in blocking.iter().enumerate() {
                    let sat = c.iter().any(|&l| m.value(l.var()) == Some(l.is_positive()));
                    prop_assert_eq!(sat, i != j, "model {} clause {}", i, j);
                }
            }
        }
    }
}
