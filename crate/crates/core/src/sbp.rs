//! Lex-leader symmetry-breaking predicates in chained form.
//!
//! For a permutation `π` with support `x_1 < … < x_k`, the predicate keeps
//! assignments `δ` with `δ ≤ δ∘π` over the support. Position `j` compares
//! `y_j = x_j` against `z_j = π(x_j)`. The chain stops at the first phase
//! flip `z_j = ¬y_j`, since that position always differs.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, CnfFormula, Lit, Model};
use crate::error::SbpError;
use crate::symmetry::LiteralPermutation;

/// Largest chain length the extension counters enumerate.
pub const CHAIN_BUDGET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SbpMode {
    /// Biconditional chaining: aux variables are functions of the base.
    Exact,
    /// One-way chaining with `g_j ↔ (z_j → y_j)` in place of equality.
    Relaxed,
}

impl SbpMode {
    pub fn name(self) -> &'static str {
        match self {
            SbpMode::Exact => "exact",
            SbpMode::Relaxed => "relaxed",
        }
    }
}

impl fmt::Display for SbpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SbpMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SbpMode::Exact),
            "relaxed" => Ok(SbpMode::Relaxed),
            other => Err(format!(
                "unknown sbp mode `{other}` (expected exact|relaxed)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbpEncodingPlan {
    pub base: CnfFormula,
    /// Formula symmetries over `base`'s variables, already validated.
    pub permutations: Vec<LiteralPermutation>,
    pub mode: SbpMode,
}

impl SbpEncodingPlan {
    pub fn new(base: CnfFormula, permutations: Vec<LiteralPermutation>, mode: SbpMode) -> Self {
        SbpEncodingPlan {
            base,
            permutations,
            mode,
        }
    }
}

/// Aux roles at one chain position `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxPosition {
    /// `y_j`.
    pub var: u32,
    /// `z_j = π(y_j)` as a signed literal.
    pub image: i32,
    /// Literal standing for `y_j → z_j`; an aux variable except at a phase
    /// flip, where it is `¬y_j` itself.
    pub l: i32,
    /// `e_j ↔ (y_j ↔ z_j)`, exact mode, `j < k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
    /// `g_j ↔ (z_j → y_j)`, relaxed mode, `j < k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<u32>,
    /// `p_{j+1}`, for `j < k`. `p_1` and `p_{k+1}` are the constant ⊤.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_next: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxBlock {
    /// Index into the plan's permutation list.
    pub permutation: usize,
    pub cycles: String,
    /// Aux ids are `first_aux .. first_aux + num_aux`.
    pub first_aux: u32,
    pub num_aux: u32,
    /// The chain ended early at a phase flip.
    pub truncated: bool,
    pub num_clauses: usize,
    pub positions: Vec<AuxPosition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxVarMap {
    pub mode: SbpMode,
    /// Variables `1..=original_vars` are the base formula's.
    pub original_vars: u32,
    /// One block per permutation with nonempty support, in plan order.
    pub blocks: Vec<AuxBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbpResult {
    /// Base clauses followed by the predicate clauses.
    pub formula: CnfFormula,
    pub original_vars: u32,
    pub aux_var_map: AuxVarMap,
}

impl SbpResult {
    pub fn num_aux_vars(&self) -> u32 {
        self.formula.num_vars() - self.original_vars
    }

    pub fn num_sbp_clauses(&self) -> usize {
        self.aux_var_map.blocks.iter().map(|b| b.num_clauses).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Term {
    Lit(Lit),
    True,
    False,
}

impl Neg for Term {
    type Output = Term;

    fn neg(self) -> Term {
        match self {
            Term::Lit(l) => Term::Lit(-l),
            Term::True => Term::False,
            Term::False => Term::True,
        }
    }
}

impl Term {
    fn var(v: u32) -> Term {
        Term::Lit(Lit::pos(v))
    }

    fn to_i32(self) -> i32 {
        match self {
            Term::Lit(l) => l.to_i32(),
            _ => unreachable!("l is never constant"),
        }
    }
}

/// Appends the clause unless a term is ⊤ or it is tautological.
fn push(out: &mut Vec<Clause>, terms: &[Term]) {
    let mut lits = Vec::with_capacity(terms.len());
    for t in terms {
        match *t {
            Term::True => return,
            Term::False => {}
            Term::Lit(l) => lits.push(l),
        }
    }
    let c = Clause::new(lits).expect("predicate clauses never simplify to empty");
    if !c.is_tautology() {
        out.push(c);
    }
}

/// Dispatches on the plan's mode.
pub fn emit(plan: &SbpEncodingPlan) -> Result<SbpResult, SbpError> {
    build(plan)
}

pub fn emit_exact(plan: &SbpEncodingPlan) -> Result<SbpResult, SbpError> {
    require_mode(plan, SbpMode::Exact)?;
    build(plan)
}

pub fn emit_relaxed(plan: &SbpEncodingPlan) -> Result<SbpResult, SbpError> {
    require_mode(plan, SbpMode::Relaxed)?;
    build(plan)
}

fn require_mode(plan: &SbpEncodingPlan, expected: SbpMode) -> Result<(), SbpError> {
    if plan.mode == expected {
        Ok(())
    } else {
        Err(SbpError::ModeMismatch {
            expected: expected.name(),
            found: plan.mode.name(),
        })
    }
}

fn build(plan: &SbpEncodingPlan) -> Result<SbpResult, SbpError> {
    let n = plan.base.num_vars();
    for p in &plan.permutations {
        if p.num_vars() != n {
            return Err(SbpError::PermutationSize {
                expected: n,
                found: p.num_vars(),
            });
        }
    }
    let mut next = n + 1;
    let mut clauses: Vec<Clause> = plan.base.clauses().to_vec();
    let mut blocks = Vec::new();
    for (index, perm) in plan.permutations.iter().enumerate() {
        let first_aux = next;
        let before = clauses.len();
        let Some((positions, truncated)) = emit_chain(perm, plan.mode, &mut next, &mut clauses)
        else {
            continue;
        };
        blocks.push(AuxBlock {
            permutation: index,
            cycles: perm.to_string(),
            first_aux,
            num_aux: next - first_aux,
            truncated,
            num_clauses: clauses.len() - before,
            positions,
        });
    }
    let formula = CnfFormula::new(next - 1, clauses).expect("aux ids are in range");
    Ok(SbpResult {
        formula,
        original_vars: n,
        aux_var_map: AuxVarMap {
            mode: plan.mode,
            original_vars: n,
            blocks,
        },
    })
}

/// Emits one permutation's chain; `None` for the identity.
fn emit_chain(
    perm: &LiteralPermutation,
    mode: SbpMode,
    next: &mut u32,
    out: &mut Vec<Clause>,
) -> Option<(Vec<AuxPosition>, bool)> {
    let mut pairs = Vec::new();
    let mut truncated = false;
    for x in perm.support() {
        let y = Lit::pos(x);
        let z = perm.apply(y);
        pairs.push((y, z));
        if z == -y {
            truncated = true;
            break;
        }
    }
    if pairs.is_empty() {
        return None;
    }
    let k = pairs.len();
    let mut alloc = || {
        let v = *next;
        *next += 1;
        v
    };
    let mut positions = Vec::with_capacity(k);
    // p_j and e_{j-1} / g_{j-1} carried from the previous position
    let mut p = Term::True;
    let mut prev_eq = Term::True;
    for (j, &(y, z)) in pairs.iter().enumerate() {
        let last = j + 1 == k;
        let (ty, tz) = (Term::Lit(y), Term::Lit(z));
        let l = if z == -y {
            Term::Lit(-y)
        } else {
            let l = Term::var(alloc());
            push(out, &[-l, -ty, tz]);
            push(out, &[l, ty]);
            push(out, &[l, -tz]);
            l
        };
        let mut pos = AuxPosition {
            var: y.var(),
            image: z.to_i32(),
            l: l.to_i32(),
            e: None,
            g: None,
            p_next: None,
        };
        let eq = if last {
            Term::True
        } else {
            let v = alloc();
            let t = Term::var(v);
            match mode {
                SbpMode::Exact => {
                    push(out, &[-t, -ty, tz]);
                    push(out, &[-t, ty, -tz]);
                    push(out, &[t, ty, tz]);
                    push(out, &[t, -ty, -tz]);
                    pos.e = Some(v);
                }
                SbpMode::Relaxed => {
                    push(out, &[-t, -tz, ty]);
                    push(out, &[t, tz]);
                    push(out, &[t, -ty]);
                    pos.g = Some(v);
                }
            }
            t
        };
        let p_next = if last {
            Term::True
        } else {
            let v = alloc();
            pos.p_next = Some(v);
            Term::var(v)
        };
        push(out, &[-p, -prev_eq, l]);
        push(out, &[-p, -prev_eq, p_next]);
        if mode == SbpMode::Exact {
            push(out, &[prev_eq, p]);
            push(out, &[-l, -p_next, p]);
        }
        positions.push(pos);
        p = p_next;
        prev_eq = eq;
    }
    Some((positions, truncated))
}

fn check_chain(k: usize, a: &[bool], b: &[bool]) -> Result<(), SbpError> {
    if k > CHAIN_BUDGET {
        return Err(SbpError::ChainBudget {
            k,
            limit: CHAIN_BUDGET,
        });
    }
    for s in [a, b] {
        if s.len() != k {
            return Err(SbpError::ChainShape {
                expected: k,
                got: s.len(),
            });
        }
    }
    Ok(())
}

/// Counts `p_1..p_k` (with `p_{k+1} = ⊤`) satisfying
/// `e_0 ∧ ⋀_i (p_i ↔ (e_{i-1} → (l_i ∧ p_{i+1})))`, by enumeration.
///
/// `e[i]` is `e_i` for `i in 0..k`; `l[i]` is `l_{i+1}`.
pub fn count_extensions_exact(k: usize, e: &[bool], l: &[bool]) -> Result<u64, SbpError> {
    check_chain(k, e, l)?;
    if k == 0 {
        return Ok(1);
    }
    if !e[0] {
        return Ok(0);
    }
    Ok(count_p(k, |p| {
        (1..=k).all(|i| p(i) == (!e[i - 1] || (l[i - 1] && p(i + 1))))
    }))
}

/// Counts `p_1..p_k` (with `p_{k+1} = ⊤`) satisfying
/// `g_0 ∧ ⋀_i (p_i → (g_{i-1} → (l_i ∧ p_{i+1})))`, by enumeration.
/// `p_1` is not asserted.
pub fn count_extensions_relaxed(k: usize, g: &[bool], l: &[bool]) -> Result<u64, SbpError> {
    check_chain(k, g, l)?;
    if k == 0 {
        return Ok(1);
    }
    if !g[0] {
        return Ok(0);
    }
    Ok(count_p(k, |p| {
        (1..=k).all(|i| !p(i) || !g[i - 1] || (l[i - 1] && p(i + 1)))
    }))
}

fn count_p(k: usize, holds: impl Fn(&dyn Fn(usize) -> bool) -> bool) -> u64 {
    (0u32..1 << k)
        .filter(|&mask| holds(&|i: usize| i == k + 1 || mask >> (i - 1) & 1 == 1))
        .count() as u64
}

/// Restricts models to the base variables, deduplicated.
pub fn project_models<'a>(
    result: &SbpResult,
    models: impl IntoIterator<Item = &'a Model>,
) -> BTreeSet<Model> {
    let keep: BTreeSet<u32> = (1..=result.original_vars).collect();
    models.into_iter().map(|m| m.restrict(&keep)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, Assignment};

    fn plan(src: &[u8], perms: Vec<LiteralPermutation>, mode: SbpMode) -> SbpEncodingPlan {
        SbpEncodingPlan::new(parse_dimacs(src).unwrap(), perms, mode)
    }

    fn models(f: &CnfFormula) -> Vec<Assignment> {
        let n = f.num_vars();
        (0u64..1 << n)
            .map(|b| Assignment::from_bits(n, b))
            .filter(|a| f.evaluate(a))
            .collect()
    }

    fn projected(f: &CnfFormula, n: u32) -> BTreeSet<Vec<bool>> {
        models(f)
            .iter()
            .map(|a| a.values()[..n as usize].to_vec())
            .collect()
    }

    #[test]
    fn identity_emits_nothing() {
        for mode in [SbpMode::Exact, SbpMode::Relaxed] {
            let p = plan(
                b"p cnf 2 1\n1 2 0\n",
                vec![LiteralPermutation::identity(2)],
                mode,
            );
            let r = emit(&p).unwrap();
            assert_eq!(r.formula, p.base);
            assert!(r.aux_var_map.blocks.is_empty());
        }
    }

    #[test]
    fn free_variable_flip_is_a_unit() {
        for mode in [SbpMode::Exact, SbpMode::Relaxed] {
            let p = plan(b"p cnf 2 0\n", vec![LiteralPermutation::flip(2, 2)], mode);
            let r = emit(&p).unwrap();
            assert_eq!(r.formula.num_vars(), 2);
            assert_eq!(
                r.formula.clauses(),
                &[Clause::from_i32s(&[-2]).unwrap()][..]
            );
            assert!(r.aux_var_map.blocks[0].truncated);
            assert_eq!(r.aux_var_map.blocks[0].positions[0].l, -2);
        }
    }

    #[test]
    fn mode_and_size_errors() {
        let p = plan(b"p cnf 2 0\n", vec![], SbpMode::Relaxed);
        assert_eq!(
            emit_exact(&p).unwrap_err(),
            SbpError::ModeMismatch {
                expected: "exact",
                found: "relaxed"
            }
        );
        assert!(emit_relaxed(&p).is_ok());
        let p = plan(
            b"p cnf 2 0\n",
            vec![LiteralPermutation::identity(3)],
            SbpMode::Exact,
        );
        assert_eq!(
            emit(&p).unwrap_err(),
            SbpError::PermutationSize {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn swap_layout() {
        let p = plan(
            b"p cnf 2 0\n",
            vec![LiteralPermutation::swap(2, 1, 2)],
            SbpMode::Exact,
        );
        let r = emit(&p).unwrap();
        let b = &r.aux_var_map.blocks[0];
        assert_eq!((b.first_aux, b.num_aux), (3, 4));
        assert_eq!(b.positions[0].l, 3);
        assert_eq!(b.positions[0].e, Some(4));
        assert_eq!(b.positions[0].p_next, Some(5));
        assert_eq!(b.positions[1].l, 6);
        assert_eq!(b.positions[1].p_next, None);
        // x1 ≤ x2 on the 2 base variables
        let proj = projected(&r.formula, 2);
        assert_eq!(
            proj,
            BTreeSet::from([vec![false, false], vec![false, true], vec![true, true]])
        );
        // one extension per surviving base assignment
        assert_eq!(models(&r.formula).len(), 3);
    }

    #[test]
    fn relaxed_blow_up_needs_three_positions() {
        // a 2-position chain pins p_2 by the head unit in both modes
        let swap = vec![LiteralPermutation::swap(2, 1, 2)];
        let ex = emit(&plan(b"p cnf 2 0\n", swap.clone(), SbpMode::Exact)).unwrap();
        let rx = emit(&plan(b"p cnf 2 0\n", swap, SbpMode::Relaxed)).unwrap();
        assert_eq!(models(&ex.formula).len(), models(&rx.formula).len());

        let double = LiteralPermutation::swap(4, 1, 2).compose(&LiteralPermutation::swap(4, 3, 4));
        let ex = emit(&plan(b"p cnf 4 0\n", vec![double.clone()], SbpMode::Exact)).unwrap();
        let rx = emit(&plan(b"p cnf 4 0\n", vec![double], SbpMode::Relaxed)).unwrap();
        assert_eq!(ex.num_aux_vars(), rx.num_aux_vars());
        let (me, mr) = (models(&ex.formula), models(&rx.formula));
        assert!(mr.len() > me.len(), "{} vs {}", mr.len(), me.len());
        assert_eq!(me.len(), projected(&ex.formula, 4).len());
        assert_eq!(projected(&ex.formula, 4), projected(&rx.formula, 4));
    }

    #[test]
    fn negating_image_substitutes_literal() {
        // π: 1 -> -2, 2 -> -1
        let perm = LiteralPermutation::from_images(vec![Lit::neg(2), Lit::neg(1)]).unwrap();
        let r = emit(&plan(b"p cnf 2 0\n", vec![perm], SbpMode::Exact)).unwrap();
        assert_eq!(r.aux_var_map.blocks[0].positions[0].image, -2);
        // keeps δ with (x1, x2) ≤ (¬x2, ¬x1)
        let expect: BTreeSet<Vec<bool>> = (0u64..4)
            .map(|b| Assignment::from_bits(2, b).values().to_vec())
            .filter(|v| (v[0], v[1]) <= (!v[1], !v[0]))
            .collect();
        assert_eq!(projected(&r.formula, 2), expect);
    }

    #[test]
    fn exact_extension_examples() {
        assert_eq!(count_extensions_exact(3, &[true; 3], &[true; 3]), Ok(1));
        let n = count_extensions_exact(3, &[true, true, true], &[true, false, true]).unwrap();
        assert!(n <= 1);
        assert_eq!(
            count_extensions_exact(2, &[false, true], &[true, true]),
            Ok(0)
        );
        assert_eq!(
            count_extensions_exact(17, &[true; 17], &[true; 17]),
            Err(SbpError::ChainBudget { k: 17, limit: 16 })
        );
        assert_eq!(
            count_extensions_exact(3, &[true; 2], &[true; 3]),
            Err(SbpError::ChainShape {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn relaxed_extension_examples() {
        // p_1 → p_2, p_2 and p_3 unconstrained, p_4 → l_4
        assert_eq!(
            count_extensions_relaxed(4, &[true, false, false, true], &[true; 4]),
            Ok(12)
        );
        assert!(count_extensions_relaxed(4, &[true; 4], &[true; 4]).unwrap() >= 1);
    }

    #[test]
    fn aux_map_json() {
        let p = plan(
            b"p cnf 3 0\n",
            vec![
                LiteralPermutation::swap(3, 1, 3),
                LiteralPermutation::flip(3, 2),
            ],
            SbpMode::Relaxed,
        );
        let r = emit(&p).unwrap();
        let json = serde_json::to_string(&r.aux_var_map).unwrap();
        assert!(json.contains("\"mode\":\"relaxed\""));
        let back: AuxVarMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r.aux_var_map);
        assert_eq!(
            back.blocks[1].first_aux,
            back.blocks[0].first_aux + back.blocks[0].num_aux
        );
    }

    #[test]
    fn projection_dedups() {
        let p = plan(b"p cnf 1 0\n", vec![], SbpMode::Exact);
        let r = emit(&p).unwrap();
        let a = Model::parse_line("1 2").unwrap();
        let b = Model::parse_line("1 -2").unwrap();
        let out = project_models(&r, [&a, &b]);
        assert_eq!(out.len(), 1);
        assert!(project_models(&r, []).is_empty());
    }
}
