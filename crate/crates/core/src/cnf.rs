//! CNF formulas over signed integer literals, DIMACS I/O and the small set
//! of normalizations the rest of the toolkit relies on.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::CnfError;

/// A nonzero signed variable reference; negative means negated.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn new(value: i32) -> Result<Self, CnfError> {
        if value == 0 {
            Err(CnfError::ZeroLiteral)
        } else {
            Ok(Lit(value))
        }
    }

    pub fn pos(var: u32) -> Self {
        assert!(var > 0 && var <= i32::MAX as u32);
        Lit(var as i32)
    }

    pub fn neg(var: u32) -> Self {
        -Lit::pos(var)
    }

    /// `Lit::pos(var)` when `value`, else its negation.
    pub fn with_value(var: u32, value: bool) -> Self {
        if value {
            Lit::pos(var)
        } else {
            Lit::neg(var)
        }
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_i32(self) -> i32 {
        self.0
    }

    /// Dense index: `2(v-1)` for `v`, `2(v-1)+1` for `-v`.
    pub fn code(self) -> usize {
        2 * (self.var() as usize - 1) + usize::from(!self.is_positive())
    }

    pub fn from_code(code: usize) -> Self {
        let var = (code / 2 + 1) as u32;
        Lit::with_value(var, code.is_multiple_of(2))
    }
}

impl std::ops::Neg for Lit {
    type Output = Lit;
    fn neg(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialOrd for Lit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by variable, then negative before positive.
impl Ord for Lit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.var(), self.is_positive()).cmp(&(other.var(), other.is_positive()))
    }
}

/// A nonempty disjunction with sorted, distinct literals. A clause may
/// still be tautological; [`normalize`] removes those.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(mut lits: Vec<Lit>) -> Result<Self, CnfError> {
        if lits.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        lits.sort_unstable();
        lits.dedup();
        Ok(Clause(lits))
    }

    pub fn from_i32s(lits: &[i32]) -> Result<Self, CnfError> {
        Clause::new(
            lits.iter()
                .map(|&l| Lit::new(l))
                .collect::<Result<_, _>>()?,
        )
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.0.windows(2).any(|w| w[0].var() == w[1].var())
    }

    pub fn max_var(&self) -> u32 {
        self.0.last().map_or(0, |l| l.var())
    }

    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.0.iter().any(|&l| a.satisfies(l))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        let mut f = CnfFormula {
            num_vars,
            clauses: Vec::with_capacity(clauses.len()),
        };
        for c in clauses {
            f.push(c)?;
        }
        Ok(f)
    }

    pub fn push(&mut self, clause: Clause) -> Result<(), CnfError> {
        if clause.max_var() > self.num_vars {
            return Err(CnfError::VariableOutOfRange {
                var: clause.max_var(),
                num_vars: self.num_vars,
            });
        }
        self.clauses.push(clause);
        Ok(())
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Raises the declared variable count; never lowers it.
    pub fn grow_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn occurring_variables(&self) -> BTreeSet<u32> {
        self.clauses
            .iter()
            .flat_map(|c| c.lits().iter().map(|l| l.var()))
            .collect()
    }

    pub fn evaluate(&self, a: &Assignment) -> bool {
        evaluate(self, a)
    }
}

/// A total assignment over `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(num_vars: u32) -> Self {
        Assignment(vec![false; num_vars as usize])
    }

    /// Decodes bit `i` of `bits` as the value of variable `i + 1`.
    pub fn from_bits(num_vars: u32, bits: u64) -> Self {
        Assignment((0..num_vars).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn num_vars(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.0[var as usize - 1] = value;
    }

    pub fn satisfies(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn to_model(&self) -> Model {
        Model(
            (1..=self.num_vars())
                .map(|v| Lit::with_value(v, self.value(v)))
                .collect(),
        )
    }
}

/// An assignment to a sorted set of variables, as signed literals in
/// ascending variable order. Full models and projected models share it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Model(Vec<Lit>);

impl Model {
    pub fn new(mut lits: Vec<Lit>) -> Self {
        lits.sort_unstable();
        Model(lits)
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self, var: u32) -> Option<bool> {
        self.0
            .binary_search_by_key(&var, |l| l.var())
            .ok()
            .map(|i| self.0[i].is_positive())
    }

    /// Restriction to the given variables (absent ones are skipped).
    pub fn restrict(&self, vars: &BTreeSet<u32>) -> Model {
        Model(
            self.0
                .iter()
                .copied()
                .filter(|l| vars.contains(&l.var()))
                .collect(),
        )
    }

    /// Total assignment, if this model covers exactly `1..=num_vars`.
    pub fn to_assignment(&self, num_vars: u32) -> Option<Assignment> {
        if self.0.len() != num_vars as usize
            || self
                .0
                .iter()
                .enumerate()
                .any(|(i, l)| l.var() != i as u32 + 1)
        {
            return None;
        }
        Some(Assignment(self.0.iter().map(|l| l.is_positive()).collect()))
    }

    /// `1 -2 3` style line, no terminator.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        parts.join(" ")
    }

    pub fn parse_line(line: &str) -> Result<Model, CnfError> {
        let lits = line
            .split_whitespace()
            .map(|t| {
                t.parse::<i32>()
                    .map_err(|_| CnfError::Parse {
                        line: 0,
                        msg: format!("bad literal `{t}`"),
                    })
                    .and_then(Lit::new)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Model::new(lits))
    }
}

/// Parses DIMACS CNF. Comment lines start with `c`; clauses are
/// 0-terminated and may span lines; a `%` line ends the input.
pub fn parse_dimacs(input: &[u8]) -> Result<CnfFormula, CnfError> {
    let text = std::str::from_utf8(input).map_err(|e| CnfError::Parse {
        line: 0,
        msg: format!("input is not UTF-8: {e}"),
    })?;
    let mut header: Option<(u32, usize, usize)> = None;
    let mut formula = CnfFormula::default();
    let mut pending: Vec<Lit> = Vec::new();
    let mut pending_line = 0;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        let err = |msg: String| CnfError::Parse { line: line_no, msg };
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err("duplicate problem line".into()));
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 4 || tok[0] != "p" || tok[1] != "cnf" {
                return Err(err(format!("malformed header `{line}`")));
            }
            let vars = tok[2]
                .parse::<u32>()
                .map_err(|_| err(format!("bad variable count `{}`", tok[2])))?;
            let clauses = tok[3]
                .parse::<usize>()
                .map_err(|_| err(format!("bad clause count `{}`", tok[3])))?;
            if vars > i32::MAX as u32 {
                return Err(err("variable count too large".into()));
            }
            formula.num_vars = vars;
            header = Some((vars, clauses, line_no));
            continue;
        }
        let Some((num_vars, _, _)) = header else {
            return Err(err("clause before `p cnf` header".into()));
        };
        for tok in line.split_whitespace() {
            let value: i32 = tok
                .parse()
                .map_err(|_| err(format!("bad literal `{tok}`")))?;
            if value == 0 {
                let lits = std::mem::take(&mut pending);
                let clause = Clause::new(lits).map_err(|_| err("empty clause".into()))?;
                formula.clauses.push(clause);
            } else {
                if value.unsigned_abs() > num_vars {
                    return Err(err(format!(
                        "literal {value} exceeds declared variable count {num_vars}"
                    )));
                }
                if pending.is_empty() {
                    pending_line = line_no;
                }
                pending.push(Lit(value));
            }
        }
    }
    let Some((_, expected, header_line)) = header else {
        return Err(CnfError::Parse {
            line: last_line,
            msg: "missing `p cnf` header".into(),
        });
    };
    if !pending.is_empty() {
        return Err(CnfError::Parse {
            line: pending_line,
            msg: "clause is missing its terminating 0".into(),
        });
    }
    if formula.clauses.len() != expected {
        return Err(CnfError::Parse {
            line: header_line,
            msg: format!(
                "header declares {expected} clauses, found {}",
                formula.clauses.len()
            ),
        });
    }
    Ok(formula)
}

/// Serializes as `p cnf <vars> <clauses>` followed by one clause per line.
pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    for c in &f.clauses {
        for l in c.lits() {
            out.push_str(&l.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

/// Declared variables that occur in no clause.
pub fn free_variables(f: &CnfFormula) -> BTreeSet<u32> {
    let occurring = f.occurring_variables();
    (1..=f.num_vars)
        .filter(|v| !occurring.contains(v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub formula: CnfFormula,
    /// Unit clauses present in the result, in clause order.
    pub units: Vec<Lit>,
}

/// Drops tautologies and duplicate clauses (first occurrence kept). Unit
/// clauses stay in the formula and are also listed in `units`.
pub fn normalize(f: &CnfFormula) -> Normalized {
    let mut seen = HashSet::new();
    let mut clauses = Vec::new();
    let mut units = Vec::new();
    for c in &f.clauses {
        if c.is_tautology() || !seen.insert(c.clone()) {
            continue;
        }
        if c.len() == 1 {
            units.push(c.lits()[0]);
        }
        clauses.push(c.clone());
    }
    Normalized {
        formula: CnfFormula {
            num_vars: f.num_vars,
            clauses,
        },
        units,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagated {
    /// Normalized residual formula with no unit clauses; forced variables
    /// no longer occur in it.
    pub formula: CnfFormula,
    /// Literals fixed by unit propagation, in propagation order.
    pub forced: Vec<Lit>,
}

/// Exhaustive unit propagation at the root. Returns `None` when
/// propagation derives a conflict.
pub fn propagate_units(f: &CnfFormula) -> Option<Propagated> {
    let mut value: Vec<Option<bool>> = vec![None; f.num_vars as usize + 1];
    let mut forced = Vec::new();
    let mut clauses: Vec<Clause> = normalize(f).formula.clauses;
    loop {
        let mut next = Vec::with_capacity(clauses.len());
        let mut new_units = Vec::new();
        for c in clauses {
            if c.lits()
                .iter()
                .any(|l| value[l.var() as usize] == Some(l.is_positive()))
            {
                continue;
            }
            let rest: Vec<Lit> = c
                .lits()
                .iter()
                .copied()
                .filter(|l| value[l.var() as usize].is_none())
                .collect();
            match rest.len() {
                0 => return None,
                1 => new_units.push(rest[0]),
                _ => next.push(Clause(rest)),
            }
        }
        clauses = next;
        if new_units.is_empty() {
            break;
        }
        for u in new_units {
            match value[u.var() as usize] {
                Some(v) if v != u.is_positive() => return None,
                Some(_) => {}
                None => {
                    value[u.var() as usize] = Some(u.is_positive());
                    forced.push(u);
                }
            }
        }
    }
    let formula = normalize(&CnfFormula {
        num_vars: f.num_vars,
        clauses,
    })
    .formula;
    Some(Propagated { formula, forced })
}

/// True iff every clause has a literal satisfied by `a`.
pub fn evaluate(f: &CnfFormula, a: &Assignment) -> bool {
    f.clauses.iter().all(|c| c.is_satisfied_by(a))
}
