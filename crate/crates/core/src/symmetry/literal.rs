use std::fmt;

use crate::cnf::{Assignment, Clause, CnfFormula, Lit};
use crate::error::SymmetryError;

use super::formula_graph::FormulaGraphMap;

/// A permutation of the literals over `1..=num_vars` that commutes with
/// negation. Stored as the image of each positive literal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LiteralPermutation {
    image: Vec<Lit>,
}

impl LiteralPermutation {
    /// Builds from positive-literal images; `images[v-1] = π(v)`.
    pub fn from_images(images: Vec<Lit>) -> Result<Self, SymmetryError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for (i, l) in images.iter().enumerate() {
            let v = l.var() as usize;
            if v == 0 || v > n || std::mem::replace(&mut seen[v - 1], true) {
                return Err(SymmetryError::Inconsistent(i as u32 + 1));
            }
        }
        Ok(LiteralPermutation { image: images })
    }

    pub fn identity(num_vars: u32) -> Self {
        LiteralPermutation {
            image: (1..=num_vars).map(Lit::pos).collect(),
        }
    }

    /// The phase flip `(x, -x)`.
    pub fn flip(num_vars: u32, var: u32) -> Self {
        let mut p = Self::identity(num_vars);
        p.image[var as usize - 1] = Lit::neg(var);
        p
    }

    /// `(a b)(-a -b)`.
    pub fn swap(num_vars: u32, a: u32, b: u32) -> Self {
        let mut p = Self::identity(num_vars);
        p.image.swap(a as usize - 1, b as usize - 1);
        p
    }

    pub fn num_vars(&self) -> u32 {
        self.image.len() as u32
    }

    pub fn apply(&self, lit: Lit) -> Lit {
        let img = self.image[lit.var() as usize - 1];
        if lit.is_positive() {
            img
        } else {
            -img
        }
    }

    pub fn images(&self) -> &[Lit] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image
            .iter()
            .enumerate()
            .all(|(i, l)| *l == Lit::pos(i as u32 + 1))
    }

    /// Variables whose positive literal is moved, ascending.
    pub fn support(&self) -> Vec<u32> {
        (1..=self.num_vars())
            .filter(|&v| self.apply(Lit::pos(v)) != Lit::pos(v))
            .collect()
    }

    /// Whether some positive literal maps to a negative one.
    pub fn has_negation(&self) -> bool {
        self.image.iter().any(|l| !l.is_positive())
    }

    /// `self` after `other`: `x ↦ self(other(x))`.
    pub fn compose(&self, other: &LiteralPermutation) -> LiteralPermutation {
        LiteralPermutation {
            image: other.image.iter().map(|&l| self.apply(l)).collect(),
        }
    }

    pub fn inverse(&self) -> LiteralPermutation {
        let mut inv = vec![Lit::pos(1); self.image.len()];
        for (i, &img) in self.image.iter().enumerate() {
            let v = Lit::pos(i as u32 + 1);
            inv[img.var() as usize - 1] = if img.is_positive() { v } else { -v };
        }
        LiteralPermutation { image: inv }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause::new(c.lits().iter().map(|&l| self.apply(l)).collect()).expect("nonempty")
    }

    /// `δ∘π`: variable `x` takes the value `δ` gives to `π(x)`.
    pub fn pull_back(&self, a: &Assignment) -> Assignment {
        Assignment::new(
            (1..=self.num_vars())
                .map(|v| a.satisfies(self.apply(Lit::pos(v))))
                .collect(),
        )
    }

    /// Cycle notation over literals, each cycle led by its smallest
    /// literal in `(var, sign)` order; fixed literals omitted.
    pub fn cycles(&self) -> Vec<Vec<Lit>> {
        let n = self.num_vars() as usize;
        let mut seen = vec![false; 2 * n];
        let mut out = Vec::new();
        for code in 0..2 * n {
            let start = Lit::from_code(code);
            if seen[code] || self.apply(start) == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut l = start;
            while !seen[l.code()] {
                seen[l.code()] = true;
                cyc.push(l);
                l = self.apply(l);
            }
            let min = cyc
                .iter()
                .enumerate()
                .min_by_key(|(_, l)| **l)
                .map(|(i, _)| i);
            cyc.rotate_left(min.unwrap_or(0));
            out.push(cyc);
        }
        out.sort();
        out
    }
}

impl fmt::Display for LiteralPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|l| l.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for LiteralPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LiteralPermutation{self}")
    }
}

/// Restricts a color-preserving vertex permutation of the formula graph to
/// the literal vertices.
pub fn restrict_to_literals(
    perm: &[usize],
    map: &FormulaGraphMap,
) -> Result<LiteralPermutation, SymmetryError> {
    let mut images = Vec::with_capacity(map.num_vars() as usize);
    for var in 1..=map.num_vars() {
        let pos = map
            .vertex_literal(perm[map.literal_vertex(Lit::pos(var))])
            .ok_or(SymmetryError::NotColorPreserving)?;
        let neg = map
            .vertex_literal(perm[map.literal_vertex(Lit::neg(var))])
            .ok_or(SymmetryError::NotColorPreserving)?;
        if neg != -pos {
            return Err(SymmetryError::Inconsistent(var));
        }
        images.push(pos);
    }
    LiteralPermutation::from_images(images)
}

/// True iff `lp` maps the clause set of `f` onto itself.
pub fn validate_symmetry(f: &CnfFormula, lp: &LiteralPermutation) -> bool {
    if lp.num_vars() != f.num_vars() {
        return false;
    }
    let mut original: Vec<&Clause> = f.clauses().iter().collect();
    let mut mapped: Vec<Clause> = f.clauses().iter().map(|c| lp.apply_clause(c)).collect();
    // duplicates carry no meaning, so compare as clause sets
    original.sort();
    original.dedup();
    mapped.sort();
    mapped.dedup();
    original.into_iter().eq(mapped.iter())
}
