use std::collections::BTreeSet;

use crate::cnf::{free_variables, CnfFormula, Lit};
use crate::error::SymmetryError;

/// Vertex palette of the formula graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexColor {
    Literal,
    Clause,
    /// Both literals of one free variable, in free-variable color mode.
    FreeVar(u32),
    /// A single literal of a variable that must stay fixed (e.g. forced by
    /// unit propagation).
    Fixed(Lit),
}

/// Simple undirected vertex-colored graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    colors: Vec<VertexColor>,
    adj: Vec<Vec<usize>>,
}

impl ColoredGraph {
    pub fn new(colors: Vec<VertexColor>) -> Self {
        let n = colors.len();
        ColoredGraph {
            colors,
            adj: vec![Vec::new(); n],
        }
    }

    /// Adds `{u, v}`; loops and repeats are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        if let Err(at) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(at, v);
            let at = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(at, u);
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn color(&self, v: usize) -> VertexColor {
        self.colors[v]
    }

    pub fn colors(&self) -> &[VertexColor] {
        &self.colors
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Whether `perm` preserves colors and adjacency.
    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        let n = self.num_vertices();
        if perm.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return false;
            }
        }
        (0..n).all(|v| {
            self.colors[perm[v]] == self.colors[v]
                && self.adj[v].len() == self.adj[perm[v]].len()
                && self.adj[v].iter().all(|&u| self.has_edge(perm[v], perm[u]))
        })
    }
}

/// Vertex layout of a formula graph: literal `v` at `2(v-1)`, `-v` at
/// `2(v-1)+1`, then one vertex per clause with three or more literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaGraphMap {
    num_vars: u32,
    /// `clause_vertex[i]` for clause index `i`; `None` for binary clauses.
    clause_vertex: Vec<Option<usize>>,
}

impl FormulaGraphMap {
    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn literal_vertex(&self, lit: Lit) -> usize {
        lit.code()
    }

    /// The literal at `vertex`, if it is a literal vertex.
    pub fn vertex_literal(&self, vertex: usize) -> Option<Lit> {
        (vertex < 2 * self.num_vars as usize).then(|| Lit::from_code(vertex))
    }

    pub fn clause_vertex(&self, clause: usize) -> Option<usize> {
        self.clause_vertex.get(clause).copied().flatten()
    }

    pub fn num_literal_vertices(&self) -> usize {
        2 * self.num_vars as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphOptions {
    /// Give each free variable its own color.
    pub free_var_colors: bool,
    /// Variables whose literals each get a private color.
    pub fixed_vars: BTreeSet<u32>,
}

/// Builds the formula graph: a literal–literal edge per variable, a
/// literal–literal edge per binary clause, and a clause vertex joined to
/// its literals for every longer clause.
pub fn build_formula_graph(
    f: &CnfFormula,
    opts: &GraphOptions,
) -> Result<(ColoredGraph, FormulaGraphMap), SymmetryError> {
    let n = f.num_vars();
    let free = if opts.free_var_colors {
        free_variables(f)
    } else {
        BTreeSet::new()
    };
    let mut colors = Vec::with_capacity(2 * n as usize + f.num_clauses());
    for var in 1..=n {
        for lit in [Lit::pos(var), Lit::neg(var)] {
            colors.push(if opts.fixed_vars.contains(&var) {
                VertexColor::Fixed(lit)
            } else if free.contains(&var) {
                VertexColor::FreeVar(var)
            } else {
                VertexColor::Literal
            });
        }
    }
    let mut clause_vertex = Vec::with_capacity(f.num_clauses());
    for (index, c) in f.clauses().iter().enumerate() {
        let vars: BTreeSet<u32> = c.lits().iter().map(|l| l.var()).collect();
        if vars.len() < 2 {
            return Err(SymmetryError::ShortClause { index });
        }
        if c.len() > 2 {
            clause_vertex.push(Some(colors.len()));
            colors.push(VertexColor::Clause);
        } else {
            clause_vertex.push(None);
        }
    }
    let mut g = ColoredGraph::new(colors);
    for var in 1..=n {
        g.add_edge(Lit::pos(var).code(), Lit::neg(var).code());
    }
    for (c, cv) in f.clauses().iter().zip(&clause_vertex) {
        match cv {
            Some(cv) => {
                for l in c.lits() {
                    g.add_edge(*cv, l.code());
                }
            }
            None => g.add_edge(c.lits()[0].code(), c.lits()[1].code()),
        }
    }
    Ok((
        g,
        FormulaGraphMap {
            num_vars: n,
            clause_vertex,
        },
    ))
}
