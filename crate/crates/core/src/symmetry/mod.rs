//! Formula symmetries from automorphisms of the literal/clause graph.

mod automorphism;
mod formula_graph;
mod literal;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use automorphism::{automorphism_generators, AutomorphismSearch};
pub use formula_graph::{
    build_formula_graph, ColoredGraph, FormulaGraphMap, GraphOptions, VertexColor,
};
pub use literal::{restrict_to_literals, validate_symmetry, LiteralPermutation};

use crate::cnf::{free_variables, CnfFormula, Lit};
use crate::error::SymmetryError;
use crate::graph::{EdgeIndexer, VertexPermutation};

/// Generators of a formula's symmetry group as found through its graph.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    /// Validated literal permutations, in discovery order.
    pub generators: Vec<LiteralPermutation>,
    /// Raw graph automorphism generators before validation.
    pub candidates: usize,
    /// Discarded for mapping `x` and `-x` inconsistently.
    pub discarded_inconsistent: usize,
    /// Discarded because the clause multiset changed.
    pub discarded_not_symmetry: usize,
    /// Discarded because the literal part was the identity.
    pub discarded_identity: usize,
    pub free_variables: BTreeSet<u32>,
    /// Order of the graph's automorphism group, if it fits in `u128`.
    pub graph_group_order: Option<u128>,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    pub search_nodes: usize,
}

impl SymmetryReport {
    /// Generators that permute variables without negating any literal.
    pub fn relabeling_generators(&self) -> Vec<LiteralPermutation> {
        self.generators
            .iter()
            .filter(|p| !p.has_negation())
            .cloned()
            .collect()
    }

    /// Generators induced by a vertex relabeling of the host, for an
    /// encoding whose variable `i + 1` carries edge `var_edges[i]`.
    pub fn vertex_induced_generators(
        &self,
        indexer: &EdgeIndexer,
        var_edges: &[usize],
    ) -> Vec<LiteralPermutation> {
        self.generators
            .iter()
            .filter(|p| induced_vertex_permutation(p, indexer, var_edges).is_some())
            .cloned()
            .collect()
    }

    pub fn diagnostics(&self) -> SymmetryDiagnostics {
        SymmetryDiagnostics {
            generators: self.generators.iter().map(|p| p.to_string()).collect(),
            negating_generators: self
                .generators
                .iter()
                .enumerate()
                .filter(|(_, p)| p.has_negation())
                .map(|(i, _)| i)
                .collect(),
            candidates: self.candidates,
            discarded_inconsistent: self.discarded_inconsistent,
            discarded_not_symmetry: self.discarded_not_symmetry,
            discarded_identity: self.discarded_identity,
            free_variables: self.free_variables.iter().copied().collect(),
            graph_group_order: self.graph_group_order.map(|o| o.to_string()),
            graph_vertices: self.graph_vertices,
            graph_edges: self.graph_edges,
        }
    }
}

/// JSON dump of a [`SymmetryReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryDiagnostics {
    /// Literal cycle notation, e.g. `(-1 -2)(1 2)`.
    pub generators: Vec<String>,
    /// Indices into `generators` of permutations that negate a literal.
    pub negating_generators: Vec<usize>,
    pub candidates: usize,
    pub discarded_inconsistent: usize,
    pub discarded_not_symmetry: usize,
    pub discarded_identity: usize,
    pub free_variables: Vec<u32>,
    pub graph_group_order: Option<String>,
    pub graph_vertices: usize,
    pub graph_edges: usize,
}

/// Builds the formula graph, searches its automorphisms, and keeps the
/// generators that restrict to genuine formula symmetries.
///
/// `f` must be normalized with no unit clauses.
pub fn detect_symmetries(
    f: &CnfFormula,
    opts: &GraphOptions,
) -> Result<SymmetryReport, SymmetryError> {
    let (graph, map) = build_formula_graph(f, opts)?;
    let literal_vertices = map.num_literal_vertices();
    let search = automorphism_generators(&graph, |v| (v < literal_vertices).then_some(v ^ 1));
    let mut report = SymmetryReport {
        generators: Vec::new(),
        candidates: search.generators.len(),
        discarded_inconsistent: 0,
        discarded_not_symmetry: 0,
        discarded_identity: 0,
        free_variables: free_variables(f),
        graph_group_order: search.group_order,
        graph_vertices: graph.num_vertices(),
        graph_edges: graph.num_edges(),
        search_nodes: search.nodes,
    };
    for perm in &search.generators {
        match restrict_to_literals(perm, &map) {
            Ok(lp) if lp.is_identity() => report.discarded_identity += 1,
            Ok(lp) if validate_symmetry(f, &lp) => report.generators.push(lp),
            Ok(_) => report.discarded_not_symmetry += 1,
            Err(SymmetryError::Inconsistent(_)) => report.discarded_inconsistent += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// A host automorphism whose edge action agrees with `lp` on every
/// variable, if one exists. Negating permutations never qualify.
pub fn induced_vertex_permutation(
    lp: &LiteralPermutation,
    indexer: &EdgeIndexer,
    var_edges: &[usize],
) -> Option<VertexPermutation> {
    if lp.has_negation() || lp.num_vars() as usize != var_edges.len() {
        return None;
    }
    let mut edge_image: Vec<Option<usize>> = vec![None; indexer.num_edges()];
    for (i, &e) in var_edges.iter().enumerate() {
        let img = lp.apply(Lit::pos(i as u32 + 1)).var() as usize - 1;
        edge_image[e] = Some(var_edges[img]);
    }
    let n = indexer.graph().order();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        t: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        indexer: &EdgeIndexer,
        edge_image: &[Option<usize>],
    ) -> bool {
        let g = indexer.graph();
        if t == g.order() {
            return true;
        }
        for cand in 0..g.order() {
            if used[cand] {
                continue;
            }
            let ok = (0..t).all(|s| match indexer.edge_id(s, t) {
                None => !g.has_edge(perm[s], cand),
                Some(e) => {
                    let target = indexer.edge_id(perm[s], cand);
                    target.is_some() && edge_image[e].is_none_or(|img| target == Some(img))
                }
            });
            if !ok {
                continue;
            }
            perm[t] = cand;
            used[cand] = true;
            if extend(t + 1, perm, used, indexer, edge_image) {
                return true;
            }
            used[cand] = false;
        }
        false
    }
    if !extend(0, &mut perm, &mut used, indexer, &edge_image) {
        return None;
    }
    VertexPermutation::new(perm).ok()
}
