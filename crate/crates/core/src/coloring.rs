//! Edge colorings: conversion from models, witness checks, canonical forms
//! under vertex relabeling, deduplication, and coverage audits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cnf::Model;
use crate::error::ColoringError;
use crate::graph::{distinct_edge_sets, EdgeIndexer, Graph, VertexPermutation};

/// Largest host order accepted by [`Canonicalizer`].
pub const CANONICAL_ORDER_LIMIT: usize = 12;

/// A 2-coloring of every edge of a host graph; `colors[id]` is the color of
/// the edge with that [`EdgeIndexer`] id, `false` = ⊥ = first color.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coloring {
    colors: Vec<bool>,
}

impl Coloring {
    pub fn new(graph: &Graph, colors: Vec<bool>) -> Result<Self, ColoringError> {
        if colors.len() != graph.size() {
            return Err(ColoringError::Length {
                expected: graph.size(),
                got: colors.len(),
            });
        }
        Ok(Coloring { colors })
    }

    pub fn monochromatic(graph: &Graph, color: bool) -> Self {
        Coloring {
            colors: vec![color; graph.size()],
        }
    }

    pub fn colors(&self) -> &[bool] {
        &self.colors
    }

    pub fn color(&self, edge: usize) -> bool {
        self.colors[edge]
    }

    /// The coloring `σ'` with `σ'({π(u), π(v)}) = σ({u, v})`. `perm` must be
    /// an automorphism of the graph.
    pub fn relabeled(&self, indexer: &EdgeIndexer, perm: &VertexPermutation) -> Option<Coloring> {
        let images = indexer.permute_edges(perm)?;
        let mut colors = vec![false; self.colors.len()];
        for (id, &img) in images.iter().enumerate() {
            colors[img] = self.colors[id];
        }
        Some(Coloring { colors })
    }

    /// `0`/`1` string in edge-id order.
    pub fn to_bits(&self) -> String {
        bits(&self.colors)
    }

    pub fn from_bits(graph: &Graph, s: &str) -> Result<Self, ColoringError> {
        let colors = parse_bits(s).ok_or_else(|| ColoringError::Parse {
            line: 0,
            msg: format!("expected only 0/1, got `{s}`"),
        })?;
        Coloring::new(graph, colors)
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Reads one coloring per line; blank lines and `#` comments are skipped.
pub fn parse_colorings(graph: &Graph, text: &str) -> Result<Vec<Coloring>, ColoringError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let c = Coloring::from_bits(graph, line).map_err(|e| match e {
            ColoringError::Parse { msg, .. } => ColoringError::Parse { line: idx + 1, msg },
            ColoringError::Length { expected, got } => ColoringError::Parse {
                line: idx + 1,
                msg: format!("{got} colors for {expected} edges"),
            },
            other => other,
        })?;
        out.push(c);
    }
    Ok(out)
}

pub fn write_colorings<'a>(colorings: impl IntoIterator<Item = &'a Coloring>) -> String {
    let mut s = String::new();
    for c in colorings {
        s.push_str(&c.to_bits());
        s.push('\n');
    }
    s
}

/// Colors each edge by its variable's value. `var_edges[i]` is the edge id
/// of variable `i + 1` and must cover every edge.
pub fn model_to_coloring(
    m: &Model,
    indexer: &EdgeIndexer,
    var_edges: &[usize],
) -> Result<Coloring, ColoringError> {
    let mut colors: Vec<Option<bool>> = vec![None; indexer.num_edges()];
    for (i, &e) in var_edges.iter().enumerate() {
        let var = i as u32 + 1;
        colors[e] = Some(m.value(var).ok_or(ColoringError::MissingVariable(var))?);
    }
    let colors = colors
        .iter()
        .enumerate()
        .map(|(id, c)| c.ok_or_else(|| ColoringError::UnmappedEdge(indexer.edge(id).unwrap())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Coloring { colors })
}

/// All colorings agreeing with `m` on mapped edges, with every color
/// combination on edges that carry no variable.
pub fn expand_model(
    m: &Model,
    indexer: &EdgeIndexer,
    var_edges: &[usize],
) -> Result<Vec<Coloring>, ColoringError> {
    let mut base = vec![false; indexer.num_edges()];
    let mut mapped = vec![false; indexer.num_edges()];
    for (i, &e) in var_edges.iter().enumerate() {
        let var = i as u32 + 1;
        base[e] = m.value(var).ok_or(ColoringError::MissingVariable(var))?;
        mapped[e] = true;
    }
    let free: Vec<usize> = (0..base.len()).filter(|&e| !mapped[e]).collect();
    assert!(free.len() < 32, "too many unmapped edges to expand");
    Ok((0u32..1 << free.len())
        .map(|mask| {
            let mut colors = base.clone();
            for (b, &e) in free.iter().enumerate() {
                colors[e] = mask >> b & 1 == 1;
            }
            Coloring { colors }
        })
        .collect())
}

/// Precomputed pattern copies of `F ↛ (G, H)`.
#[derive(Debug, Clone)]
pub struct WitnessChecker {
    first: Vec<Vec<usize>>,
    second: Vec<Vec<usize>>,
}

impl WitnessChecker {
    pub fn new(host: &Graph, first: &Graph, second: &Graph) -> Self {
        WitnessChecker {
            first: distinct_edge_sets(host, first),
            second: distinct_edge_sets(host, second),
        }
    }

    /// No copy of the first pattern is all ⊥ and no copy of the second is
    /// all ⊤.
    pub fn is_witness(&self, c: &Coloring) -> bool {
        !self.first.iter().any(|s| s.iter().all(|&e| !c.colors[e]))
            && !self.second.iter().any(|s| s.iter().all(|&e| c.colors[e]))
    }
}

pub fn verify_witness(c: &Coloring, host: &Graph, first: &Graph, second: &Graph) -> bool {
    WitnessChecker::new(host, first, second).is_witness(c)
}

/// Lexicographically least color vector over all automorphisms of the host,
/// as a `0`/`1` string in edge-id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The representative coloring, which is the canonical form itself.
    pub fn to_coloring(&self, graph: &Graph) -> Result<Coloring, ColoringError> {
        Coloring::from_bits(graph, &self.0)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical forms by pruned search over vertex relabelings.
///
/// Relabeling `π` gives the vector `σ^π(e) = σ({π(u), π(v)})` for the edge
/// `e = {u, v}`. The search fixes `π(0), π(1), …` in turn, keeping only
/// adjacency-preserving partial maps. Edges are sorted, so once `π(0..=t)`
/// is fixed the leading edges with both ends `≤ t` are known; a branch is
/// cut as soon as that prefix exceeds the best vector found.
#[derive(Debug, Clone)]
pub struct Canonicalizer {
    graph: Graph,
    n: usize,
    /// `prefix[t]`: number of leading edges with both ends `≤ t`.
    prefix: Vec<usize>,
    edge_id: Vec<Option<usize>>,
}

impl Canonicalizer {
    pub fn new(graph: &Graph) -> Result<Self, ColoringError> {
        let n = graph.order();
        if n > CANONICAL_ORDER_LIMIT {
            return Err(ColoringError::CanonicalBudget {
                order: n,
                limit: CANONICAL_ORDER_LIMIT,
            });
        }
        let edges = graph.edges();
        let prefix = (0..n)
            .map(|t| edges.iter().take_while(|&&(_, v)| v <= t).count())
            .collect();
        let mut edge_id = vec![None; n * n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            edge_id[u * n + v] = Some(id);
            edge_id[v * n + u] = Some(id);
        }
        Ok(Canonicalizer {
            graph: graph.clone(),
            n,
            prefix,
            edge_id,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn canonical_form(&self, c: &Coloring) -> CanonicalForm {
        let mut search = Search {
            canon: self,
            colors: &c.colors,
            perm: vec![usize::MAX; self.n],
            used: vec![false; self.n],
            current: vec![false; c.colors.len()],
            best: None,
        };
        search.dfs(0);
        CanonicalForm(bits(&search.best.expect("identity is always a relabeling")))
    }
}

struct Search<'a> {
    canon: &'a Canonicalizer,
    colors: &'a [bool],
    perm: Vec<usize>,
    used: Vec<bool>,
    current: Vec<bool>,
    best: Option<Vec<bool>>,
}

impl Search<'_> {
    fn dfs(&mut self, t: usize) {
        let c = self.canon;
        let n = c.n;
        if t == n {
            // only vectors ≤ best reach a leaf
            self.best = Some(self.current.clone());
            return;
        }
        let edges = c.graph.edges();
        let from = if t == 0 { 0 } else { c.prefix[t - 1] };
        let to = c.prefix[t];
        for cand in 0..n {
            if self.used[cand] {
                continue;
            }
            let consistent =
                (0..t).all(|s| c.graph.has_edge(s, t) == c.graph.has_edge(self.perm[s], cand));
            if !consistent {
                continue;
            }
            self.perm[t] = cand;
            for (id, &(u, v)) in edges.iter().enumerate().take(to).skip(from) {
                let img = c.edge_id[self.perm[u] * n + self.perm[v]].expect("adjacency checked");
                self.current[id] = self.colors[img];
            }
            // best can change inside a sibling subtree, so compare afresh
            let worse = self
                .best
                .as_ref()
                .is_some_and(|b| self.current[..to] > b[..to]);
            if worse {
                continue;
            }
            self.used[cand] = true;
            self.dfs(t + 1);
            self.used[cand] = false;
        }
        self.perm[t] = usize::MAX;
    }
}

pub fn canonical_form(graph: &Graph, c: &Coloring) -> Result<CanonicalForm, ColoringError> {
    Ok(Canonicalizer::new(graph)?.canonical_form(c))
}

/// The deduplication operator: one class per canonical form, with the
/// number of inputs that fell into it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassSet {
    classes: BTreeMap<CanonicalForm, usize>,
}

impl ClassSet {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn contains(&self, form: &CanonicalForm) -> bool {
        self.classes.contains_key(form)
    }

    pub fn insert(&mut self, form: CanonicalForm) {
        *self.classes.entry(form).or_default() += 1;
    }

    /// Canonical forms in ascending order.
    pub fn representatives(&self) -> impl Iterator<Item = &CanonicalForm> {
        self.classes.keys()
    }

    /// Number of deduplicated inputs per class.
    pub fn multiplicities(&self) -> impl Iterator<Item = (&CanonicalForm, usize)> {
        self.classes.iter().map(|(k, &v)| (k, v))
    }
}

impl FromIterator<CanonicalForm> for ClassSet {
    fn from_iter<I: IntoIterator<Item = CanonicalForm>>(iter: I) -> Self {
        let mut s = ClassSet::default();
        for f in iter {
            s.insert(f);
        }
        s
    }
}

pub fn deduplicate<'a>(
    canon: &Canonicalizer,
    colorings: impl IntoIterator<Item = &'a Coloring>,
) -> ClassSet {
    colorings
        .into_iter()
        .map(|c| canon.canonical_form(c))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Models behind the candidate set.
    pub total_models: usize,
    /// Classes in the reference.
    pub classes: usize,
    pub covered: usize,
    pub missing: Vec<CanonicalForm>,
    pub complete: bool,
    /// Candidate classes absent from the reference; nonzero only for
    /// non-witness input.
    #[serde(default)]
    pub unexpected: usize,
}

pub fn coverage_report(
    candidate: &ClassSet,
    reference: &ClassSet,
    total_models: usize,
) -> CoverageReport {
    let missing: Vec<CanonicalForm> = reference
        .representatives()
        .filter(|f| !candidate.contains(f))
        .cloned()
        .collect();
    let unexpected = candidate
        .representatives()
        .filter(|f| !reference.contains(f))
        .count();
    CoverageReport {
        total_models,
        classes: reference.len(),
        covered: reference.len() - missing.len(),
        complete: missing.is_empty(),
        missing,
        unexpected,
    }
}

/// Distinct colorings of a list, preserving first-seen order.
pub fn distinct_colorings(colorings: &[Coloring]) -> Vec<Coloring> {
    let mut seen = BTreeSet::new();
    colorings
        .iter()
        .filter(|c| seen.insert((*c).clone()))
        .cloned()
        .collect()
}
