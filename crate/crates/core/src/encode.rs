//! The non-arrowing encoding: a model of the formula is a 2-coloring of
//! the host's edges with no copy of the first pattern in color ⊥ and no
//! copy of the second pattern in color ⊤.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, CnfFormula, Lit};
use crate::error::EncodeError;
use crate::graph::{distinct_edge_sets, EdgeIndexer, Graph};

/// Largest host edge count the brute-force oracle accepts.
pub const ORACLE_EDGE_LIMIT: usize = 28;

/// `host ↛ (first, second)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowingInstance {
    pub host: Graph,
    /// Must not appear in color ⊥.
    pub first: Graph,
    /// Must not appear in color ⊤.
    pub second: Graph,
    pub restricted: bool,
}

impl ArrowingInstance {
    pub fn new(host: Graph, first: Graph, second: Graph) -> Self {
        ArrowingInstance {
            host,
            first,
            second,
            restricted: false,
        }
    }

    pub fn restricted(mut self, restricted: bool) -> Self {
        self.restricted = restricted;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingResult {
    pub formula: CnfFormula,
    pub indexer: EdgeIndexer,
    /// Host edge ids that lie on at least one pattern copy.
    pub participating_edges: BTreeSet<usize>,
    /// `var_edges[i]` is the host edge id carried by variable `i + 1`.
    pub var_edges: Vec<usize>,
    pub restricted: bool,
}

impl EncodingResult {
    /// Host edge ids that have no variable.
    pub fn excluded_edges(&self) -> Vec<usize> {
        let mapped: BTreeSet<usize> = self.var_edges.iter().copied().collect();
        (0..self.indexer.num_edges())
            .filter(|e| !mapped.contains(e))
            .collect()
    }

    pub fn meta(&self) -> EdgeMeta {
        EdgeMeta {
            order: self.indexer.graph().order(),
            edges: self
                .var_edges
                .iter()
                .map(|&e| {
                    let (u, v) = self.indexer.edge(e).expect("valid edge id");
                    [u, v]
                })
                .collect(),
            restricted: self.restricted,
        }
    }
}

/// JSON sidecar for a DIMACS file: `edges[i]` is the host edge carried by
/// variable `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMeta {
    #[serde(default)]
    pub order: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub restricted: bool,
}

impl EdgeMeta {
    /// Host edge id of each variable in `indexer`'s numbering.
    pub fn var_edges(&self, indexer: &EdgeIndexer) -> Option<Vec<usize>> {
        self.edges
            .iter()
            .map(|&[u, v]| indexer.edge_id(u, v))
            .collect()
    }
}

/// Full encoding over one variable per host edge.
pub fn encode(inst: &ArrowingInstance) -> EncodingResult {
    build(inst, false)
}

/// Encoding over the participating edges only, renumbered densely in
/// edge-id order.
pub fn encode_restricted(inst: &ArrowingInstance) -> EncodingResult {
    build(inst, true)
}

fn build(inst: &ArrowingInstance, restricted: bool) -> EncodingResult {
    let indexer = EdgeIndexer::new(&inst.host);
    let first_sets = distinct_edge_sets(&inst.host, &inst.first);
    let second_sets = distinct_edge_sets(&inst.host, &inst.second);
    let participating: BTreeSet<usize> = first_sets
        .iter()
        .chain(second_sets.iter())
        .flatten()
        .copied()
        .collect();
    let var_edges: Vec<usize> = if restricted {
        participating.iter().copied().collect()
    } else {
        (0..indexer.num_edges()).collect()
    };
    let mut var_of_edge = vec![0u32; indexer.num_edges()];
    for (i, &e) in var_edges.iter().enumerate() {
        var_of_edge[e] = i as u32 + 1;
    }
    let mut formula = CnfFormula::new(var_edges.len() as u32, Vec::new()).expect("empty");
    let families = [(first_sets, true), (second_sets, false)];
    for (sets, positive) in &families {
        for set in sets {
            let lits = set
                .iter()
                .map(|&e| Lit::with_value(var_of_edge[e], *positive))
                .collect();
            formula
                .push(Clause::new(lits).expect("patterns have edges"))
                .expect("variables allocated above");
        }
    }
    EncodingResult {
        formula,
        indexer,
        participating_edges: participating,
        var_edges,
        restricted,
    }
}

/// Witness colorings by exhaustive search over host edge colorings, as
/// bitmasks (bit `i` set iff edge id `i` is colored ⊤). Pattern copies are
/// found by plain injective-map enumeration, independent of the encoder.
pub fn witness_oracle(inst: &ArrowingInstance) -> Result<Vec<u64>, EncodeError> {
    let m = inst.host.size();
    if m > ORACLE_EDGE_LIMIT {
        return Err(EncodeError::OracleBudget {
            edges: m,
            limit: ORACLE_EDGE_LIMIT,
        });
    }
    let indexer = EdgeIndexer::new(&inst.host);
    let first = copy_masks(&inst.host, &inst.first, &indexer);
    let second = copy_masks(&inst.host, &inst.second, &indexer);
    // Group every copy by its highest edge id so it is checked as soon as
    // it is fully colored.
    let mut first_at = vec![Vec::new(); m];
    let mut second_at = vec![Vec::new(); m];
    for &mask in &first {
        first_at[63 - mask.leading_zeros() as usize].push(mask);
    }
    for &mask in &second {
        second_at[63 - mask.leading_zeros() as usize].push(mask);
    }
    let mut out = Vec::new();
    fn rec(
        i: usize,
        m: usize,
        ones: u64,
        first_at: &[Vec<u64>],
        second_at: &[Vec<u64>],
        out: &mut Vec<u64>,
    ) {
        if i == m {
            out.push(ones);
            return;
        }
        for bit in [0u64, 1] {
            let ones = ones | bit << i;
            let ok = first_at[i].iter().all(|&c| ones & c != 0)
                && second_at[i].iter().all(|&c| ones & c != c);
            if ok {
                rec(i + 1, m, ones, first_at, second_at, out);
            }
        }
    }
    if first.contains(&0) || second.contains(&0) {
        // an edgeless pattern is always monochromatic
        return Ok(out);
    }
    rec(0, m, 0, &first_at, &second_at, &mut out);
    out.sort_unstable();
    Ok(out)
}

/// `|C(F;G,H)|` by exhaustive coloring enumeration.
pub fn model_count_oracle(inst: &ArrowingInstance) -> Result<u64, EncodeError> {
    witness_oracle(inst).map(|w| w.len() as u64)
}

fn copy_masks(host: &Graph, pattern: &Graph, indexer: &EdgeIndexer) -> BTreeSet<u64> {
    let mut masks = BTreeSet::new();
    let k = pattern.order();
    let n = host.order();
    if k > n {
        return masks;
    }
    let mut map = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn rec(
        host: &Graph,
        pattern: &Graph,
        indexer: &EdgeIndexer,
        map: &mut Vec<usize>,
        used: &mut [bool],
        masks: &mut BTreeSet<u64>,
    ) {
        if map.len() == pattern.order() {
            let mut mask = 0u64;
            for &(u, v) in pattern.edges() {
                match indexer.edge_id(map[u], map[v]) {
                    Some(id) => mask |= 1 << id,
                    None => return,
                }
            }
            masks.insert(mask);
            return;
        }
        for c in 0..host.order() {
            if !used[c] {
                used[c] = true;
                map.push(c);
                rec(host, pattern, indexer, map, used, masks);
                map.pop();
                used[c] = false;
            }
        }
    }
    rec(host, pattern, indexer, &mut map, &mut used, &mut masks);
    masks
}
