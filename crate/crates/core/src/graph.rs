//! Simple undirected graphs, edge/variable indexing and (not necessarily
//! induced) subgraph embeddings.
//!
//! Graphs here are small: adjacency is one `u64` bitset per vertex, which
//! caps the order at [`MAX_ORDER`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::GraphError;

/// Largest supported vertex count.
pub const MAX_ORDER: usize = 64;

/// A simple undirected graph on vertices `0..order`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    order: usize,
    adj: Vec<u64>,
    /// Sorted by `(min, max)`.
    edges: Vec<(usize, usize)>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, {:?})", self.order, self.edges)
    }
}

impl Graph {
    pub fn empty(order: usize) -> Result<Self, GraphError> {
        if order > MAX_ORDER {
            return Err(GraphError::TooLarge(order));
        }
        Ok(Graph {
            order,
            adj: vec![0; order],
            edges: Vec::new(),
        })
    }

    /// Builds a graph from an edge list. Rejects loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(order)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.order || v >= self.order {
            return Err(GraphError::VertexOutOfRange {
                vertex: u.max(v),
                order: self.order,
            });
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
        let e = (u.min(v), u.max(v));
        let at = self.edges.partition_point(|x| *x < e);
        self.edges.insert(at, e);
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic `(min, max)` order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.order && v < self.order && self.adj[u] & (1 << v) != 0
    }

    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    /// Returns the image of this graph under `perm`, i.e. the graph with
    /// edges `{perm(u), perm(v)}`.
    pub fn permuted(&self, perm: &VertexPermutation) -> Graph {
        assert_eq!(perm.len(), self.order, "permutation length mismatch");
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm.apply(u), perm.apply(v)))
            .collect();
        Graph::from_edges(self.order, &edges).expect("a bijection preserves simplicity")
    }

    /// Parses the plain text format: a `n <order>` line followed by
    /// `e <u> <v>` lines. `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self, GraphError> {
        let mut graph: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let bad = |msg: &str| GraphError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            match tok.next() {
                Some("n") => {
                    if graph.is_some() {
                        return Err(bad("duplicate order line"));
                    }
                    let n = tok
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| bad("expected `n <order>`"))?;
                    if tok.next().is_some() {
                        return Err(bad("trailing tokens after order"));
                    }
                    graph = Some(Graph::empty(n)?);
                }
                Some("e") => {
                    let g = graph
                        .as_mut()
                        .ok_or_else(|| bad("edge before order line"))?;
                    let mut next = || tok.next().and_then(|t| t.parse::<usize>().ok());
                    let (u, v) = match (next(), next()) {
                        (Some(u), Some(v)) => (u, v),
                        _ => return Err(bad("expected `e <u> <v>`")),
                    };
                    if tok.next().is_some() {
                        return Err(bad("trailing tokens after edge"));
                    }
                    g.add_edge(u, v).map_err(|e| bad(&e.to_string()))?;
                }
                Some(other) => return Err(bad(&format!("unknown record `{other}`"))),
                None => unreachable!(),
            }
        }
        graph.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `n <order>` line".into(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.order);
        for &(u, v) in &self.edges {
            out.push_str(&format!("e {u} {v}\n"));
        }
        out
    }
}

/// K_n.
pub fn complete_graph(n: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter(
            "complete graph needs n >= 1".into(),
        ));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

/// C_n, the cycle `0-1-...-(n-1)-0`.
pub fn cycle_graph(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParameter(format!(
            "cycle needs n >= 3, got {n}"
        )));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

/// P_n, the path on `n` vertices.
pub fn path_graph(n: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("path needs n >= 1".into()));
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges)
}

/// K_7 on vertices 0..6 plus vertex 7 joined to vertices 0 and 1.
pub fn k_ex_graph() -> Graph {
    let mut edges = Vec::new();
    for u in 0..7 {
        for v in u + 1..7 {
            edges.push((u, v));
        }
    }
    edges.push((0, 7));
    edges.push((1, 7));
    Graph::from_edges(8, &edges).expect("static construction")
}

/// Named graph families accepted on the command line: `k<N>`, `c<N>`,
/// `kex`, `path:<N>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Complete(usize),
    Cycle(usize),
    Path(usize),
    KEx,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, GraphError> {
        match *self {
            GraphSpec::Complete(n) => complete_graph(n),
            GraphSpec::Cycle(n) => cycle_graph(n),
            GraphSpec::Path(n) => path_graph(n),
            GraphSpec::KEx => Ok(k_ex_graph()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| GraphError::InvalidParameter(format!("bad graph spec `{s}`")))
        };
        if lower == "kex" {
            Ok(GraphSpec::KEx)
        } else if let Some(rest) = lower.strip_prefix("path:") {
            Ok(GraphSpec::Path(num(rest)?))
        } else if let Some(rest) = lower.strip_prefix('k') {
            Ok(GraphSpec::Complete(num(rest)?))
        } else if let Some(rest) = lower.strip_prefix('c') {
            Ok(GraphSpec::Cycle(num(rest)?))
        } else {
            Err(GraphError::InvalidParameter(format!(
                "bad graph spec `{s}`"
            )))
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete(n) => write!(f, "K{n}"),
            GraphSpec::Cycle(n) => write!(f, "C{n}"),
            GraphSpec::Path(n) => write!(f, "P{n}"),
            GraphSpec::KEx => write!(f, "Kex"),
        }
    }
}

/// Bijection between the edges of a graph and CNF variables `1..=|E|`,
/// following the lexicographic edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeIndexer {
    graph: Graph,
    /// `order * order` table of 0-based edge ids.
    table: Vec<Option<usize>>,
}

impl EdgeIndexer {
    pub fn new(graph: &Graph) -> Self {
        let n = graph.order();
        let mut table = vec![None; n * n];
        for (id, &(u, v)) in graph.edges().iter().enumerate() {
            table[u * n + v] = Some(id);
            table[v * n + u] = Some(id);
        }
        EdgeIndexer {
            graph: graph.clone(),
            table,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_edges(&self) -> usize {
        self.graph.size()
    }

    /// 0-based edge id of `{u, v}`.
    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        let n = self.graph.order();
        if u >= n || v >= n {
            return None;
        }
        self.table[u * n + v]
    }

    pub fn edge(&self, id: usize) -> Option<(usize, usize)> {
        self.graph.edges().get(id).copied()
    }

    /// 1-based CNF variable of `{u, v}`.
    pub fn var_of(&self, u: usize, v: usize) -> Option<u32> {
        self.edge_id(u, v).map(|id| id as u32 + 1)
    }

    pub fn edge_of_var(&self, var: u32) -> Option<(usize, usize)> {
        (var as usize).checked_sub(1).and_then(|id| self.edge(id))
    }

    /// Maps edge ids through a vertex permutation that is an automorphism
    /// of the indexed graph. Returns `None` if some image is not an edge.
    pub fn permute_edges(&self, perm: &VertexPermutation) -> Option<Vec<usize>> {
        self.graph
            .edges()
            .iter()
            .map(|&(u, v)| self.edge_id(perm.apply(u), perm.apply(v)))
            .collect()
    }
}

/// A bijection on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexPermutation(Vec<usize>);

impl VertexPermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, GraphError> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || std::mem::replace(&mut seen[m], true) {
                return Err(GraphError::NotAPermutation);
            }
        }
        Ok(VertexPermutation(mapping))
    }

    pub fn identity(n: usize) -> Self {
        VertexPermutation((0..n).collect())
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut m: Vec<usize> = (0..n).collect();
        m.swap(a, b);
        VertexPermutation(m)
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &m) in self.0.iter().enumerate() {
            inv[m] = i;
        }
        VertexPermutation(inv)
    }
}

/// An injective, edge-preserving vertex map from `source` into `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn is_valid(&self, source: &Graph, target: &Graph) -> bool {
        if self.map.len() != source.order() {
            return false;
        }
        let distinct: BTreeSet<_> = self.map.iter().collect();
        distinct.len() == self.map.len()
            && self.map.iter().all(|&m| m < target.order())
            && source
                .edges()
                .iter()
                .all(|&(u, v)| target.has_edge(self.map[u], self.map[v]))
    }

    /// Edge ids (in `indexer`) covered by the image of the source edges,
    /// sorted ascending.
    pub fn image_edges(&self, source: &Graph, indexer: &EdgeIndexer) -> Vec<usize> {
        let mut ids: Vec<usize> = source
            .edges()
            .iter()
            .map(|&(u, v)| {
                indexer
                    .edge_id(self.map[u], self.map[v])
                    .expect("embedding maps edges to edges")
            })
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// All embeddings of `pattern` into `host`, in lexicographic order of the
/// map arrays.
pub fn enumerate_embeddings(host: &Graph, pattern: &Graph) -> Vec<Embedding> {
    let mut out = Vec::new();
    for_each_embedding(host, pattern, |map| {
        out.push(Embedding { map: map.to_vec() })
    });
    out
}

fn for_each_embedding(host: &Graph, pattern: &Graph, mut visit: impl FnMut(&[usize])) {
    let k = pattern.order();
    if k > host.order() {
        return;
    }
    // Pattern neighbours with a smaller index, which are already mapped
    // when vertex `i` is placed.
    let back: Vec<u64> = (0..k)
        .map(|i| pattern.neighbors(i) & ((1u64 << i) - 1))
        .collect();
    let mut map = vec![0usize; k];
    fn rec(
        i: usize,
        host: &Graph,
        back: &[u64],
        map: &mut [usize],
        used: u64,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if i == map.len() {
            visit(map);
            return;
        }
        let mut allowed = if host.order() == 64 {
            !used
        } else {
            ((1u64 << host.order()) - 1) & !used
        };
        let mut preds = back[i];
        while preds != 0 {
            let p = preds.trailing_zeros() as usize;
            preds &= preds - 1;
            allowed &= host.neighbors(map[p]);
        }
        while allowed != 0 {
            let c = allowed.trailing_zeros() as usize;
            allowed &= allowed - 1;
            map[i] = c;
            rec(i + 1, host, back, map, used | (1 << c), visit);
        }
    }
    rec(0, host, &back, &mut map, 0, &mut visit);
}

/// The distinct edge-id sets covered by copies of `pattern` in `host`,
/// each sorted ascending, the collection ordered lexicographically.
pub fn distinct_edge_sets(host: &Graph, pattern: &Graph) -> Vec<Vec<usize>> {
    let indexer = EdgeIndexer::new(host);
    let mut sets = BTreeSet::new();
    for_each_embedding(host, pattern, |map| {
        let emb = Embedding { map: map.to_vec() };
        sets.insert(emb.image_edges(pattern, &indexer));
    });
    sets.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_sizes() {
        assert_eq!(complete_graph(1).unwrap().size(), 0);
        assert_eq!(complete_graph(5).unwrap().size(), 10);
        assert_eq!(complete_graph(8).unwrap().size(), 28);
        assert!(complete_graph(0).is_err());
    }

    #[test]
    fn cycles() {
        let c3 = cycle_graph(3).unwrap();
        assert_eq!(c3, complete_graph(3).unwrap());
        let c5 = cycle_graph(5).unwrap();
        assert_eq!(c5.size(), 5);
        assert!((0..5).all(|v| c5.degree(v) == 2));
        assert!(cycle_graph(2).is_err());
        // half of K_5's edges
        assert_eq!(2 * c5.size(), complete_graph(5).unwrap().size());
    }

    #[test]
    fn k_ex_shape() {
        let g = k_ex_graph();
        assert_eq!(g.order(), 8);
        assert_eq!(g.size(), 23);
        assert_eq!(g.degree(7), 2);
        assert!(g.has_edge(7, 0) && g.has_edge(7, 1));
        // independent adjacency count
        let degs: Vec<usize> = (0..8)
            .map(|v| (0..8).filter(|&u| g.has_edge(u, v)).count())
            .collect();
        assert_eq!(degs, vec![7, 7, 6, 6, 6, 6, 6, 2]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Graph::from_edges(3, &[(0, 0)]),
            Err(GraphError::SelfLoop(0))
        ));
        assert!(matches!(
            Graph::from_edges(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
        assert!(Graph::empty(65).is_err());
    }

    #[test]
    fn text_format() {
        let g = Graph::parse_text("# pentagon\nn 5\ne 0 1\ne 1 2 # side\ne 2 3\ne 3 4\ne 4 0\n")
            .unwrap();
        assert_eq!(g, cycle_graph(5).unwrap());
        assert_eq!(Graph::parse_text(&g.to_text()).unwrap(), g);
        assert!(Graph::parse_text("e 0 1\n").is_err());
        assert!(Graph::parse_text("n 2\ne 0 1\ne 1 0\n").is_err());
        assert!(Graph::parse_text("n 2\nx 0 1\n").is_err());
    }

    #[test]
    fn graph_specs() {
        assert_eq!("k8".parse::<GraphSpec>().unwrap(), GraphSpec::Complete(8));
        assert_eq!("C5".parse::<GraphSpec>().unwrap(), GraphSpec::Cycle(5));
        assert_eq!("kex".parse::<GraphSpec>().unwrap(), GraphSpec::KEx);
        assert_eq!("path:4".parse::<GraphSpec>().unwrap(), GraphSpec::Path(4));
        assert!("q3".parse::<GraphSpec>().is_err());
        assert_eq!(GraphSpec::Path(4).build().unwrap().size(), 3);
    }

    #[test]
    fn indexer_round_trip() {
        let g = k_ex_graph();
        let idx = EdgeIndexer::new(&g);
        for var in 1..=g.size() as u32 {
            let (u, v) = idx.edge_of_var(var).unwrap();
            assert!(u < v);
            assert_eq!(idx.var_of(u, v), Some(var));
            assert_eq!(idx.var_of(v, u), Some(var));
        }
        assert_eq!(idx.var_of(2, 7), None);
        assert_eq!(idx.edge_of_var(0), None);
        assert_eq!(idx.edge_of_var(24), None);
    }

    fn brute_force_injective(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for c in 0..n {
                if !cur.contains(&c) {
                    cur.push(c);
                    rec(n, k, cur, out);
                    cur.pop();
                }
            }
        }
        rec(n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn embeddings_match_brute_force() {
        let cases = [
            (complete_graph(5).unwrap(), complete_graph(3).unwrap()),
            (k_ex_graph(), cycle_graph(5).unwrap()),
            (cycle_graph(6).unwrap(), path_graph(3).unwrap()),
        ];
        for (host, pat) in cases {
            let expected: Vec<Vec<usize>> = brute_force_injective(host.order(), pat.order())
                .into_iter()
                .filter(|m| pat.edges().iter().all(|&(u, v)| host.has_edge(m[u], m[v])))
                .collect();
            let got: Vec<Vec<usize>> = enumerate_embeddings(&host, &pat)
                .into_iter()
                .map(|e| e.map)
                .collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn embedding_counts() {
        let k5 = complete_graph(5).unwrap();
        let k3 = complete_graph(3).unwrap();
        let k8 = complete_graph(8).unwrap();
        let c5 = cycle_graph(5).unwrap();
        assert_eq!(enumerate_embeddings(&k5, &k3).len(), 60);
        let embs = enumerate_embeddings(&k8, &c5);
        assert_eq!(embs.len(), 6720);
        assert!(embs.iter().all(|e| e.is_valid(&c5, &k8)));
        assert!(enumerate_embeddings(&k3, &k5).is_empty());
    }

    #[test]
    fn edge_set_counts() {
        let k5 = complete_graph(5).unwrap();
        let k3 = complete_graph(3).unwrap();
        let k8 = complete_graph(8).unwrap();
        let c5 = cycle_graph(5).unwrap();
        let sets = distinct_edge_sets(&k8, &c5);
        assert_eq!(sets.len(), 672);
        // |Aut(C_5)| = 10
        assert_eq!(sets.len() * 10, enumerate_embeddings(&k8, &c5).len());
        assert!(sets.iter().all(|s| s.len() == 5));
        assert_eq!(distinct_edge_sets(&k5, &k3).len(), 10);
        assert!(distinct_edge_sets(&k3, &k5).is_empty());
    }

    #[test]
    fn permutation_checks() {
        assert!(VertexPermutation::new(vec![0, 0]).is_err());
        assert!(VertexPermutation::new(vec![0, 2]).is_err());
        let p = VertexPermutation::new(vec![2, 0, 1]).unwrap();
        let inv = p.inverse();
        assert!((0..3).all(|v| inv.apply(p.apply(v)) == v));
        let g = path_graph(3).unwrap();
        let h = g.permuted(&p);
        assert_eq!(h.size(), 2);
        assert!(h.has_edge(2, 0) && h.has_edge(0, 1));
    }
}
