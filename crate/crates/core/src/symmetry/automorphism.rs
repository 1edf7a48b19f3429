//! Automorphism generators of a vertex-colored graph by individualization
//! and equitable refinement.
//!
//! The leftmost path of the search tree fixes a base `v_1, v_2, ...`. Levels
//! are then processed bottom-up: at level `i` every vertex `w` in the target
//! cell that is not yet known to share an orbit with `v_i` (under the
//! generators found so far, all of which fix `v_1..v_{i-1}`) is tried by
//! searching the subtree below `w` for a leaf equivalent to the first leaf.
//! The resulting generators form a strong generating set along the base, so
//! the group order is the product of the basic orbit lengths.

use std::collections::VecDeque;

use super::formula_graph::ColoredGraph;

#[derive(Clone)]
struct Partition {
    lab: Vec<usize>,
    pos: Vec<usize>,
    /// Start position of each vertex's cell.
    cell: Vec<usize>,
    /// Cell length, indexed by start position.
    len: Vec<usize>,
    ncells: usize,
}

impl Partition {
    fn from_colors(g: &ColoredGraph) -> (Partition, Vec<usize>) {
        let n = g.num_vertices();
        let mut lab: Vec<usize> = (0..n).collect();
        lab.sort_by_key(|&v| (g.color(v), v));
        let mut pos = vec![0; n];
        let mut cell = vec![0; n];
        let mut len = vec![0; n];
        let mut starts = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j < n && g.color(lab[j]) == g.color(lab[i]) {
                j += 1;
            }
            starts.push(i);
            len[i] = j - i;
            for (k, &v) in lab.iter().enumerate().take(j).skip(i) {
                pos[v] = k;
                cell[v] = i;
            }
            i = j;
        }
        let ncells = starts.len();
        (
            Partition {
                lab,
                pos,
                cell,
                len,
                ncells,
            },
            starts,
        )
    }

    fn is_discrete(&self) -> bool {
        self.ncells == self.lab.len()
    }

    fn first_nonsingleton(&self) -> Option<usize> {
        let mut s = 0;
        while s < self.lab.len() {
            if self.len[s] > 1 {
                return Some(s);
            }
            s += self.len[s];
        }
        None
    }

    fn cell_members(&self, start: usize) -> &[usize] {
        &self.lab[start..start + self.len[start]]
    }

    /// Cell lengths in order; equal for partitions of isomorphic nodes.
    fn shape(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.ncells);
        let mut s = 0;
        while s < self.lab.len() {
            out.push(self.len[s]);
            s += self.len[s];
        }
        out
    }

    /// Splits `v` off the front of its cell; returns the singleton's start.
    fn individualize(&mut self, v: usize) -> usize {
        let c = self.cell[v];
        let l = self.len[c];
        if l == 1 {
            return c;
        }
        let p = self.pos[v];
        let first = self.lab[c];
        self.lab.swap(c, p);
        self.pos[first] = p;
        self.pos[v] = c;
        self.len[c] = 1;
        self.len[c + 1] = l - 1;
        for i in c + 1..c + l {
            self.cell[self.lab[i]] = c + 1;
        }
        self.ncells += 1;
        c
    }

    /// Refines to the coarsest equitable partition finer than the current
    /// one, starting from the given splitter cells. Returns an
    /// isomorphism-invariant trace of the splits performed.
    fn refine(&mut self, g: &ColoredGraph, initial: &[usize], ws: &mut Workspace) -> u64 {
        let mut trace = Fnv::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in initial {
            if !ws.queued[s] {
                ws.queued[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            ws.queued[s] = false;
            if self.is_discrete() {
                continue;
            }
            ws.touched.clear();
            for i in s..s + self.len[s] {
                let v = self.lab[i];
                for &u in g.neighbors(v) {
                    if ws.count[u] == 0 {
                        ws.touched.push(u);
                    }
                    ws.count[u] += 1;
                }
            }
            ws.cells.clear();
            ws.cells.extend(ws.touched.iter().map(|&u| self.cell[u]));
            ws.cells.sort_unstable();
            ws.cells.dedup();
            trace.mix(s as u64);
            for ci in 0..ws.cells.len() {
                let c = ws.cells[ci];
                let l = self.len[c];
                if l == 1 {
                    trace.mix(c as u64);
                    trace.mix(ws.count[self.lab[c]] as u64);
                    continue;
                }
                let count = &ws.count;
                self.lab[c..c + l].sort_unstable_by_key(|&u| (count[u], u));
                for i in c..c + l {
                    self.pos[self.lab[i]] = i;
                }
                trace.mix(c as u64);
                let mut b = c;
                while b < c + l {
                    let k = ws.count[self.lab[b]];
                    let mut e = b;
                    while e < c + l && ws.count[self.lab[e]] == k {
                        e += 1;
                    }
                    trace.mix(k as u64);
                    trace.mix((e - b) as u64);
                    if b != c || e != c + l {
                        self.len[b] = e - b;
                        for i in b..e {
                            self.cell[self.lab[i]] = b;
                        }
                        if b != c {
                            self.ncells += 1;
                        }
                        if !ws.queued[b] {
                            ws.queued[b] = true;
                            queue.push_back(b);
                        }
                    }
                    b = e;
                }
            }
            for &u in &ws.touched {
                ws.count[u] = 0;
            }
        }
        trace.finish()
    }
}

struct Workspace {
    count: Vec<u32>,
    queued: Vec<bool>,
    touched: Vec<usize>,
    cells: Vec<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            count: vec![0; n],
            queued: vec![false; n],
            touched: Vec::new(),
            cells: Vec::new(),
        }
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn mix(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

struct PathNode {
    part: Partition,
    trace: u64,
    shape: Vec<usize>,
    /// Target cell start and the vertex individualized from it; `None` at
    /// the leaf.
    branch: Option<(usize, usize)>,
}

/// Output of [`automorphism_generators`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphismSearch {
    /// Verified generators, each a vertex permutation.
    pub generators: Vec<Vec<usize>>,
    /// Base vertices of the first path.
    pub base: Vec<usize>,
    /// Basic orbit length at each base level.
    pub orbit_lengths: Vec<usize>,
    /// Group order, or `None` on `u128` overflow.
    pub group_order: Option<u128>,
    pub nodes: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

struct Searcher<'a> {
    g: &'a ColoredGraph,
    path: Vec<PathNode>,
    ws: Workspace,
    nodes: usize,
}

impl Searcher<'_> {
    fn leaf_lab(&self) -> &[usize] {
        &self.path.last().expect("nonempty path").part.lab
    }

    /// Depth-first search below a node equivalent to `path[depth]` for a
    /// leaf that maps the first leaf by an automorphism.
    fn explore(&mut self, part: Partition, depth: usize) -> Option<Vec<usize>> {
        self.nodes += 1;
        let Some((target, preferred)) = self.path[depth].branch else {
            let mut gamma = vec![0; part.lab.len()];
            for (a, b) in self.leaf_lab().iter().zip(&part.lab) {
                gamma[*a] = *b;
            }
            return self.g.is_automorphism(&gamma).then_some(gamma);
        };
        let mut order: Vec<usize> = part.cell_members(target).to_vec();
        order.sort_unstable();
        if let Some(i) = order.iter().position(|&u| u == preferred) {
            order.remove(i);
            order.insert(0, preferred);
        }
        for u in order {
            if let Some(child) = self.child(&part, u, depth + 1) {
                if let Some(gamma) = self.explore(child, depth + 1) {
                    return Some(gamma);
                }
            }
        }
        None
    }

    /// Individualizes `u` and refines; `None` if the result does not match
    /// the first path at `depth`.
    fn child(&mut self, part: &Partition, u: usize, depth: usize) -> Option<Partition> {
        let mut child = part.clone();
        let s = child.individualize(u);
        let trace = child.refine(self.g, &[s], &mut self.ws);
        let node = &self.path[depth];
        (trace == node.trace && child.shape() == node.shape).then_some(child)
    }
}

/// Generators of the color-preserving automorphism group of `g`.
///
/// `partner` optionally names a preferred first candidate for each vertex
/// (used to try a literal's complement first, which makes phase-flip
/// generators come out as plain transpositions).
pub fn automorphism_generators(
    g: &ColoredGraph,
    partner: impl Fn(usize) -> Option<usize>,
) -> AutomorphismSearch {
    let n = g.num_vertices();
    let mut ws = Workspace::new(n);
    let (mut part, starts) = Partition::from_colors(g);
    let trace = part.refine(g, &starts, &mut ws);
    let mut path = Vec::new();
    let mut trace = trace;
    loop {
        let branch = part.first_nonsingleton().map(|t| {
            let v = *part.cell_members(t).iter().min().expect("nonempty cell");
            (t, v)
        });
        let shape = part.shape();
        path.push(PathNode {
            part: part.clone(),
            trace,
            shape,
            branch,
        });
        let Some((_, v)) = branch else { break };
        let s = part.individualize(v);
        trace = part.refine(g, &[s], &mut ws);
    }
    let mut searcher = Searcher {
        g,
        path,
        ws,
        nodes: 0,
    };
    let depth = searcher.path.len() - 1;
    let mut generators: Vec<Vec<usize>> = Vec::new();
    let mut orbit_lengths = vec![1; depth];
    let mut uf = UnionFind::new(n);
    for level in (0..depth).rev() {
        let (target, v) = searcher.path[level].branch.expect("inner node");
        let mut cands: Vec<usize> = searcher.path[level].part.cell_members(target).to_vec();
        cands.sort_unstable();
        if let Some(p) = partner(v) {
            if let Some(i) = cands.iter().position(|&u| u == p) {
                cands.remove(i);
                cands.insert(0, p);
            }
        }
        let mut failed: Vec<usize> = Vec::new();
        for w in cands {
            if w == v || uf.find(w) == uf.find(v) {
                continue;
            }
            if failed.iter().any(|&f| uf.find(f) == uf.find(w)) {
                continue;
            }
            let base = searcher.path[level].part.clone();
            let found = searcher
                .child(&base, w, level + 1)
                .and_then(|child| searcher.explore(child, level + 1));
            match found {
                Some(gamma) => {
                    for (i, &j) in gamma.iter().enumerate() {
                        uf.union(i, j);
                    }
                    generators.push(gamma);
                }
                None => failed.push(w),
            }
        }
        let root = uf.find(v);
        orbit_lengths[level] = (0..n).filter(|&u| uf.find(u) == root).count();
    }
    let group_order = orbit_lengths
        .iter()
        .try_fold(1u128, |acc, &l| acc.checked_mul(l as u128));
    let base = searcher
        .path
        .iter()
        .filter_map(|node| node.branch.map(|(_, v)| v))
        .collect();
    AutomorphismSearch {
        generators,
        base,
        orbit_lengths,
        group_order,
        nodes: searcher.nodes,
    }
}
