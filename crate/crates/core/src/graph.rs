//! Finite simple graphs with string labels, the `G ⊕ K₂` join, and the
//! combinatorial predicates and contact-count bounds used across the crate.
//!
//! Graphs are immutable values. Edges are stored with their endpoints in
//! sorted order and iterated in sorted order, which fixes the row order of
//! rigidity matrices and makes every traversal reproducible.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}`–`{1}`")]
    DuplicateEdge(String, String),
    #[error("edge endpoint `{0}` is not a vertex")]
    UnknownVertex(String),
    #[error("label `{0}` already present in the graph")]
    LabelCollision(String),
    #[error("not a caterpillar: {0}")]
    NotCaterpillar(String),
    #[error("bound hypothesis unmet: need n >= d (got n = {n}, d = {d})")]
    BoundHypothesis { n: u64, d: u64 },
}

/// A finite simple graph on string labels.
#[derive(Clone)]
pub struct Graph {
    vertices: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<BTreeSet<usize>>,
    edges: BTreeSet<(String, String)>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl Graph {
    /// Builds a graph, rejecting duplicate labels, self-loops, duplicate
    /// edges and dangling endpoints.
    pub fn new<V, E, S>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let mut adjacency = vec![BTreeSet::new(); vertices.len()];
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b): (String, String) = (a.into(), b.into());
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let ia = *index.get(&a).ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
            let ib = *index.get(&b).ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
            let key = ordered(&a, &b);
            if !edge_set.insert(key.clone()) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            adjacency[ia].insert(ib);
            adjacency[ib].insert(ia);
        }
        Ok(Self { vertices, index, adjacency, edges: edge_set })
    }

    pub fn empty() -> Self {
        Self::new(Vec::<String>::new(), Vec::new()).expect("empty graph is valid")
    }

    /// Complete graph on the given labels.
    pub fn complete<S: AsRef<str>>(labels: &[S]) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                edges.push((labels[i].as_ref(), labels[j].as_ref()));
            }
        }
        Self::new(labels.iter().map(|s| s.as_ref()), edges)
    }

    /// Path `v0 – v1 – … – v{n-1}` on the given labels.
    pub fn path<S: AsRef<str>>(labels: &[S]) -> Result<Self, GraphError> {
        let edges = labels.windows(2).map(|w| (w[0].as_ref(), w[1].as_ref()));
        Self::new(labels.iter().map(|s| s.as_ref()), edges)
    }

    /// Cycle on the given labels, in order.
    pub fn cycle<S: AsRef<str>>(labels: &[S]) -> Result<Self, GraphError> {
        let n = labels.len();
        let edges = (0..n).map(|i| (labels[i].as_ref(), labels[(i + 1) % n].as_ref()));
        Self::new(labels.iter().map(|s| s.as_ref()), edges)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in sorted order, endpoints sorted within each pair.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    pub fn degree(&self, label: &str) -> Option<usize> {
        self.index_of(label).map(|i| self.adjacency[i].len())
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Neighbour labels of `label`, sorted.
    pub fn neighbors(&self, label: &str) -> Vec<&str> {
        let Some(i) = self.index_of(label) else { return Vec::new() };
        let mut out: Vec<&str> = self.adjacency[i].iter().map(|&j| self.vertices[j].as_str()).collect();
        out.sort_unstable();
        out
    }

    /// Vertex indices ordered by label.
    fn sorted_indices(&self) -> Vec<usize> {
        self.index.values().copied().collect()
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.vertex_count()];
        let mut count = 0;
        for start in 0..self.vertex_count() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Connected components as lists of labels; each list sorted, components
    /// ordered by their smallest label.
    pub fn components(&self) -> Vec<Vec<String>> {
        let mut seen = vec![false; self.vertex_count()];
        let mut out = Vec::new();
        for start in self.sorted_indices() {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(self.vertices[v].clone());
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    /// Induced subgraph on the given labels (unknown labels are ignored).
    pub fn induced<S: AsRef<str>>(&self, labels: &[S]) -> Self {
        let keep: BTreeSet<&str> = labels.iter().map(AsRef::as_ref).filter(|l| self.contains(l)).collect();
        let verts: Vec<&str> = self.vertices.iter().map(String::as_str).filter(|v| keep.contains(v)).collect();
        let edges = self.edges().filter(|(a, b)| keep.contains(a) && keep.contains(b));
        Self::new(verts, edges).expect("induced subgraph of a valid graph is valid")
    }

    /// `G ⊕ K₂`: adds hubs `hub_a`, `hub_b`, the edge between them, and an
    /// edge from each hub to every vertex of `self`.
    pub fn join_k2(&self, hub_a: &str, hub_b: &str) -> Result<Self, GraphError> {
        for hub in [hub_a, hub_b] {
            if self.contains(hub) {
                return Err(GraphError::LabelCollision(hub.to_owned()));
            }
        }
        if hub_a == hub_b {
            return Err(GraphError::LabelCollision(hub_b.to_owned()));
        }
        let mut vertices: Vec<&str> = self.vertices.iter().map(String::as_str).collect();
        vertices.push(hub_a);
        vertices.push(hub_b);
        let mut edges: Vec<(&str, &str)> = self.edges().collect();
        edges.push((hub_a, hub_b));
        for v in &self.vertices {
            edges.push((hub_a, v));
            edges.push((hub_b, v));
        }
        Self::new(vertices, edges)
    }

    /// The first cycle met by a depth-first search that visits vertices and
    /// neighbours in sorted-label order, or `None` for a forest.
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        let n = self.vertex_count();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let order = self.sorted_indices();
        let mut rank = vec![0; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        let sorted_nbrs = |v: usize| {
            let mut ns: Vec<usize> = self.adjacency[v].iter().copied().collect();
            ns.sort_by_key(|&w| rank[w]);
            ns
        };
        for &root in &order {
            if depth[root] != usize::MAX {
                continue;
            }
            depth[root] = 0;
            // Explicit stack of (vertex, neighbour list, cursor).
            let mut stack = vec![(root, sorted_nbrs(root), 0usize)];
            while let Some((v, nbrs, cursor)) = stack.last_mut() {
                let v = *v;
                if *cursor == nbrs.len() {
                    stack.pop();
                    continue;
                }
                let w = nbrs[*cursor];
                *cursor += 1;
                if Some(w) == parent[v] {
                    continue;
                }
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some(v);
                    let nw = sorted_nbrs(w);
                    stack.push((w, nw, 0));
                } else if depth[w] < depth[v] {
                    // Back edge v → w closes the cycle w … v.
                    let mut cycle = vec![v];
                    let mut u = v;
                    while u != w {
                        u = parent[u].expect("ancestor chain reaches w");
                        cycle.push(u);
                    }
                    cycle.reverse();
                    return Some(cycle.into_iter().map(|i| self.vertices[i].clone()).collect());
                }
            }
        }
        None
    }

    pub fn is_forest(&self) -> bool {
        self.find_cycle().is_none()
    }

    pub fn is_tree(&self) -> bool {
        self.vertex_count() > 0 && self.is_forest() && self.component_count() == 1
    }

    /// A perfect elimination ordering if the graph is chordal.
    ///
    /// Maximum cardinality search yields a candidate ordering whose reverse
    /// is a perfect elimination ordering exactly when the graph is chordal;
    /// the candidate is then verified directly.
    pub fn perfect_elimination_ordering(&self) -> Option<Vec<String>> {
        let n = self.vertex_count();
        let order = self.sorted_indices();
        let mut weight = vec![0usize; n];
        let mut numbered = vec![false; n];
        let mut mcs = Vec::with_capacity(n);
        for _ in 0..n {
            let v = order
                .iter()
                .copied()
                .filter(|&v| !numbered[v])
                .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
                .expect("unnumbered vertex remains");
            numbered[v] = true;
            mcs.push(v);
            for &w in &self.adjacency[v] {
                if !numbered[w] {
                    weight[w] += 1;
                }
            }
        }
        mcs.reverse();
        let labels: Vec<String> = mcs.iter().map(|&i| self.vertices[i].clone()).collect();
        self.is_perfect_elimination_ordering(&labels).then_some(labels)
    }

    pub fn is_chordal(&self) -> bool {
        self.perfect_elimination_ordering().is_some()
    }

    /// Checks that each vertex's later neighbours in `ordering` form a clique.
    pub fn is_perfect_elimination_ordering<S: AsRef<str>>(&self, ordering: &[S]) -> bool {
        if ordering.len() != self.vertex_count() {
            return false;
        }
        let mut pos = vec![usize::MAX; self.vertex_count()];
        for (p, l) in ordering.iter().enumerate() {
            match self.index_of(l.as_ref()) {
                Some(i) if pos[i] == usize::MAX => pos[i] = p,
                _ => return false,
            }
        }
        for v in 0..self.vertex_count() {
            let later: Vec<usize> = self.adjacency[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
            for (i, &a) in later.iter().enumerate() {
                for &b in &later[i + 1..] {
                    if !self.adjacency[a].contains(&b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The spine of a caterpillar: the path left after deleting all leaves,
    /// listed end to end. Errors if `self` is not a caterpillar tree.
    pub fn caterpillar_spine(&self) -> Result<Vec<String>, GraphError> {
        if self.vertex_count() == 0 {
            return Err(GraphError::NotCaterpillar("empty graph".into()));
        }
        if let Some(cycle) = self.find_cycle() {
            return Err(GraphError::NotCaterpillar(format!("contains cycle {}", cycle.join("-"))));
        }
        if self.component_count() != 1 {
            return Err(GraphError::NotCaterpillar(format!("disconnected ({} components)", self.component_count())));
        }
        let inner: Vec<String> = self.vertices.iter().filter(|v| self.degree(v).unwrap_or(0) > 1).cloned().collect();
        if inner.is_empty() {
            // K1 or K2: the spine is a single (lexicographically first) vertex.
            let mut vs = self.vertices.clone();
            vs.sort();
            return Ok(vs.into_iter().take(1).collect());
        }
        let spine = self.induced(&inner);
        if let Some(v) = spine.vertices().iter().find(|v| spine.degree(v).unwrap_or(0) > 2) {
            return Err(GraphError::NotCaterpillar(format!(
                "vertex `{v}` has {} non-leaf neighbours",
                spine.degree(v).unwrap_or(0)
            )));
        }
        let mut ends: Vec<&String> = spine.vertices().iter().filter(|v| spine.degree(v).unwrap_or(0) <= 1).collect();
        ends.sort();
        let mut path = vec![ends[0].clone()];
        let mut prev: Option<String> = None;
        loop {
            let cur = path.last().expect("non-empty").clone();
            let next = spine.neighbors(&cur).into_iter().find(|w| Some(*w) != prev.as_deref()).map(str::to_owned);
            match next {
                Some(n) => {
                    prev = Some(cur);
                    path.push(n);
                }
                None => break,
            }
        }
        Ok(path)
    }

    pub fn is_caterpillar(&self) -> bool {
        self.caterpillar_spine().is_ok()
    }

    /// Whether a caterpillar is a penny graph: maximum degree at most 5, and
    /// every path joining two degree-5 vertices passes through a vertex of
    /// degree at most 3.
    pub fn caterpillar_penny_check(&self) -> Result<bool, GraphError> {
        self.caterpillar_spine()?;
        if self.max_degree() > 5 {
            return Ok(false);
        }
        let fives: Vec<usize> = (0..self.vertex_count()).filter(|&v| self.adjacency[v].len() == 5).collect();
        for (i, &s) in fives.iter().enumerate() {
            let parent = self.bfs_parents(s);
            for &t in &fives[i + 1..] {
                let mut u = parent[t].expect("tree is connected");
                let mut relieved = false;
                while u != s {
                    if self.adjacency[u].len() <= 3 {
                        relieved = true;
                        break;
                    }
                    u = parent[u].expect("tree is connected");
                }
                if !relieved {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn bfs_parents(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// Repeatedly removes the lexicographically smallest vertex of degree
    /// at most one. For a forest this removes every vertex; the reversed
    /// sequence adds each vertex with at most one earlier neighbour.
    pub fn leaf_elimination_order(&self) -> Option<Vec<String>> {
        let n = self.vertex_count();
        let mut deg: Vec<usize> = self.adjacency.iter().map(BTreeSet::len).collect();
        let mut removed = vec![false; n];
        let mut ready: BTreeSet<(String, usize)> =
            (0..n).filter(|&v| deg[v] <= 1).map(|v| (self.vertices[v].clone(), v)).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(item) = ready.pop_first() {
            let v = item.1;
            removed[v] = true;
            out.push(item.0);
            for &w in &self.adjacency[v] {
                if !removed[w] {
                    deg[w] -= 1;
                    if deg[w] == 1 || deg[w] == 0 {
                        ready.insert((self.vertices[w].clone(), w));
                    }
                }
            }
        }
        (out.len() == n).then_some(out)
    }
}

impl PartialEq for Graph {
    /// Label-exact equality: same vertex set and same edge set, regardless
    /// of vertex listing order.
    fn eq(&self, other: &Self) -> bool {
        self.index.len() == other.index.len() && self.index.keys().eq(other.index.keys()) && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("vertices", &self.vertices).field("edges", &self.edges).finish()
    }
}

/// The JSON shape of a graph.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        Self { vertices: g.vertices.clone(), edges: g.edges.iter().map(|(a, b)| [a.clone(), b.clone()]).collect() }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;
    fn try_from(j: GraphJson) -> Result<Self, GraphError> {
        Graph::new(j.vertices, j.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = GraphJson::deserialize(d)?;
        Graph::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Maxwell's edge bound for stress-free frameworks: `d·n − d(d+1)/2`.
pub fn maxwell_bound(d: u64, n: u64) -> Result<i64, GraphError> {
    if d == 0 || n < d {
        return Err(GraphError::BoundHypothesis { n, d });
    }
    Ok((d * n) as i64 - (d * (d + 1) / 2) as i64)
}

/// `⌈√k⌉` in exact integer arithmetic.
fn ceil_sqrt(k: u64) -> u64 {
    let mut s = (k as f64).sqrt() as u64;
    // One-step corrections around the floating-point estimate.
    while s.saturating_mul(s) > k {
        s -= 1;
    }
    while (s + 1).saturating_mul(s + 1) <= k {
        s += 1;
    }
    if s * s == k {
        s
    } else {
        s + 1
    }
}

/// `⌊c − √k⌋ = c − ⌈√k⌉`.
fn floor_minus_sqrt(c: u64, k: u64) -> i64 {
    c as i64 - ceil_sqrt(k) as i64
}

/// Maximum edge count of a penny graph on `n ≥ 1` vertices: `⌊3n − √(12n−3)⌋`.
pub fn penny_edge_bound(n: u64) -> i64 {
    assert!(n >= 1, "penny_edge_bound requires n >= 1");
    floor_minus_sqrt(3 * n, 12 * n - 3)
}

/// Maximum contact count of a sphere packing with contact graph `G ⊕ K₂`,
/// `|V(G)| = n ≥ 1`: `⌊5n + 1 − √(12n−3)⌋`.
pub fn sphere_contact_bound(n: u64) -> i64 {
    assert!(n >= 1, "sphere_contact_bound requires n >= 1");
    floor_minus_sqrt(5 * n + 1, 12 * n - 3)
}
