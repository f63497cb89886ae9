use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{check_guard, invalid, scaled, Error, Result};

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;
    fn try_from(r: GraphRepr) -> Result<Graph> {
        let e: Vec<(usize, usize)> = r.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(r.n, &e)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> GraphRepr {
        GraphRepr {
            n: g.n(),
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n(), self.edges())
    }
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    /// Rejects loops, duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge {u}-{v} out of range for n={n}"));
            }
            if u == v {
                return invalid(format!("loop at {u}"));
            }
            if g.has_edge(u, v) {
                return invalid(format!("duplicate edge {u}-{v}"));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds uv if absent; returns whether it was added.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u != v && u < self.n() && v < self.n());
        match self.adj[u].binary_search(&v) {
            Ok(_) => false,
            Err(p) => {
                self.adj[u].insert(p, v);
                let q = self.adj[v].binary_search(&u).unwrap_err();
                self.adj[v].insert(q, u);
                true
            }
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.n()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Induced subgraph on `vs` (relabelled in the given order) plus the map back.
    pub fn induced(&self, vs: &[usize]) -> (Graph, Vec<usize>) {
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &v) in vs.iter().enumerate() {
            pos[v] = i;
        }
        let mut h = Graph::new(vs.len());
        for (i, &v) in vs.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = pos[w];
                if j != usize::MAX && i < j {
                    h.add_edge(i, j);
                }
            }
        }
        (h, vs.to_vec())
    }

    /// G minus a vertex set; returns the graph and the map to old ids.
    pub fn remove(&self, del: &[usize]) -> (Graph, Vec<usize>) {
        let mut gone = vec![false; self.n()];
        for &v in del {
            gone[v] = true;
        }
        let keep: Vec<usize> = (0..self.n()).filter(|&v| !gone[v]).collect();
        self.induced(&keep)
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut g = self.clone();
        let off = g.n();
        for _ in 0..other.n() {
            g.add_vertex();
        }
        for (u, v) in other.edges() {
            g.add_edge(u + off, v + off);
        }
        g
    }

    /// Contract the connected set `set` to a single vertex (its minimum id
    /// keeps the position; the others are removed). Returns graph and old ids.
    pub fn contract(&self, set: &[usize]) -> (Graph, Vec<usize>) {
        let rep = *set.iter().min().expect("nonempty contraction set");
        let mut inset = vec![false; self.n()];
        for &v in set {
            inset[v] = true;
        }
        let keep: Vec<usize> = (0..self.n()).filter(|&v| !inset[v] || v == rep).collect();
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            pos[v] = i;
        }
        for &v in set {
            pos[v] = pos[rep];
        }
        let mut h = Graph::new(keep.len());
        for (u, v) in self.edges() {
            let (a, b) = (pos[u], pos[v]);
            if a != b {
                h.add_edge(a, b);
            }
        }
        (h, keep)
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Parse the "n m" / "u v" text format.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut nums = Vec::new();
        for tok in text.split_whitespace() {
            nums.push(
                tok.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad token {tok:?}: {e}")))?,
            );
        }
        if nums.len() < 2 {
            return Err(Error::Parse("missing header".into()));
        }
        let (n, m) = (nums[0], nums[1]);
        if nums.len() != 2 + 2 * m {
            return Err(Error::Parse(format!(
                "expected {m} edges, found {} numbers",
                nums.len() - 2
            )));
        }
        let edges: Vec<(usize, usize)> = nums[2..].chunks(2).map(|c| (c[0], c[1])).collect();
        Graph::from_edges(n, &edges).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    /// Adjacency bitmasks; only for n <= 64.
    pub fn masks(&self) -> Vec<u64> {
        assert!(self.n() <= 64);
        self.adj
            .iter()
            .map(|a| a.iter().fold(0u64, |m, &v| m | (1u64 << v)))
            .collect()
    }

    pub fn bfs_dist(&self, src: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.n()];
        d[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for &w in &self.adj[u] {
                if d[w] == usize::MAX {
                    d[w] = d[u] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.bfs_dist(0).iter().all(|&d| d != usize::MAX)
    }
}

/// A minor model: branch set of minor vertex i is `branch_sets[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorModel {
    pub branch_sets: Vec<Vec<usize>>,
}

/// Family of connected vertex sets of a host graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphFamily {
    pub members: Vec<Vec<usize>>,
}

impl SubgraphFamily {
    pub fn new(mut members: Vec<Vec<usize>>) -> SubgraphFamily {
        for m in &mut members {
            m.sort_unstable();
            m.dedup();
        }
        SubgraphFamily { members }
    }

    pub fn singletons(vs: impl IntoIterator<Item = usize>) -> SubgraphFamily {
        SubgraphFamily::new(vs.into_iter().map(|v| vec![v]).collect())
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        for m in &self.members {
            if m.is_empty() {
                return invalid("empty family member");
            }
            if m.iter().any(|&v| v >= g.n()) {
                return invalid(format!("member {m:?} out of range"));
            }
            if !is_connected_set(g, m) {
                return invalid(format!("member {m:?} is not connected"));
            }
        }
        Ok(())
    }

    /// Members entirely inside `allowed`.
    pub fn restrict(&self, allowed: &[bool]) -> SubgraphFamily {
        SubgraphFamily {
            members: self
                .members
                .iter()
                .filter(|m| m.iter().all(|&v| allowed[v]))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layering {
    pub layers: Vec<Vec<usize>>,
}

impl Layering {
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let mut idx = vec![usize::MAX; g.n()];
        for (i, l) in self.layers.iter().enumerate() {
            for &v in l {
                if v >= g.n() {
                    return invalid(format!("layer vertex {v} out of range"));
                }
                if idx[v] != usize::MAX {
                    return invalid(format!("vertex {v} in two layers"));
                }
                idx[v] = i;
            }
        }
        if let Some(v) = idx.iter().position(|&i| i == usize::MAX) {
            return invalid(format!("vertex {v} in no layer"));
        }
        for (u, v) in g.edges() {
            if idx[u].abs_diff(idx[v]) > 1 {
                return invalid(format!("edge {u}-{v} spans layers {} and {}", idx[u], idx[v]));
            }
        }
        Ok(())
    }

    pub fn index_of(&self, n: usize) -> Vec<usize> {
        let mut idx = vec![usize::MAX; n];
        for (i, l) in self.layers.iter().enumerate() {
            for &v in l {
                idx[v] = i;
            }
        }
        idx
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphClass {
    Null,
    Edgeless,
    LinearForest,
    Forest,
    Other,
}

pub fn is_connected_set(g: &Graph, set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let mut inset = vec![false; g.n()];
    for &v in set {
        inset[v] = true;
    }
    let mut seen = vec![false; g.n()];
    seen[set[0]] = true;
    let mut stack = vec![set[0]];
    while let Some(u) = stack.pop() {
        for &w in g.neighbors(u) {
            if inset[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    set.iter().all(|&v| seen[v])
}

/// Components of G[allowed]; each sorted, ordered by minimum vertex.
pub fn components_within(g: &Graph, allowed: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if !allowed[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if allowed[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    components_within(g, &vec![true; g.n()])
}

/// Blocks (2-connected pieces, bridges, isolated vertices) and cut vertices.
pub fn blocks_and_cut_vertices(g: &Graph) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut estack: Vec<(usize, usize)> = Vec::new();
    let mut time = 0;
    for s in 0..n {
        if disc[s] != usize::MAX {
            continue;
        }
        if g.degree(s) == 0 {
            disc[s] = time;
            time += 1;
            blocks.push(vec![s]);
            continue;
        }
        disc[s] = time;
        low[s] = time;
        time += 1;
        // (vertex, parent, next neighbour index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(s, usize::MAX, 0)];
        while let Some(&mut (u, p, ref mut i)) = stack.last_mut() {
            if *i < g.degree(u) {
                let w = g.neighbors(u)[*i];
                *i += 1;
                if w == p {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    estack.push((u, w));
                    stack.push((w, u, 0));
                } else if disc[w] < disc[u] {
                    low[u] = low[u].min(disc[w]);
                    estack.push((u, w));
                }
            } else {
                stack.pop();
                if p != usize::MAX {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        let mut b = Vec::new();
                        while let Some((a, c)) = estack.pop() {
                            b.push(a);
                            b.push(c);
                            if (a, c) == (p, u) {
                                break;
                            }
                        }
                        b.sort_unstable();
                        b.dedup();
                        blocks.push(b);
                    }
                }
            }
        }
    }
    blocks.sort();
    let mut count = vec![0usize; n];
    for b in &blocks {
        for &v in b {
            count[v] += 1;
        }
    }
    let cuts = (0..n).filter(|&v| count[v] >= 2).collect();
    (blocks, cuts)
}

/// Lexicographically smallest shortest u-v path.
pub fn geodesic(g: &Graph, u: usize, v: usize) -> Option<Vec<usize>> {
    let d = g.bfs_dist(v);
    if d[u] == usize::MAX {
        return None;
    }
    let mut path = vec![u];
    let mut cur = u;
    while cur != v {
        cur = *g
            .neighbors(cur)
            .iter()
            .find(|&&w| d[w] != usize::MAX && d[w] + 1 == d[cur])
            .expect("bfs predecessor");
        path.push(cur);
    }
    Some(path)
}

pub fn bfs_layering(g: &Graph, root: usize) -> Result<Layering> {
    if root >= g.n() {
        return invalid(format!("root {root} out of range"));
    }
    let d = g.bfs_dist(root);
    if d.iter().any(|&x| x == usize::MAX) {
        return invalid("bfs_layering needs a connected graph");
    }
    let depth = d.iter().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth + 1];
    for v in 0..g.n() {
        layers[d[v]].push(v);
    }
    Ok(Layering { layers })
}

pub fn is_forest(g: &Graph) -> bool {
    g.m() + connected_components(g).len() == g.n()
}

pub fn classify(g: &Graph) -> GraphClass {
    if g.n() == 0 {
        GraphClass::Null
    } else if g.m() == 0 {
        GraphClass::Edgeless
    } else if !is_forest(g) {
        GraphClass::Other
    } else if g.vertices().all(|v| g.degree(v) <= 2) {
        GraphClass::LinearForest
    } else {
        GraphClass::Forest
    }
}

/// Checks the three model invariants (plus rootedness when requested).
pub fn validate_model(
    g: &Graph,
    x: &Graph,
    model: &MinorModel,
    rooted_at: Option<&[usize]>,
) -> Result<()> {
    if model.branch_sets.len() != x.n() {
        return invalid("wrong number of branch sets");
    }
    let mut owner = vec![usize::MAX; g.n()];
    for (i, b) in model.branch_sets.iter().enumerate() {
        if b.is_empty() {
            return invalid(format!("branch set {i} empty"));
        }
        for &v in b {
            if v >= g.n() {
                return invalid(format!("branch vertex {v} out of range"));
            }
            if owner[v] != usize::MAX {
                return invalid(format!("vertex {v} in two branch sets"));
            }
            owner[v] = i;
        }
        if !is_connected_set(g, b) {
            return invalid(format!("branch set {i} not connected"));
        }
        if let Some(r) = rooted_at {
            if !b.iter().any(|v| r.contains(v)) {
                return invalid(format!("branch set {i} misses the root set"));
            }
        }
    }
    for (a, b) in x.edges() {
        let touch = model.branch_sets[a]
            .iter()
            .any(|&v| g.neighbors(v).iter().any(|&w| owner[w] == b));
        if !touch {
            return invalid(format!("minor edge {a}-{b} not realised"));
        }
    }
    Ok(())
}

pub(crate) fn mask_of(vs: &[usize]) -> u64 {
    vs.iter().fold(0u64, |m, &v| m | (1u64 << v))
}

pub(crate) fn bits(mut m: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Is G[mask] connected (and nonempty)?
pub(crate) fn mask_connected(nb: &[u64], mask: u64) -> bool {
    if mask == 0 {
        return false;
    }
    let mut seen = mask & mask.wrapping_neg();
    loop {
        let mut grow = seen;
        let mut m = seen;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            grow |= nb[v] & mask;
        }
        if grow == seen {
            return seen == mask;
        }
        seen = grow;
    }
}

pub(crate) fn mask_components(nb: &[u64], mut mask: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while mask != 0 {
        let mut c = mask & mask.wrapping_neg();
        loop {
            let mut grow = c;
            let mut m = c;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                grow |= nb[v] & mask;
            }
            if grow == c {
                break;
            }
            c = grow;
        }
        out.push(c);
        mask &= !c;
    }
    out
}

pub(crate) fn mask_neighborhood(nb: &[u64], mask: u64) -> u64 {
    let mut out = 0;
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        out |= nb[v];
    }
    out & !mask
}

pub const MODEL_MINOR_LIMIT: usize = 6;
pub const MODEL_HOST_LIMIT: usize = 14;

pub fn find_model(g: &Graph, x: &Graph, rooted_at: Option<&[usize]>) -> Result<Option<MinorModel>> {
    find_model_with_limits(
        g,
        x,
        rooted_at,
        scaled(MODEL_MINOR_LIMIT),
        scaled(MODEL_HOST_LIMIT),
    )
}

pub fn find_model_with_limits(
    g: &Graph,
    x: &Graph,
    rooted_at: Option<&[usize]>,
    minor_limit: usize,
    host_limit: usize,
) -> Result<Option<MinorModel>> {
    check_guard("minor size", minor_limit, x.n())?;
    check_guard("host size", host_limit.min(30), g.n())?;
    let root = rooted_at.map(mask_of);
    Ok(ModelSearch::new(g).search(x, root, None))
}

pub fn find_frich_model(g: &Graph, f: &SubgraphFamily, x: &Graph) -> Result<Option<MinorModel>> {
    find_frich_model_with_limits(g, f, x, scaled(MODEL_MINOR_LIMIT), scaled(MODEL_HOST_LIMIT))
}

pub fn find_frich_model_with_limits(
    g: &Graph,
    f: &SubgraphFamily,
    x: &Graph,
    minor_limit: usize,
    host_limit: usize,
) -> Result<Option<MinorModel>> {
    check_guard("minor size", minor_limit, x.n())?;
    check_guard("host size", host_limit.min(30), g.n())?;
    let fm: Vec<u64> = f.members.iter().map(|m| mask_of(m)).collect();
    Ok(ModelSearch::new(g).search(x, None, Some(&fm)))
}

/// Exhaustive branch-set placement over precomputed connected subsets.
pub(crate) struct ModelSearch {
    nb: Vec<u64>,
    connected: Vec<u64>,
}

impl ModelSearch {
    pub(crate) fn new(g: &Graph) -> ModelSearch {
        let nb = g.masks();
        let n = g.n();
        let connected = (1u64..(1u64 << n))
            .filter(|&m| mask_connected(&nb, m))
            .collect();
        ModelSearch { nb, connected }
    }

    pub(crate) fn search(&self, x: &Graph, root: Option<u64>, rich: Option<&[u64]>) -> Option<MinorModel> {
        let h = x.n();
        if h == 0 {
            return Some(MinorModel { branch_sets: vec![] });
        }
        // place minor vertices in BFS order so later ones see placed neighbours
        let mut order = Vec::new();
        let mut seen = vec![false; h];
        for s in 0..h {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(a) = q.pop_front() {
                order.push(a);
                for &b in x.neighbors(a) {
                    if !seen[b] {
                        seen[b] = true;
                        q.push_back(b);
                    }
                }
            }
        }
        let cands: Vec<u64> = self
            .connected
            .iter()
            .copied()
            .filter(|&m| root.is_none_or(|r| m & r != 0))
            .filter(|&m| rich.is_none_or(|fs| fs.iter().any(|&f| f & !m == 0)))
            .collect();
        let mut sets = vec![0u64; h];
        if self.place(x, &order, 0, 0, &cands, &mut sets) {
            Some(MinorModel {
                branch_sets: sets.into_iter().map(bits).collect(),
            })
        } else {
            None
        }
    }

    fn place(&self, x: &Graph, order: &[usize], i: usize, used: u64, cands: &[u64], sets: &mut [u64]) -> bool {
        if i == order.len() {
            return true;
        }
        let a = order[i];
        let need: Vec<u64> = x
            .neighbors(a)
            .iter()
            .filter(|&&b| sets[b] != 0)
            .map(|&b| mask_neighborhood(&self.nb, sets[b]))
            .collect();
        for &m in cands {
            if m & used != 0 || need.iter().any(|&nm| nm & m == 0) {
                continue;
            }
            sets[a] = m;
            if self.place(x, order, i + 1, used | m, cands, sets) {
                return true;
            }
        }
        sets[a] = 0;
        false
    }
}
