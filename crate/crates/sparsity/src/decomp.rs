use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{
    bfs_layering, classify, components_within, connected_components, is_connected_set, Graph,
    GraphClass, Layering, SubgraphFamily,
};
use crate::{invalid, Result};

/// First violated clause of a certificate, with a concrete counterexample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<usize>,
}

fn viol<T>(clause: &str, detail: impl Into<String>, witness: Vec<usize>) -> std::result::Result<T, Violation> {
    Err(Violation {
        clause: clause.to_string(),
        detail: detail.into(),
        witness,
    })
}

pub type Check = std::result::Result<(), Violation>;

/// Rooted view of a forest: parents, children, depths and a BFS order.
#[derive(Clone, Debug)]
pub struct Rooting {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    pub order: Vec<usize>,
    pub roots: Vec<usize>,
}

impl Rooting {
    /// Roots every component of the forest `tree`; the component holding
    /// `root` is rooted there, every other one at its minimum node.
    pub fn from_tree(tree: &Graph, root: Option<usize>) -> Result<Rooting> {
        if tree.m() + connected_components(tree).len() != tree.n() {
            return invalid("decomposition tree has a cycle");
        }
        let k = tree.n();
        let mut parent = vec![None; k];
        let mut depth = vec![0; k];
        let mut seen = vec![false; k];
        let mut order = Vec::with_capacity(k);
        let mut roots = Vec::new();
        let starts = root.into_iter().filter(|&r| r < k).chain(0..k);
        for s in starts {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            roots.push(s);
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                order.push(x);
                for &y in tree.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        parent[y] = Some(x);
                        depth[y] = depth[x] + 1;
                        q.push_back(y);
                    }
                }
            }
        }
        Ok(Rooting::finish(parent, depth, order, roots))
    }

    pub fn from_parents(parent: &[Option<usize>]) -> Result<Rooting> {
        let k = parent.len();
        let mut children = vec![Vec::new(); k];
        let mut roots = Vec::new();
        for (x, p) in parent.iter().enumerate() {
            match *p {
                Some(p) if p >= k => return invalid(format!("parent of {x} out of range")),
                Some(p) => children[p].push(x),
                None => roots.push(x),
            }
        }
        let mut depth = vec![0; k];
        let mut order = Vec::with_capacity(k);
        let mut q: VecDeque<usize> = roots.iter().copied().collect();
        while let Some(x) = q.pop_front() {
            order.push(x);
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                q.push_back(c);
            }
        }
        if order.len() != k {
            return invalid("parent map contains a cycle");
        }
        Ok(Rooting::finish(parent.to_vec(), depth, order, roots))
    }

    fn finish(parent: Vec<Option<usize>>, depth: Vec<usize>, order: Vec<usize>, roots: Vec<usize>) -> Rooting {
        let mut children = vec![Vec::new(); parent.len()];
        for (x, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(x);
            }
        }
        Rooting {
            parent,
            children,
            depth,
            order,
            roots,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn as_graph(&self) -> Graph {
        let mut t = Graph::new(self.len());
        for (x, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                t.add_edge(x, *p);
            }
        }
        t
    }

    pub fn is_ancestor(&self, a: usize, mut x: usize) -> bool {
        loop {
            if x == a {
                return true;
            }
            match self.parent[x] {
                Some(p) => x = p,
                None => return false,
            }
        }
    }

    /// None when the nodes lie in different trees.
    pub fn lca(&self, mut a: usize, mut b: usize) -> Option<usize> {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a]?;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b]?;
        }
        while a != b {
            a = self.parent[a]?;
            b = self.parent[b]?;
        }
        Some(a)
    }

    pub fn subtree(&self, x: usize) -> Vec<usize> {
        let mut out = vec![x];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub tree: Graph,
    pub bags: Vec<Vec<usize>>,
    #[serde(default)]
    pub root: Option<usize>,
}

impl TreeDecomposition {
    pub fn new(tree: Graph, mut bags: Vec<Vec<usize>>, root: Option<usize>) -> TreeDecomposition {
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        TreeDecomposition { tree, bags, root }
    }

    pub fn trivial(g: &Graph) -> TreeDecomposition {
        TreeDecomposition::new(Graph::new(1), vec![g.vertices().collect()], Some(0))
    }

    pub fn from_path(pd: &PathDecomposition) -> TreeDecomposition {
        let k = pd.bags.len();
        let mut t = Graph::new(k);
        for i in 1..k {
            t.add_edge(i - 1, i);
        }
        TreeDecomposition::new(t, pd.bags.clone(), Some(0))
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn root_node(&self) -> usize {
        self.root.unwrap_or(0)
    }

    pub fn rooting(&self) -> Result<Rooting> {
        Rooting::from_tree(&self.tree, Some(self.root_node()))
    }

    pub fn adhesion(&self) -> usize {
        self.tree
            .edges()
            .iter()
            .map(|&(x, y)| intersect(&self.bags[x], &self.bags[y]).len())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self, g: &Graph) -> Check {
        validate_td_parts(g, &self.tree, &self.bags, None)
    }

    /// Nodes whose bag contains each vertex.
    pub fn occurrences(&self, n: usize) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); n];
        for (x, b) in self.bags.iter().enumerate() {
            for &v in b {
                occ[v].push(x);
            }
        }
        occ
    }
}

pub(crate) fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|v| b.binary_search(v).is_ok()).copied().collect()
}

/// Tree-decomposition clauses over an explicit vertex universe (all of G by default).
fn validate_td_parts(g: &Graph, tree: &Graph, bags: &[Vec<usize>], universe: Option<&[usize]>) -> Check {
    if bags.len() != tree.n() {
        return viol("schema", format!("{} bags for {} tree nodes", bags.len(), tree.n()), vec![]);
    }
    if tree.n() == 0 && g.n() > 0 {
        return viol("coverage", "empty tree for a nonnull graph", vec![]);
    }
    if tree.m() + connected_components(tree).len() != tree.n() {
        return viol("forest", "decomposition tree has a cycle", vec![]);
    }
    let mut occ = vec![Vec::new(); g.n()];
    for (x, b) in bags.iter().enumerate() {
        for &v in b {
            if v >= g.n() {
                return viol("schema", format!("bag {x} holds vertex {v} out of range"), vec![x, v]);
            }
            occ[v].push(x);
        }
    }
    let all: Vec<usize>;
    let universe = match universe {
        Some(u) => u,
        None => {
            all = g.vertices().collect();
            &all
        }
    };
    let mut inside = vec![false; g.n()];
    for &v in universe {
        inside[v] = true;
    }
    for v in 0..g.n() {
        if !occ[v].is_empty() && !inside[v] {
            return viol("schema", format!("vertex {v} is not in the decomposed graph"), vec![v]);
        }
    }
    for &v in universe {
        if occ[v].is_empty() {
            return viol("vertex-coverage", format!("vertex {v} is in no bag"), vec![v]);
        }
        if !is_connected_set(tree, &occ[v]) {
            return viol("connectivity", format!("nodes holding vertex {v} are not connected"), vec![v]);
        }
    }
    for (u, v) in g.edges() {
        if !inside[u] || !inside[v] {
            continue;
        }
        if !occ[u].iter().any(|x| bags[*x].binary_search(&v).is_ok()) {
            return viol("edge-coverage", format!("edge {u}-{v} is in no bag"), vec![u, v]);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecomposition {
    pub bags: Vec<Vec<usize>>,
}

impl PathDecomposition {
    pub fn new(mut bags: Vec<Vec<usize>>) -> PathDecomposition {
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        PathDecomposition { bags }
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn validate(&self, g: &Graph) -> Check {
        let td = TreeDecomposition::from_path(self);
        match td.validate(g) {
            Err(v) if v.clause == "connectivity" => viol("interval", v.detail, v.witness),
            r => r,
        }
    }
}

/// Tree partition of (G, S); `tree` is a parent map over the part indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePartition {
    pub tree: Vec<Option<usize>>,
    pub parts: Vec<Vec<usize>>,
    pub focus: Vec<usize>,
}

impl TreePartition {
    /// Path-shaped partition P_0 - P_1 - ... rooted at P_0.
    pub fn path(parts: Vec<Vec<usize>>) -> TreePartition {
        let tree = (0..parts.len()).map(|i| i.checked_sub(1)).collect();
        TreePartition::new(tree, parts)
    }

    pub fn new(tree: Vec<Option<usize>>, mut parts: Vec<Vec<usize>>) -> TreePartition {
        for p in &mut parts {
            p.sort_unstable();
        }
        let mut focus: Vec<usize> = parts.iter().flatten().copied().collect();
        focus.sort_unstable();
        TreePartition { tree, parts, focus }
    }

    pub fn is_path(&self) -> bool {
        self.tree
            .iter()
            .enumerate()
            .all(|(i, p)| *p == i.checked_sub(1))
    }

    pub fn validate(&self, g: &Graph) -> Check {
        let k = self.parts.len();
        if self.tree.len() != k {
            return viol("schema", "tree and parts differ in length", vec![]);
        }
        let rooting = match Rooting::from_parents(&self.tree) {
            Ok(r) => r,
            Err(e) => return viol("schema", e.to_string(), vec![]),
        };
        if rooting.roots.len() > 1 {
            return viol("tree", "partition tree is not connected", rooting.roots.clone());
        }
        let mut part_of = vec![usize::MAX; g.n()];
        for (x, p) in self.parts.iter().enumerate() {
            if p.is_empty() {
                return viol("nonempty", format!("part {x} is empty"), vec![x]);
            }
            for &v in p {
                if v >= g.n() {
                    return viol("schema", format!("vertex {v} out of range"), vec![v]);
                }
                if part_of[v] != usize::MAX {
                    return viol("partition", format!("vertex {v} in two parts"), vec![v]);
                }
                part_of[v] = x;
            }
        }
        let mut focus = self.focus.clone();
        focus.sort_unstable();
        focus.dedup();
        let covered: Vec<usize> = (0..g.n()).filter(|&v| part_of[v] != usize::MAX).collect();
        if covered != focus {
            return viol("partition", "parts do not partition the focus set", vec![]);
        }
        let adjacent = |a: usize, b: usize| a == b || self.tree[a] == Some(b) || self.tree[b] == Some(a);
        for (u, v) in g.edges() {
            let (a, b) = (part_of[u], part_of[v]);
            if a != usize::MAX && b != usize::MAX && !adjacent(a, b) {
                return viol("edges", format!("edge {u}-{v} joins non-adjacent parts {a},{b}"), vec![u, v]);
            }
        }
        let outside: Vec<bool> = part_of.iter().map(|&p| p == usize::MAX).collect();
        for c in components_within(g, &outside) {
            let mut touched = BTreeSet::new();
            for &v in &c {
                for &w in g.neighbors(v) {
                    if part_of[w] != usize::MAX {
                        touched.insert(part_of[w]);
                    }
                }
            }
            let t: Vec<usize> = touched.into_iter().collect();
            let ok = match t.len() {
                0 | 1 => true,
                2 => adjacent(t[0], t[1]),
                _ => false,
            };
            if !ok {
                return viol(
                    "component-neighbourhood",
                    format!("component containing {} touches parts {t:?}", c[0]),
                    vec![c[0]],
                );
            }
        }
        Ok(())
    }

    /// U_x: union of the parts in the subtree of x.
    pub fn subtree_union(&self, x: usize) -> Result<Vec<usize>> {
        let r = Rooting::from_parents(&self.tree)?;
        let mut u: Vec<usize> = r.subtree(x).iter().flat_map(|&y| self.parts[y].clone()).collect();
        u.sort_unstable();
        Ok(u)
    }

    /// Vertex set of G_x: U_x plus the components of G - S touching U_x.
    pub fn gx_vertices(&self, g: &Graph, x: usize) -> Result<Vec<usize>> {
        let ux = self.subtree_union(x)?;
        let mut in_s = vec![false; g.n()];
        for &v in &self.focus {
            in_s[v] = true;
        }
        let mut keep = vec![false; g.n()];
        for &v in &ux {
            keep[v] = true;
        }
        let outside: Vec<bool> = in_s.iter().map(|b| !b).collect();
        for c in components_within(g, &outside) {
            if c.iter().any(|&v| g.neighbors(v).iter().any(|&w| keep[w] && in_s[w])) {
                for v in c {
                    keep[v] = true;
                }
            }
        }
        Ok((0..g.n()).filter(|&v| keep[v]).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    R,
    S,
}

/// Certificate of membership in R_t / S_t: a rooted forest decomposition of
/// adhesion <= 1 whose non-root pieces are certified one level down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedForestDecomposition {
    pub forest: Vec<Option<usize>>,
    pub bags: Vec<Vec<usize>>,
    pub variant: Variant,
    pub level: usize,
    #[serde(default)]
    pub pieces: Vec<Option<RootedForestDecomposition>>,
}

pub fn base_class_ok(variant: Variant, level: usize, c: GraphClass) -> bool {
    use GraphClass::*;
    match level {
        0 => c == Null,
        1 => matches!(c, Null | Edgeless),
        _ => match variant {
            Variant::R => matches!(c, Null | Edgeless | LinearForest | Forest),
            Variant::S => matches!(c, Null | Edgeless | LinearForest),
        },
    }
}

impl RootedForestDecomposition {
    pub fn validate(&self, g: &Graph) -> Check {
        let all: Vec<usize> = g.vertices().collect();
        self.validate_on(g, &all)
    }

    /// Validate as a certificate for G[universe].
    pub fn validate_on(&self, g: &Graph, universe: &[usize]) -> Check {
        let (sub, map) = g.induced(universe);
        if self.level <= 2 {
            let c = classify(&sub);
            if base_class_ok(self.variant, self.level, c) {
                return Ok(());
            }
            return viol("base-class", format!("graph is {c:?}, not in level {}", self.level), vec![]);
        }
        let k = self.forest.len();
        if self.bags.len() != k || (!self.pieces.is_empty() && self.pieces.len() != k) {
            return viol("schema", "forest, bags and pieces differ in length", vec![]);
        }
        let rooting = match Rooting::from_parents(&self.forest) {
            Ok(r) => r,
            Err(e) => return viol("schema", e.to_string(), vec![]),
        };
        let mut pos = vec![usize::MAX; g.n()];
        for (i, &v) in map.iter().enumerate() {
            pos[v] = i;
        }
        let mut local = Vec::with_capacity(k);
        for (x, b) in self.bags.iter().enumerate() {
            let mut lb = Vec::new();
            for &v in b {
                if v >= g.n() || pos[v] == usize::MAX {
                    return viol("schema", format!("bag {x} holds foreign vertex {v}"), vec![x, v]);
                }
                lb.push(pos[v]);
            }
            lb.sort_unstable();
            local.push(lb);
        }
        validate_td_parts(&sub, &rooting.as_graph(), &local, None).map_err(|mut v| {
            v.detail = format!("{} (local ids)", v.detail);
            v
        })?;
        for x in 0..k {
            match self.forest[x] {
                None => {
                    if self.bags[x].len() > 1 {
                        return viol("root-bag", format!("root {x} has {} vertices", self.bags[x].len()), vec![x]);
                    }
                }
                Some(p) => {
                    let mut sb = self.bags[x].clone();
                    sb.sort_unstable();
                    let mut pb = self.bags[p].clone();
                    pb.sort_unstable();
                    if intersect(&sb, &pb).len() > 1 {
                        return viol("adhesion", format!("nodes {x},{p} share more than one vertex"), vec![x, p]);
                    }
                    let piece: Vec<usize> = sb.iter().filter(|v| pb.binary_search(v).is_err()).copied().collect();
                    let inner = self.pieces.get(x).and_then(|p| p.as_ref());
                    let ok = match inner {
                        Some(cert) => {
                            if cert.variant != self.variant || cert.level + 1 != self.level {
                                return viol("piece", format!("piece certificate at node {x} has the wrong level"), vec![x]);
                            }
                            cert.validate_on(g, &piece).map_err(|mut v| {
                                v.clause = format!("piece[{x}].{}", v.clause);
                                v
                            })?;
                            true
                        }
                        None => {
                            let (h, _) = g.induced(&piece);
                            self.level - 1 <= 2 && base_class_ok(self.variant, self.level - 1, classify(&h))
                        }
                    };
                    if !ok {
                        return viol("piece", format!("piece at node {x} is not certified at level {}", self.level - 1), vec![x]);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Layered RS-decomposition; D and L are over original vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredRSDecomposition {
    #[serde(rename = "T")]
    pub t: Graph,
    #[serde(rename = "W")]
    pub w: Vec<Vec<usize>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<usize>>,
    #[serde(rename = "D")]
    pub d: Vec<TreeDecomposition>,
    #[serde(rename = "L")]
    pub l: Vec<Layering>,
    pub c: usize,
}

impl LayeredRSDecomposition {
    pub fn outer(&self) -> TreeDecomposition {
        TreeDecomposition::new(self.t.clone(), self.w.clone(), Some(0))
    }

    pub fn validate(&self, g: &Graph) -> Check {
        let k = self.t.n();
        if self.w.len() != k || self.a.len() != k || self.d.len() != k || self.l.len() != k {
            return viol("schema", "per-node lists differ in length", vec![]);
        }
        let outer = self.outer();
        outer.validate(g).map_err(|mut v| {
            v.clause = format!("lrs1.{}", v.clause);
            v
        })?;
        for (x, y) in self.t.edges() {
            if intersect(&outer.bags[x], &outer.bags[y]).len() > self.c {
                return viol("lrs1", format!("adhesion between {x} and {y} exceeds {}", self.c), vec![x, y]);
            }
        }
        for x in 0..k {
            let mut ax = self.a[x].clone();
            ax.sort_unstable();
            if ax.len() > self.c || ax.iter().any(|v| outer.bags[x].binary_search(v).is_err()) {
                return viol("lrs2", format!("apex set of node {x} too large or outside its bag"), vec![x]);
            }
            let (tor, map) = torso(g, &outer, x);
            let keep: Vec<usize> = (0..map.len()).filter(|&i| ax.binary_search(&map[i]).is_err()).collect();
            let (h, hmap) = tor.induced(&keep);
            let orig: Vec<usize> = hmap.iter().map(|&i| map[i]).collect();
            let mut pos = BTreeMap::new();
            for (i, &v) in orig.iter().enumerate() {
                pos.insert(v, i);
            }
            let relabel = |set: &[usize]| -> Option<Vec<usize>> {
                let mut out: Vec<usize> = set.iter().map(|v| pos.get(v).copied()).collect::<Option<_>>()?;
                out.sort_unstable();
                Some(out)
            };
            let dx = &self.d[x];
            let mut dbags = Vec::new();
            for b in &dx.bags {
                match relabel(b) {
                    Some(lb) => dbags.push(lb),
                    None => return viol("lrs3", format!("D_{x} mentions a vertex outside torso - A"), vec![x]),
                }
            }
            validate_td_parts(&h, &dx.tree, &dbags, None).map_err(|v| Violation {
                clause: "lrs3".into(),
                detail: format!("node {x}: {} {}", v.clause, v.detail),
                witness: vec![x],
            })?;
            let mut layers = Vec::new();
            for l in &self.l[x].layers {
                match relabel(l) {
                    Some(ll) => layers.push(ll),
                    None => return viol("lrs4", format!("L_{x} mentions a vertex outside torso - A"), vec![x]),
                }
            }
            if let Err(e) = (Layering { layers }).validate(&h) {
                return viol("lrs4", format!("node {x}: {e}"), vec![x]);
            }
            for (z, b) in dx.bags.iter().enumerate() {
                for (i, l) in self.l[x].layers.iter().enumerate() {
                    let cnt = b.iter().filter(|v| l.contains(v)).count();
                    if cnt > self.c {
                        return viol("lrs5", format!("|D_{{{x},{z}}} ∩ L_{{{x},{i}}}| = {cnt} > {}", self.c), vec![x, z, i]);
                    }
                }
            }
        }
        Ok(())
    }
}

/// All certificate kinds share one JSON envelope tagged by "kind".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    TreeDecomposition(TreeDecomposition),
    PathDecomposition(PathDecomposition),
    TreePartition(TreePartition),
    RootedForestDecomposition(RootedForestDecomposition),
    LayeredRsDecomposition(LayeredRSDecomposition),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

pub fn validate(cert: &Certificate, g: &Graph) -> Report {
    let (kind, res, width) = match cert {
        Certificate::TreeDecomposition(c) => ("tree_decomposition", c.validate(g), Some(c.width())),
        Certificate::PathDecomposition(c) => ("path_decomposition", c.validate(g), Some(c.width())),
        Certificate::TreePartition(c) => ("tree_partition", c.validate(g), None),
        Certificate::RootedForestDecomposition(c) => ("rooted_forest_decomposition", c.validate(g), None),
        Certificate::LayeredRsDecomposition(c) => ("layered_rs_decomposition", c.validate(g), None),
    };
    Report {
        kind: kind.to_string(),
        valid: res.is_ok(),
        width: if res.is_ok() { width } else { None },
        violation: res.err(),
    }
}

/// Root-down BFS over the nodes (ties by id); each node contributes its new
/// vertices in increasing order.
pub fn elimination_ordering(td: &TreeDecomposition, n: usize) -> Result<Vec<usize>> {
    let r = td.rooting()?;
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(n);
    // BFS with sorted children keeps ties by node id
    let mut q: VecDeque<usize> = r.roots.iter().copied().collect();
    while let Some(x) = q.pop_front() {
        for &v in &td.bags[x] {
            if !seen[v] {
                seen[v] = true;
                out.push(v);
            }
        }
        let mut ch = r.children[x].clone();
        ch.sort_unstable();
        q.extend(ch);
    }
    if out.len() != n {
        return invalid("decomposition misses vertices");
    }
    Ok(out)
}

/// Definition-level check of an elimination ordering of a tree decomposition.
pub fn is_elimination_ordering(td: &TreeDecomposition, n: usize, order: &[usize]) -> bool {
    if order.len() != n {
        return false;
    }
    let mut idx = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || idx[v] != usize::MAX {
            return false;
        }
        idx[v] = i;
    }
    let occ = td.occurrences(n);
    order.iter().enumerate().all(|(i, &u)| {
        let mut earlier: Vec<usize> = occ[u]
            .iter()
            .flat_map(|&x| td.bags[x].iter().copied())
            .filter(|&w| idx[w] < i)
            .collect();
        earlier.sort_unstable();
        earlier.dedup();
        td.bags.iter().any(|b| earlier.iter().all(|w| b.binary_search(w).is_ok()))
    })
}

/// Natural: every side of every tree edge induces a connected subgraph.
pub fn check_natural(g: &Graph, td: &TreeDecomposition) -> Check {
    for (x, y) in td.tree.edges() {
        for (a, b) in [(x, y), (y, x)] {
            let side = side_union(td, a, b);
            if side.is_empty() || !is_connected_set(g, &side) {
                return viol("natural", format!("side {a}|{b} is not connected"), vec![a, b]);
            }
        }
    }
    Ok(())
}

fn side_nodes(tree: &Graph, a: usize, b: usize) -> Vec<usize> {
    let mut seen = vec![false; tree.n()];
    seen[a] = true;
    seen[b] = true;
    let mut out = vec![a];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        i += 1;
        for &y in tree.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                out.push(y);
            }
        }
    }
    out.sort_unstable();
    out
}

fn side_union(td: &TreeDecomposition, a: usize, b: usize) -> Vec<usize> {
    let mut u: Vec<usize> = side_nodes(&td.tree, a, b)
        .iter()
        .flat_map(|&x| td.bags[x].iter().copied())
        .collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Output of refine_natural: the natural decomposition V, its subtree
/// partition Q (node lists), f: node of V -> node of U, g: Q index -> P index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub decomposition: TreeDecomposition,
    pub parts: Vec<Vec<usize>>,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

pub fn make_natural(g: &Graph, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    let p: Vec<Vec<usize>> = (0..td.tree.n()).map(|x| vec![x]).collect();
    Ok(refine_natural(g, td, &p)?.decomposition)
}

/// Split offending sides into per-component copies until natural.
pub fn refine_natural(g: &Graph, td: &TreeDecomposition, p: &[Vec<usize>]) -> Result<Refinement> {
    if g.n() == 0 || !g.is_connected() {
        return invalid("make_natural needs a connected nonnull graph");
    }
    if let Err(v) = td.validate(g) {
        return invalid(format!("input decomposition invalid: {} {}", v.clause, v.detail));
    }
    let k = td.tree.n();
    let mut qid = vec![usize::MAX; k];
    for (i, part) in p.iter().enumerate() {
        for &x in part {
            if x >= k || qid[x] != usize::MAX {
                return invalid("P is not a partition of the tree nodes");
            }
            qid[x] = i;
        }
        if part.is_empty() || !is_connected_set(&td.tree, part) {
            return invalid("P member is not a nonempty subtree");
        }
    }
    if qid.contains(&usize::MAX) {
        return invalid("P does not cover the tree nodes");
    }
    let mut tree = td.tree.clone();
    // join stray forest components so the tree is a tree
    let comps = connected_components(&tree);
    for c in comps.iter().skip(1) {
        tree.add_edge(comps[0][0], c[0]);
    }
    let mut bags = td.bags.clone();
    let mut f: Vec<usize> = (0..k).collect();
    let mut gmap: Vec<usize> = (0..p.len()).collect();
    let mut root_orig = td.root_node();
    loop {
        let cur = TreeDecomposition::new(tree.clone(), bags.clone(), None);
        let mut found = None;
        'search: for (x, y) in tree.edges() {
            for (a, b) in [(x, y), (y, x)] {
                let side = side_union(&cur, a, b);
                if side.is_empty() || !is_connected_set(g, &side) {
                    found = Some((a, b));
                    break 'search;
                }
            }
        }
        let Some((x, y)) = found else { break };
        let xs = side_nodes(&tree, x, y);
        let mut on_x = vec![false; tree.n()];
        for &s in &xs {
            on_x[s] = true;
        }
        let side = side_union(&cur, x, y);
        let mut allowed = vec![false; g.n()];
        for &v in &side {
            allowed[v] = true;
        }
        let comps = components_within(g, &allowed);
        // new node list: y-side first (original order), then copies per component
        let mut new_id = vec![usize::MAX; tree.n()];
        let mut nb: Vec<Vec<usize>> = Vec::new();
        let mut nf = Vec::new();
        let mut nq = Vec::new();
        for s in 0..tree.n() {
            if !on_x[s] {
                new_id[s] = nb.len();
                nb.push(bags[s].clone());
                nf.push(f[s]);
                nq.push(qid[s]);
            }
        }
        let y_q: BTreeSet<usize> = (0..tree.n()).filter(|&s| !on_x[s]).map(|s| qid[s]).collect();
        let mut edges: Vec<(usize, usize)> = tree
            .edges()
            .into_iter()
            .filter(|&(a, b)| !on_x[a] && !on_x[b])
            .map(|(a, b)| (new_id[a], new_id[b]))
            .collect();
        let mut fresh_q: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next_q = gmap.len();
        let mut new_g = gmap.clone();
        for (ci, c) in comps.iter().enumerate() {
            let mut copy = vec![usize::MAX; tree.n()];
            for &s in &xs {
                copy[s] = nb.len();
                nb.push(intersect(&bags[s], c));
                nf.push(f[s]);
                let q = qid[s];
                if y_q.contains(&q) {
                    nq.push(q);
                } else {
                    let id = *fresh_q.entry((q, ci)).or_insert_with(|| {
                        new_g.push(gmap[q]);
                        next_q += 1;
                        next_q - 1
                    });
                    nq.push(id);
                }
            }
            for (a, b) in tree.edges() {
                if on_x[a] && on_x[b] {
                    edges.push((copy[a], copy[b]));
                }
            }
            edges.push((copy[x], new_id[y]));
        }
        let mut t = Graph::new(nb.len());
        for (a, b) in edges {
            t.add_edge(a, b);
        }
        if on_x[root_orig.min(tree.n() - 1)] {
            root_orig = new_id[y];
        } else {
            root_orig = new_id[root_orig];
        }
        tree = t;
        bags = nb;
        f = nf;
        qid = nq;
        gmap = new_g;
    }
    // compact Q ids
    let used: BTreeSet<usize> = qid.iter().copied().collect();
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut parts = vec![Vec::new(); used.len()];
    for (s, &q) in qid.iter().enumerate() {
        parts[remap[&q]].push(s);
    }
    let g_out = used.iter().map(|&q| gmap[q]).collect();
    Ok(Refinement {
        decomposition: TreeDecomposition::new(tree, bags, Some(root_orig)),
        parts,
        f,
        g: g_out,
    })
}

pub fn lca_closure(r: &Rooting, y: &[usize]) -> Result<Vec<usize>> {
    if y.is_empty() {
        return invalid("lca_closure needs a nonempty node set");
    }
    if let Some(&bad) = y.iter().find(|&&v| v >= r.len()) {
        return invalid(format!("node {bad} outside the tree"));
    }
    let mut out = BTreeSet::new();
    for (i, &a) in y.iter().enumerate() {
        for &b in &y[i..] {
            match r.lca(a, b) {
                Some(l) => {
                    out.insert(l);
                }
                None => return invalid("nodes lie in different trees"),
            }
        }
    }
    Ok(out.into_iter().collect())
}

pub fn small_interfaces(g: &Graph, td: &TreeDecomposition, x: &[usize]) -> Result<Vec<usize>> {
    if let Err(v) = td.validate(g) {
        return invalid(format!("{}: {}", v.clause, v.detail));
    }
    let r = td.rooting()?;
    let closure = lca_closure(&r, x)?;
    let mut z: Vec<usize> = closure.iter().flat_map(|&x| td.bags[x].iter().copied()).collect();
    z.sort_unstable();
    z.dedup();
    Ok(z)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HellyOutcome {
    Packing(Vec<Vec<usize>>),
    Cover(Vec<usize>),
}

/// Anything that can report a member lying entirely inside `allowed`.
pub trait MemberOracle {
    fn find_within(&self, allowed: &[bool]) -> Option<Vec<usize>>;
}

impl MemberOracle for SubgraphFamily {
    fn find_within(&self, allowed: &[bool]) -> Option<Vec<usize>> {
        self.members.iter().find(|m| m.iter().all(|&v| allowed[v])).cloned()
    }
}

pub fn helly_pack_or_cover(g: &Graph, td: &TreeDecomposition, f: &SubgraphFamily, d: usize) -> Result<HellyOutcome> {
    f.validate(g)?;
    if let Err(v) = td.validate(g) {
        return invalid(format!("{}: {}", v.clause, v.detail));
    }
    helly_with(g, td, f, d)
}

/// Deepest-first sweep; returns a packing of d+1 members or a cover of <= d nodes.
pub fn helly_with(g: &Graph, td: &TreeDecomposition, f: &dyn MemberOracle, d: usize) -> Result<HellyOutcome> {
    let r = td.rooting()?;
    let mut nodes: Vec<usize> = (0..td.tree.n()).collect();
    nodes.sort_by_key(|&x| (std::cmp::Reverse(r.depth[x]), x));
    let mut in_z = vec![false; g.n()];
    let mut cover = Vec::new();
    let mut packing = Vec::new();
    for x in nodes {
        let mut allowed = vec![false; g.n()];
        for s in r.subtree(x) {
            for &v in &td.bags[s] {
                allowed[v] = !in_z[v];
            }
        }
        if let Some(m) = f.find_within(&allowed) {
            cover.push(x);
            for &v in &td.bags[x] {
                in_z[v] = true;
            }
            packing.push(m);
            if packing.len() > d {
                return Ok(HellyOutcome::Packing(packing));
            }
        }
    }
    cover.sort_unstable();
    Ok(HellyOutcome::Cover(cover))
}

/// Torso of bag x, on local ids 0..|W_x| (sorted), with the map back.
pub fn torso(g: &Graph, td: &TreeDecomposition, x: usize) -> (Graph, Vec<usize>) {
    let bag = td.bags[x].clone();
    let (mut h, map) = g.induced(&bag);
    for &y in td.tree.neighbors(x) {
        let adh: Vec<usize> = intersect(&bag, &td.bags[y])
            .iter()
            .map(|v| bag.binary_search(v).unwrap())
            .collect();
        for (i, &a) in adh.iter().enumerate() {
            for &b in &adh[i + 1..] {
                h.add_edge(a, b);
            }
        }
    }
    (h, map)
}

pub fn torso_connectivity_check(g: &Graph, td: &TreeDecomposition, x: usize, h: &[usize]) -> bool {
    let (t, map) = torso(g, td, x);
    let local: Vec<usize> = (0..map.len()).filter(|&i| h.contains(&map[i])).collect();
    !local.is_empty() && is_connected_set(&t, &local)
}

/// Q(Y) = Q(LCA(T,Y)) given X ⊆ Y, LCA(X) = X and Q(X) = Q(Y).
pub fn lca_stuff_check(r: &Rooting, q: &[Vec<usize>], x: &[usize], y: &[usize]) -> Result<bool> {
    let mut part = vec![usize::MAX; r.len()];
    for (i, p) in q.iter().enumerate() {
        for &v in p {
            part[v] = i;
        }
    }
    if part.contains(&usize::MAX) {
        return Err(crate::Error::Precondition("Q does not partition the nodes".into()));
    }
    let qset = |s: &[usize]| -> BTreeSet<usize> { s.iter().map(|&v| part[v]).collect() };
    let mut xs = x.to_vec();
    xs.sort_unstable();
    xs.dedup();
    if !xs.iter().all(|v| y.contains(v)) || lca_closure(r, &xs)? != xs || qset(&xs) != qset(y) {
        return Err(crate::Error::Precondition("X ⊆ Y, LCA(X)=X, Q(X)=Q(Y) required".into()));
    }
    Ok(qset(y) == qset(&lca_closure(r, y)?))
}

/// Single-node layered RS-decomposition built from a tree decomposition of G
/// and a BFS layering of each component.
pub fn single_node_lrs(g: &Graph, apices: &[usize], d: TreeDecomposition) -> Result<LayeredRSDecomposition> {
    let mut keep = vec![true; g.n()];
    for &a in apices {
        keep[a] = false;
    }
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for c in components_within(g, &keep) {
        let (h, map) = g.induced(&c);
        let l = bfs_layering(&h, 0)?;
        for (i, layer) in l.layers.iter().enumerate() {
            if layers.len() <= i {
                layers.push(Vec::new());
            }
            layers[i].extend(layer.iter().map(|&v| map[v]));
        }
    }
    for l in &mut layers {
        l.sort_unstable();
    }
    let layering = Layering { layers };
    let mut c = apices.len();
    for b in &d.bags {
        for l in &layering.layers {
            c = c.max(intersect(b, l).len());
        }
    }
    let mut a = apices.to_vec();
    a.sort_unstable();
    let lrs = LayeredRSDecomposition {
        t: Graph::new(1),
        w: vec![g.vertices().collect()],
        a: vec![a],
        d: vec![d],
        l: vec![layering],
        c: c.max(1),
    };
    Ok(lrs)
}
