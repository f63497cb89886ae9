//! Named graph families and lower-bound constructions.
//!
//! Every "choose a vertex" / "choose a node" step fixes the minimum id.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decomp::{base_class_ok, intersect, RootedForestDecomposition as Rfd, Rooting, TreeDecomposition, Variant};
use crate::graph::{classify, find_model, is_forest, Graph};
use crate::oracle::Q;
use crate::{check_guard, invalid, scaled, Error, Result};

pub const FAMILY_LIMIT: usize = 5000;
pub const CEP_VERIFY_LIMIT: usize = 2_000_000;

pub fn path(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for i in 1..n {
        g.add_edge(i - 1, i);
    }
    g
}

pub fn complete(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v);
        }
    }
    g
}

/// K_{s,t}: sides 0..s and s..s+t.
pub fn complete_bipartite(s: usize, t: usize) -> Graph {
    let mut g = Graph::new(s + t);
    for u in 0..s {
        for v in s..s + t {
            g.add_edge(u, v);
        }
    }
    g
}

/// k rungs (2i, 2i+1) joined by the two rails.
pub fn ladder(k: usize) -> Graph {
    let mut g = Graph::new(2 * k);
    for i in 0..k {
        g.add_edge(2 * i, 2 * i + 1);
        if i + 1 < k {
            g.add_edge(2 * i, 2 * i + 2);
            g.add_edge(2 * i + 1, 2 * i + 3);
        }
    }
    g
}

pub fn ternary_tree(k: usize) -> Graph {
    dary_tree(k, 3).0
}

/// Complete d-ary tree of vertex-height h, heap-labelled: the children of
/// node i are i·d+1 ..= i·d+d. Returns the tree and its parent map.
pub fn dary_tree(h: usize, d: usize) -> (Graph, Vec<Option<usize>>) {
    let mut parent: Vec<Option<usize>> = Vec::new();
    if h == 0 {
        return (Graph::new(0), parent);
    }
    parent.push(None);
    let mut level = vec![0usize];
    for _ in 1..h {
        let mut next = Vec::new();
        for &p in &level {
            for j in 0..d {
                let c = p * d + 1 + j;
                debug_assert_eq!(c, parent.len());
                parent.push(Some(p));
                next.push(c);
            }
        }
        level = next;
    }
    let mut g = Graph::new(parent.len());
    for (c, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            g.add_edge(*p, c);
        }
    }
    (g, parent)
}

/// K₁ ⊕ G, the apex gets id n.
pub fn apex(g: &Graph) -> Graph {
    let mut h = g.clone();
    let a = h.add_vertex();
    for v in 0..g.n() {
        h.add_edge(a, v);
    }
    h
}

// ---------------------------------------------------------------------------
// R_t / S_t certificates

fn base_cert(variant: Variant, level: usize) -> Rfd {
    Rfd {
        forest: vec![],
        bags: vec![],
        variant,
        level,
        pieces: vec![],
    }
}

fn single_cert(variant: Variant, level: usize, bag: Vec<usize>) -> Rfd {
    Rfd {
        forest: vec![None],
        bags: vec![bag],
        variant,
        level,
        pieces: vec![None],
    }
}

/// Piece certificate one level down, or None when the validator checks the
/// base class directly.
fn piece(c: Rfd) -> Option<Rfd> {
    (c.level > 2).then_some(c)
}

fn padded(c: &Rfd) -> Vec<Option<Rfd>> {
    if c.pieces.len() == c.forest.len() {
        c.pieces.clone()
    } else {
        vec![None; c.forest.len()]
    }
}

fn check(g: &Graph, c: &Rfd) -> Result<()> {
    c.validate(g)
        .map_err(|v| Error::Invalid(format!("certificate rejected: {}: {}", v.clause, v.detail)))
}

/// Level-2 R structure of a forest: a singleton root bag per component and
/// one node {parent, v} per other vertex.
pub fn forest_certificate(g: &Graph) -> Result<Rfd> {
    if !is_forest(g) {
        return invalid("graph is not a forest");
    }
    let mut c = base_cert(Variant::R, 2);
    let mut node = vec![usize::MAX; g.n()];
    for s in g.vertices() {
        if node[s] != usize::MAX {
            continue;
        }
        node[s] = c.forest.len();
        c.forest.push(None);
        c.bags.push(vec![s]);
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbors(x) {
                if node[y] == usize::MAX {
                    node[y] = c.forest.len();
                    c.forest.push(Some(node[x]));
                    c.bags.push(vec![x.min(y), x.max(y)]);
                    queue.push_back(y);
                }
            }
        }
    }
    c.pieces = vec![None; c.forest.len()];
    Ok(c)
}

/// Certificate one level up (every class sits inside its T-image).
pub fn lift(g: &Graph, c: &Rfd) -> Result<Rfd> {
    let level = c.level + 1;
    if level <= 2 {
        if level == 2 && c.variant == Variant::R {
            return forest_certificate(g);
        }
        return Ok(base_cert(c.variant, level));
    }
    Ok(Rfd {
        forest: vec![None, Some(0)],
        bags: vec![vec![], g.vertices().collect()],
        variant: c.variant,
        level,
        pieces: vec![None, piece(c.clone())],
    })
}

/// Certificate with explicit forest structure (levels where the class is a
/// T-image: R_t for t >= 2, S_t for t >= 3).
pub fn structured(g: &Graph, c: &Rfd) -> Result<Rfd> {
    if c.level >= 3 {
        let mut c = c.clone();
        c.pieces = padded(&c);
        return Ok(c);
    }
    if c.level == 2 && c.variant == Variant::R {
        return forest_certificate(g);
    }
    invalid(format!("level {} of {:?} has no forest structure", c.level, c.variant))
}

pub fn relabel(c: &Rfd, f: &dyn Fn(usize) -> usize) -> Rfd {
    Rfd {
        forest: c.forest.clone(),
        bags: c
            .bags
            .iter()
            .map(|b| {
                let mut b: Vec<usize> = b.iter().map(|&v| f(v)).collect();
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect(),
        variant: c.variant,
        level: c.level,
        pieces: c.pieces.iter().map(|p| p.as_ref().map(|p| relabel(p, f))).collect(),
    }
}

fn append(c: &mut Rfd, other: &Rfd) {
    let off = c.forest.len();
    c.pieces = padded(c);
    let op = padded(other);
    for i in 0..other.forest.len() {
        c.forest.push(other.forest[i].map(|p| p + off));
        c.bags.push(other.bags[i].clone());
        c.pieces.push(op[i].clone());
    }
}

fn first_node_with(c: &Rfd, u: usize) -> Result<usize> {
    c.bags
        .iter()
        .position(|b| b.contains(&u))
        .ok_or_else(|| Error::Invalid(format!("vertex {u} is in no bag")))
}

/// G₀ plus, for every u ∈ V(G₀), `copies` disjoint copies of H fully joined
/// to u; each copy becomes a leaf node {u} ∪ V(H_{u,i}) under the first node
/// holding u.
fn attach_copies(g0: &Graph, c0: &Rfd, h: &Graph, ch: &Rfd, copies: usize) -> Result<(Graph, Rfd)> {
    check(g0, c0)?;
    check(h, ch)?;
    if ch.variant != c0.variant || ch.level + 1 != c0.level {
        return invalid("H must be certified exactly one level below G0");
    }
    let size = g0.n() + g0.n() * copies * h.n();
    check_guard("family vertices", scaled(FAMILY_LIMIT), size)?;
    let mut cert = structured(g0, c0)?;
    let mut g = g0.clone();
    for u in 0..g0.n() {
        let xu = first_node_with(&cert, u)?;
        for _ in 0..copies {
            let off = g.n();
            for _ in 0..h.n() {
                let w = g.add_vertex();
                g.add_edge(u, w);
            }
            for (a, b) in h.edges() {
                g.add_edge(a + off, b + off);
            }
            let mut bag = vec![u];
            bag.extend(off..off + h.n());
            bag.sort_unstable();
            cert.forest.push(Some(xu));
            cert.bags.push(bag);
            cert.pieces.push(piece(relabel(ch, &|v| v + off)));
        }
    }
    Ok((g, cert))
}

/// The tower step: k copies of H hung off every vertex of G₀.
pub fn apply_t_lowerbound(g0: &Graph, c0: &Rfd, h: &Graph, ch: &Rfd, k: usize) -> Result<(Graph, Rfd)> {
    attach_copies(g0, c0, h, ch, k)
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// binom(q+t−1, t−1), the wcol_q lower bound carried by grohe_family(t, q).
pub fn grohe_bound(t: usize, q: usize) -> usize {
    binom(q + t - 1, t - 1)
}

/// Member of R_t with wcol_q >= binom(q+t−1, t−1), built by iterating the
/// tower step with H_j = grohe_family(t−1, j).
pub fn grohe_family(t: usize, q: usize) -> Result<(Graph, Rfd)> {
    if t == 0 {
        return invalid("t must be positive");
    }
    check_guard("grohe t", scaled(3), t)?;
    check_guard("grohe q", scaled(3), q)?;
    grohe_rec(t, q)
}

fn grohe_rec(t: usize, q: usize) -> Result<(Graph, Rfd)> {
    if t == 1 {
        return Ok((Graph::new(1), base_cert(Variant::R, 1)));
    }
    let hs: Vec<(Graph, Rfd)> = (0..=q).map(|i| grohe_rec(t - 1, i)).collect::<Result<_>>()?;
    let mut g = hs[0].0.clone();
    let mut c = lift(&g, &hs[0].1)?;
    let mut k = 0;
    for (j, (h, ch)) in hs.iter().enumerate() {
        k += grohe_bound(t - 1, j);
        if j == 0 {
            continue;
        }
        (g, c) = apply_t_lowerbound(&g, &c, h, ch, k)?;
    }
    Ok((g, c))
}

/// Generator behind the centered-colouring lower bound for R_t:
/// G(1,·) = K₁, G(s,q) = G(s−1,q) and G(s,p) hangs 2^k+1 copies of
/// G(s−1,p) off every vertex of G(s,p+1). Returns G(t,0).
pub fn cen_lowerbound_family(t: usize, q: usize, k: usize) -> Result<(Graph, Rfd)> {
    if t == 0 || q == 0 || k == 0 {
        return invalid("t, q and k must be positive");
    }
    check_guard("cenlb t", scaled(3), t)?;
    check_guard("cenlb q", scaled(3), q)?;
    check_guard("cenlb k", scaled(3), k)?;
    let mut memo = HashMap::new();
    cenlb_rec(t, 0, q, (1 << k) + 1, &mut memo)
}

fn cenlb_rec(s: usize, p: usize, q: usize, copies: usize, memo: &mut HashMap<(usize, usize), (Graph, Rfd)>) -> Result<(Graph, Rfd)> {
    if let Some(r) = memo.get(&(s, p)) {
        return Ok(r.clone());
    }
    let r = if s == 1 {
        (Graph::new(1), base_cert(Variant::R, 1))
    } else if p == q {
        let (g, c) = cenlb_rec(s - 1, q, q, copies, memo)?;
        let c = lift(&g, &c)?;
        (g, c)
    } else {
        let (g0, c0) = cenlb_rec(s, p + 1, q, copies, memo)?;
        let (h, ch) = cenlb_rec(s - 1, p, q, copies, memo)?;
        attach_copies(&g0, &c0, &h, &ch, copies)?
    };
    memo.insert((s, p), r.clone());
    Ok(r)
}

/// The tree-indexed power G_h of G′ with its product weights and the
/// decomposition witnessing G_h ∈ T(class of G′).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrateTower {
    pub graph: Graph,
    #[serde(with = "crate::oracle::rational_vec")]
    pub weights: Vec<Q>,
    /// Vertex-sequence of each vertex (empty for the root r).
    pub tuples: Vec<Vec<usize>>,
    pub decomposition: TreeDecomposition,
}

/// Vertices are tuples over V(G′) of length 0..=h, listed by length then
/// lexicographically. The decomposition has a singleton root bag {r} and a
/// node {x} ∪ children(x) for every x of length < h.
pub fn frate_gh(gp: &Graph, wp: &[Q], h: usize) -> Result<FrateTower> {
    let n = gp.n();
    if wp.len() != n || n == 0 {
        return Err(Error::Precondition("one weight per vertex of a nonnull G′".into()));
    }
    if wp.iter().any(|w| !w.is_positive()) {
        return Err(Error::Precondition("weights must be positive".into()));
    }
    if wp.iter().fold(Q::zero(), |a, w| a + w) != Q::one() {
        return Err(Error::Precondition("weights must sum to 1".into()));
    }
    let mut size: usize = 0;
    let mut layer: usize = 1;
    for _ in 0..=h {
        size = size.saturating_add(layer);
        layer = layer.saturating_mul(n);
    }
    check_guard("G_h vertices", scaled(FAMILY_LIMIT), size)?;
    let mut g = Graph::new(1);
    let mut weights = vec![Q::one()];
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    let mut children: Vec<Vec<usize>> = vec![vec![]];
    let mut level = vec![0usize];
    for _ in 0..h {
        let mut next = Vec::new();
        for &x in &level {
            for (j, wj) in wp.iter().enumerate() {
                let c = g.add_vertex();
                g.add_edge(x, c);
                weights.push(&weights[x] * wj);
                let mut t = tuples[x].clone();
                t.push(j);
                tuples.push(t);
                children.push(vec![]);
                children[x].push(c);
                next.push(c);
            }
            for (a, b) in gp.edges() {
                g.add_edge(children[x][a], children[x][b]);
            }
        }
        level = next;
    }
    let total = weights.iter().fold(Q::zero(), |a, w| a + w);
    if total != Q::from_integer((h + 1).into()) {
        return invalid("total weight differs from h+1");
    }
    // node 0: {r}; node 1+i: the i-th inner vertex with its children
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut bags = vec![vec![0]];
    let mut node_of = vec![usize::MAX; g.n()];
    for x in 0..g.n() {
        if tuples[x].len() >= h {
            continue;
        }
        node_of[x] = bags.len();
        let p = if x == 0 {
            0
        } else {
            let px = g.neighbors(x).iter().copied().find(|&y| tuples[y].len() + 1 == tuples[x].len()).unwrap();
            node_of[px]
        };
        parent.push(Some(p));
        let mut b = vec![x];
        b.extend(children[x].iter().copied());
        b.sort_unstable();
        bags.push(b);
    }
    let mut tree = Graph::new(parent.len());
    for (c, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            tree.add_edge(*p, c);
        }
    }
    Ok(FrateTower {
        graph: g,
        weights,
        tuples,
        decomposition: TreeDecomposition::new(tree, bags, Some(0)),
    })
}

/// H_{k,ℓ} with its distinguished vertices (u, v).
pub fn hkl_family(k: usize, l: usize) -> Result<(Graph, usize, usize)> {
    if k < 2 || l < 2 {
        return Err(Error::Precondition("k, ℓ >= 2".into()));
    }
    let mut size = l;
    for _ in 2..k {
        size = 2 * size + 1;
        check_guard("H_{k,l} vertices", scaled(FAMILY_LIMIT), size)?;
    }
    Ok(hkl_rec(k, l))
}

fn hkl_rec(k: usize, l: usize) -> (Graph, usize, usize) {
    if k == 2 {
        return (path(l), 0, l - 1);
    }
    let (h, u, v) = hkl_rec(k - 1, l);
    let a = apex(&h);
    let m = a.n();
    let mut g = a.clone();
    let mut map = vec![0; m];
    for (x, slot) in map.iter_mut().enumerate() {
        *slot = if x == u { v } else { g.add_vertex() };
    }
    for (x, y) in a.edges() {
        g.add_edge(map[x], map[y]);
    }
    (g, u, map[v])
}

// ---------------------------------------------------------------------------
// coloring elimination property

/// Y such that every covering of V(Y) by k sets has some S_i-rooted model
/// of X, returned with its certificate at the level of X.
pub fn cep_witness(x: &Graph, cert: &Rfd, k: usize) -> Result<(Graph, Rfd)> {
    if k == 0 {
        return invalid("k must be positive");
    }
    check(x, cert)?;
    let n = x.n();
    let variant = cert.variant;
    match (cert.level, variant) {
        (0, _) => Ok((Graph::new(0), base_cert(variant, 0))),
        (1, _) => {
            let m = if n == 0 { 0 } else { k * (n - 1) + 1 };
            check_guard("cep witness vertices", scaled(FAMILY_LIMIT), m)?;
            Ok((Graph::new(m), base_cert(variant, 1)))
        }
        (2, Variant::S) => {
            let m = if n == 0 { 0 } else { k * (n - 1) + 1 };
            check_guard("cep witness vertices", scaled(FAMILY_LIMIT), m)?;
            Ok((path(m), base_cert(variant, 2)))
        }
        _ => {
            let c = structured(x, cert)?;
            let (xs, cs) = normalize(x, &c)?;
            let (y, cy, _) = tclaim(&xs, &cs, k)?;
            Ok((y, cy))
        }
    }
}

/// Single root with a nonempty bag and adhesion exactly one everywhere; a
/// fresh vertex joined to the old root vertices is added when needed (X is
/// then a subgraph of the result).
fn normalize(x: &Graph, c: &Rfd) -> Result<(Graph, Rfd)> {
    let mut g = x.clone();
    let mut c = c.clone();
    c.pieces = padded(&c);
    let roots: Vec<usize> = (0..c.forest.len()).filter(|&i| c.forest[i].is_none()).collect();
    if roots.len() != 1 || c.bags[roots[0]].is_empty() {
        let r = g.add_vertex();
        let new = c.forest.len();
        c.forest.push(None);
        c.bags.push(vec![r]);
        c.pieces.push(None);
        for x in roots {
            c.forest[x] = Some(new);
            let old = c.bags[x].clone();
            for &u in &old {
                g.add_edge(r, u);
            }
            c.pieces[x] = piece(single_cert(c.variant, c.level - 1, old));
            c.bags[x].push(r);
            c.bags[x].sort_unstable();
        }
    }
    let rooting = Rooting::from_parents(&c.forest)?;
    for &a in &rooting.order {
        if let Some(p) = c.forest[a] {
            if intersect(&c.bags[a], &c.bags[p]).is_empty() {
                let w = c.bags[p][0];
                c.bags[a].push(w);
                c.bags[a].sort_unstable();
            }
        }
    }
    Ok((g, c))
}

fn tclaim(x: &Graph, c: &Rfd, k: usize) -> Result<(Graph, Rfd, usize)> {
    let t = c.level;
    let variant = c.variant;
    let rooting = Rooting::from_parents(&c.forest)?;
    let r = rooting.roots[0];
    let u = c.bags[r][0];
    if c.forest.len() == 1 {
        return Ok((Graph::new(1), single_cert(variant, t, vec![0]), 0));
    }
    let nodes = c.forest.len();
    let in_t0: Vec<bool> = (0..nodes).map(|a| c.bags[a].contains(&u)).collect();
    let v0: BTreeSet<usize> = (0..nodes).filter(|&a| in_t0[a]).flat_map(|a| c.bags[a].iter().copied()).collect();

    // X' = K₁ ⊔ (X₀ − u)
    let rest: Vec<usize> = v0.iter().copied().filter(|&v| v != u).collect();
    let mut pos = vec![usize::MAX; x.n()];
    for (i, &v) in rest.iter().enumerate() {
        pos[v] = i + 1;
    }
    let xprime = Graph::new(1).disjoint_union(&x.induced(&rest).0);
    let xcert = if t - 1 <= 2 {
        base_cert(variant, t - 1)
    } else {
        let mut m = single_cert(variant, t - 1, vec![0]);
        for a in 0..nodes {
            if a == r || !in_t0[a] {
                continue;
            }
            let p = c.pieces[a]
                .as_ref()
                .ok_or_else(|| Error::Invalid(format!("node {a} lacks a piece certificate")))?;
            append(&mut m, &relabel(p, &|v| pos[v]));
        }
        m
    };
    let (yp, cyp) = cep_witness(&xprime, &xcert, k)?;
    let mut y0 = Graph::new(1).disjoint_union(&yp);
    for v in 1..y0.n() {
        y0.add_edge(0, v);
    }
    let n0 = y0.n();

    // X₁ = X / V(X₀)
    let mut map1 = vec![0usize; x.n()];
    let mut next = 1;
    for v in x.vertices() {
        if !v0.contains(&v) {
            map1[v] = next;
            next += 1;
        }
    }
    let mut x1 = Graph::new(next);
    for (a, b) in x.edges() {
        if map1[a] != map1[b] {
            x1.add_edge(map1[a], map1[b]);
        }
    }
    let mut idx = vec![usize::MAX; nodes];
    let mut c1 = single_cert(variant, t, vec![0]);
    for a in 0..nodes {
        if !in_t0[a] {
            idx[a] = c1.forest.len();
            c1.forest.push(None);
            c1.bags.push(vec![]);
            c1.pieces.push(None);
        }
    }
    for a in 0..nodes {
        if in_t0[a] {
            continue;
        }
        let p = c.forest[a].expect("non-T0 nodes are not roots");
        c1.forest[idx[a]] = Some(if in_t0[p] { 0 } else { idx[p] });
        let mut b: Vec<usize> = c.bags[a].iter().map(|&v| map1[v]).collect();
        b.sort_unstable();
        b.dedup();
        c1.bags[idx[a]] = b;
        c1.pieces[idx[a]] = c.pieces[a].as_ref().map(|p| relabel(p, &|v| map1[v]));
    }
    let (y1, cy1, u1) = tclaim(&x1, &c1, k)?;

    check_guard("cep witness vertices", scaled(FAMILY_LIMIT), n0 + n0 * (y1.n() - 1))?;
    let mut y = y0.clone();
    let mut cert = Rfd {
        forest: vec![None, Some(0)],
        bags: vec![vec![0], (0..n0).collect()],
        variant,
        level: t,
        pieces: vec![None, piece(relabel(&cyp, &|v| v + 1))],
    };
    let root1 = (0..cy1.forest.len()).find(|&i| cy1.forest[i].is_none()).unwrap();
    let p1 = padded(&cy1);
    for v in 0..n0 {
        let m: Vec<usize> = (0..y1.n()).map(|z| if z == u1 { v } else { y.add_vertex() }).collect();
        for (a, b) in y1.edges() {
            y.add_edge(m[a], m[b]);
        }
        let base = cert.forest.len();
        let mut nid = vec![usize::MAX; cy1.forest.len()];
        let mut cnt = 0;
        for i in 0..cy1.forest.len() {
            if i != root1 {
                nid[i] = base + cnt;
                cnt += 1;
            }
        }
        for i in 0..cy1.forest.len() {
            if i == root1 {
                continue;
            }
            let p = cy1.forest[i].expect("single root");
            cert.forest.push(Some(if p == root1 { 1 } else { nid[p] }));
            let mut b: Vec<usize> = cy1.bags[i].iter().map(|&z| m[z]).collect();
            b.sort_unstable();
            cert.bags.push(b);
            cert.pieces.push(p1[i].as_ref().map(|p| relabel(p, &|z| m[z])));
        }
    }
    Ok((y, cert, 0))
}

/// Exhaustive check over all coverings S₁…S_k of V(Y). Only partitions are
/// enumerated (every covering contains one) and colour names are canonical.
pub fn cep_verify(y: &Graph, x: &Graph, k: usize) -> Result<bool> {
    if k == 0 {
        return invalid("k must be positive");
    }
    if x.n() == 0 {
        return Ok(true);
    }
    let n = y.n();
    if n == 0 {
        return Ok(false);
    }
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    check_guard("cep coverings", scaled(CEP_VERIFY_LIMIT), count.min(usize::MAX as u128) as usize)?;
    let mut memo: HashMap<u64, bool> = HashMap::new();
    let mut rooted = |s: u64| -> Result<bool> {
        if let Some(&b) = memo.get(&s) {
            return Ok(b);
        }
        let set: Vec<usize> = (0..n).filter(|&v| s >> v & 1 == 1).collect();
        let b = set.len() >= x.n() && find_model(y, x, Some(&set))?.is_some();
        memo.insert(s, b);
        Ok(b)
    };
    // restricted growth strings with at most k blocks
    let mut a = vec![0usize; n];
    loop {
        let mut masks = vec![0u64; k];
        for (v, &c) in a.iter().enumerate() {
            masks[c] |= 1 << v;
        }
        let mut ok = false;
        for &m in &masks {
            if m != 0 && rooted(m)? {
                ok = true;
                break;
            }
        }
        if !ok {
            return Ok(false);
        }
        // advance
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(true);
            }
            let mx = a[..i].iter().copied().max().unwrap();
            if a[i] <= mx && a[i] + 1 < k {
                a[i] += 1;
                for z in &mut a[i + 1..] {
                    *z = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

// ---------------------------------------------------------------------------
// class closure

pub fn certify_disjoint_union(g1: &Graph, c1: &Rfd, g2: &Graph, c2: &Rfd) -> Result<(Graph, Rfd)> {
    check(g1, c1)?;
    check(g2, c2)?;
    if c1.variant != c2.variant || c1.level != c2.level {
        return invalid("certificates differ in class");
    }
    let g = g1.disjoint_union(g2);
    if c1.level <= 2 {
        return Ok((g, base_cert(c1.variant, c1.level)));
    }
    let mut c = c1.clone();
    let off = g1.n();
    append(&mut c, &relabel(c2, &|v| v + off));
    Ok((g, c))
}

/// Adds a vertex adjacent to `attach` (or isolated) and re-certifies at the
/// same level; needs R_t with t >= 2 or S_t with t >= 3.
pub fn certify_leaf_addition(g: &Graph, c: &Rfd, attach: Option<usize>) -> Result<(Graph, Rfd)> {
    check(g, c)?;
    let mut h = g.clone();
    let l = h.add_vertex();
    if let Some(u) = attach {
        if u >= g.n() {
            return invalid(format!("vertex {u} not in G"));
        }
        h.add_edge(u, l);
    }
    if c.level == 2 && c.variant == Variant::R {
        return Ok((h, base_cert(Variant::R, 2)));
    }
    if c.level < 3 {
        if !base_class_ok(c.variant, c.level, classify(&h)) {
            return invalid("class is not closed under leaf addition at this level");
        }
        return Ok((h, base_cert(c.variant, c.level)));
    }
    let mut cert = structured(g, c)?;
    match attach {
        Some(u) => {
            let x = first_node_with(&cert, u)?;
            cert.forest.push(Some(x));
            cert.bags.push(vec![u, l]);
            cert.pieces.push(piece(single_cert(c.variant, c.level - 1, vec![l])));
        }
        None => {
            cert.forest.push(None);
            cert.bags.push(vec![l]);
            cert.pieces.push(None);
        }
    }
    Ok((h, cert))
}
