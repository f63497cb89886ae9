//! Constructive procedures returning a witness together with the bound it
//! claims. Nothing here is trusted: the oracle module re-evaluates.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::{
    check_natural, helly_with, intersect, lca_closure, refine_natural, torso, HellyOutcome,
    LayeredRSDecomposition, MemberOracle, PathDecomposition, Rooting, TreeDecomposition,
    TreePartition,
};
use crate::families::dary_tree;
use crate::graph::{
    components_within, connected_components, find_frich_model, is_forest, validate_model, Graph,
    MinorModel, SubgraphFamily,
};
use crate::oracle::{cen_focused_check, rat, wcol_eval, Coloring, FragilityWitness, VertexOrdering, Q};
use crate::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Ordering(VertexOrdering),
    Coloring(Coloring),
    Fragility(FragilityWitness),
    /// Priority order for the greedy focused elimination (see `ftd_replay`).
    Elimination { order: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessedBound {
    pub parameter: String,
    pub q: usize,
    pub bound: usize,
    pub witness: Witness,
    pub provenance: String,
}

impl WitnessedBound {
    fn new(parameter: &str, q: usize, bound: usize, witness: Witness, provenance: &str) -> WitnessedBound {
        WitnessedBound {
            parameter: parameter.into(),
            q,
            bound,
            witness,
            provenance: provenance.into(),
        }
    }

    pub fn ordering(&self) -> Option<&[usize]> {
        match &self.witness {
            Witness::Ordering(o) => Some(&o.sequence),
            _ => None,
        }
    }
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn check_q(q: usize) -> Result<()> {
    if q == 0 {
        return invalid("q must be positive");
    }
    Ok(())
}

fn is_permutation_of(seq: &[usize], set: &[usize]) -> bool {
    let mut a = seq.to_vec();
    a.sort_unstable();
    let mut b = set.to_vec();
    b.sort_unstable();
    b.dedup();
    a == b
}

fn local_sequence(map: &[usize], n: usize, seq: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in map.iter().enumerate() {
        pos[v] = i;
    }
    seq.iter().map(|&v| pos[v]).filter(|&p| p != usize::MAX).collect()
}

// ---------------------------------------------------------------------------
// weak colouring orderings

/// BFS from the minimum vertex of every component; ancestors come first.
pub fn tree_ordering(t: &Graph, q: usize) -> Result<WitnessedBound> {
    check_q(q)?;
    if !is_forest(t) {
        return invalid("tree_ordering needs a forest");
    }
    let mut seen = vec![false; t.n()];
    let mut seq = Vec::with_capacity(t.n());
    for s in t.vertices() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut dq = VecDeque::from([s]);
        while let Some(v) = dq.pop_front() {
            seq.push(v);
            for &w in t.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    dq.push_back(w);
                }
            }
        }
    }
    Ok(WitnessedBound::new(
        "wcol",
        q,
        q + 1,
        Witness::Ordering(VertexOrdering { sequence: seq }),
        "wcol-trees",
    ))
}

/// Indices 0..k of a path in dyadic order: position i (1-based) sits on
/// level min(s, v2(i)); levels s down to 0, path order within a level.
pub fn dyadic_order(k: usize, q: usize) -> Vec<usize> {
    let s = ceil_log2(q.max(1));
    let level = |i: usize| (i.trailing_zeros() as usize).min(s);
    let mut out = Vec::with_capacity(k);
    for l in (0..=s).rev() {
        out.extend((0..k).filter(|&v| level(v + 1) == l));
    }
    out
}

/// Ordering of the path 0-1-…-(n−1).
pub fn dyadic_path_ordering(n: usize, q: usize) -> Result<WitnessedBound> {
    check_q(q)?;
    if n == 0 {
        return invalid("path needs at least one vertex");
    }
    Ok(WitnessedBound::new(
        "wcol",
        q,
        2 + ceil_log2(q),
        Witness::Ordering(VertexOrdering {
            sequence: dyadic_order(n, q),
        }),
        "wcol_paths",
    ))
}

pub fn path_graph(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for v in 1..n {
        g.add_edge(v - 1, v);
    }
    g
}

fn validate_tp(g: &Graph, tp: &TreePartition) -> Result<Rooting> {
    if let Err(v) = tp.validate(g) {
        return invalid(format!("tree partition: {} {}", v.clause, v.detail));
    }
    Rooting::from_parents(&tp.tree)
}

/// Parts concatenated root-first; bound (q+1)·max_x wcol(G_x, P_x, σ_x).
pub fn tree_partition_wcol_combiner(
    g: &Graph,
    tp: &TreePartition,
    orders: &[Vec<usize>],
    q: usize,
) -> Result<WitnessedBound> {
    check_q(q)?;
    let r = validate_tp(g, tp)?;
    if orders.len() != tp.parts.len() {
        return invalid("one ordering per part expected");
    }
    let mut worst = 0;
    for (x, sx) in orders.iter().enumerate() {
        if !is_permutation_of(sx, &tp.parts[x]) {
            return invalid(format!("ordering {x} does not enumerate its part"));
        }
        let gx = tp.gx_vertices(g, x)?;
        let (h, map) = g.induced(&gx);
        worst = worst.max(wcol_eval(&h, &local_sequence(&map, g.n(), sx), q));
    }
    let seq: Vec<usize> = r.order.iter().flat_map(|&x| orders[x].iter().copied()).collect();
    Ok(WitnessedBound::new(
        "wcol_focused",
        q,
        (q + 1) * worst,
        Witness::Ordering(VertexOrdering { sequence: seq }),
        "wcol_combining_tree_partitions",
    ))
}

/// Product colouring ψ(u) = (ψ_x(u), depth(x) mod (q+1)); `psis[x][i]` is
/// the colour of `tp.parts[x][i]`. Colours are renumbered densely; entries
/// outside S are 0.
pub fn tree_partition_cen_combiner(
    g: &Graph,
    phi: &Coloring,
    tp: &TreePartition,
    psis: &[Vec<usize>],
    q: usize,
) -> Result<WitnessedBound> {
    check_q(q)?;
    let r = validate_tp(g, tp)?;
    if psis.len() != tp.parts.len() || phi.assignment.len() != g.n() {
        return invalid("one colouring per part and φ on every vertex expected");
    }
    let mut k = 0;
    for (x, px) in psis.iter().enumerate() {
        if px.len() != tp.parts[x].len() {
            return invalid(format!("colouring {x} does not match its part"));
        }
        let gx = tp.gx_vertices(g, x)?;
        let (h, map) = g.induced(&gx);
        let phil = Coloring::new(map.iter().map(|&v| phi.assignment[v]).collect());
        let mut psil = vec![0; map.len()];
        let mut dense = BTreeMap::new();
        for &c in px {
            let l = dense.len();
            dense.entry(c).or_insert(l);
        }
        for (i, &v) in tp.parts[x].iter().enumerate() {
            psil[map.binary_search(&v).unwrap()] = dense[&px[i]];
        }
        let pl = local_sequence(&map, g.n(), &tp.parts[x]);
        if !cen_focused_check(&h, &phil, &pl, &psil, q) {
            return invalid(format!("colouring {x} fails the focused centred condition on G_{x}"));
        }
        k = k.max(dense.len());
    }
    let mut pairs = vec![None; g.n()];
    for (x, part) in tp.parts.iter().enumerate() {
        for (i, &v) in part.iter().enumerate() {
            pairs[v] = Some((psis[x][i], r.depth[x] % (q + 1)));
        }
    }
    let codes: BTreeSet<(usize, usize)> = pairs.iter().flatten().copied().collect();
    let code: BTreeMap<(usize, usize), usize> = codes.into_iter().enumerate().map(|(i, p)| (p, i)).collect();
    let assignment = pairs.iter().map(|p| p.map_or(0, |p| code[&p])).collect();
    Ok(WitnessedBound::new(
        "cen_focused",
        q,
        (q + 1) * k,
        Witness::Coloring(Coloring::new(assignment)),
        "centered_colorings_are_nice",
    ))
}

/// Repeatedly take a maximal set of pairwise disjoint bags, order those bags
/// dyadically along the path, and recurse on G minus their union.
pub fn pathwidth_ordering(g: &Graph, pd: &PathDecomposition, q: usize) -> Result<WitnessedBound> {
    check_q(q)?;
    if let Err(v) = pd.validate(g) {
        return invalid(format!("path decomposition: {} {}", v.clause, v.detail));
    }
    let w = pd.width();
    let mut bags: Vec<Vec<usize>> = pd.bags.iter().filter(|b| !b.is_empty()).cloned().collect();
    let mut seq = Vec::with_capacity(g.n());
    while !bags.is_empty() {
        let mut taken = vec![false; g.n()];
        let mut chosen = Vec::new();
        for (i, b) in bags.iter().enumerate() {
            if b.iter().all(|&v| !taken[v]) {
                for &v in b {
                    taken[v] = true;
                }
                chosen.push(i);
            }
        }
        for j in dyadic_order(chosen.len(), q) {
            seq.extend(bags[chosen[j]].iter().copied());
        }
        bags = bags
            .into_iter()
            .map(|b| b.into_iter().filter(|&v| !taken[v]).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
    }
    Ok(WitnessedBound::new(
        "wcol",
        q,
        binom(w + 2, 2) * (ceil_log2(q) + 2),
        Witness::Ordering(VertexOrdering { sequence: seq }),
        "wcol_path_log",
    ))
}

/// σ₀ then σ₁; bound wcol(G,S₀,σ₀) + wcol(G−S₀,S₁,σ₁).
pub fn ordering_concat(g: &Graph, sigma0: &[usize], sigma1: &[usize], q: usize) -> Result<WitnessedBound> {
    check_q(q)?;
    let mut seen = vec![false; g.n()];
    for &v in sigma0.iter().chain(sigma1) {
        if v >= g.n() {
            return invalid(format!("vertex {v} not in G"));
        }
        if seen[v] {
            return invalid(format!("vertex {v} listed twice (S₀ and S₁ must be disjoint)"));
        }
        seen[v] = true;
    }
    let (rest, map) = g.remove(sigma0);
    let b = wcol_eval(g, sigma0, q) + wcol_eval(&rest, &local_sequence(&map, g.n(), sigma1), q);
    let seq = sigma0.iter().chain(sigma1).copied().collect();
    Ok(WitnessedBound::new(
        "wcol_focused",
        q,
        b,
        Witness::Ordering(VertexOrdering { sequence: seq }),
        "wcol_union",
    ))
}

pub fn is_geodesic_path(g: &Graph, p: &[usize]) -> bool {
    if p.is_empty() || p.iter().any(|&v| v >= g.n()) {
        return false;
    }
    if p.windows(2).any(|w| !g.has_edge(w[0], w[1])) {
        return false;
    }
    g.bfs_dist(p[0])[*p.last().unwrap()] == p.len() - 1
}

/// Appends the new vertices of each geodesic; bound wcol(G,S,σ) + ℓ(2q+1).
pub fn geodesic_extend(g: &Graph, sigma: &[usize], geodesics: &[Vec<usize>], q: usize) -> Result<WitnessedBound> {
    check_q(q)?;
    let mut seen = vec![false; g.n()];
    for &v in sigma {
        if v >= g.n() || seen[v] {
            return invalid("σ must list distinct vertices of G");
        }
        seen[v] = true;
    }
    let base = wcol_eval(g, sigma, q);
    let mut seq = sigma.to_vec();
    for p in geodesics {
        if !is_geodesic_path(g, p) {
            return invalid(format!("{p:?} is not a geodesic"));
        }
        for &v in p {
            if !seen[v] {
                seen[v] = true;
                seq.push(v);
            }
        }
    }
    Ok(WitnessedBound::new(
        "wcol_focused",
        q,
        base + geodesics.len() * (2 * q + 1),
        Witness::Ordering(VertexOrdering { sequence: seq }),
        "geodesics",
    ))
}

// ---------------------------------------------------------------------------
// good colourings

/// Greedy root-first colouring, injective on every bag, ≤ width+1 colours.
pub fn goodcol_bounded_tw(g: &Graph, td: &TreeDecomposition) -> Result<Coloring> {
    if let Err(v) = td.validate(g) {
        return invalid(format!("tree decomposition: {} {}", v.clause, v.detail));
    }
    let r = td.rooting()?;
    let mut col = vec![usize::MAX; g.n()];
    for &x in &r.order {
        let used: BTreeSet<usize> = td.bags[x].iter().map(|&v| col[v]).filter(|&c| c != usize::MAX).collect();
        let mut next = 0;
        for &v in &td.bags[x] {
            if col[v] == usize::MAX {
                while used.contains(&next) {
                    next += 1;
                }
                col[v] = next;
                next += 1;
            }
        }
    }
    // isolated vertices missing from every bag cannot happen in a valid decomposition
    Ok(Coloring::new(col))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum GoodColOutcome {
    Packing { members: Vec<Vec<usize>> },
    /// ψ is indexed by the vertices of G (0 outside Z); `nodes` is the
    /// lca-closed node set whose bags give Z.
    Response { z: Vec<usize>, psi: Vec<usize>, nodes: Vec<usize> },
}

/// Either d+1 disjoint members of F, or a hitting set Z of G₀ with a
/// colouring ψ of Z such that φ×ψ is injective on Z.
pub fn goodcol_respond(
    g: &Graph,
    td: &TreeDecomposition,
    phi: &Coloring,
    g0: &[usize],
    f: &SubgraphFamily,
    d: usize,
) -> Result<GoodColOutcome> {
    if let Err(v) = td.validate(g) {
        return invalid(format!("tree decomposition: {} {}", v.clause, v.detail));
    }
    if check_natural(g, td).is_err() {
        return Err(Error::Precondition("tree decomposition must be natural".into()));
    }
    if phi.assignment.len() != g.n() {
        return invalid("φ must colour every vertex");
    }
    for b in &td.bags {
        let cs: BTreeSet<usize> = b.iter().map(|&v| phi.assignment[v]).collect();
        if cs.len() != b.len() {
            return Err(Error::Precondition("φ is not injective on a bag".into()));
        }
    }
    f.validate(g)?;
    let mut in0 = vec![false; g.n()];
    for &v in g0 {
        if v >= g.n() {
            return invalid(format!("vertex {v} not in G"));
        }
        in0[v] = true;
    }
    if f.members.iter().any(|m| m.iter().any(|&v| !in0[v])) {
        return invalid("members of F must live in G₀");
    }
    let nodes = match helly_with(g, td, f, d)? {
        HellyOutcome::Packing(members) => return Ok(GoodColOutcome::Packing { members }),
        HellyOutcome::Cover(c) => c,
    };
    if nodes.is_empty() {
        return Ok(GoodColOutcome::Response {
            z: vec![],
            psi: vec![0; g.n()],
            nodes: vec![],
        });
    }
    let r = td.rooting()?;
    let x = lca_closure(&r, &nodes)?;
    let mut label = vec![usize::MAX; g.n()];
    for (i, &node) in x.iter().enumerate() {
        for &v in &td.bags[node] {
            if in0[v] && label[v] == usize::MAX {
                label[v] = i;
            }
        }
    }
    let z: Vec<usize> = (0..g.n()).filter(|&v| label[v] != usize::MAX).collect();
    let used: BTreeSet<usize> = z.iter().map(|&v| label[v]).collect();
    let dense: BTreeMap<usize, usize> = used.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
    let psi = (0..g.n()).map(|v| dense.get(&label[v]).copied().unwrap_or(0)).collect();
    Ok(GoodColOutcome::Response { z, psi, nodes: x })
}

// ---------------------------------------------------------------------------
// excluding a star / a forest

/// Layered path partitions S₁,…; `layers[a]` lists the parts of layer a in
/// path order, `covers[a][i]` the decomposition nodes whose bags contain
/// part i. `h`, `d`, `width` record the parameters that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredPartition {
    pub layers: Vec<Vec<Vec<usize>>>,
    pub covers: Vec<Vec<Vec<usize>>>,
    pub h: usize,
    pub d: usize,
    pub width: usize,
}

impl LayeredPartition {
    pub fn layer_set(&self, a: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers[a].iter().flatten().copied().collect();
        s.sort_unstable();
        s
    }

    pub fn union(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers.iter().flatten().flatten().copied().collect();
        s.sort_unstable();
        s
    }

    /// Every layer is a path partition of (G − S_<a, S_a), layers disjoint.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let mut removed: Vec<usize> = Vec::new();
        for (a, parts) in self.layers.iter().enumerate() {
            let s = self.layer_set(a);
            if s.windows(2).any(|w| w[0] == w[1]) || s.iter().any(|v| removed.binary_search(v).is_ok()) {
                return invalid(format!("layer {a} overlaps itself or an earlier layer"));
            }
            if !parts.is_empty() {
                let (h, map) = g.remove(&removed);
                let lp: Vec<Vec<usize>> = parts.iter().map(|p| local_sequence(&map, g.n(), p)).collect();
                if let Err(v) = TreePartition::path(lp).validate(&h) {
                    return invalid(format!("layer {a}: {} {}", v.clause, v.detail));
                }
            }
            removed.extend(s);
            removed.sort_unstable();
        }
        Ok(())
    }

    /// Each part lies in the union of its cover bags and uses ≤ `bound` of them.
    pub fn covers_ok(&self, td: &TreeDecomposition, bound: usize) -> bool {
        self.layers.iter().zip(&self.covers).all(|(parts, covs)| {
            parts.len() == covs.len()
                && parts.iter().zip(covs).all(|(p, c)| {
                    c.len() <= bound
                        && p.iter().all(|v| c.iter().any(|&x| td.bags[x].binary_search(v).is_ok()))
                })
        })
    }
}

/// Output of the star step: parts P₀ = {u}, P₁, … with their covering nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarPartition {
    pub parts: Vec<Vec<usize>>,
    pub covers: Vec<Vec<usize>>,
}

impl StarPartition {
    pub fn set(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.parts.iter().flatten().copied().collect();
        s.sort_unstable();
        s
    }
}

fn orig_mask(n0: usize, expand: &[Vec<usize>], allowed: &[bool]) -> Vec<bool> {
    let mut m = vec![false; n0];
    for (v, &a) in allowed.iter().enumerate() {
        if a {
            for &o in &expand[v] {
                m[o] = true;
            }
        }
    }
    m
}

/// F₀: connected subgraphs of H − u touching N(u) and containing a member
/// reported by the inner oracle (which speaks original ids).
struct TouchOracle<'a> {
    h: &'a Graph,
    expand: &'a [Vec<usize>],
    u: usize,
    n0: usize,
    inner: &'a dyn MemberOracle,
}

impl MemberOracle for TouchOracle<'_> {
    fn find_within(&self, allowed: &[bool]) -> Option<Vec<usize>> {
        let mut a = allowed.to_vec();
        a[self.u] = false;
        for c in components_within(self.h, &a) {
            if !c.iter().any(|&v| self.h.has_edge(self.u, v)) {
                continue;
            }
            let mut cm = vec![false; self.h.n()];
            for &v in &c {
                cm[v] = true;
            }
            if self.inner.find_within(&orig_mask(self.n0, self.expand, &cm)).is_some() {
                return Some(c);
            }
        }
        None
    }
}

struct StarState<'a> {
    tree: &'a Graph,
    root: usize,
    n0: usize,
    d: usize,
    oracle: &'a dyn MemberOracle,
}

impl StarState<'_> {
    fn run(&self, h: &Graph, expand: &[Vec<usize>], bags: &[Vec<usize>], u: usize) -> Result<StarPartition> {
        let home: Vec<usize> = bags
            .iter()
            .enumerate()
            .filter(|(_, b)| b.contains(&u))
            .map(|(x, _)| x)
            .take(1)
            .collect();
        let p0 = StarPartition {
            parts: vec![expand[u].clone()],
            covers: vec![home],
        };
        let mut rest = vec![true; h.n()];
        rest[u] = false;
        if self.oracle.find_within(&orig_mask(self.n0, expand, &rest)).is_none() {
            return Ok(p0);
        }
        let f0 = TouchOracle {
            h,
            expand,
            u,
            n0: self.n0,
            inner: self.oracle,
        };
        let td = TreeDecomposition::new(self.tree.clone(), bags.to_vec(), Some(self.root));
        let nodes = match helly_with(h, &td, &f0, self.d)? {
            HellyOutcome::Packing(ms) => {
                let lift = |set: &[usize]| -> Vec<usize> {
                    let mut o: Vec<usize> = set.iter().flat_map(|&v| expand[v].iter().copied()).collect();
                    o.sort_unstable();
                    o
                };
                let mut root = expand[u].clone();
                root.extend(lift(&ms[self.d]));
                root.sort_unstable();
                let mut branch_sets = vec![root];
                branch_sets.extend(ms[..self.d].iter().map(|m| lift(m)));
                return Err(Error::ModelFound(MinorModel { branch_sets }));
            }
            HellyOutcome::Cover(c) => c,
        };
        let mut z: Vec<usize> = nodes
            .iter()
            .flat_map(|&x| bags[x].iter().copied())
            .filter(|&v| v != u)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let hits = |z: &[usize]| -> bool {
            let mut a = vec![true; h.n()];
            for &v in z {
                a[v] = false;
            }
            f0.find_within(&a).is_none()
        };
        if !hits(&z) {
            return Err(Error::Precondition("Helly cover does not hit F₀".into()));
        }
        // greedy minimality, ascending original id
        let mut by_id = z.clone();
        by_id.sort_by_key(|&v| expand[v][0]);
        for v in by_id {
            let trial: Vec<usize> = z.iter().copied().filter(|&w| w != v).collect();
            if hits(&trial) {
                z = trial;
            }
        }
        let mut in_z = vec![false; h.n()];
        for &v in &z {
            in_z[v] = true;
        }
        let mut avail: Vec<bool> = (0..h.n()).map(|v| v != u && !in_z[v]).collect();
        let mut in_w = vec![false; h.n()];
        for c in components_within(h, &avail) {
            if !c.iter().any(|&v| h.has_edge(u, v)) {
                for v in c {
                    in_w[v] = true;
                }
            }
        }
        let mut in_q = vec![false; h.n()];
        in_q[u] = true;
        for &zv in &z {
            // A_z: component of H − u − (Z∖z) containing z; then a u–z path in {u} ∪ A_z
            avail.iter_mut().enumerate().for_each(|(v, a)| *a = v != u && (!in_z[v] || v == zv));
            let az = components_within(h, &avail)
                .into_iter()
                .find(|c| c.contains(&zv))
                .unwrap();
            let mut ok = vec![false; h.n()];
            for &v in &az {
                ok[v] = true;
            }
            ok[u] = true;
            let path = bfs_path(h, u, zv, &ok).ok_or_else(|| Error::Precondition("Z is not minimal".into()))?;
            for v in path {
                in_q[v] = true;
            }
        }
        let keep: Vec<usize> = (0..h.n()).filter(|&v| in_w[v] || in_q[v]).collect();
        let (hh, map) = h.induced(&keep);
        let qpos: Vec<usize> = (0..map.len()).filter(|&i| in_q[map[i]]).collect();
        let (g2, kept) = hh.contract(&qpos);
        let rep = qpos[0];
        let mut new_id = vec![usize::MAX; h.n()];
        let mut expand2 = Vec::with_capacity(kept.len());
        let mut u2 = usize::MAX;
        for (i, &k) in kept.iter().enumerate() {
            let v = map[k];
            if k == rep {
                u2 = i;
                let mut e: Vec<usize> = (0..h.n())
                    .filter(|&w| in_q[w])
                    .flat_map(|w| expand[w].iter().copied())
                    .collect();
                e.sort_unstable();
                expand2.push(e);
            } else {
                new_id[v] = i;
                expand2.push(expand[v].clone());
            }
        }
        let bags2: Vec<Vec<usize>> = bags
            .iter()
            .map(|b| {
                let mut nb: Vec<usize> = b.iter().filter(|&&v| in_w[v]).map(|&v| new_id[v]).collect();
                if b.iter().any(|&v| !in_w[v]) {
                    nb.push(u2);
                }
                nb.sort_unstable();
                nb
            })
            .collect();
        let sub = self.run(&g2, &expand2, &bags2, u2)?;
        let mut zo: Vec<usize> = z.iter().flat_map(|&v| expand[v].iter().copied()).collect();
        zo.sort_unstable();
        let mut out = p0;
        out.parts.push(zo);
        out.covers.push(nodes);
        out.parts.extend(sub.parts.into_iter().skip(1));
        out.covers.extend(sub.covers.into_iter().skip(1));
        Ok(out)
    }
}

fn bfs_path(g: &Graph, s: usize, t: usize, ok: &[bool]) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; g.n()];
    prev[s] = s;
    let mut dq = VecDeque::from([s]);
    while let Some(v) = dq.pop_front() {
        if v == t {
            let mut p = vec![t];
            let mut x = t;
            while x != s {
                x = prev[x];
                p.push(x);
            }
            p.reverse();
            return Some(p);
        }
        for &w in g.neighbors(v) {
            if ok[w] && prev[w] == usize::MAX {
                prev[w] = v;
                dq.push_back(w);
            }
        }
    }
    None
}

fn check_td(g: &Graph, td: &TreeDecomposition) -> Result<()> {
    if let Err(v) = td.validate(g) {
        return invalid(format!("tree decomposition: {} {}", v.clause, v.detail));
    }
    Ok(())
}

/// Star step on the component `comp` of G (original ids), oracle in
/// original ids.
fn star_on_component(
    g: &Graph,
    td: &TreeDecomposition,
    comp: &[usize],
    oracle: &dyn MemberOracle,
    d: usize,
    u: usize,
) -> Result<StarPartition> {
    let (h, map) = g.induced(comp);
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in map.iter().enumerate() {
        pos[v] = i;
    }
    let bags: Vec<Vec<usize>> = td
        .bags
        .iter()
        .map(|b| b.iter().filter(|&&v| pos[v] != usize::MAX).map(|&v| pos[v]).collect())
        .collect();
    let expand: Vec<Vec<usize>> = map.iter().map(|&v| vec![v]).collect();
    let st = StarState {
        tree: &td.tree,
        root: td.root_node(),
        n0: g.n(),
        d,
        oracle,
    };
    st.run(&h, &expand, &bags, pos[u])
}

/// Path partition (P₀ = {u}, P₁, …) of (G,S) with S hitting F and every
/// P_i (i ≥ 1) inside ≤ d bags; an F-rich model of the star K_{1,d} is
/// reported as `Error::ModelFound`.
pub fn star_exclusion_partition(
    g: &Graph,
    td: &TreeDecomposition,
    f: &SubgraphFamily,
    d: usize,
    u: usize,
) -> Result<StarPartition> {
    if u >= g.n() || !g.is_connected() {
        return invalid("star_exclusion_partition needs a connected G and u ∈ V(G)");
    }
    check_td(g, td)?;
    f.validate(g)?;
    let comp: Vec<usize> = g.vertices().collect();
    star_on_component(g, td, &comp, f, d, u)
}

/// F': connected subgraphs containing an F-rich model of `x`. Answers are
/// whole components of the allowed region; searches are memoised.
struct RichOracle<'a> {
    g: &'a Graph,
    f: &'a SubgraphFamily,
    x: Graph,
    memo: RefCell<HashMap<Vec<usize>, bool>>,
    err: RefCell<Option<Error>>,
}

impl RichOracle<'_> {
    fn rich(&self, c: &[usize]) -> bool {
        if let Some(&b) = self.memo.borrow().get(c) {
            return b;
        }
        let (h, map) = self.g.induced(c);
        let mut inside = vec![false; self.g.n()];
        for &v in c {
            inside[v] = true;
        }
        let fc = SubgraphFamily::new(
            self.f
                .restrict(&inside)
                .members
                .iter()
                .map(|m| local_sequence(&map, self.g.n(), m))
                .collect(),
        );
        let b = if fc.members.is_empty() {
            false
        } else {
            match find_frich_model(&h, &fc, &self.x) {
                Ok(m) => m.is_some(),
                Err(e) => {
                    self.err.borrow_mut().get_or_insert(e);
                    false
                }
            }
        };
        self.memo.borrow_mut().insert(c.to_vec(), b);
        b
    }
}

impl MemberOracle for RichOracle<'_> {
    fn find_within(&self, allowed: &[bool]) -> Option<Vec<usize>> {
        components_within(self.g, allowed).into_iter().find(|c| self.rich(c))
    }
}

/// Given a model of F_{h,d+1} in a connected G and u ∈ V(G), a model of
/// F_{h,d} whose root branch set contains u, each branch set containing a
/// branch set of the input model.
pub fn root_model(g: &Graph, model: &MinorModel, h: usize, d: usize, u: usize) -> Result<MinorModel> {
    let (big, _) = dary_tree(h, d + 1);
    validate_model(g, &big, model, None)?;
    if u >= g.n() || !g.is_connected() {
        return invalid("root_model needs a connected G and u ∈ V(G)");
    }
    // absorb the remaining vertices so that the branch sets cover V(G)
    let mut owner = vec![usize::MAX; g.n()];
    let mut dq = VecDeque::new();
    for (i, b) in model.branch_sets.iter().enumerate() {
        for &v in b {
            owner[v] = i;
            dq.push_back(v);
        }
    }
    while let Some(v) = dq.pop_front() {
        for &w in g.neighbors(v) {
            if owner[w] == usize::MAX {
                owner[w] = owner[v];
                dq.push_back(w);
            }
        }
    }
    let d1 = d + 1;
    let (_, parent) = dary_tree(h, d1);
    let top_child = |mut x: usize| -> Option<usize> {
        while let Some(p) = parent[x] {
            if p == 0 {
                return Some(x);
            }
            x = p;
        }
        None
    };
    let merged = if h <= 1 {
        None
    } else {
        Some(top_child(owner[u]).unwrap_or(d1))
    };
    let in_merged = |x: usize| -> bool { x == 0 || merged.is_some_and(|c| top_child(x) == Some(c)) };
    let mut root: Vec<usize> = (0..g.n()).filter(|&v| in_merged(owner[v])).collect();
    root.sort_unstable();
    let (small, _) = dary_tree(h, d);
    let others: Vec<usize> = (1..=d1).filter(|&c| Some(c) != merged).collect();
    let mut branch_sets = vec![root];
    for x in 1..small.n() {
        // child-index path of x in F_{h,d}, replayed in F_{h,d+1}
        let mut path = Vec::new();
        let mut y = x;
        while y != 0 {
            path.push((y - 1) % d);
            y = (y - 1) / d;
        }
        path.reverse();
        let mut b = others[path[0]];
        for &j in &path[1..] {
            b = b * d1 + 1 + j;
        }
        let mut set: Vec<usize> = (0..g.n()).filter(|&v| owner[v] == b).collect();
        set.sort_unstable();
        branch_sets.push(set);
    }
    Ok(MinorModel { branch_sets })
}

/// Lift an F'-rich star model (F' = holders of F-rich F_{h,d+1} models) to
/// an F-rich model of F_{h+1,d}.
fn lift_star_model(g: &Graph, f: &SubgraphFamily, star: &MinorModel, h: usize, d: usize) -> Result<MinorModel> {
    let root = star.branch_sets[0].clone();
    let mut in_root = vec![false; g.n()];
    for &v in &root {
        in_root[v] = true;
    }
    let (big, _) = dary_tree(h + 1, d);
    let mut branch_sets = vec![Vec::new(); big.n()];
    branch_sets[0] = root;
    let x = dary_tree(h, d + 1).0;
    for (i, leaf) in star.branch_sets[1..].iter().enumerate() {
        let (hg, map) = g.induced(leaf);
        let mut inside = vec![false; g.n()];
        for &v in leaf {
            inside[v] = true;
        }
        let fl = SubgraphFamily::new(
            f.restrict(&inside)
                .members
                .iter()
                .map(|m| local_sequence(&map, g.n(), m))
                .collect(),
        );
        let m = find_frich_model(&hg, &fl, &x)?
            .ok_or_else(|| Error::Precondition("leaf branch set lost its rich model".into()))?;
        let ui = (0..map.len())
            .find(|&j| g.neighbors(map[j]).iter().any(|&w| in_root[w]))
            .ok_or_else(|| Error::Precondition("leaf branch set not adjacent to the root".into()))?;
        let sub = root_model(&hg, &m, h, d, ui)?;
        for (y, b) in sub.branch_sets.iter().enumerate() {
            // node y of F_{h,d} under child i of the new root
            let mut path = Vec::new();
            let mut z = y;
            while z != 0 {
                path.push((z - 1) % d);
                z = (z - 1) / d;
            }
            path.reverse();
            let mut id = 1 + i;
            for &j in &path {
                id = id * d + 1 + j;
            }
            branch_sets[id] = b.iter().map(|&v| map[v]).collect();
        }
    }
    Ok(MinorModel { branch_sets })
}

/// Layers S₁…S_h with path partitions; parts of layer a inside ≤ d+a−1 bags
/// (so ≤ d+h−1 overall). A found F-rich model of F_{h+1,d} is returned as
/// `Error::ModelFound`.
pub fn forest_exclusion_partition(
    g: &Graph,
    td: &TreeDecomposition,
    f: &SubgraphFamily,
    h: usize,
    d: usize,
) -> Result<LayeredPartition> {
    if h == 0 || d == 0 {
        return invalid("h and d must be positive");
    }
    check_td(g, td)?;
    f.validate(g)?;
    let mut lp = LayeredPartition {
        layers: vec![],
        covers: vec![],
        h,
        d,
        width: td.width(),
    };
    let mut alive = vec![true; g.n()];
    for a in 0..h {
        let (hh, dd) = (h - a, d + a);
        let ff = f.restrict(&alive);
        let rich = RichOracle {
            g,
            f: &ff,
            x: dary_tree(hh, dd + 1).0,
            memo: RefCell::new(HashMap::new()),
            err: RefCell::new(None),
        };
        let oracle: &dyn MemberOracle = if hh == 1 { &ff } else { &rich };
        let mut parts = Vec::new();
        let mut covers = Vec::new();
        for c in components_within(g, &alive) {
            let res = star_on_component(g, td, &c, oracle, dd, c[0]);
            if let Some(e) = rich.err.borrow_mut().take() {
                return Err(e);
            }
            match res {
                Ok(sp) => {
                    parts.extend(sp.parts);
                    covers.extend(sp.covers);
                }
                Err(Error::ModelFound(m)) if hh > 1 => {
                    return Err(Error::ModelFound(lift_star_model(g, &ff, &m, hh, dd)?));
                }
                Err(e) => return Err(e),
            }
        }
        for p in &parts {
            for &v in p {
                alive[v] = false;
            }
        }
        lp.layers.push(parts);
        lp.covers.push(covers);
    }
    Ok(lp)
}

/// Adds the layer S_{h+1} that makes every component of G − S see at most
/// two components of G − V(C). Per component the decomposition is first
/// made natural; covers refer to nodes of `td`.
pub fn forest_exclusion_base(
    g: &Graph,
    td: &TreeDecomposition,
    f: &SubgraphFamily,
    h: usize,
    d: usize,
) -> Result<LayeredPartition> {
    if h == 0 || d == 0 {
        return invalid("h and d must be positive");
    }
    check_td(g, td)?;
    f.validate(g)?;
    let mut out = LayeredPartition {
        layers: vec![vec![]; h + 1],
        covers: vec![vec![]; h + 1],
        h,
        d,
        width: td.width(),
    };
    for comp in connected_components(g) {
        let (gc, map) = g.induced(&comp);
        let mut pos = vec![usize::MAX; g.n()];
        for (i, &v) in map.iter().enumerate() {
            pos[v] = i;
        }
        let tdc = TreeDecomposition::new(
            td.tree.clone(),
            td.bags
                .iter()
                .map(|b| b.iter().filter(|&&v| pos[v] != usize::MAX).map(|&v| pos[v]).collect())
                .collect(),
            td.root,
        );
        let singles: Vec<Vec<usize>> = (0..td.tree.n()).map(|x| vec![x]).collect();
        let refn = refine_natural(&gc, &tdc, &singles)?;
        let nat = &refn.decomposition;
        let fc = SubgraphFamily::new(
            f.members
                .iter()
                .filter(|m| m.iter().all(|&v| pos[v] != usize::MAX))
                .map(|m| m.iter().map(|&v| pos[v]).collect())
                .collect(),
        );
        let inner = forest_exclusion_partition(&gc, nat, &fc, h, d)?;
        let back_nodes = |nodes: &[usize]| -> Vec<usize> {
            let s: BTreeSet<usize> = nodes.iter().map(|&x| refn.f[x]).collect();
            s.into_iter().collect()
        };
        // which part each vertex of S' sits in
        let mut part_of = vec![None; gc.n()];
        let mut in_s = vec![false; gc.n()];
        for (a, parts) in inner.layers.iter().enumerate() {
            for (i, p) in parts.iter().enumerate() {
                for &v in p {
                    part_of[v] = Some((a, i));
                    in_s[v] = true;
                }
            }
        }
        let r = nat.rooting()?;
        let rest: Vec<bool> = in_s.iter().map(|b| !b).collect();
        let mut last_parts = Vec::new();
        let mut last_covers = Vec::new();
        for c in components_within(&gc, &rest) {
            let mut y = BTreeSet::new();
            for &v in &c {
                for &w in gc.neighbors(v) {
                    if let Some((a, i)) = part_of[w] {
                        y.extend(inner.covers[a][i].iter().copied());
                    }
                }
            }
            if y.is_empty() {
                continue;
            }
            let y: Vec<usize> = y.into_iter().collect();
            let x = lca_closure(&r, &y)?;
            let mut zc = vec![false; gc.n()];
            for &node in &x {
                for &v in &nat.bags[node] {
                    zc[v] = true;
                }
            }
            let part: Vec<usize> = c.iter().copied().filter(|&v| zc[v]).map(|v| map[v]).collect();
            if !part.is_empty() {
                last_parts.push(part);
                last_covers.push(back_nodes(&x));
            }
        }
        for (a, parts) in inner.layers.iter().enumerate() {
            for (i, p) in parts.iter().enumerate() {
                out.layers[a].push(p.iter().map(|&v| map[v]).collect());
                out.covers[a].push(back_nodes(&inner.covers[a][i]));
            }
        }
        out.layers[h].extend(last_parts);
        out.covers[h].extend(last_covers);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// focused treedepth of path partitions

/// Greedy focused elimination: in every component remove its S-vertex of
/// least priority; returns the resulting depth (an upper bound on ftd).
pub fn ftd_replay(g: &Graph, s: &[usize], order: &[usize]) -> usize {
    let mut prio = vec![usize::MAX; g.n()];
    for (i, &v) in order.iter().enumerate() {
        prio[v] = i;
    }
    let mut in_s = vec![false; g.n()];
    for &v in s {
        in_s[v] = true;
    }
    fn rec(g: &Graph, alive: &mut [bool], in_s: &[bool], prio: &[usize]) -> usize {
        let mut best = 0;
        for c in components_within(g, alive) {
            let pick = c.iter().copied().filter(|&v| in_s[v]).min_by_key(|&v| (prio[v], v));
            let Some(v) = pick else { continue };
            let mut sub = vec![false; g.n()];
            for &w in &c {
                sub[w] = true;
            }
            sub[v] = false;
            best = best.max(1 + rec(g, &mut sub, in_s, prio));
        }
        best
    }
    let mut alive = vec![true; g.n()];
    rec(g, &mut alive, &in_s, &prio)
}

fn middle_first(parts: &[Vec<usize>], out: &mut Vec<usize>) {
    if parts.is_empty() {
        return;
    }
    let mid = parts.len() / 2;
    out.extend(parts[mid].iter().copied());
    middle_first(&parts[..mid], out);
    middle_first(&parts[mid + 1..], out);
}

/// ⌈log₂(ℓ+1)⌉ · max|P_i| with a middle-part-first elimination priority.
pub fn ftd_path_partition_bound(g: &Graph, s: &[usize], parts: &[Vec<usize>]) -> Result<WitnessedBound> {
    let tp = TreePartition::path(parts.to_vec());
    let mut ss = s.to_vec();
    ss.sort_unstable();
    ss.dedup();
    if tp.focus != ss {
        return invalid("parts must partition S");
    }
    if !parts.is_empty() {
        if let Err(v) = tp.validate(g) {
            return invalid(format!("path partition: {} {}", v.clause, v.detail));
        }
    }
    let mut order = Vec::new();
    middle_first(parts, &mut order);
    let width = parts.iter().map(|p| p.len()).max().unwrap_or(0);
    Ok(WitnessedBound::new(
        "ftd",
        0,
        ceil_log2(parts.len() + 1) * width,
        Witness::Elimination { order },
        "td_path_partition",
    ))
}

// ---------------------------------------------------------------------------
// fragility witnesses

const EXACT_OUTCOMES: usize = 1 << 16;

/// Residue vectors (one entry per coordinate) with their probabilities:
/// the full product when it has ≤ 2¹⁶ outcomes, otherwise the q outcomes
/// i(x) = r + offset(x) mod q with seeded offsets (same marginals).
fn residue_outcomes(coords: usize, q: usize, seed: u64) -> Vec<(Vec<usize>, Q)> {
    let total = (q as u128).checked_pow(coords as u32).filter(|&t| t <= EXACT_OUTCOMES as u128);
    match total {
        Some(t) => {
            let p = Q::new(1.into(), (t as u64).into());
            (0..t as usize)
                .map(|mut code| {
                    let mut r = vec![0; coords];
                    for x in r.iter_mut() {
                        *x = code % q;
                        code /= q;
                    }
                    (r, p.clone())
                })
                .collect()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let off: Vec<usize> = (0..coords).map(|_| rng.gen_range(0..q)).collect();
            (0..q)
                .map(|r| (off.iter().map(|o| (r + o) % q).collect(), rat(1, q as i64)))
                .collect()
        }
    }
}

fn merge_outcomes<T>(items: Vec<(Vec<usize>, Q, T)>) -> Vec<(Vec<usize>, Q, T)> {
    let mut m: BTreeMap<Vec<usize>, (Q, T)> = BTreeMap::new();
    for (y, p, t) in items {
        match m.get_mut(&y) {
            Some(e) => e.0 += p,
            None => {
                m.insert(y, (p, t));
            }
        }
    }
    m.into_iter().map(|(y, (p, t))| (y, p, t)).collect()
}

/// Tree decomposition of G − Y glued from per-torso decompositions.
fn layer_decomposition(g: &Graph, lrs: &LayeredRSDecomposition, r: &Rooting, in_y: &[bool]) -> TreeDecomposition {
    let outer = lrs.outer();
    let mut tree = Graph::new(0);
    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut groups: Vec<Vec<usize>> = vec![vec![]; lrs.t.n()];
    let mut hub = vec![0; lrs.t.n()];
    for x in 0..lrs.t.n() {
        let ux: Vec<usize> = match r.parent[x] {
            Some(p) => intersect(&lrs.w[x], &lrs.w[p]),
            None => vec![],
        };
        let mut side: Vec<usize> = lrs.a[x].iter().chain(&ux).copied().filter(|&v| !in_y[v]).collect();
        side.sort_unstable();
        side.dedup();
        let (tor, map) = torso(g, &outer, x);
        let core: Vec<bool> = map
            .iter()
            .map(|&v| !in_y[v] && !lrs.a[x].contains(&v) && ux.binary_search(&v).is_err())
            .collect();
        let hb = tree.add_vertex();
        bags.push(side.clone());
        hub[x] = hb;
        groups[x].push(hb);
        let dx = &lrs.d[x];
        for c in components_within(&tor, &core) {
            let cv: BTreeSet<usize> = c.iter().map(|&i| map[i]).collect();
            let base = tree.n();
            for b in &dx.bags {
                tree.add_vertex();
                let mut nb: Vec<usize> = b.iter().copied().filter(|v| cv.contains(v)).collect();
                nb.extend(side.iter().copied());
                nb.sort_unstable();
                nb.dedup();
                bags.push(nb);
                groups[x].push(tree.n() - 1);
            }
            for (a, b) in dx.tree.edges() {
                tree.add_edge(base + a, base + b);
            }
            if !dx.bags.is_empty() {
                tree.add_edge(hb, base);
            }
        }
    }
    for (x, y) in lrs.t.edges() {
        let adh: Vec<usize> = intersect(&lrs.w[x], &lrs.w[y]).into_iter().filter(|&v| !in_y[v]).collect();
        let find = |z: usize| -> usize {
            groups[z]
                .iter()
                .copied()
                .find(|&node| adh.iter().all(|v| bags[node].binary_search(v).is_ok()))
                .unwrap_or(hub[z])
        };
        let (a, b) = (find(x), find(y));
        tree.add_edge(a, b);
    }
    TreeDecomposition::new(tree, bags, Some(0))
}

/// Residues per node of T: Y = {u : u ∈ L_{s_u, i} with i ≡ i(s_u) mod q};
/// every realisation comes with a tree decomposition of G − Y of width ≤ 2cq.
pub fn frate_layer_witness(g: &Graph, lrs: &LayeredRSDecomposition, q: usize, seed: u64) -> Result<WitnessedBound> {
    check_q(q)?;
    if let Err(v) = lrs.validate(g) {
        return invalid(format!("layered RS-decomposition: {} {}", v.clause, v.detail));
    }
    let outer = lrs.outer();
    let r = outer.rooting()?;
    let k = lrs.t.n();
    // s_u: topmost node whose bag holds u
    let mut top = vec![usize::MAX; g.n()];
    for &x in &r.order {
        for &v in &lrs.w[x] {
            if top[v] == usize::MAX {
                top[v] = x;
            }
        }
    }
    let layer_idx: Vec<Vec<usize>> = lrs.l.iter().map(|l| l.index_of(g.n())).collect();
    let mut items = Vec::new();
    for (res, p) in residue_outcomes(k, q, seed) {
        let y: Vec<usize> = (0..g.n())
            .filter(|&v| {
                let s = top[v];
                let li = layer_idx[s][v];
                li != usize::MAX && li % q == res[s]
            })
            .collect();
        items.push((y, p, ()));
    }
    let mut sets = Vec::new();
    let mut probs = Vec::new();
    let mut decompositions = Vec::new();
    for (y, p, ()) in merge_outcomes(items) {
        let mut in_y = vec![false; g.n()];
        for &v in &y {
            in_y[v] = true;
        }
        decompositions.push(layer_decomposition(g, lrs, &r, &in_y));
        sets.push(y);
        probs.push(p);
    }
    let bound = 2 * lrs.c * q;
    Ok(WitnessedBound::new(
        "frate_tw",
        q,
        bound,
        Witness::Fragility(FragilityWitness {
            sets,
            probs,
            q,
            k: bound,
            measure: "tw".into(),
            decompositions,
        }),
        "fftdr_reduction_to_bd_tw",
    ))
}

/// Per-layer residues: Y = ⋃ {P_{a,i} : i ≡ i(a) mod q}. The claimed bound
/// is the largest, over realisations, sum over layers of the path-partition
/// bound of the surviving runs of parts.
pub fn frate_residue_witness(g: &Graph, lp: &LayeredPartition, q: usize, seed: u64) -> Result<WitnessedBound> {
    check_q(q)?;
    lp.validate(g)?;
    let layers = lp.layers.len();
    let mut items = Vec::new();
    let mut worst = 0;
    for (res, p) in residue_outcomes(layers, q, seed) {
        let mut y = Vec::new();
        let mut k = 0;
        for (a, parts) in lp.layers.iter().enumerate() {
            let mut best = 0;
            let mut run: Vec<usize> = Vec::new();
            for (i, part) in parts.iter().enumerate() {
                if i % q == res[a] {
                    y.extend(part.iter().copied());
                    best = best.max(run_bound(&run));
                    run.clear();
                } else {
                    run.push(part.len());
                }
            }
            best = best.max(run_bound(&run));
            k += best;
        }
        worst = worst.max(k);
        y.sort_unstable();
        items.push((y, p, ()));
    }
    let (sets, probs): (Vec<_>, Vec<_>) = merge_outcomes(items).into_iter().map(|(y, p, ())| (y, p)).unzip();
    Ok(WitnessedBound::new(
        "frate",
        q,
        worst,
        Witness::Fragility(FragilityWitness {
            sets,
            probs,
            q,
            k: worst,
            measure: "ftd".into(),
            decompositions: vec![],
        }),
        "fragility_rate_base_case",
    ))
}

fn run_bound(sizes: &[usize]) -> usize {
    ceil_log2(sizes.len() + 1) * sizes.iter().copied().max().unwrap_or(0)
}

/// k ≤ 8(h+1)h(d+h−1)·(tw+1)·log₂(q+1), decided exactly as 2^k ≤ (q+1)^C.
pub fn residue_formula_ok(k: usize, h: usize, d: usize, tw: usize, q: usize) -> bool {
    let c = 8 * (h + 1) * h * (d + h - 1) * (tw + 1);
    let lhs = BigUint::from(2u32).pow(k as u32);
    let rhs = BigUint::from(q as u64 + 1).pow(c as u32);
    lhs <= rhs
}
