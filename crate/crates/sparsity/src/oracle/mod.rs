//! Exact solvers for every parameter, plus definition-level checkers.

pub mod lp;

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decomp::{PathDecomposition, TreeDecomposition, Variant};
use crate::graph::{
    bits, blocks_and_cut_vertices, classify, mask_components, mask_connected, mask_of, Graph,
    GraphClass,
};
use crate::{check_guard, invalid, scaled, Result};

pub use lp::{rat, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexOrdering {
    pub sequence: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub assignment: Vec<usize>,
    pub palette: usize,
}

impl Coloring {
    pub fn new(assignment: Vec<usize>) -> Coloring {
        let mut c = assignment.clone();
        c.sort_unstable();
        c.dedup();
        Coloring {
            palette: c.len(),
            assignment,
        }
    }
}

fn rank_of(n: usize, sigma: &[usize]) -> Vec<usize> {
    let mut r = vec![usize::MAX; n];
    for (i, &v) in sigma.iter().enumerate() {
        r[v] = i;
    }
    r
}

/// WReach_q[G,S,σ,u]; σ lists the vertices of S, earliest first.
pub fn wreach(g: &Graph, sigma: &[usize], u: usize, q: usize) -> Result<Vec<usize>> {
    if u >= g.n() {
        return invalid(format!("vertex {u} not in G"));
    }
    let rank = rank_of(g.n(), sigma);
    Ok(wreach_ranked(g, &rank, sigma, u, q))
}

fn wreach_ranked(g: &Graph, rank: &[usize], sigma: &[usize], u: usize, q: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for &v in sigma {
        let rv = rank[v];
        if rank[u] != usize::MAX && rank[u] < rv {
            continue;
        }
        // bfs through vertices that are outside S or not earlier than v
        let mut dist = vec![usize::MAX; g.n()];
        dist[u] = 0;
        let mut frontier = vec![u];
        let mut hit = u == v;
        let mut d = 0;
        while !hit && d < q && !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &x in &frontier {
                for &y in g.neighbors(x) {
                    if dist[y] == usize::MAX && (rank[y] == usize::MAX || rank[y] >= rv) {
                        dist[y] = d;
                        if y == v {
                            hit = true;
                        }
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        if hit {
            out.push(v);
        }
    }
    out.sort_unstable();
    out
}

/// max_u |WReach_q[G,S,σ,u]|; 0 on the null graph.
pub fn wcol_eval(g: &Graph, sigma: &[usize], q: usize) -> usize {
    // one bounded bfs per v through vertices not earlier than v; every u it
    // reaches has v in WReach_q[u]
    let n = g.n();
    let rank = rank_of(n, sigma);
    let mut count = vec![0usize; n];
    let mut seen = vec![usize::MAX; n];
    for (i, &v) in sigma.iter().enumerate() {
        seen[v] = i;
        count[v] += 1;
        let mut frontier = vec![v];
        for _ in 0..q {
            let mut next = Vec::new();
            for &x in &frontier {
                for &y in g.neighbors(x) {
                    if seen[y] != i && (rank[y] == usize::MAX || rank[y] > i) {
                        seen[y] = i;
                        count[y] += 1;
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

pub const WCOL_LIMIT: usize = 12;

pub fn wcol_exact(g: &Graph, q: usize) -> Result<(usize, VertexOrdering)> {
    let s: Vec<usize> = g.vertices().collect();
    wcol_focused_exact(g, &s, q)
}

pub fn wcol_focused_exact(g: &Graph, s: &[usize], q: usize) -> Result<(usize, VertexOrdering)> {
    wcol_focused_exact_with_limit(g, s, q, scaled(WCOL_LIMIT))
}

/// Smallest k for which an ordering of S keeps every |WReach| <= k.
pub fn wcol_focused_exact_with_limit(g: &Graph, s: &[usize], q: usize, limit: usize) -> Result<(usize, VertexOrdering)> {
    check_guard("wcol vertices", limit.min(64), g.n())?;
    let smask = mask_of(s);
    if smask == 0 {
        return Ok((0, VertexOrdering { sequence: vec![] }));
    }
    for k in 1..=s.len() {
        if let Some(seq) = wcol_focused_order_within(g, s, q, k)? {
            return Ok((k, VertexOrdering { sequence: seq }));
        }
    }
    unreachable!("an arbitrary ordering reaches at most |S| vertices")
}

/// Ordering of S with wcol_q <= k, if one exists.
pub fn wcol_focused_order_within(g: &Graph, s: &[usize], q: usize, k: usize) -> Result<Option<Vec<usize>>> {
    check_guard("wcol vertices", 64, g.n())?;
    let mut search = WcolSearch {
        nb: g.masks(),
        smask: mask_of(s),
        q,
        k: k.min(255) as u8,
        memo: HashMap::new(),
    };
    let full = if g.n() == 64 { u64::MAX } else { (1u64 << g.n()) - 1 };
    let counts = vec![0u8; g.n()];
    let comps = mask_components(&search.nb, full);
    let mut seq = Vec::new();
    for c in comps {
        if !search.feasible(c, &counts) {
            return Ok(None);
        }
        search.build(c, &counts, &mut seq);
    }
    Ok(Some(seq))
}

struct WcolSearch {
    nb: Vec<u64>,
    smask: u64,
    q: usize,
    k: u8,
    memo: HashMap<(u64, Vec<u8>), bool>,
}

impl WcolSearch {
    fn ball(&self, c: u64, w: usize) -> u64 {
        let mut seen = 1u64 << w;
        let mut frontier = seen;
        for _ in 0..self.q {
            let mut next = 0;
            let mut m = frontier;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                next |= self.nb[v];
            }
            next &= c & !seen;
            if next == 0 {
                break;
            }
            seen |= next;
            frontier = next;
        }
        seen
    }

    /// counts after placing w first in C, or None if a limit breaks.
    fn place(&self, c: u64, counts: &[u8], w: usize) -> Option<Vec<u8>> {
        let mut nc = counts.to_vec();
        let mut m = self.ball(c, w);
        while m != 0 {
            let u = m.trailing_zeros() as usize;
            m &= m - 1;
            nc[u] += 1;
            let lim = if u == w {
                self.k
            } else if self.smask >> u & 1 == 1 {
                self.k - 1
            } else {
                self.k
            };
            if nc[u] > lim {
                return None;
            }
        }
        Some(nc)
    }

    fn key(c: u64, counts: &[u8]) -> (u64, Vec<u8>) {
        (c, bits(c).iter().map(|&v| counts[v]).collect())
    }

    fn feasible(&mut self, c: u64, counts: &[u8]) -> bool {
        let sc = c & self.smask;
        if sc == 0 {
            return true;
        }
        let key = Self::key(c, counts);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let mut ok = false;
        for w in bits(sc) {
            let Some(nc) = self.place(c, counts, w) else { continue };
            let rest = c & !(1u64 << w);
            if mask_components(&self.nb, rest)
                .into_iter()
                .all(|d| self.feasible(d, &nc))
            {
                ok = true;
                break;
            }
        }
        self.memo.insert(key, ok);
        ok
    }

    fn build(&mut self, c: u64, counts: &[u8], out: &mut Vec<usize>) {
        let sc = c & self.smask;
        if sc == 0 {
            return;
        }
        for w in bits(sc) {
            let Some(nc) = self.place(c, counts, w) else { continue };
            let rest = c & !(1u64 << w);
            let comps = mask_components(&self.nb, rest);
            if comps.iter().all(|&d| self.feasible(d, &nc)) {
                out.push(w);
                for d in comps {
                    self.build(d, &nc, out);
                }
                return;
            }
        }
        unreachable!("build called on an infeasible state");
    }
}

/// Enumerates connected vertex sets (as masks) of G[allowed] exactly once;
/// `visit` returning false stops extension of that set.
pub fn for_each_connected_set(nb: &[u64], allowed: u64, visit: &mut dyn FnMut(u64) -> bool) {
    fn rec(nb: &[u64], allowed: u64, s: u64, ext: u64, forb: u64, visit: &mut dyn FnMut(u64) -> bool) {
        if !visit(s) {
            return;
        }
        let mut forb = forb;
        let mut e = ext;
        while e != 0 {
            let v = e.trailing_zeros() as usize;
            e &= e - 1;
            forb |= 1u64 << v;
            let next_ext = (ext | nb[v]) & allowed & !s & !forb;
            rec(nb, allowed, s | (1u64 << v), next_ext, forb, visit);
        }
    }
    let mut m = allowed;
    while m != 0 {
        let r = m.trailing_zeros() as usize;
        m &= m - 1;
        let below = (1u64 << r) - 1 | (1u64 << r);
        rec(nb, allowed, 1u64 << r, nb[r] & allowed & !below, below, visit);
    }
}

fn distinct(vals: impl Iterator<Item = usize>) -> usize {
    let mut v: Vec<usize> = vals.collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn has_center(vals: &[usize]) -> bool {
    let mut v = vals.to_vec();
    v.sort_unstable();
    let n = v.len();
    (0..n).any(|i| (i == 0 || v[i - 1] != v[i]) && (i + 1 == n || v[i + 1] != v[i]))
}

/// q-centered check by recursive centre peeling over every choice of <= q colours.
pub fn cen_check(g: &Graph, phi: &Coloring, q: usize) -> bool {
    let n = g.n();
    if n == 0 {
        return true;
    }
    let mut colors: Vec<usize> = phi.assignment.clone();
    colors.sort_unstable();
    colors.dedup();
    let take = q.min(colors.len());
    let mut ok = true;
    for_each_subset_of_size(colors.len(), take, &mut |idx| {
        let chosen: Vec<usize> = idx.iter().map(|&i| colors[i]).collect();
        let allowed: Vec<bool> = (0..n).map(|v| chosen.contains(&phi.assignment[v])).collect();
        for c in crate::graph::components_within(g, &allowed) {
            if !peel(g, phi, c) {
                ok = false;
                return false;
            }
        }
        true
    });
    ok
}

fn peel(g: &Graph, phi: &Coloring, comp: Vec<usize>) -> bool {
    let vals: Vec<usize> = comp.iter().map(|&v| phi.assignment[v]).collect();
    let Some(center) = comp.iter().copied().find(|&v| vals.iter().filter(|&&c| c == phi.assignment[v]).count() == 1) else {
        return false;
    };
    let mut allowed = vec![false; g.n()];
    for &v in &comp {
        allowed[v] = v != center;
    }
    crate::graph::components_within(g, &allowed)
        .into_iter()
        .all(|c| peel(g, phi, c))
}

fn for_each_subset_of_size(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            let go = rec(i + 1, n, k, cur, f);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    rec(0, n, k, &mut Vec::new(), f);
}

pub const CEN_LIMIT: usize = 8;

pub fn cen_exact(g: &Graph, q: usize) -> Result<(usize, Coloring)> {
    cen_exact_with_limit(g, q, scaled(CEN_LIMIT))
}

pub fn cen_exact_with_limit(g: &Graph, q: usize, limit: usize) -> Result<(usize, Coloring)> {
    let n = g.n();
    check_guard("cen vertices", limit.min(24), n)?;
    if n == 0 {
        return Ok((0, Coloring::new(vec![])));
    }
    let nb = g.masks();
    // connected sets grouped by their largest vertex
    let mut by_max: Vec<Vec<u64>> = vec![Vec::new(); n];
    for_each_connected_set(&nb, full_mask(n), &mut |s| {
        if s.count_ones() >= 2 {
            by_max[63 - s.leading_zeros() as usize].push(s);
        }
        true
    });
    for k in 1..=n {
        let mut col = vec![usize::MAX; n];
        if cen_assign(0, 0, k, q, &by_max, &mut col) {
            return Ok((k, Coloring::new(col)));
        }
    }
    unreachable!("injective colourings are centered")
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn cen_assign(i: usize, used: usize, k: usize, q: usize, by_max: &[Vec<u64>], col: &mut [usize]) -> bool {
    if i == col.len() {
        return true;
    }
    for c in 0..(used + 1).min(k) {
        col[i] = c;
        let ok = by_max[i].iter().all(|&s| {
            let vals: Vec<usize> = bits(s).iter().map(|&v| col[v]).collect();
            distinct(vals.iter().copied()) > q || has_center(&vals)
        });
        if ok && cen_assign(i + 1, used.max(c + 1), k, q, by_max, col) {
            return true;
        }
    }
    col[i] = usize::MAX;
    false
}

/// The three-clause focused condition; ψ is read only on S.
pub fn cen_focused_check(g: &Graph, phi: &Coloring, s: &[usize], psi: &[usize], q: usize) -> bool {
    if g.n() > 64 {
        return false;
    }
    let nb = g.masks();
    let smask = mask_of(s);
    let mut ok = true;
    for_each_connected_set(&nb, full_mask(g.n()), &mut |h| {
        if !ok {
            return false;
        }
        let vs = bits(h);
        if distinct(vs.iter().map(|&v| phi.assignment[v])) > q {
            return false;
        }
        let hs: Vec<usize> = vs.iter().copied().filter(|&v| smask >> v & 1 == 1).collect();
        if hs.is_empty() {
            return true;
        }
        let prod: Vec<usize> = hs.iter().map(|&v| phi.assignment[v] * (g.n() + 1) + psi[v]).collect();
        if distinct(prod.iter().copied()) > q {
            return false;
        }
        if !has_center(&prod) {
            ok = false;
            return false;
        }
        true
    });
    ok
}

pub const CEN_FOCUSED_LIMIT: usize = 12;

/// Minimum palette of ψ on S; the returned colouring is defined on all of V
/// (entries outside S are 0 and carry no meaning).
pub fn cen_focused_exact(g: &Graph, phi: &Coloring, s: &[usize], q: usize) -> Result<(usize, Coloring)> {
    check_guard("cen_focused vertices", scaled(CEN_FOCUSED_LIMIT).min(30), g.n())?;
    let mut s: Vec<usize> = s.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Ok((0, Coloring::new(vec![0; g.n()])));
    }
    let nb = g.masks();
    let smask = mask_of(&s);
    let idx = rank_of(g.n(), &s);
    let mut by_last: Vec<Vec<u64>> = vec![Vec::new(); s.len()];
    for_each_connected_set(&nb, full_mask(g.n()), &mut |h| {
        if distinct(bits(h).iter().map(|&v| phi.assignment[v])) > q {
            return false;
        }
        let hs = h & smask;
        if hs != 0 {
            let last = bits(hs).iter().map(|&v| idx[v]).max().unwrap();
            by_last[last].push(h);
        }
        true
    });
    for k in 1..=s.len() {
        let mut psi = vec![usize::MAX; g.n()];
        if focused_assign(0, 0, k, q, &s, phi, smask, &by_last, &mut psi) {
            let out: Vec<usize> = psi.iter().map(|&c| if c == usize::MAX { 0 } else { c }).collect();
            return Ok((k, Coloring { assignment: out, palette: k }));
        }
    }
    unreachable!("injective ψ works")
}

#[allow(clippy::too_many_arguments)]
fn focused_assign(i: usize, used: usize, k: usize, q: usize, s: &[usize], phi: &Coloring, smask: u64, by_last: &[Vec<u64>], psi: &mut [usize]) -> bool {
    if i == s.len() {
        return true;
    }
    let v = s[i];
    let n1 = psi.len() + 1;
    for c in 0..(used + 1).min(k) {
        psi[v] = c;
        let ok = by_last[i].iter().all(|&h| {
            let prod: Vec<usize> = bits(h & smask).iter().map(|&w| phi.assignment[w] * n1 + psi[w]).collect();
            distinct(prod.iter().copied()) > q || has_center(&prod)
        });
        if ok && focused_assign(i + 1, used.max(c + 1), k, q, s, phi, smask, by_last, psi) {
            return true;
        }
    }
    psi[v] = usize::MAX;
    false
}

pub const TD_LIMIT: usize = 16;

/// Treedepth with a rooted forest (parent map) whose closure contains G.
pub fn td_exact(g: &Graph) -> Result<(usize, Vec<Option<usize>>)> {
    td_exact_with_limit(g, scaled(TD_LIMIT))
}

pub fn td_exact_with_limit(g: &Graph, limit: usize) -> Result<(usize, Vec<Option<usize>>)> {
    check_guard("td vertices", limit.min(30), g.n())?;
    let mut s = TdSolver {
        nb: g.masks(),
        memo: HashMap::new(),
    };
    let full = full_mask(g.n());
    let val = s.td(full);
    let mut parent = vec![None; g.n()];
    s.build(full, None, &mut parent);
    Ok((val as usize, parent))
}

struct TdSolver {
    nb: Vec<u64>,
    memo: HashMap<u64, u8>,
}

impl TdSolver {
    fn td(&mut self, m: u64) -> u8 {
        if m == 0 {
            return 0;
        }
        if m.count_ones() == 1 {
            return 1;
        }
        if let Some(&v) = self.memo.get(&m) {
            return v;
        }
        let comps = mask_components(&self.nb, m);
        let val = if comps.len() > 1 {
            comps.into_iter().map(|c| self.td(c)).max().unwrap()
        } else {
            let mut best = u8::MAX;
            for v in bits(m) {
                let r = 1 + self.td(m & !(1u64 << v));
                best = best.min(r);
            }
            best
        };
        self.memo.insert(m, val);
        val
    }

    fn build(&mut self, m: u64, above: Option<usize>, parent: &mut [Option<usize>]) {
        if m == 0 {
            return;
        }
        let comps = mask_components(&self.nb, m);
        if comps.len() > 1 {
            for c in comps {
                self.build(c, above, parent);
            }
            return;
        }
        let target = self.td(m);
        for v in bits(m) {
            let rest = m & !(1u64 << v);
            if 1 + self.td(rest) == target {
                parent[v] = above;
                self.build(rest, Some(v), parent);
                return;
            }
        }
    }
}

/// Vertex-height of a rooted forest given as a parent map.
pub fn forest_height(parent: &[Option<usize>]) -> usize {
    (0..parent.len())
        .map(|mut v| {
            let mut h = 1;
            while let Some(p) = parent[v] {
                h += 1;
                v = p;
            }
            h
        })
        .max()
        .unwrap_or(0)
}

/// Does the closure of the forest contain every edge of G?
pub fn closure_contains(g: &Graph, parent: &[Option<usize>]) -> bool {
    let anc = |a: usize, mut v: usize| loop {
        if v == a {
            return true;
        }
        match parent[v] {
            Some(p) => v = p,
            None => return false,
        }
    };
    parent.len() == g.n() && g.edges().into_iter().all(|(u, v)| anc(u, v) || anc(v, u))
}

pub const FTD_LIMIT: usize = 12;

pub fn ftd_exact(g: &Graph, s: &[usize]) -> Result<usize> {
    ftd_exact_with_limit(g, s, scaled(FTD_LIMIT))
}

/// ftd(G,S) = max over components; on connected G, 1 + min_{u∈S} ftd(G−u, S−u).
pub fn ftd_exact_with_limit(g: &Graph, s: &[usize], limit: usize) -> Result<usize> {
    check_guard("ftd vertices", limit.min(40), g.n())?;
    let mut solver = FtdSolver {
        nb: g.masks(),
        smask: mask_of(s),
        memo: HashMap::new(),
    };
    Ok(solver.ftd(full_mask(g.n())) as usize)
}

pub(crate) struct FtdSolver {
    pub(crate) nb: Vec<u64>,
    pub(crate) smask: u64,
    pub(crate) memo: HashMap<u64, u8>,
}

impl FtdSolver {
    pub(crate) fn ftd(&mut self, m: u64) -> u8 {
        if m & self.smask == 0 {
            return 0;
        }
        if let Some(&v) = self.memo.get(&m) {
            return v;
        }
        let comps = mask_components(&self.nb, m);
        let val = if comps.len() > 1 {
            comps.into_iter().map(|c| self.ftd(c)).max().unwrap()
        } else if (m & self.smask).count_ones() == 1 {
            1
        } else {
            let mut best = u8::MAX;
            for v in bits(m & self.smask) {
                best = best.min(1 + self.ftd(m & !(1u64 << v)));
            }
            best
        };
        self.memo.insert(m, val);
        val
    }
}

pub const WTD_LIMIT: usize = 12;

/// Weighted treedepth td(G, t).
pub fn wtd_exact(g: &Graph, t: &[usize]) -> Result<usize> {
    check_guard("wtd vertices", scaled(WTD_LIMIT).min(30), g.n())?;
    if t.len() != g.n() {
        return invalid("weight function must be total");
    }
    fn rec(nb: &[u64], t: &[usize], m: u64, memo: &mut HashMap<u64, usize>) -> usize {
        if m == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&m) {
            return v;
        }
        let comps = mask_components(nb, m);
        let val = if comps.len() > 1 {
            comps.into_iter().map(|c| rec(nb, t, c, memo)).max().unwrap()
        } else {
            bits(m)
                .into_iter()
                .map(|u| 1 + t[u].max(rec(nb, t, m & !(1u64 << u), memo)))
                .min()
                .unwrap()
        };
        memo.insert(m, val);
        val
    }
    Ok(rec(&g.masks(), t, full_mask(g.n()), &mut HashMap::new()))
}

pub const TD2_LIMIT: usize = 14;

fn induced_mask(g: &Graph, m: u64) -> (Graph, Vec<usize>) {
    g.induced(&bits(m))
}

/// 2-treedepth via the block recursion.
pub fn td2_exact(g: &Graph) -> Result<usize> {
    td2_exact_with_limit(g, scaled(TD2_LIMIT))
}

pub fn td2_exact_with_limit(g: &Graph, limit: usize) -> Result<usize> {
    check_guard("td2 vertices", limit.min(40), g.n())?;
    fn rec(g: &Graph, m: u64, memo: &mut HashMap<u64, usize>) -> usize {
        if m == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&m) {
            return v;
        }
        let (h, map) = induced_mask(g, m);
        let (blocks, _) = blocks_and_cut_vertices(&h);
        let val = if blocks.len() > 1 {
            blocks
                .iter()
                .map(|b| rec(g, b.iter().fold(0u64, |a, &i| a | 1u64 << map[i]), memo))
                .max()
                .unwrap()
        } else {
            1 + bits(m).into_iter().map(|v| rec(g, m & !(1u64 << v), memo)).min().unwrap()
        };
        memo.insert(m, val);
        val
    }
    Ok(rec(g, full_mask(g.n()), &mut HashMap::new()))
}

/// Shared recursion for rtd2 (floor 0, forest-free) and srtd2 (linear-forest
/// base, floor 3).
struct Rooted2<'a> {
    g: &'a Graph,
    nb: Vec<u64>,
    simple: bool,
    memo: HashMap<u64, usize>,
}

impl Rooted2<'_> {
    fn val(&mut self, m: u64) -> usize {
        if m == 0 {
            return 0;
        }
        if m.count_ones() == 1 {
            return 1;
        }
        if let Some(&v) = self.memo.get(&m) {
            return v;
        }
        let (h, map) = induced_mask(self.g, m);
        let val = if self.simple && matches!(classify(&h), GraphClass::Edgeless | GraphClass::LinearForest) {
            if h.m() == 0 {
                1
            } else {
                2
            }
        } else {
            let comps = mask_components(&self.nb, m);
            let raw = if comps.len() > 1 {
                comps.into_iter().map(|c| self.val(c)).max().unwrap()
            } else {
                let (blocks, cuts) = blocks_and_cut_vertices(&h);
                if blocks.len() == 1 {
                    1 + bits(m).into_iter().map(|v| self.val(m & !(1u64 << v))).min().unwrap()
                } else {
                    let mut best = usize::MAX;
                    for b in &blocks {
                        let bc: Vec<usize> = b.iter().copied().filter(|v| cuts.contains(v)).collect();
                        if bc.len() != 1 {
                            continue;
                        }
                        let u = map[bc[0]];
                        let bm = b.iter().fold(0u64, |a, &i| a | 1u64 << map[i]);
                        let rest = bm & !(1u64 << u);
                        let a = self.val(m & !rest);
                        let bv = self.val(rest) + 1;
                        best = best.min(a.max(bv));
                    }
                    best
                }
            };
            if self.simple {
                raw.max(3)
            } else {
                raw
            }
        };
        self.memo.insert(m, val);
        val
    }
}

pub fn rtd2_exact(g: &Graph) -> Result<usize> {
    rtd2_exact_with_limit(g, scaled(TD2_LIMIT))
}

pub fn rtd2_exact_with_limit(g: &Graph, limit: usize) -> Result<usize> {
    check_guard("rtd2 vertices", limit.min(40), g.n())?;
    let mut r = Rooted2 {
        g,
        nb: g.masks(),
        simple: false,
        memo: HashMap::new(),
    };
    Ok(r.val(full_mask(g.n())))
}

pub const SRTD2_BRUTE_LIMIT: usize = 7;

/// srtd2 via the derived recursion; cross-checked against the exhaustive
/// certificate search whenever the graph is within that guard.
pub fn srtd2_exact(g: &Graph) -> Result<usize> {
    let v = srtd2_recursive(g)?;
    if g.n() <= scaled(SRTD2_BRUTE_LIMIT) {
        let b = srtd2_bruteforce(g)?;
        if b != v {
            return Err(crate::Error::Precondition(format!(
                "srtd2 recursion gave {v} but exhaustive search gave {b}"
            )));
        }
    }
    Ok(v)
}

pub fn srtd2_recursive(g: &Graph) -> Result<usize> {
    check_guard("srtd2 vertices", scaled(TD2_LIMIT).min(40), g.n())?;
    let mut r = Rooted2 {
        g,
        nb: g.masks(),
        simple: true,
        memo: HashMap::new(),
    };
    Ok(r.val(full_mask(g.n())))
}

pub fn srtd2_bruteforce(g: &Graph) -> Result<usize> {
    class_level_bruteforce(g, Variant::S)
}

/// Least t with G in R_t / S_t by exhaustive rooted-forest-decomposition search.
pub fn class_level_bruteforce(g: &Graph, variant: Variant) -> Result<usize> {
    check_guard("class brute-force vertices", scaled(SRTD2_BRUTE_LIMIT).min(12), g.n())?;
    let mut b = ClassBrute {
        g,
        nb: g.masks(),
        variant,
        memo: HashMap::new(),
    };
    let full = full_mask(g.n());
    let mut t = 0;
    while !b.member(full, t) {
        t += 1;
    }
    Ok(t)
}

struct ClassBrute<'a> {
    g: &'a Graph,
    nb: Vec<u64>,
    variant: Variant,
    memo: HashMap<(u64, usize), bool>,
}

impl ClassBrute<'_> {
    fn member(&mut self, m: u64, t: usize) -> bool {
        if m == 0 {
            return true;
        }
        if t <= 2 {
            let (h, _) = induced_mask(self.g, m);
            return crate::decomp::base_class_ok(self.variant, t, classify(&h));
        }
        if let Some(&r) = self.memo.get(&(m, t)) {
            return r;
        }
        let comps = mask_components(&self.nb, m);
        let r = if comps.len() > 1 {
            comps.into_iter().all(|c| self.member(c, t))
        } else {
            self.connected_member(m, t)
        };
        self.memo.insert((m, t), r);
        r
    }

    /// Connected U: pieces partition U, each piece in level t-1, arranged in
    /// a rooted tree with attachment constraints.
    fn connected_member(&mut self, m: u64, t: usize) -> bool {
        let vs = bits(m);
        let mut assign = vec![0usize; vs.len()];
        let mut found = false;
        self.partitions(&vs, 0, 0, &mut assign, t, &mut found);
        found
    }

    fn partitions(&mut self, vs: &[usize], i: usize, k: usize, assign: &mut [usize], t: usize, found: &mut bool) {
        if *found {
            return;
        }
        if i == vs.len() {
            let mut pieces = vec![0u64; k];
            for (j, &v) in vs.iter().enumerate() {
                pieces[assign[j]] |= 1u64 << v;
            }
            if pieces.iter().all(|&p| self.member(p, t - 1)) && self.some_tree(&pieces) {
                *found = true;
            }
            return;
        }
        for c in 0..=k {
            assign[i] = c;
            self.partitions(vs, i + 1, k.max(c + 1), assign, t, found);
        }
    }

    fn some_tree(&self, pieces: &[u64]) -> bool {
        let k = pieces.len();
        // piece adjacency
        let adj: Vec<Vec<bool>> = (0..k)
            .map(|a| (0..k).map(|b| a != b && crate::graph::mask_neighborhood(&self.nb, pieces[a]) & pieces[b] != 0).collect())
            .collect();
        let mut parent = vec![usize::MAX; k];
        for root in 0..k {
            parent.iter_mut().for_each(|p| *p = usize::MAX);
            if self.trees_from(root, pieces, &adj, &mut parent, 0) {
                return true;
            }
        }
        false
    }

    /// Enumerate parent arrays: node i (in index order, skipping root) picks a parent.
    fn trees_from(&self, root: usize, pieces: &[u64], adj: &[Vec<bool>], parent: &mut [usize], i: usize) -> bool {
        let k = pieces.len();
        if i == k {
            return self.tree_ok(root, pieces, adj, parent);
        }
        if i == root {
            parent[i] = usize::MAX;
            return self.trees_from(root, pieces, adj, parent, i + 1);
        }
        for p in 0..k {
            if p == i {
                continue;
            }
            parent[i] = p;
            if self.trees_from(root, pieces, adj, parent, i + 1) {
                return true;
            }
        }
        false
    }

    fn tree_ok(&self, root: usize, pieces: &[u64], adj: &[Vec<bool>], parent: &[usize]) -> bool {
        let k = pieces.len();
        // acyclic, every node reaches root
        let mut depth = vec![usize::MAX; k];
        depth[root] = 0;
        for x in 0..k {
            let mut path = vec![];
            let mut y = x;
            while depth[y] == usize::MAX {
                path.push(y);
                y = parent[y];
                if y == usize::MAX || path.len() > k {
                    return false;
                }
            }
            let mut d = depth[y];
            for &z in path.iter().rev() {
                d += 1;
                depth[z] = d;
            }
        }
        let is_anc = |a: usize, mut x: usize| loop {
            if x == a {
                return true;
            }
            if x == root {
                return false;
            }
            x = parent[x];
        };
        for a in 0..k {
            for b in 0..k {
                if adj[a][b] && !is_anc(a, b) && !is_anc(b, a) {
                    return false;
                }
            }
        }
        let mut attach = vec![usize::MAX; k];
        for y in 0..k {
            if y == root {
                continue;
            }
            // neighbours of P_y in proper ancestor pieces
            let mut up = 0u64;
            let mut x = parent[y];
            loop {
                up |= crate::graph::mask_neighborhood(&self.nb, pieces[y]) & pieces[x];
                if x == root {
                    break;
                }
                x = parent[x];
            }
            match up.count_ones() {
                0 => {}
                1 => {
                    let v = up.trailing_zeros() as usize;
                    let owner = (0..k).find(|&z| pieces[z] >> v & 1 == 1).unwrap();
                    let mut z = y;
                    while z != owner {
                        if attach[z] != usize::MAX && attach[z] != v {
                            return false;
                        }
                        attach[z] = v;
                        z = parent[z];
                    }
                }
                _ => return false,
            }
        }
        true
    }
}

pub const FRATE_LIMIT: usize = 12;

/// Finite distribution over deletion sets, with exact probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FragilityWitness {
    pub sets: Vec<Vec<usize>>,
    #[serde(with = "rational_vec")]
    pub probs: Vec<Q>,
    pub q: usize,
    pub k: usize,
    /// "ftd" (focused treedepth of G−Y on S∖Y) or "tw" (treewidth of G−Y).
    pub measure: String,
    /// Per-set tree decompositions of G−Y (original ids); used by "tw".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decompositions: Vec<TreeDecomposition>,
}

pub mod rational_vec {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| s.parse::<Q>().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub fn frate_exact(g: &Graph, s: &[usize], q: usize) -> Result<(usize, FragilityWitness)> {
    frate_exact_with_limit(g, s, q, scaled(FRATE_LIMIT))
}

/// Least k admitting a q-thin distribution over Y ⊆ S with ftd(G−Y,S∖Y) <= k.
pub fn frate_exact_with_limit(g: &Graph, s: &[usize], q: usize, limit: usize) -> Result<(usize, FragilityWitness)> {
    if q == 0 {
        return invalid("q must be positive");
    }
    let mut s: Vec<usize> = s.to_vec();
    s.sort_unstable();
    s.dedup();
    check_guard("frate focus size", limit.min(20), s.len())?;
    check_guard("frate vertices", 40, g.n())?;
    let mut solver = FtdSolver {
        nb: g.masks(),
        smask: mask_of(&s),
        memo: HashMap::new(),
    };
    let full = full_mask(g.n());
    let top = solver.ftd(full) as usize;
    let m = s.len();
    // ftd of G−Y for every Y ⊆ S (indexed by subset of positions in s)
    let col_val: Vec<usize> = (0..1usize << m)
        .map(|y| {
            let ym: u64 = (0..m).filter(|&i| y >> i & 1 == 1).fold(0, |a, i| a | 1u64 << s[i]);
            solver.ftd(full & !ym) as usize
        })
        .collect();
    let bound = rat(1, q as i64);
    let (mut lo, mut hi) = (0usize, top);
    let mut best = solve_frate_lp(&s, &col_val, top).expect("Y = ∅ is feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match solve_frate_lp(&s, &col_val, mid) {
            Some(sol) if sol.0 <= bound => {
                best = sol;
                hi = mid;
            }
            _ => lo = mid + 1,
        }
    }
    let (_, sets, probs) = best;
    let w = FragilityWitness {
        sets,
        probs,
        q,
        k: hi,
        measure: "ftd".into(),
        decompositions: vec![],
    };
    Ok((hi, w))
}

/// Minimise the maximum coverage over columns with ftd <= k.
fn solve_frate_lp(s: &[usize], col_val: &[usize], k: usize) -> Option<(Q, Vec<Vec<usize>>, Vec<Q>)> {
    let m = s.len();
    // keep only inclusion-minimal feasible columns
    let cols: Vec<usize> = (0..col_val.len())
        .filter(|&y| col_val[y] <= k)
        .filter(|&y| (0..m).all(|i| y >> i & 1 == 0 || col_val[y & !(1 << i)] > k))
        .collect();
    if cols.is_empty() {
        return None;
    }
    // variables: λ per column, t, slack per vertex
    let nv = cols.len() + 1 + m;
    let tcol = cols.len();
    let mut a = Vec::with_capacity(m + 1);
    let mut b = Vec::with_capacity(m + 1);
    let mut row = vec![Q::zero(); nv];
    for j in 0..cols.len() {
        row[j] = Q::one();
    }
    a.push(row);
    b.push(Q::one());
    for i in 0..m {
        let mut row = vec![Q::zero(); nv];
        for (j, &y) in cols.iter().enumerate() {
            if y >> i & 1 == 1 {
                row[j] = Q::one();
            }
        }
        row[tcol] = -Q::one();
        row[tcol + 1 + i] = Q::one();
        a.push(row);
        b.push(Q::zero());
    }
    let mut c = vec![Q::zero(); nv];
    c[tcol] = Q::one();
    let (val, x) = lp::minimize(&a, &b, &c)?;
    let mut sets = Vec::new();
    let mut probs = Vec::new();
    for (j, &y) in cols.iter().enumerate() {
        if x[j].is_positive() {
            sets.push((0..m).filter(|&i| y >> i & 1 == 1).map(|i| s[i]).collect());
            probs.push(x[j].clone());
        }
    }
    Some((val, sets, probs))
}

/// Exact verification of the three FragilityWitness invariants.
pub fn qthin_check(g: &Graph, s: &[usize], w: &FragilityWitness) -> Result<bool> {
    if w.sets.is_empty() || w.sets.len() != w.probs.len() {
        return invalid("fragility witness needs a nonempty family with one probability per set");
    }
    if w.q == 0 {
        return invalid("q must be positive");
    }
    let total = w.probs.iter().fold(Q::zero(), |a, p| a + p);
    if total != Q::one() || w.probs.iter().any(|p| p.is_negative()) {
        return Ok(false);
    }
    let inset: Vec<bool> = (0..g.n()).map(|v| s.contains(&v)).collect();
    let mut cover = vec![Q::zero(); g.n()];
    for (y, p) in w.sets.iter().zip(&w.probs) {
        for &v in y {
            if v >= g.n() || !inset[v] {
                return Ok(false);
            }
            cover[v] += p;
        }
    }
    let lim = rat(1, w.q as i64);
    if cover.iter().any(|c| *c > lim) {
        return Ok(false);
    }
    for (i, y) in w.sets.iter().enumerate() {
        let keep: Vec<usize> = g.vertices().filter(|v| !y.contains(v)).collect();
        let ok = match w.measure.as_str() {
            "ftd" => {
                let (h, map) = g.induced(&keep);
                let hs: Vec<usize> = (0..map.len()).filter(|&j| inset[map[j]]).collect();
                ftd_exact_with_limit(&h, &hs, 40)? <= w.k
            }
            "tw" => match w.decompositions.get(i) {
                Some(td) => {
                    let (h, map) = g.induced(&keep);
                    let mut pos = vec![usize::MAX; g.n()];
                    for (j, &v) in map.iter().enumerate() {
                        pos[v] = j;
                    }
                    let mut bags = Vec::new();
                    let mut ok = true;
                    for b in &td.bags {
                        let lb: Vec<usize> = b.iter().map(|&v| pos[v]).collect();
                        ok &= lb.iter().all(|&x| x != usize::MAX);
                        bags.push(lb);
                    }
                    let local = TreeDecomposition::new(td.tree.clone(), bags, td.root);
                    ok && local.validate(&h).is_ok() && local.width() <= w.k
                }
                None => {
                    let (h, _) = g.induced(&keep);
                    tw_exact(&h)?.0 <= w.k
                }
            },
            other => return invalid(format!("unknown measure {other}")),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-vertex inclusion probabilities of a witness.
pub fn coverage(n: usize, w: &FragilityWitness) -> Vec<Q> {
    let mut cover = vec![Q::zero(); n];
    for (y, p) in w.sets.iter().zip(&w.probs) {
        for &v in y {
            cover[v] += p;
        }
    }
    cover
}

pub const TW_LIMIT: usize = 12;

pub fn tw_exact(g: &Graph) -> Result<(usize, TreeDecomposition)> {
    tw_exact_with_limit(g, scaled(TW_LIMIT))
}

/// TW(S) = min_v max(TW(S−v), |Q(S−v, v)|) over elimination prefixes.
pub fn tw_exact_with_limit(g: &Graph, limit: usize) -> Result<(usize, TreeDecomposition)> {
    let n = g.n();
    check_guard("tw vertices", limit.min(24), n)?;
    if n == 0 {
        return Ok((0, TreeDecomposition::new(Graph::new(1), vec![vec![]], Some(0))));
    }
    let nb = g.masks();
    let size = 1usize << n;
    let mut tw = vec![u8::MAX; size];
    let mut choice = vec![0u8; size];
    tw[0] = 0;
    for s in 1..size as u64 {
        let mut best = u8::MAX;
        let mut arg = 0;
        for v in bits(s) {
            let prev = s & !(1u64 << v);
            let qv = q_set(&nb, prev, v).count_ones() as u8;
            let val = tw[prev as usize].max(qv);
            if val < best {
                best = val;
                arg = v as u8;
            }
        }
        tw[s as usize] = best;
        choice[s as usize] = arg;
    }
    let full = full_mask(n);
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = choice[s as usize] as usize;
        order.push(v);
        s &= !(1u64 << v);
    }
    order.reverse();
    let td = td_from_elimination(g, &order);
    Ok((td.width(), td))
}

/// Vertices outside S ∪ {v} reachable from v through S.
fn q_set(nb: &[u64], s: u64, v: usize) -> u64 {
    let mut reach = 1u64 << v;
    let mut inner = 1u64 << v;
    loop {
        let next = crate::graph::mask_neighborhood(nb, inner) | inner;
        let grow = next & (s | (1u64 << v));
        reach |= next;
        if grow == inner {
            break;
        }
        inner = grow;
    }
    reach & !s & !(1u64 << v)
}

/// Tree decomposition from an elimination ordering (bags {v} ∪ later fill-neighbours).
pub fn td_from_elimination(g: &Graph, order: &[usize]) -> TreeDecomposition {
    let n = g.n();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut adj: Vec<std::collections::BTreeSet<usize>> =
        (0..n).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let mut bags = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for (i, &v) in order.iter().enumerate() {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&w| pos[w] > i).collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        parent[i] = later.iter().map(|&w| pos[w]).min();
        let mut bag = later.clone();
        bag.push(v);
        bags.push(bag);
    }
    let mut t = Graph::new(n);
    let mut last_root: Option<usize> = None;
    for i in 0..n {
        match parent[i] {
            Some(p) => {
                t.add_edge(i, p);
            }
            None => {
                if let Some(r) = last_root {
                    t.add_edge(r, i);
                }
                last_root = Some(i);
            }
        }
    }
    TreeDecomposition::new(t, bags, Some(n.saturating_sub(1)))
}

pub const PW_LIMIT: usize = 12;

pub fn pw_exact(g: &Graph) -> Result<(usize, PathDecomposition)> {
    pw_exact_with_limit(g, scaled(PW_LIMIT))
}

/// Vertex separation over subsets; bags {v_i} ∪ {earlier u with a neighbour at or after i}.
pub fn pw_exact_with_limit(g: &Graph, limit: usize) -> Result<(usize, PathDecomposition)> {
    let n = g.n();
    check_guard("pw vertices", limit.min(24), n)?;
    if n == 0 {
        return Ok((0, PathDecomposition::new(vec![])));
    }
    let nb = g.masks();
    let size = 1usize << n;
    let mut best = vec![u8::MAX; size];
    let mut choice = vec![0u8; size];
    best[0] = 0;
    for s in 1..size as u64 {
        let boundary = bits(s).iter().filter(|&&u| nb[u] & !s != 0).count() as u8;
        let mut b = u8::MAX;
        let mut arg = 0;
        for v in bits(s) {
            let prev = s & !(1u64 << v);
            if best[prev as usize] < b {
                b = best[prev as usize];
                arg = v as u8;
            }
        }
        best[s as usize] = b.max(boundary);
        choice[s as usize] = arg;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full_mask(n);
    while s != 0 {
        let v = choice[s as usize] as usize;
        order.push(v);
        s &= !(1u64 << v);
    }
    order.reverse();
    let pd = pd_from_layout(g, &order);
    Ok((pd.width(), pd))
}

pub fn pd_from_layout(g: &Graph, order: &[usize]) -> PathDecomposition {
    let n = g.n();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let last: Vec<usize> = (0..n)
        .map(|v| g.neighbors(v).iter().map(|&w| pos[w]).max().unwrap_or(0).max(pos[v]))
        .collect();
    let bags = (0..n)
        .map(|i| {
            let mut b: Vec<usize> = order[..i].iter().copied().filter(|&u| last[u] >= i).collect();
            b.push(order[i]);
            b
        })
        .collect();
    PathDecomposition::new(bags)
}

/// Exact rational from a BigRational-compatible pair, used by callers.
pub fn q_from(a: i64, b: i64) -> BigRational {
    rat(a, b)
}

pub fn is_connected_mask(g: &Graph, m: u64) -> bool {
    mask_connected(&g.masks(), m)
}
