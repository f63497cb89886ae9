//! Slow, definition-level recomputations. Nothing here calls the solvers.

use std::collections::HashMap;

use sparsity::Graph;

pub fn components(g: &Graph, inside: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if !inside[s] || seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let x = comp[i];
            i += 1;
            for &y in g.neighbors(x) {
                if inside[y] && !seen[y] {
                    seen[y] = true;
                    comp.push(y);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn set_of(n: usize, vs: &[usize]) -> Vec<bool> {
    let mut b = vec![false; n];
    for &v in vs {
        b[v] = true;
    }
    b
}

pub fn is_connected(g: &Graph, vs: &[usize]) -> bool {
    !vs.is_empty() && components(g, &set_of(g.n(), vs)).len() == 1
}

/// All nonempty connected vertex sets, by plain subset enumeration.
pub fn connected_sets(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    (1u32..1 << n)
        .map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect::<Vec<_>>())
        .filter(|vs| is_connected(g, vs))
        .collect()
}

/// WReach by enumerating every simple path of length <= q starting at u.
pub fn wreach(g: &Graph, sigma: &[usize], u: usize, q: usize) -> Vec<usize> {
    let mut rank = vec![usize::MAX; g.n()];
    for (i, &v) in sigma.iter().enumerate() {
        rank[v] = i;
    }
    let mut found = vec![false; g.n()];
    let mut path = vec![u];
    fn go(g: &Graph, rank: &[usize], q: usize, path: &mut Vec<usize>, found: &mut [bool]) {
        // the S-minimum of the path, if any
        if let Some(&m) = path.iter().filter(|&&x| rank[x] != usize::MAX).min_by_key(|&&x| rank[x]) {
            found[m] = true;
        }
        if path.len() > q {
            return;
        }
        let last = *path.last().unwrap();
        for &y in g.neighbors(last) {
            if !path.contains(&y) {
                path.push(y);
                go(g, rank, q, path, found);
                path.pop();
            }
        }
    }
    go(g, &rank, q, &mut path, &mut found);
    (0..g.n()).filter(|&v| found[v]).collect()
}

pub fn wcol_eval(g: &Graph, sigma: &[usize], q: usize) -> usize {
    (0..g.n()).map(|u| wreach(g, sigma, u, q).len()).max().unwrap_or(0)
}

fn ball(g: &Graph, inside: &[bool], v: usize, q: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    dist[v] = 0;
    let mut queue = std::collections::VecDeque::from([v]);
    let mut out = vec![];
    while let Some(x) = queue.pop_front() {
        out.push(x);
        if dist[x] == q {
            continue;
        }
        for &y in g.neighbors(x) {
            if inside[y] && dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    out
}

/// Minimum over all orderings of S, by depth-first enumeration of prefixes
/// with a running per-vertex count (v is reached by everything within
/// distance q of v once the earlier S vertices are removed).
pub fn wcol_focused(g: &Graph, s: &[usize], q: usize) -> usize {
    if s.is_empty() {
        return 0;
    }
    let n = g.n();
    let mut best = s.len();
    let mut inside = vec![true; n];
    let mut used = vec![false; n];
    let mut count = vec![0usize; n];
    #[allow(clippy::too_many_arguments)]
    fn go(g: &Graph, s: &[usize], q: usize, depth: usize, inside: &mut [bool], used: &mut [bool], count: &mut [usize], best: &mut usize) {
        let cur = count.iter().copied().max().unwrap_or(0);
        if cur >= *best {
            return;
        }
        if depth == s.len() {
            *best = cur;
            return;
        }
        for &v in s {
            if used[v] {
                continue;
            }
            let b = ball(g, inside, v, q);
            for &u in &b {
                count[u] += 1;
            }
            used[v] = true;
            inside[v] = false;
            go(g, s, q, depth + 1, inside, used, count, best);
            inside[v] = true;
            used[v] = false;
            for &u in &b {
                count[u] -= 1;
            }
        }
    }
    go(g, s, q, 0, &mut inside, &mut used, &mut count, &mut best);
    best
}

/// Calls f on every set partition of 0..m given as block labels (restricted growth).
pub fn for_each_partition(m: usize, max_blocks: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(i: usize, k: usize, max_blocks: usize, lab: &mut Vec<usize>, m: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if i == m {
            return f(lab);
        }
        for c in 0..=k {
            if c == max_blocks {
                break;
            }
            lab.push(c);
            let stop = go(i + 1, k.max(c + 1), max_blocks, lab, m, f);
            lab.pop();
            if stop {
                return true;
            }
        }
        false
    }
    go(0, 0, max_blocks, &mut Vec::new(), m, f)
}

fn count_distinct<T: Ord + Clone>(xs: &[T]) -> usize {
    let mut v = xs.to_vec();
    v.sort();
    v.dedup();
    v.len()
}

fn unique_exists<T: Ord + Clone>(xs: &[T]) -> bool {
    xs.iter().any(|x| xs.iter().filter(|y| *y == x).count() == 1)
}

pub fn centered(sets: &[Vec<usize>], col: &[usize], q: usize) -> bool {
    sets.iter().all(|h| {
        let c: Vec<usize> = h.iter().map(|&v| col[v]).collect();
        count_distinct(&c) > q || unique_exists(&c)
    })
}

pub fn cen(g: &Graph, q: usize) -> usize {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let sets = connected_sets(g);
    for k in 1..=n {
        if for_each_partition(n, k, &mut |lab| centered(&sets, lab, q)) {
            return k;
        }
    }
    unreachable!()
}

pub fn cen_focused_ok(g: &Graph, phi: &[usize], s: &[usize], psi: &[usize], q: usize) -> bool {
    connected_sets(g).iter().all(|h| {
        let pc: Vec<usize> = h.iter().map(|&v| phi[v]).collect();
        if count_distinct(&pc) > q {
            return true;
        }
        let hs: Vec<(usize, usize)> = h.iter().filter(|v| s.contains(v)).map(|&v| (phi[v], psi[v])).collect();
        hs.is_empty() || count_distinct(&hs) > q || unique_exists(&hs)
    })
}

pub fn cen_focused(g: &Graph, phi: &[usize], s: &[usize], q: usize) -> usize {
    if s.is_empty() {
        return 0;
    }
    for k in 1..=s.len() {
        let hit = for_each_partition(s.len(), k, &mut |lab| {
            let mut psi = vec![0; g.n()];
            for (i, &v) in s.iter().enumerate() {
                psi[v] = lab[i];
            }
            cen_focused_ok(g, phi, s, &psi, q)
        });
        if hit {
            return k;
        }
    }
    unreachable!()
}

fn without(vs: &[usize], u: usize) -> Vec<usize> {
    vs.iter().copied().filter(|&x| x != u).collect()
}

fn comps_of(g: &Graph, vs: &[usize]) -> Vec<Vec<usize>> {
    components(g, &set_of(g.n(), vs))
}

/// Treedepth straight from the recursive definition.
pub fn td(g: &Graph) -> usize {
    fn go(g: &Graph, vs: &[usize], memo: &mut HashMap<Vec<usize>, usize>) -> usize {
        if vs.is_empty() {
            return 0;
        }
        if let Some(&v) = memo.get(vs) {
            return v;
        }
        let cs = comps_of(g, vs);
        let r = if cs.len() > 1 {
            cs.iter().map(|c| go(g, c, memo)).max().unwrap()
        } else {
            1 + vs.iter().map(|&u| go(g, &without(vs, u), memo)).min().unwrap()
        };
        memo.insert(vs.to_vec(), r);
        r
    }
    go(g, &(0..g.n()).collect::<Vec<_>>(), &mut HashMap::new())
}

pub fn ftd(g: &Graph, s: &[usize]) -> usize {
    fn go(g: &Graph, s: &[usize], vs: &[usize], memo: &mut HashMap<Vec<usize>, usize>) -> usize {
        if !vs.iter().any(|v| s.contains(v)) {
            return 0;
        }
        if let Some(&v) = memo.get(vs) {
            return v;
        }
        let cs = comps_of(g, vs);
        let r = if cs.len() > 1 {
            cs.iter().map(|c| go(g, s, c, memo)).max().unwrap()
        } else {
            1 + vs
                .iter()
                .filter(|v| s.contains(v))
                .map(|&u| go(g, s, &without(vs, u), memo))
                .min()
                .unwrap()
        };
        memo.insert(vs.to_vec(), r);
        r
    }
    go(g, s, &(0..g.n()).collect::<Vec<_>>(), &mut HashMap::new())
}

pub fn wtd(g: &Graph, t: &[usize]) -> usize {
    fn go(g: &Graph, t: &[usize], vs: &[usize]) -> usize {
        if vs.is_empty() {
            return 0;
        }
        let cs = comps_of(g, vs);
        if cs.len() > 1 {
            return cs.iter().map(|c| go(g, t, c)).max().unwrap();
        }
        vs.iter().map(|&u| 1 + t[u].max(go(g, t, &without(vs, u)))).min().unwrap()
    }
    go(g, t, &(0..g.n()).collect::<Vec<_>>())
}

/// Blocks as maximal vertex sets that are connected with no cut vertex
/// (a single edge or isolated vertex counts).
pub fn blocks(g: &Graph, vs: &[usize]) -> Vec<Vec<usize>> {
    let k = vs.len();
    let mut cands: Vec<Vec<usize>> = Vec::new();
    for m in 1u32..1 << k {
        let sub: Vec<usize> = (0..k).filter(|&i| m >> i & 1 == 1).map(|i| vs[i]).collect();
        if !is_connected(g, &sub) {
            continue;
        }
        if sub.len() >= 3 && sub.iter().any(|&x| !is_connected(g, &without(&sub, x))) {
            continue;
        }
        cands.push(sub);
    }
    let mut out: Vec<Vec<usize>> = cands
        .iter()
        .filter(|a| !cands.iter().any(|b| b.len() > a.len() && a.iter().all(|x| b.contains(x))))
        .cloned()
        .collect();
    out.sort();
    out
}

pub fn td2(g: &Graph) -> usize {
    fn go(g: &Graph, vs: &[usize], memo: &mut HashMap<Vec<usize>, usize>) -> usize {
        if vs.is_empty() {
            return 0;
        }
        if let Some(&v) = memo.get(vs) {
            return v;
        }
        let bs = blocks(g, vs);
        let r = if bs.len() > 1 {
            bs.iter().map(|b| go(g, b, memo)).max().unwrap()
        } else {
            1 + vs.iter().map(|&u| go(g, &without(vs, u), memo)).min().unwrap()
        };
        memo.insert(vs.to_vec(), r);
        r
    }
    go(g, &(0..g.n()).collect::<Vec<_>>(), &mut HashMap::new())
}

/// rtd2 as the minimum over all separations (A,B) of order <= 1 with both
/// V(A) and V(B)∖V(A) nonempty of max{rtd2(A), |A∩B| + rtd2(B − V(A))}.
pub fn rtd2(g: &Graph) -> usize {
    fn go(g: &Graph, vs: &[usize], memo: &mut HashMap<Vec<usize>, usize>) -> usize {
        match vs.len() {
            0 => return 0,
            1 => return 1,
            _ => {}
        }
        if let Some(&v) = memo.get(vs) {
            return v;
        }
        let k = vs.len();
        let mut best = usize::MAX;
        for m in 1u32..(1 << k) - 1 {
            let a: Vec<usize> = (0..k).filter(|&i| m >> i & 1 == 1).map(|i| vs[i]).collect();
            let rest: Vec<usize> = (0..k).filter(|&i| m >> i & 1 == 0).map(|i| vs[i]).collect();
            let crossing = |x: usize| rest.iter().any(|&y| g.has_edge(x, y));
            let touching: Vec<usize> = a.iter().copied().filter(|&x| crossing(x)).collect();
            let seps: Vec<Option<usize>> = match touching.len() {
                0 => {
                    let mut s = vec![None];
                    s.extend(a.iter().map(|&x| Some(x)));
                    s
                }
                1 => vec![Some(touching[0])],
                _ => vec![],
            };
            for sep in seps {
                let ra = go(g, &a, memo);
                let rb = go(g, &rest, memo) + usize::from(sep.is_some());
                best = best.min(ra.max(rb));
            }
        }
        memo.insert(vs.to_vec(), best);
        best
    }
    go(g, &(0..g.n()).collect::<Vec<_>>(), &mut HashMap::new())
}

/// Treewidth as the best elimination ordering over all permutations.
pub fn tw(g: &Graph) -> usize {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    loop {
        let mut adj: Vec<Vec<bool>> = (0..n).map(|u| (0..n).map(|v| g.has_edge(u, v)).collect()).collect();
        let mut gone = vec![false; n];
        let mut w = 0;
        for &v in &perm {
            let nb: Vec<usize> = (0..n).filter(|&u| !gone[u] && adj[v][u]).collect();
            w = w.max(nb.len());
            for &a in &nb {
                for &b in &nb {
                    if a != b {
                        adj[a][b] = true;
                    }
                }
            }
            gone[v] = true;
        }
        best = best.min(w);
        if !super::next_permutation(&mut perm) {
            break;
        }
    }
    best
}
