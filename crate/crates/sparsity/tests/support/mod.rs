#![allow(dead_code)]

pub mod naive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsity::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(r: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

pub fn random_tree(r: &mut impl Rng, n: usize) -> Graph {
    let mut g = Graph::new(n);
    for v in 1..n {
        let p = r.gen_range(0..v);
        g.add_edge(p, v);
    }
    g
}

/// Every labelled graph on n vertices (n <= 6).
pub fn all_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let m = pairs.len();
    (0u64..1 << m).map(move |code| {
        let mut g = Graph::new(n);
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if code >> i & 1 == 1 {
                g.add_edge(u, v);
            }
        }
        g
    })
}

/// One graph per isomorphism class, n = 0..=n_max.
pub fn graphs_up_to(n_max: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for n in 0..=n_max {
        for g in all_graphs(n) {
            if seen.insert(canon(&g)) {
                out.push(g);
            }
        }
    }
    out
}

/// Canonical form by brute force over permutations (n <= 6).
pub fn canon(g: &Graph) -> (usize, Vec<(usize, usize)>) {
    let n = g.n();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut e: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    (n, best.unwrap_or_default())
}

pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn ceil_log2(q: usize) -> usize {
    let mut s = 0;
    while (1usize << s) < q {
        s += 1;
    }
    s
}
