//! Reference implementations used only by tests. None of these call into
//! the crate's tree builders.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::Rng;

/// Undirected weighted edge list over nodes `0..n`.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn bfs_connected(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b, _) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut q = VecDeque::from([0]);
    let mut count = 1;
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                q.push_back(v);
            }
        }
    }
    count == n
}

/// All-pairs shortest distances.
pub fn floyd_warshall(g: &EdgeList) -> Vec<Vec<f64>> {
    let n = g.n;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in &g.edges {
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Minimum total weight over every spanning tree, by enumerating all
/// (n-1)-edge subsets.
pub fn brute_force_mst_weight(g: &EdgeList) -> f64 {
    fn recurse(g: &EdgeList, start: usize, chosen: &mut Vec<(usize, usize, f64)>, best: &mut f64) {
        if chosen.len() == g.n - 1 {
            // n-1 edges that connect n nodes form a spanning tree.
            if bfs_connected(g.n, chosen) {
                *best = best.min(chosen.iter().map(|e| e.2).sum());
            }
            return;
        }
        for i in start..g.edges.len() {
            chosen.push(g.edges[i]);
            recurse(g, i + 1, chosen, best);
            chosen.pop();
        }
    }
    let mut best = f64::INFINITY;
    recurse(g, 0, &mut Vec::new(), &mut best);
    best
}

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `extra_p`. Weights are drawn from `weight`.
pub fn random_connected_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    extra_p: f64,
    mut weight: impl FnMut(&mut R) -> f64,
) -> EdgeList {
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u][v] = true;
        edges.push((u, v, weight(rng)));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !present[a][b] && rng.random::<f64>() < extra_p {
                present[a][b] = true;
                edges.push((a, b, weight(rng)));
            }
        }
    }
    EdgeList { n, edges }
}
