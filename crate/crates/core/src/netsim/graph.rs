//! Random graph generation, shortest-path routing and monitor placement.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Undirected simple graph over nodes `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

/// `routes[a][b]`: edge indices along the shortest path from `a` to `b`,
/// lexicographically smallest node sequence on ties.
pub type Routes = Vec<Vec<Vec<usize>>>;

impl Graph {
    /// Builds a graph from normalized edges (`u < v`, no duplicates).
    pub fn from_edges(n: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            if e.0 == e.1 || e.1 >= n {
                return Err(Error::invalid(format!("bad edge {:?}", e)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, edges, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Index of the undirected edge `{u, v}`, if present.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    visited += 1;
                    stack.push(w);
                }
            }
        }
        visited == self.n
    }

    /// Hop distances from `source` to every node (unit edge weights).
    fn bfs_dist(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[source] = 0;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Samples a connected Erdős–Rényi graph `G(n, p)`, retrying with fresh
/// draws from the seeded stream until connected (at most 10_000 attempts).
pub fn gen_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("graph needs at least 2 nodes"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid("edge probability must lie in (0, 1]"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let graph = Graph::from_edges(n, edges)?;
        if graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(Error::Generation(format!(
        "no connected graph G({n}, {p}) within 10000 attempts"
    )))
}

/// All-pairs shortest paths with deterministic tie-breaking: among all
/// shortest paths the lexicographically smallest node sequence is chosen,
/// by always stepping to the smallest-numbered neighbor that still lies on
/// a shortest path.
pub fn compute_routes(graph: &Graph) -> Routes {
    let n = graph.n();
    let dist_to: Vec<Vec<usize>> = (0..n).map(|t| graph.bfs_dist(t)).collect();
    let mut routes = vec![vec![Vec::new(); n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let dist = &dist_to[b];
            let mut path = Vec::with_capacity(dist[a]);
            let mut cur = a;
            while cur != b {
                let next = graph
                    .neighbors(cur)
                    .iter()
                    .copied()
                    .find(|&w| dist[w] + 1 == dist[cur])
                    .expect("connected graph has a descending neighbor");
                path.push(graph.edge_index(cur, next).expect("adjacent edge exists"));
                cur = next;
            }
            routes[a][b] = path;
        }
    }
    routes
}

/// Picks a uniform random `k`-subset of edges to host monitors, optionally
/// forbidding one named edge. Returns ascending edge indices; monitor `i`
/// sits on the `i`-th returned edge.
pub fn place_monitors(
    graph: &Graph,
    k: usize,
    exclude: Option<(usize, usize)>,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    let excluded = exclude.and_then(|(u, v)| graph.edge_index(u, v));
    let pool: Vec<usize> = (0..graph.edges().len())
        .filter(|&e| Some(e) != excluded)
        .collect();
    if k > pool.len() {
        return Err(Error::invalid(format!(
            "cannot place {k} monitors on {} available edges",
            pool.len()
        )));
    }
    let mut chosen: Vec<usize> = sample(rng, pool.len(), k).iter().map(|i| pool[i]).collect();
    chosen.sort_unstable();
    Ok(chosen)
}
