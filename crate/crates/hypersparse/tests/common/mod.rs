#![allow(dead_code)] // each test binary uses its own subset of the helpers

use hypersparse::hypergraph::WeightedGraph;
use rand::rngs::StdRng;
use rand::Rng;

/// Random connected weighted graph: a random spanning tree plus `extra`
/// random edges, weights uniform in [lo, hi).
pub fn random_connected_graph(
    n: usize,
    extra: usize,
    lo: f64,
    hi: f64,
    rng: &mut StdRng,
) -> WeightedGraph {
    let mut g = WeightedGraph::new(n);
    for v in 1..n {
        let u = rng.random_range(0..v);
        g.add_edge(u, v, rng.random_range(lo..hi)).unwrap();
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            g.add_edge(u.min(v), u.max(v), rng.random_range(lo..hi))
                .unwrap();
        }
    }
    g
}

/// All unordered vertex pairs of a graph.
pub fn all_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| ((u + 1)..n).map(move |v| (u, v)))
}
