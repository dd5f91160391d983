//! Spanning-tree potential `Ψ(G) = log Σ_{T} Π_{f∈T} w(f)` and its rank-one
//! update law. Ψ is the progress measure that certifies balancing terminates:
//! shifting weight λ onto a pair with resistance R changes Ψ by exactly
//! `log(1 + λR)`.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::hypergraph::{DisjointSets, WeightedGraph};
use crate::resistance::laplacian;

/// Largest vertex count accepted by the brute-force enumerators.
pub const BRUTE_MAX_VERTICES: usize = 9;

/// ST-potential via the matrix-tree theorem: the weighted tree sum equals any
/// principal (n−1)×(n−1) minor of the Laplacian, so Ψ is its log-determinant.
/// Computed on the grounded Laplacian by Cholesky to keep everything in log
/// space (raw tree sums overflow quickly).
pub fn st_potential(g: &WeightedGraph) -> Result<f64> {
    if g.n == 0 {
        return Err(Error::InvalidInput("empty graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected("ST-potential is undefined".into()));
    }
    if g.n == 1 {
        return Ok(0.0);
    }
    let l = laplacian(g);
    let reduced = l.view((1, 1), (g.n - 1, g.n - 1)).into_owned();
    let chol = Cholesky::new(reduced)
        .ok_or_else(|| Error::Conditioning("grounded Laplacian is not positive definite".into()))?;
    let mut log_det = 0.0;
    let lmat = chol.l();
    for i in 0..(g.n - 1) {
        log_det += lmat[(i, i)].ln();
    }
    Ok(2.0 * log_det)
}

/// Literal enumeration of Σ_T Π w(f) over all spanning trees. Guarded to
/// `n ≤ 9`; returns 0 for disconnected graphs (no spanning tree exists).
pub(crate) fn spanning_tree_sum(g: &WeightedGraph) -> Result<f64> {
    if g.n == 0 {
        return Err(Error::InvalidInput("empty graph".into()));
    }
    if g.n > BRUTE_MAX_VERTICES {
        return Err(Error::Guard(format!(
            "tree enumeration is limited to n <= {BRUTE_MAX_VERTICES}, got {}",
            g.n
        )));
    }
    if g.n == 1 {
        return Ok(1.0);
    }
    let edges: Vec<_> = g.edges.iter().filter(|e| e.weight > 0.0).collect();
    let k = g.n - 1;
    if edges.len() < k {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    let mut choice: Vec<usize> = (0..k).collect();
    loop {
        let mut dsu = DisjointSets::new(g.n);
        let mut acyclic = true;
        let mut product = 1.0;
        for &i in &choice {
            let e = edges[i];
            if !dsu.union(e.u, e.v) {
                acyclic = false;
                break;
            }
            product *= e.weight;
        }
        if acyclic && dsu.component_count() == 1 {
            sum += product;
        }
        // advance the k-combination over edge indices
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(sum);
            }
            pos -= 1;
            if choice[pos] != edges.len() - k + pos {
                break;
            }
        }
        choice[pos] += 1;
        for j in (pos + 1)..k {
            choice[j] = choice[j - 1] + 1;
        }
    }
}

/// Ψ by brute enumeration; the reference `st_potential` is checked against.
pub fn st_potential_brute(g: &WeightedGraph) -> Result<f64> {
    let sum = spanning_tree_sum(g)?;
    if sum <= 0.0 {
        return Err(Error::Disconnected("no spanning tree".into()));
    }
    Ok(sum.ln())
}

/// Closed-form potential change for a weight shift: `Ψ(G + λ·f) − Ψ(G) =
/// log(1 + λ·R_G(f))`. Exposed on raw `(R, λ)` pairs so balancing can log
/// potential gains without recomputing Ψ.
pub fn update_delta(r_f: f64, lambda: f64) -> Result<f64> {
    let arg = 1.0 + lambda * r_f;
    if arg <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + lambda*R must be positive, got {arg} (lambda={lambda}, R={r_f})"
        )));
    }
    Ok(arg.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::ResistanceOracle;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn triangle(w: [f64; 3]) -> WeightedGraph {
        WeightedGraph::with_edges(3, &[(0, 1, w[0]), (1, 2, w[1]), (0, 2, w[2])]).unwrap()
    }

    #[test]
    fn unit_triangle_has_three_trees() {
        let g = triangle([1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(st_potential(&g).unwrap(), 3.0f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            st_potential_brute(&g).unwrap(),
            3.0f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_edge_of_weight_w() {
        let g = WeightedGraph::with_edges(2, &[(0, 1, 5.0)]).unwrap();
        assert_abs_diff_eq!(st_potential(&g).unwrap(), 5.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn unit_path_has_one_tree() {
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_abs_diff_eq!(st_potential_brute(&g).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn weighted_triangle_tree_products() {
        // trees are the three edge pairs: 1·2 + 2·3 + 1·3 = 11
        let g = triangle([1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(st_potential(&g).unwrap(), 11.0f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            st_potential_brute(&g).unwrap(),
            11.0f64.ln(),
            epsilon = 1e-12
        );
    }

    fn random_connected(n: usize, extra: usize, rng: &mut StdRng) -> WeightedGraph {
        let mut g = WeightedGraph::new(n);
        for v in 1..n {
            let u = rng.random_range(0..v);
            g.add_edge(u, v, rng.random_range(0.3..2.5)).unwrap();
        }
        for _ in 0..extra {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                g.add_edge(u.min(v), u.max(v), rng.random_range(0.3..2.5))
                    .unwrap();
            }
        }
        g
    }

    #[test]
    fn log_det_matches_enumeration() {
        let mut rng = StdRng::seed_from_u64(301);
        for _ in 0..25 {
            let n = rng.random_range(2..7);
            let g = random_connected(n, rng.random_range(0..5), &mut rng);
            let fast = st_potential(&g).unwrap();
            let brute = st_potential_brute(&g).unwrap();
            assert_abs_diff_eq!(fast, brute, epsilon = 1e-9 * brute.abs().max(1.0));
        }
    }

    #[test]
    fn parallel_edges_merge_invariance() {
        let mut g = triangle([1.0, 2.0, 3.0]);
        g.add_edge(0, 1, 0.7).unwrap();
        let merged = triangle([1.7, 2.0, 3.0]);
        assert_abs_diff_eq!(
            st_potential(&g).unwrap(),
            st_potential(&merged).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn update_law_against_recomputation() {
        let mut rng = StdRng::seed_from_u64(307);
        for _ in 0..60 {
            let n = rng.random_range(3..8);
            let mut g = random_connected(n, rng.random_range(0..6), &mut rng);
            let oracle = ResistanceOracle::build(&g).unwrap();
            let idx = rng.random_range(0..g.edges.len());
            let e = g.edges[idx];
            let r = oracle.resistance(e.u, e.v);
            // include negative shifts that keep the weight nonnegative
            let lambda = rng.random_range(-0.9 * e.weight..1.5);
            let before = st_potential(&g).unwrap();
            g.edges[idx].weight += lambda;
            let after = st_potential(&g).unwrap();
            assert_abs_diff_eq!(
                after - before,
                update_delta(r, lambda).unwrap(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn update_delta_edges() {
        assert_abs_diff_eq!(
            update_delta(1.0, 1.0).unwrap(),
            2.0f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(update_delta(3.7, 0.0).unwrap(), 0.0);
        assert!(update_delta(1.0, -1.0).is_err());
    }

    #[test]
    fn monotone_in_edge_weight() {
        let mut rng = StdRng::seed_from_u64(311);
        for _ in 0..20 {
            let n = rng.random_range(3..7);
            let mut g = random_connected(n, 3, &mut rng);
            let before = st_potential(&g).unwrap();
            let idx = rng.random_range(0..g.edges.len());
            g.edges[idx].weight += rng.random_range(0.0..2.0);
            assert!(st_potential(&g).unwrap() >= before - 1e-12);
        }
    }

    #[test]
    fn guards_and_connectivity() {
        let g = WeightedGraph::with_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(st_potential(&g), Err(Error::Disconnected(_))));
        assert!(matches!(
            st_potential_brute(&g),
            Err(Error::Disconnected(_))
        ));
        let big = WeightedGraph::complete(10);
        assert!(matches!(st_potential_brute(&big), Err(Error::Guard(_))));
        assert!(st_potential(&big).is_ok());
    }
}
