//! Effective-resistance queries backed by a dense Laplacian pseudoinverse,
//! with Sherman–Morrison rank-one weight updates and periodic full rebuilds.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::hypergraph::WeightedGraph;

/// Treat `1 + λ·R(f)` at or below this as a disconnecting update.
const DISCONNECT_TOL: f64 = 1e-12;

/// Default number of rank-one updates between full rebuilds is `n`.
fn default_cadence(n: usize) -> usize {
    n.max(1)
}

/// Laplacian pseudoinverse state over a connected weighted graph.
///
/// The stored matrix is the true Moore–Penrose pseudoinverse: symmetric, with
/// the all-ones vector spanning its kernel. `resistance(u, v)` is then
/// `b_{u,v}ᵀ L⁺ b_{u,v}` where `b_{u,v} = χ_u − χ_v`.
#[derive(Debug, Clone)]
pub struct ResistanceOracle {
    graph: WeightedGraph,
    pinv: DMatrix<f64>,
    update_count: usize,
    rebuild_cadence: usize,
}

impl ResistanceOracle {
    /// Builds the oracle. The positive-weight subgraph must be connected.
    pub fn build(graph: &WeightedGraph) -> Result<Self> {
        Self::with_cadence(graph, default_cadence(graph.n))
    }

    /// As `build`, but with an explicit rebuild cadence (`usize::MAX`
    /// effectively disables automatic rebuilds).
    pub fn with_cadence(graph: &WeightedGraph, rebuild_cadence: usize) -> Result<Self> {
        let pinv = pseudoinverse(graph)?;
        Ok(Self {
            graph: graph.clone(),
            pinv,
            update_count: 0,
            rebuild_cadence: rebuild_cadence.max(1),
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn update_count(&self) -> usize {
        self.update_count
    }

    pub fn into_graph(self) -> WeightedGraph {
        self.graph
    }

    /// Effective resistance between two vertices. Zero when `u == v`.
    pub fn resistance(&self, u: usize, v: usize) -> f64 {
        self.pinv[(u, u)] + self.pinv[(v, v)] - 2.0 * self.pinv[(u, v)]
    }

    /// Pair coupling `b_gᵀ L⁺ b_f`; symmetric in its arguments, and equal to
    /// the resistance when `f == g`.
    pub fn coupling(&self, f: (usize, usize), g: (usize, usize)) -> f64 {
        let (fu, fv) = f;
        let (gu, gv) = g;
        self.pinv[(gu, fu)] - self.pinv[(gu, fv)] - self.pinv[(gv, fu)] + self.pinv[(gv, fv)]
    }

    /// Shifts the weight of edge slot `edge_idx` by `lambda` and updates the
    /// pseudoinverse via the rank-one Sherman–Morrison formula. Fails if the
    /// resulting weight would be negative or the update would disconnect the
    /// graph (`1 + λ·R(f)` within tolerance of zero).
    pub fn shift_edge(&mut self, edge_idx: usize, lambda: f64) -> Result<()> {
        let edge =
            *self.graph.edges.get(edge_idx).ok_or_else(|| {
                Error::InvalidInput(format!("edge index {edge_idx} out of range"))
            })?;
        if lambda == 0.0 {
            return Ok(());
        }
        let new_weight = edge.weight + lambda;
        if new_weight < -1e-12 * edge.weight.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "shift of {lambda} drives edge {edge_idx} weight negative ({new_weight})"
            )));
        }
        let r = self.resistance(edge.u, edge.v);
        let denom = 1.0 + lambda * r;
        if denom <= DISCONNECT_TOL {
            return Err(Error::Disconnected(format!(
                "weight shift of {lambda} on ({}, {}) would disconnect the graph",
                edge.u, edge.v
            )));
        }

        // pinv ← pinv − (λ / (1 + λR)) · (pinv b)(pinv b)ᵀ
        let n = self.graph.n;
        let mut pb = Vec::with_capacity(n);
        for i in 0..n {
            pb.push(self.pinv[(i, edge.u)] - self.pinv[(i, edge.v)]);
        }
        let scale = lambda / denom;
        for i in 0..n {
            let pi = pb[i] * scale;
            for (j, &pbj) in pb.iter().enumerate() {
                self.pinv[(i, j)] -= pi * pbj;
            }
        }

        self.graph.edges[edge_idx].weight = new_weight.max(0.0);
        self.update_count += 1;
        if self.update_count >= self.rebuild_cadence {
            self.rebuild()?;
        }
        Ok(())
    }

    /// Recomputes the pseudoinverse from scratch and resets the update count.
    pub fn rebuild(&mut self) -> Result<()> {
        self.pinv = pseudoinverse(&self.graph)?;
        self.update_count = 0;
        Ok(())
    }
}

/// Dense Laplacian of the positive-weight subgraph.
pub(crate) fn laplacian(graph: &WeightedGraph) -> DMatrix<f64> {
    let n = graph.n;
    let mut l = DMatrix::zeros(n, n);
    for e in &graph.edges {
        if e.weight > 0.0 {
            l[(e.u, e.u)] += e.weight;
            l[(e.v, e.v)] += e.weight;
            l[(e.u, e.v)] -= e.weight;
            l[(e.v, e.u)] -= e.weight;
        }
    }
    l
}

/// Moore–Penrose pseudoinverse of the Laplacian, computed by grounding
/// vertex 0: invert the reduced Laplacian, re-embed with a zero row/column,
/// then project both sides onto the complement of span(𝟙). The projection
/// makes the kernel exactly the all-ones vector.
fn pseudoinverse(graph: &WeightedGraph) -> Result<DMatrix<f64>> {
    let n = graph.n;
    if n == 0 {
        return Err(Error::InvalidInput("empty graph".into()));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected(
            "resistance oracle requires a connected positive-weight subgraph".into(),
        ));
    }
    if n == 1 {
        return Ok(DMatrix::zeros(1, 1));
    }
    let l = laplacian(graph);
    let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
    let chol = Cholesky::new(reduced)
        .ok_or_else(|| Error::Conditioning("grounded Laplacian is not positive definite".into()))?;
    let inv = chol.inverse();

    // grounded generalized inverse M (zero row/col at vertex 0)
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n {
        for j in 1..n {
            m[(i, j)] = inv[(i - 1, j - 1)];
        }
    }

    // L⁺ = (I − J/n) M (I − J/n), expanded through row/column/total means
    let mut row_mean = vec![0.0; n];
    let mut col_mean = vec![0.0; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            row_mean[i] += v;
            col_mean[j] += v;
            total += v;
        }
    }
    let nf = n as f64;
    for v in row_mean.iter_mut() {
        *v /= nf;
    }
    for v in col_mean.iter_mut() {
        *v /= nf;
    }
    total /= nf * nf;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += total - row_mean[i] - col_mean[j];
        }
    }
    Ok(m)
}

/// Resistance queries on a possibly disconnected graph, answered through one
/// oracle per connected component. Queries across components return `None`.
pub struct ComponentResistance {
    comp_of: Vec<usize>,
    local_id: Vec<usize>,
    oracles: Vec<Option<ResistanceOracle>>,
}

impl ComponentResistance {
    pub fn new(graph: &WeightedGraph) -> Result<Self> {
        let comps = graph.components();
        let mut comp_of = vec![0usize; graph.n];
        let mut local_id = vec![0usize; graph.n];
        for (ci, comp) in comps.iter().enumerate() {
            for (li, &v) in comp.iter().enumerate() {
                comp_of[v] = ci;
                local_id[v] = li;
            }
        }
        let mut subs: Vec<WeightedGraph> =
            comps.iter().map(|c| WeightedGraph::new(c.len())).collect();
        for e in &graph.edges {
            if e.weight > 0.0 {
                subs[comp_of[e.u]].add_edge(local_id[e.u], local_id[e.v], e.weight)?;
            }
        }
        let mut oracles = Vec::with_capacity(comps.len());
        for sub in subs {
            if sub.n < 2 {
                oracles.push(None);
            } else {
                oracles.push(Some(ResistanceOracle::build(&sub)?));
            }
        }
        Ok(Self {
            comp_of,
            local_id,
            oracles,
        })
    }

    pub fn resistance(&self, u: usize, v: usize) -> Option<f64> {
        if self.comp_of[u] != self.comp_of[v] {
            return None;
        }
        if u == v {
            return Some(0.0);
        }
        self.oracles[self.comp_of[u]]
            .as_ref()
            .map(|o| o.resistance(self.local_id[u], self.local_id[v]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::DisjointSets;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_connected(n: usize, extra: usize, rng: &mut StdRng) -> WeightedGraph {
        let mut g = WeightedGraph::new(n);
        for v in 1..n {
            let u = rng.random_range(0..v);
            g.add_edge(u, v, rng.random_range(0.2..3.0)).unwrap();
        }
        for _ in 0..extra {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                g.add_edge(u.min(v), u.max(v), rng.random_range(0.2..3.0))
                    .unwrap();
            }
        }
        g
    }

    /// Independent reference: ground at 0 and solve the reduced system by LU.
    fn solve_resistance(g: &WeightedGraph, u: usize, v: usize) -> f64 {
        let n = g.n;
        let l = laplacian(g);
        let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
        let mut b = nalgebra::DVector::zeros(n - 1);
        if u > 0 {
            b[u - 1] += 1.0;
        }
        if v > 0 {
            b[v - 1] -= 1.0;
        }
        let y = reduced.lu().solve(&b).unwrap();
        b.dot(&y)
    }

    #[test]
    fn pinv_of_single_unit_edge() {
        let g = WeightedGraph::with_edges(2, &[(0, 1, 1.0)]).unwrap();
        let o = ResistanceOracle::build(&g).unwrap();
        // L = [[1,-1],[-1,1]], L⁺ = L/4
        assert_abs_diff_eq!(o.pinv[(0, 0)], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(o.pinv[(0, 1)], -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(o.resistance(0, 1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn triangle_resistance_is_two_thirds() {
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let o = ResistanceOracle::build(&g).unwrap();
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            assert_abs_diff_eq!(o.resistance(u, v), 2.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn path_series_law_and_bridge_law() {
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let o = ResistanceOracle::build(&g).unwrap();
        assert_abs_diff_eq!(o.resistance(0, 2), 2.0, epsilon = 1e-12);
        // single edge of weight w has R = 1/w
        let g = WeightedGraph::with_edges(2, &[(0, 1, 4.0)]).unwrap();
        let o = ResistanceOracle::build(&g).unwrap();
        assert_abs_diff_eq!(o.resistance(0, 1), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn kernel_is_all_ones() {
        let mut rng = StdRng::seed_from_u64(5);
        let g = random_connected(7, 6, &mut rng);
        let o = ResistanceOracle::build(&g).unwrap();
        for i in 0..7 {
            let s: f64 = (0..7).map(|j| o.pinv[(i, j)]).sum();
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-10);
        }
        // and L · pinv · L = L
        let l = laplacian(&g);
        let lpl = &l * &o.pinv * &l;
        for i in 0..7 {
            for j in 0..7 {
                assert_abs_diff_eq!(lpl[(i, j)], l[(i, j)], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn resistances_match_dense_solves() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let g = random_connected(8, 8, &mut rng);
            let o = ResistanceOracle::build(&g).unwrap();
            for u in 0..8 {
                for v in (u + 1)..8 {
                    assert_abs_diff_eq!(
                        o.resistance(u, v),
                        solve_resistance(&g, u, v),
                        epsilon = 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn coupling_symmetry_and_diagonal() {
        let mut rng = StdRng::seed_from_u64(17);
        let g = random_connected(9, 10, &mut rng);
        let o = ResistanceOracle::build(&g).unwrap();
        let f = (0, 4);
        let gpair = (2, 7);
        assert_abs_diff_eq!(o.coupling(f, gpair), o.coupling(gpair, f), epsilon = 1e-12);
        assert_abs_diff_eq!(o.coupling(f, f), o.resistance(0, 4), epsilon = 1e-12);
    }

    #[test]
    fn coupling_vanishes_on_dangling_edge() {
        // path 0-1-2: current from 0 to 1 never crosses (1,2)
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let o = ResistanceOracle::build(&g).unwrap();
        assert_abs_diff_eq!(o.coupling((0, 1), (1, 2)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coupling_matches_grounded_solve() {
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..10 {
            let n = 8;
            let g = random_connected(n, 9, &mut rng);
            let o = ResistanceOracle::build(&g).unwrap();
            let l = laplacian(&g);
            let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
            let lu = reduced.lu();
            for _ in 0..20 {
                let pick_pair = |rng: &mut StdRng| {
                    let a = rng.random_range(0..n);
                    let mut b = rng.random_range(0..n);
                    if b == a {
                        b = (b + 1) % n;
                    }
                    (a, b)
                };
                let f = pick_pair(&mut rng);
                let gp = pick_pair(&mut rng);
                // solve L y = b_f on the grounded system, then read b_gᵀ y
                let mut b = nalgebra::DVector::zeros(n - 1);
                if f.0 > 0 {
                    b[f.0 - 1] += 1.0;
                }
                if f.1 > 0 {
                    b[f.1 - 1] -= 1.0;
                }
                let y = lu.solve(&b).unwrap();
                let mut expected = 0.0;
                if gp.0 > 0 {
                    expected += y[gp.0 - 1];
                }
                if gp.1 > 0 {
                    expected -= y[gp.1 - 1];
                }
                assert_abs_diff_eq!(o.coupling(f, gp), expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn bridge_law() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..15 {
            let n = rng.random_range(4..10);
            let g = random_connected(n, rng.random_range(0..6), &mut rng);
            let o = ResistanceOracle::build(&g).unwrap();
            for (idx, e) in g.edges.iter().enumerate() {
                let product = e.weight * o.resistance(e.u, e.v);
                assert!(product <= 1.0 + 1e-9, "w*R = {product} above 1");
                // bridge test: does the rest of the graph still connect u to v?
                let mut dsu = DisjointSets::new(n);
                for (j, other) in g.edges.iter().enumerate() {
                    if j != idx && other.weight > 0.0 {
                        dsu.union(other.u, other.v);
                    }
                }
                let is_bridge = dsu.find(e.u) != dsu.find(e.v);
                if is_bridge {
                    assert_abs_diff_eq!(product, 1.0, epsilon = 1e-9);
                } else {
                    assert!(
                        product < 1.0 - 1e-9,
                        "parallel path should pull w*R below 1"
                    );
                }
            }
        }
    }

    #[test]
    fn shift_parallel_conductance() {
        let g = WeightedGraph::with_edges(2, &[(0, 1, 1.0)]).unwrap();
        let mut o = ResistanceOracle::with_cadence(&g, usize::MAX).unwrap();
        o.shift_edge(0, 1.0).unwrap();
        assert_abs_diff_eq!(o.resistance(0, 1), 0.5, epsilon = 1e-12);
        assert_eq!(o.graph().edges[0].weight, 2.0);
    }

    #[test]
    fn shift_zero_is_identity() {
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5)]).unwrap();
        let mut o = ResistanceOracle::build(&g).unwrap();
        let before = o.resistance(0, 2);
        o.shift_edge(1, 0.0).unwrap();
        assert_eq!(o.resistance(0, 2), before);
        assert_eq!(o.update_count(), 0);
    }

    #[test]
    fn shift_then_unshift_restores() {
        let mut rng = StdRng::seed_from_u64(23);
        let g = random_connected(10, 12, &mut rng);
        let mut o = ResistanceOracle::with_cadence(&g, usize::MAX).unwrap();
        let before: Vec<f64> = (0..10)
            .flat_map(|u| ((u + 1)..10).map(move |v| (u, v)))
            .map(|(u, v)| o.resistance(u, v))
            .collect();
        o.shift_edge(3, 0.8).unwrap();
        o.shift_edge(3, -0.8).unwrap();
        let after: Vec<f64> = (0..10)
            .flat_map(|u| ((u + 1)..10).map(move |v| (u, v)))
            .map(|(u, v)| o.resistance(u, v))
            .collect();
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn chained_shifts_match_fresh_rebuild() {
        let mut rng = StdRng::seed_from_u64(31);
        let g = random_connected(12, 20, &mut rng);
        let mut o = ResistanceOracle::with_cadence(&g, usize::MAX).unwrap();
        for _ in 0..60 {
            let idx = rng.random_range(0..o.graph().edges.len());
            let w = o.graph().edges[idx].weight;
            let lambda = rng.random_range(-0.5..1.0f64).max(-0.9 * w);
            o.shift_edge(idx, lambda).unwrap();
        }
        let fresh = ResistanceOracle::build(o.graph()).unwrap();
        for u in 0..12 {
            for v in (u + 1)..12 {
                assert_abs_diff_eq!(o.resistance(u, v), fresh.resistance(u, v), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn rayleigh_monotonicity() {
        let mut rng = StdRng::seed_from_u64(37);
        let g = random_connected(8, 8, &mut rng);
        let mut o = ResistanceOracle::with_cadence(&g, usize::MAX).unwrap();
        let before: Vec<f64> = (0..8)
            .flat_map(|u| ((u + 1)..8).map(move |v| (u, v)))
            .map(|(u, v)| o.resistance(u, v))
            .collect();
        o.shift_edge(5, 2.0).unwrap();
        let after: Vec<f64> = (0..8)
            .flat_map(|u| ((u + 1)..8).map(move |v| (u, v)))
            .map(|(u, v)| o.resistance(u, v))
            .collect();
        for (b, a) in before.iter().zip(&after) {
            assert!(*a <= *b + 1e-12);
        }
    }

    #[test]
    fn disconnecting_update_is_rejected() {
        // removing a bridge entirely: 1 + (−w)·(1/w) = 0
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let mut o = ResistanceOracle::build(&g).unwrap();
        let err = o.shift_edge(0, -1.0).unwrap_err();
        assert!(matches!(err, Error::Disconnected(_)));
    }

    #[test]
    fn negative_weight_is_rejected() {
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 1.0)]).unwrap();
        let mut o = ResistanceOracle::build(&g).unwrap();
        assert!(o.shift_edge(0, -1.5).is_err());
    }

    #[test]
    fn disconnected_build_fails() {
        let g = WeightedGraph::with_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(
            ResistanceOracle::build(&g),
            Err(Error::Disconnected(_))
        ));
        // zero-weight edges do not connect
        let g = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 0.0)]).unwrap();
        assert!(ResistanceOracle::build(&g).is_err());
    }

    #[test]
    fn metric_triangle_inequality() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..10 {
            let g = random_connected(9, 9, &mut rng);
            let o = ResistanceOracle::build(&g).unwrap();
            for _ in 0..50 {
                let (u, v, w) = (
                    rng.random_range(0..9),
                    rng.random_range(0..9),
                    rng.random_range(0..9),
                );
                assert!(o.resistance(u, w) <= o.resistance(u, v) + o.resistance(v, w) + 1e-9);
            }
        }
    }

    #[test]
    fn foster_sum_over_random_graphs() {
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..10 {
            let n = rng.random_range(3..12);
            let g = random_connected(n, n, &mut rng);
            let o = ResistanceOracle::build(&g).unwrap();
            let sum: f64 = g
                .edges
                .iter()
                .map(|e| e.weight * o.resistance(e.u, e.v))
                .sum();
            assert_abs_diff_eq!(sum, (n - 1) as f64, epsilon = 1e-8 * (n - 1) as f64);
        }
    }

    #[test]
    fn component_resistance_handles_splits() {
        let g = WeightedGraph::with_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 2.0)]).unwrap();
        let cr = ComponentResistance::new(&g).unwrap();
        assert_abs_diff_eq!(cr.resistance(0, 2).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cr.resistance(3, 4).unwrap(), 0.5, epsilon = 1e-12);
        assert!(cr.resistance(0, 3).is_none());
    }
}
