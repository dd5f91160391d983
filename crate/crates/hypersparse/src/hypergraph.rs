//! Hypergraphs, weighted multigraphs, and the energy / quadratic-form
//! evaluators everything else in the crate is measured against.

use crate::error::{Error, Result};

/// A hyperedge: a sorted, duplicate-free set of at least two vertices with a
/// positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperEdge {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

impl HyperEdge {
    /// Sorts and deduplicates the vertex list. Fails if fewer than two
    /// distinct vertices remain or the weight is not a positive finite value.
    pub fn new(mut vertices: Vec<usize>, weight: f64) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "hyperedge needs at least 2 distinct vertices, got {:?}",
                vertices
            )));
        }
        if weight <= 0.0 || !weight.is_finite() {
            return Err(Error::InvalidInput(format!(
                "hyperedge weight must be positive and finite, got {weight}"
            )));
        }
        Ok(Self { vertices, weight })
    }

    pub fn arity(&self) -> usize {
        self.vertices.len()
    }

    /// Number of clique slots on this hyperedge's support, C(|e|, 2).
    pub fn pair_count(&self) -> usize {
        let k = self.vertices.len();
        k * (k - 1) / 2
    }
}

/// A weighted hypergraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    pub n: usize,
    pub edges: Vec<HyperEdge>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<HyperEdge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("vertex count must be positive".into()));
        }
        for (i, e) in edges.iter().enumerate() {
            if let Some(&v) = e.vertices.last() {
                if v >= n {
                    return Err(Error::InvalidInput(format!(
                        "hyperedge {i} references vertex {v}, but n = {n}"
                    )));
                }
            }
        }
        Ok(Self { n, edges })
    }

    /// Builds from raw records, normalizing as it goes: repeated vertices in
    /// a record are deduplicated silently, and records left with fewer than
    /// two vertices are dropped with a warning (their energy is identically
    /// zero). Out-of-range ids and nonpositive weights are hard errors.
    pub fn from_records(n: usize, records: &[(Vec<usize>, f64)]) -> Result<(Self, Diagnostics)> {
        let mut diag = validate(n, records);
        if n == 0 {
            return Err(Error::InvalidInput("vertex count must be positive".into()));
        }
        if let Some(&i) = diag.out_of_range.first() {
            let bad = records[i].0.iter().copied().find(|&v| v >= n).unwrap();
            return Err(Error::InvalidInput(format!(
                "record {i} references vertex {bad}, but n = {n}"
            )));
        }
        if let Some(&i) = diag.invalid_weights.first() {
            return Err(Error::InvalidInput(format!(
                "record {i} has invalid weight {}",
                records[i].1
            )));
        }
        let mut edges = Vec::with_capacity(records.len());
        for (vs, w) in records {
            let mut vs = vs.clone();
            vs.sort_unstable();
            vs.dedup();
            if vs.len() < 2 {
                continue; // already recorded in diag.dropped_edges
            }
            edges.push(HyperEdge {
                vertices: vs,
                weight: *w,
            });
        }
        let h = Hypergraph { n, edges };
        diag.connected = h.is_connected();
        if !diag.connected {
            diag.warnings.push("hypergraph is disconnected".into());
        }
        Ok((h, diag))
    }

    /// Maximum hyperedge cardinality (0 for an edgeless hypergraph).
    pub fn rank(&self) -> usize {
        self.edges.iter().map(|e| e.arity()).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).fold(None, |acc, w| {
            Some(match acc {
                Some(m) if m <= w => m,
                _ => w,
            })
        })
    }

    /// True when the union of hyperedge supports spans all `n` vertices as a
    /// single component.
    pub fn is_connected(&self) -> bool {
        let mut dsu = DisjointSets::new(self.n);
        for e in &self.edges {
            for pair in e.vertices.windows(2) {
                dsu.union(pair[0], pair[1]);
            }
        }
        dsu.component_count() == 1
    }

    /// Vertex sets of the connected components, each sorted, ordered by their
    /// smallest vertex. Isolated vertices form singleton components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut dsu = DisjointSets::new(self.n);
        for e in &self.edges {
            for pair in e.vertices.windows(2) {
                dsu.union(pair[0], pair[1]);
            }
        }
        dsu.components()
    }
}

/// Report-only diagnostics for raw hyperedge records.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Record indices that contained repeated vertices.
    pub deduplicated: Vec<usize>,
    /// Record indices dropped because fewer than two distinct vertices remain.
    pub dropped_edges: Vec<usize>,
    /// Record indices with nonpositive or nonfinite weights.
    pub invalid_weights: Vec<usize>,
    /// Record indices referencing vertices outside `0..n`.
    pub out_of_range: Vec<usize>,
    pub connected: bool,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn is_clean(&self) -> bool {
        self.deduplicated.is_empty()
            && self.dropped_edges.is_empty()
            && self.invalid_weights.is_empty()
            && self.out_of_range.is_empty()
            && self.connected
    }
}

/// Inspects raw records without building anything. Never fails.
pub fn validate(n: usize, records: &[(Vec<usize>, f64)]) -> Diagnostics {
    let mut diag = Diagnostics::default();
    let mut dsu = DisjointSets::new(n);
    for (i, (vs, w)) in records.iter().enumerate() {
        let mut sorted = vs.clone();
        sorted.sort_unstable();
        let before = sorted.len();
        sorted.dedup();
        if sorted.len() != before {
            diag.deduplicated.push(i);
            diag.warnings
                .push(format!("record {i}: repeated vertices deduplicated"));
        }
        if sorted.len() < 2 {
            diag.dropped_edges.push(i);
            diag.warnings.push(format!(
                "record {i}: fewer than 2 distinct vertices, dropped (zero energy)"
            ));
        }
        if *w <= 0.0 || !w.is_finite() {
            diag.invalid_weights.push(i);
            diag.warnings
                .push(format!("record {i}: invalid weight {w}"));
        }
        if sorted.iter().any(|&v| v >= n) {
            diag.out_of_range.push(i);
            diag.warnings
                .push(format!("record {i}: vertex id out of range"));
        } else {
            for pair in sorted.windows(2) {
                dsu.union(pair[0], pair[1]);
            }
        }
    }
    diag.connected = n > 0 && dsu.component_count() == 1;
    if !diag.connected {
        diag.warnings.push("hypergraph is disconnected".into());
    }
    diag
}

/// One edge of a weighted multigraph. Parallel edges are distinct entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl GraphEdge {
    pub fn pair(&self) -> (usize, usize) {
        (self.u, self.v)
    }
}

/// A weighted ordinary multigraph on vertices `0..n`. Zero weights are
/// allowed (weight assignments address zero-weight slots); edges with zero
/// weight contribute nothing to the Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<GraphEdge>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn with_edges(n: usize, list: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v, w) in list {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<()> {
        if u == v {
            return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::InvalidInput(format!(
                "edge ({u},{v}) out of range for n = {}",
                self.n
            )));
        }
        if weight < 0.0 || !weight.is_finite() {
            return Err(Error::InvalidInput(format!(
                "edge weight must be >= 0, got {weight}"
            )));
        }
        self.edges.push(GraphEdge { u, v, weight });
        Ok(())
    }

    /// The complete graph on `n` vertices with unit weights.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.edges.push(GraphEdge { u, v, weight: 1.0 });
            }
        }
        g
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Connectivity of the positive-weight subgraph over all `n` vertices.
    pub fn is_connected(&self) -> bool {
        let mut dsu = DisjointSets::new(self.n);
        for e in &self.edges {
            if e.weight > 0.0 {
                dsu.union(e.u, e.v);
            }
        }
        self.n > 0 && dsu.component_count() == 1
    }

    /// Components of the positive-weight subgraph, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut dsu = DisjointSets::new(self.n);
        for e in &self.edges {
            if e.weight > 0.0 {
                dsu.union(e.u, e.v);
            }
        }
        dsu.components()
    }
}

/// Hypergraph energy: `Q_H(x) = Σ_e w(e) · max_{u,v ∈ e} (x_u − x_v)²`.
///
/// The inner maximum over pairs equals (max − min)² of `x` on the support.
pub fn hyper_energy(h: &Hypergraph, x: &[f64]) -> Result<f64> {
    if x.len() != h.n {
        return Err(Error::InvalidInput(format!(
            "potential vector has length {}, expected {}",
            x.len(),
            h.n
        )));
    }
    let mut total = 0.0;
    for e in &h.edges {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &e.vertices {
            lo = lo.min(x[v]);
            hi = hi.max(x[v]);
        }
        let d = hi - lo;
        total += e.weight * d * d;
    }
    Ok(total)
}

/// Graph quadratic form: `xᵀ L_G x = Σ_{(u,v)} w(u,v) (x_u − x_v)²`.
pub fn graph_quadratic(g: &WeightedGraph, x: &[f64]) -> Result<f64> {
    if x.len() != g.n {
        return Err(Error::InvalidInput(format!(
            "potential vector has length {}, expected {}",
            x.len(),
            g.n
        )));
    }
    let mut total = 0.0;
    for e in &g.edges {
        let d = x[e.u] - x[e.v];
        total += e.weight * d * d;
    }
    Ok(total)
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        true
    }

    pub(crate) fn component_count(&self) -> usize {
        self.components
    }

    fn components(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            let r = self.find(v);
            by_root[r].push(v);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}
