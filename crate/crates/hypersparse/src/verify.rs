//! Quality checks for sparsifier candidates, plus brute-force references.
//!
//! Hypergraph energy ratios cannot be certified exactly (the energy is a max
//! of quadratics), so hypergraph checks are necessary-condition style: random
//! probe vectors plus exhaustive cut enumeration at small scale. Ordinary
//! graphs get the exact certificate via generalized eigenvalues of the
//! Laplacian pencil.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hypergraph::{hyper_energy, Hypergraph, WeightedGraph};
use crate::potential::spanning_tree_sum;
use crate::resistance::laplacian;
use crate::rng::{stream, TAG_PROBE};
use rand::Rng;
use rand_distr::StandardNormal;

/// Probe families evaluated by [`probe_check_with`]. Counts are per family.
#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    pub gaussian: usize,
    pub rademacher: usize,
    pub sparse_pairs: usize,
    pub coordinates: bool,
    /// Enumerate all cuts when the vertex count is at most this.
    pub cut_limit: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            gaussian: 200,
            rademacher: 200,
            sparse_pairs: 200,
            coordinates: true,
            cut_limit: 16,
        }
    }
}

/// Worst-case energy-ratio statistics over all evaluated probes and cuts.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub max_over_ratio: f64,
    pub min_under_ratio: f64,
    pub worst_probe: Vec<f64>,
    pub probes: usize,
    pub cuts: usize,
    pub pass: bool,
    pub eps: f64,
    pub seed: u64,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        format!(
            "worst_over = {}\nworst_under = {}\nprobes = {}\ncuts = {}\npass = {}\nseed = {}",
            self.max_over_ratio, self.min_under_ratio, self.probes, self.cuts, self.pass, self.seed
        )
    }
}

/// Compares energies of `sparse` against `original` on random Gaussian,
/// Rademacher and two-sparse probes (`num_probes` of each), all coordinate
/// vectors, and every cut at small scale. `pass` holds when all ratios stay
/// inside `[1−ε, 1+ε]`.
pub fn probe_check(
    original: &Hypergraph,
    sparse: &Hypergraph,
    eps: f64,
    num_probes: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let opts = ProbeOptions {
        gaussian: num_probes,
        rademacher: num_probes,
        sparse_pairs: num_probes,
        ..ProbeOptions::default()
    };
    probe_check_with(original, sparse, eps, &opts, seed)
}

pub fn probe_check_with(
    original: &Hypergraph,
    sparse: &Hypergraph,
    eps: f64,
    opts: &ProbeOptions,
    seed: u64,
) -> Result<VerificationReport> {
    if original.n != sparse.n {
        return Err(Error::InvalidInput(format!(
            "vertex counts differ: {} vs {}",
            original.n, sparse.n
        )));
    }
    let n = original.n;
    let mut tally = RatioTally::new();
    let mut probes = 0usize;

    let mut rng = stream(seed, TAG_PROBE, 0);
    for _ in 0..opts.gaussian {
        let x: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        tally.observe(original, sparse, &x)?;
        probes += 1;
    }
    for _ in 0..opts.rademacher {
        let x: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        tally.observe(original, sparse, &x)?;
        probes += 1;
    }
    for _ in 0..opts.sparse_pairs {
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n);
        if v == u {
            v = (v + 1) % n;
        }
        let mut x = vec![0.0; n];
        x[u] = 1.0;
        x[v] = -1.0;
        tally.observe(original, sparse, &x)?;
        probes += 1;
    }
    if opts.coordinates {
        for v in 0..n {
            let mut x = vec![0.0; n];
            x[v] = 1.0;
            tally.observe(original, sparse, &x)?;
            probes += 1;
        }
    }
    let mut cuts = 0usize;
    if n >= 2 && n <= opts.cut_limit {
        for mask in 1u64..(1u64 << (n - 1)) {
            let x: Vec<f64> = (0..n).map(|v| ((mask >> v) & 1) as f64).collect();
            tally.observe(original, sparse, &x)?;
            cuts += 1;
        }
    }

    let (max_over, min_under, worst) = tally.finish();
    Ok(VerificationReport {
        max_over_ratio: max_over,
        min_under_ratio: min_under,
        worst_probe: worst,
        probes,
        cuts,
        pass: min_under >= 1.0 - eps && max_over <= 1.0 + eps,
        eps,
        seed,
    })
}

struct RatioTally {
    max_over: f64,
    min_under: f64,
    worst: Vec<f64>,
    worst_dev: f64,
    any: bool,
}

impl RatioTally {
    fn new() -> Self {
        Self {
            max_over: f64::NEG_INFINITY,
            min_under: f64::INFINITY,
            worst: Vec::new(),
            worst_dev: 0.0,
            any: false,
        }
    }

    fn observe(&mut self, original: &Hypergraph, sparse: &Hypergraph, x: &[f64]) -> Result<()> {
        let q = hyper_energy(original, x)?;
        let qt = hyper_energy(sparse, x)?;
        if q == 0.0 && qt == 0.0 {
            return Ok(());
        }
        let ratio = if q == 0.0 { f64::INFINITY } else { qt / q };
        self.any = true;
        self.max_over = self.max_over.max(ratio);
        self.min_under = self.min_under.min(ratio);
        let dev = (ratio - 1.0).abs().max(if ratio > 0.0 {
            (1.0 / ratio - 1.0).abs()
        } else {
            f64::INFINITY
        });
        if dev >= self.worst_dev {
            self.worst_dev = dev;
            self.worst = x.to_vec();
        }
        Ok(())
    }

    fn finish(self) -> (f64, f64, Vec<f64>) {
        if self.any {
            (self.max_over, self.min_under, self.worst)
        } else {
            (1.0, 1.0, self.worst)
        }
    }
}

/// Exhaustive cut comparison: the ratio of cut weights over every one of the
/// `2^{n−1} − 1` nontrivial cuts. A necessary condition for spectral quality
/// since cuts are the indicator-vector special case of the energy.
#[derive(Debug, Clone)]
pub struct CutCheck {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Vertices of the side achieving the worst deviation from 1.
    pub worst_cut: Vec<usize>,
    pub cuts: usize,
}

impl CutCheck {
    pub fn within(&self, eps: f64) -> bool {
        self.min_ratio >= 1.0 - eps && self.max_ratio <= 1.0 + eps
    }
}

pub const CUT_ENUM_MAX_VERTICES: usize = 20;

pub fn cut_check(original: &Hypergraph, sparse: &Hypergraph) -> Result<CutCheck> {
    if original.n != sparse.n {
        return Err(Error::InvalidInput("vertex counts differ".into()));
    }
    let n = original.n;
    if n < 2 {
        return Err(Error::InvalidInput("cut enumeration needs n >= 2".into()));
    }
    if n > CUT_ENUM_MAX_VERTICES {
        return Err(Error::Guard(format!(
            "cut enumeration is limited to n <= {CUT_ENUM_MAX_VERTICES}, got {n}"
        )));
    }
    let mask_of = |h: &Hypergraph| -> Vec<(u64, f64)> {
        h.edges
            .iter()
            .map(|e| (e.vertices.iter().fold(0u64, |m, &v| m | (1 << v)), e.weight))
            .collect()
    };
    let orig = mask_of(original);
    let spar = mask_of(sparse);
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    let cut_weight = |edges: &[(u64, f64)], side: u64| -> f64 {
        edges
            .iter()
            .filter(|(m, _)| m & side != 0 && m & (full ^ side) != 0)
            .map(|(_, w)| w)
            .sum()
    };

    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut worst_side = 0u64;
    let mut worst_dev = -1.0;
    let mut cuts = 0usize;
    for side in 1u64..(1u64 << (n - 1)) {
        let q = cut_weight(&orig, side);
        let qt = cut_weight(&spar, side);
        cuts += 1;
        if q == 0.0 && qt == 0.0 {
            continue;
        }
        let ratio = if q == 0.0 { f64::INFINITY } else { qt / q };
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        let dev = (ratio - 1.0).abs();
        if dev > worst_dev {
            worst_dev = dev;
            worst_side = side;
        }
    }
    if cuts == 0 || min_ratio > max_ratio {
        min_ratio = 1.0;
        max_ratio = 1.0;
    }
    let worst_cut = (0..n).filter(|v| (worst_side >> v) & 1 == 1).collect();
    Ok(CutCheck {
        min_ratio,
        max_ratio,
        worst_cut,
        cuts,
    })
}

/// Orthonormal basis of the complement of the all-ones vector, via a single
/// Householder reflection.
fn ones_complement_basis(n: usize) -> DMatrix<f64> {
    let un = 1.0 / (n as f64).sqrt();
    let mut v = DVector::from_element(n, un);
    v[0] -= 1.0;
    let vtv = v.dot(&v);
    let mut h = DMatrix::identity(n, n);
    if vtv > 1e-300 {
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= 2.0 * v[i] * v[j] / vtv;
            }
        }
    }
    h.columns(1, n - 1).into_owned()
}

/// Exact spectral certificate for ordinary graphs: the extreme generalized
/// eigenvalues of the pencil `(L_G̃, L_G)` restricted to the complement of
/// the all-ones kernel. `G̃` is an ε-sparsifier of `G` iff the returned
/// interval lies in `[1−ε, 1+ε]`.
pub fn pencil_ratio(g: &WeightedGraph, g_sparse: &WeightedGraph) -> Result<(f64, f64)> {
    if g.n != g_sparse.n {
        return Err(Error::InvalidInput("vertex counts differ".into()));
    }
    if g.n < 2 {
        return Err(Error::InvalidInput("pencil needs n >= 2".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected(
            "pencil base graph must be connected".into(),
        ));
    }
    let n = g.n;
    let q = ones_complement_basis(n);
    let b = q.transpose() * laplacian(g) * &q;
    let a = q.transpose() * laplacian(g_sparse) * &q;
    let chol = nalgebra::Cholesky::new(b).ok_or_else(|| {
        Error::Conditioning("restricted Laplacian is not positive definite".into())
    })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::Conditioning("triangular solve failed".into()))?;
    let z = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Conditioning("triangular solve failed".into()))?;
    let s = (&z + z.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &ev in eig.eigenvalues.iter() {
        lo = lo.min(ev);
        hi = hi.max(ev);
    }
    Ok((lo, hi))
}

pub const BRUTE_RESISTANCE_MAX_VERTICES: usize = 64;

/// Reference effective resistance by a grounded dense solve, independent of
/// the pseudoinverse path used by the oracle.
pub fn brute_resistance(g: &WeightedGraph, u: usize, v: usize) -> Result<f64> {
    if g.n > BRUTE_RESISTANCE_MAX_VERTICES {
        return Err(Error::Guard(format!(
            "brute resistance is limited to n <= {BRUTE_RESISTANCE_MAX_VERTICES}, got {}",
            g.n
        )));
    }
    if u >= g.n || v >= g.n {
        return Err(Error::InvalidInput(format!("pair ({u}, {v}) out of range")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected("resistance undefined".into()));
    }
    if u == v {
        return Ok(0.0);
    }
    let n = g.n;
    let l = laplacian(g);
    let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
    let mut b = DVector::zeros(n - 1);
    if u > 0 {
        b[u - 1] += 1.0;
    }
    if v > 0 {
        b[v - 1] -= 1.0;
    }
    let y = reduced
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Conditioning("grounded solve failed".into()))?;
    Ok(b.dot(&y))
}

/// Raw weighted spanning-tree sum by enumeration (`n ≤ 9`); zero when the
/// graph is disconnected. Exposed without the logarithm so small-weight
/// precision can be tested directly.
pub fn brute_tree_sum(g: &WeightedGraph) -> Result<f64> {
    spanning_tree_sum(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{graph_quadratic, HyperEdge};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn hg(n: usize, edges: &[(&[usize], f64)]) -> Hypergraph {
        Hypergraph::new(
            n,
            edges
                .iter()
                .map(|(vs, w)| HyperEdge::new(vs.to_vec(), *w).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn scaled(h: &Hypergraph, c: f64) -> Hypergraph {
        let mut h2 = h.clone();
        for e in &mut h2.edges {
            e.weight *= c;
        }
        h2
    }

    #[test]
    fn probe_identity_is_exactly_one() {
        let h = hg(5, &[(&[0, 1, 2], 1.0), (&[2, 3], 2.0), (&[1, 3, 4], 0.5)]);
        let r = probe_check(&h, &h, 0.1, 50, 3).unwrap();
        assert_eq!(r.max_over_ratio, 1.0);
        assert_eq!(r.min_under_ratio, 1.0);
        assert!(r.pass);
        assert!(r.cuts > 0);
    }

    #[test]
    fn doubled_weights_give_ratio_two() {
        let h = hg(4, &[(&[0, 1, 2], 1.0), (&[2, 3], 1.0)]);
        let r = probe_check(&h, &scaled(&h, 2.0), 0.5, 50, 3).unwrap();
        assert_eq!(r.max_over_ratio, 2.0);
        assert_eq!(r.min_under_ratio, 2.0);
        assert!(!r.pass);
    }

    #[test]
    fn cut_check_identity_and_dropped_edge() {
        let h = hg(5, &[(&[0, 1, 2], 1.0), (&[2, 3], 2.0), (&[3, 4], 1.0)]);
        let c = cut_check(&h, &h).unwrap();
        assert_eq!(c.min_ratio, 1.0);
        assert_eq!(c.max_ratio, 1.0);
        assert_eq!(c.cuts, (1 << 4) - 1);

        // drop the weight-2 hyperedge: the cut {0,1,2} loses its whole weight
        let dropped = hg(5, &[(&[0, 1, 2], 1.0), (&[3, 4], 1.0)]);
        let c = cut_check(&h, &dropped).unwrap();
        assert_eq!(c.min_ratio, 0.0);
        // the worst cut must isolate {2} from {3} across the dropped edge
        let side: Vec<usize> = c.worst_cut.clone();
        let q = hyper_energy(&h, &indicator(5, &side)).unwrap();
        let qt = hyper_energy(&dropped, &indicator(5, &side)).unwrap();
        assert_eq!(qt / q, c.min_ratio);
    }

    fn indicator(n: usize, side: &[usize]) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for &v in side {
            x[v] = 1.0;
        }
        x
    }

    #[test]
    fn cut_check_matches_indicator_probes_on_graphs() {
        let h = hg(
            6,
            &[
                (&[0, 1], 1.0),
                (&[1, 2], 2.0),
                (&[2, 3], 1.0),
                (&[3, 4], 1.5),
                (&[4, 5], 1.0),
                (&[0, 5], 0.5),
            ],
        );
        let sp = hg(
            6,
            &[
                (&[0, 1], 1.0),
                (&[1, 2], 2.5),
                (&[2, 3], 1.0),
                (&[3, 4], 1.0),
                (&[4, 5], 1.0),
                (&[0, 5], 0.5),
            ],
        );
        let c = cut_check(&h, &sp).unwrap();
        // enumerate indicators directly
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for mask in 1u32..(1 << 5) {
            let x: Vec<f64> = (0..6).map(|v| ((mask >> v) & 1) as f64).collect();
            let ratio = hyper_energy(&sp, &x).unwrap() / hyper_energy(&h, &x).unwrap();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert_abs_diff_eq!(c.min_ratio, lo, epsilon = 1e-12);
        assert_abs_diff_eq!(c.max_ratio, hi, epsilon = 1e-12);
    }

    #[test]
    fn cut_guard() {
        let h = hg(2, &[(&[0, 1], 1.0)]);
        assert!(cut_check(&h, &h).is_ok());
        let big = Hypergraph::new(
            21,
            (0..20)
                .map(|v| HyperEdge::new(vec![v, v + 1], 1.0).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(matches!(cut_check(&big, &big), Err(Error::Guard(_))));
    }

    #[test]
    fn pencil_identity_and_scaling() {
        let g = WeightedGraph::with_edges(
            4,
            &[
                (0, 1, 1.0),
                (1, 2, 2.0),
                (2, 3, 1.0),
                (0, 3, 0.5),
                (0, 2, 1.0),
            ],
        )
        .unwrap();
        let (lo, hi) = pencil_ratio(&g, &g).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-10);

        let mut g3 = g.clone();
        for e in &mut g3.edges {
            e.weight *= 3.0;
        }
        let (lo, hi) = pencil_ratio(&g, &g3).unwrap();
        assert_abs_diff_eq!(lo, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn pencil_detects_a_dropped_edge() {
        let g = WeightedGraph::complete(5);
        let mut g2 = g.clone();
        g2.edges.remove(0);
        let (lo, hi) = pencil_ratio(&g, &g2).unwrap();
        assert!(lo < 1.0);
        assert!(hi <= 1.0 + 1e-10);
        // Rayleigh quotients of the sub-Laplacian stay below 1
        let x = [1.0, -1.0, 0.3, 0.0, -0.3];
        let num = graph_quadratic(&g2, &x).unwrap();
        let den = graph_quadratic(&g, &x).unwrap();
        assert!(num / den >= lo - 1e-10);
        assert!(num / den <= hi + 1e-10);
    }

    #[test]
    fn brute_resistance_on_known_graphs() {
        let path = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_abs_diff_eq!(brute_resistance(&path, 0, 2).unwrap(), 2.0, epsilon = 1e-12);
        let tri = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_abs_diff_eq!(
            brute_resistance(&tri, 0, 1).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
        assert_eq!(brute_resistance(&tri, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn variational_form_lower_bounds_resistance() {
        let mut rng = StdRng::seed_from_u64(7);
        let g = WeightedGraph::with_edges(
            5,
            &[
                (0, 1, 1.0),
                (1, 2, 0.5),
                (2, 3, 2.0),
                (3, 4, 1.0),
                (0, 4, 0.7),
                (1, 3, 1.2),
            ],
        )
        .unwrap();
        let r = brute_resistance(&g, 0, 3).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..5)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let den = graph_quadratic(&g, &x).unwrap();
            if den > 1e-12 {
                let num = (x[0] - x[3]) * (x[0] - x[3]);
                assert!(num / den <= r + 1e-9);
            }
        }
    }

    #[test]
    fn tree_sums() {
        let tri = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_abs_diff_eq!(brute_tree_sum(&tri).unwrap(), 3.0, epsilon = 1e-12);
        let wtri = WeightedGraph::with_edges(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap();
        assert_abs_diff_eq!(brute_tree_sum(&wtri).unwrap(), 11.0, epsilon = 1e-12);
        let disc = WeightedGraph::with_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(brute_tree_sum(&disc).unwrap(), 0.0);
    }
}
