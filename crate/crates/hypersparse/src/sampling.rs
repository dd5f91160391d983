//! Sparsification samplers.
//!
//! Every sampler keeps each (hyper)edge independently with a probability
//! proportional to its importance and reweights kept edges by `1/p`, which
//! keeps the energy unbiased. Importance is effective resistance: for a
//! hyperedge, the maximum resistance over its clique slots in a balanced
//! weight assignment. All keep decisions are counter-based functions of
//! `(seed, stage, edge index)`, so identical inputs reproduce identical
//! outputs bit for bit.

use std::collections::HashMap;

use crate::balancing::{
    check_assignment, separated_approx_balance, BalanceParams, WeightAssignment,
};
use crate::error::{Error, Result};
use crate::hypergraph::{HyperEdge, Hypergraph, WeightedGraph};
use crate::resistance::{ComponentResistance, ResistanceOracle};
use crate::rng::{
    mix, uniform, TAG_COMPONENT, TAG_FAST_STAGE, TAG_KEEP_IMPORTANCE, TAG_KEEP_ORDINARY,
    TAG_KEEP_UNIFORM, TAG_SIZE_CLASS, TAG_SURROGATE,
};
use crate::verify::pencil_ratio;

/// Knobs shared by the samplers. `lambda_scale` replaces the oversampling
/// constant of the importance sampler (the nominal constant forces every
/// keep probability to 1 at practical sizes, so it is an explicit dial);
/// `c` plays the same role for the polynomial-size pre-sparsifier.
#[derive(Debug, Clone)]
pub struct SamplingConfig {
    /// Target approximation ε ∈ (0, 1).
    pub eps: f64,
    /// Multiplier on the importance-sampling rate λ = scale·ln³n/ε⁴.
    pub lambda_scale: f64,
    /// Rate constant of the pre-sparsifier; larger keeps less.
    pub c: f64,
    pub seed: u64,
    /// Balance ratio forwarded to the balancing stage.
    pub gamma: f64,
    /// Balance threshold; `None` selects 1/n².
    pub eta: Option<f64>,
    /// Oversampling multiplier for clique surrogates (rate scale·ln²r).
    pub surrogate_scale: f64,
    /// Edge budget multiplier for surrogate certification (κ·r·ln³r).
    pub surrogate_kappa: f64,
    pub max_rounds: Option<u64>,
    pub rebuild_cadence: Option<usize>,
}

impl SamplingConfig {
    pub fn new(eps: f64, seed: u64) -> Self {
        Self {
            eps,
            lambda_scale: 1.0,
            c: 1.0,
            seed,
            gamma: 4.0,
            eta: None,
            surrogate_scale: 1.5,
            surrogate_kappa: 1.0,
            max_rounds: None,
            rebuild_cadence: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_nan() || self.eps <= 0.0 || self.eps >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "eps must lie in (0,1), got {}",
                self.eps
            )));
        }
        for (name, v) in [
            ("lambda_scale", self.lambda_scale),
            ("c", self.c),
            ("surrogate_scale", self.surrogate_scale),
            ("surrogate_kappa", self.surrogate_kappa),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn eta_for(&self, n: usize) -> f64 {
        self.eta.unwrap_or_else(|| 1.0 / (n as f64 * n as f64))
    }

    /// The importance-sampling rate λ = lambda_scale · ln³(n) / ε⁴.
    pub fn oversample(&self, n: usize) -> f64 {
        let ln_n = (n.max(2) as f64).ln();
        self.lambda_scale * ln_n.powi(3) / self.eps.powi(4)
    }

    fn balance_params(&self, n: usize) -> BalanceParams {
        BalanceParams {
            gamma: self.gamma,
            eta: self.eta_for(n),
            max_rounds: self.max_rounds,
            rebuild_cadence: self.rebuild_cadence,
        }
    }
}

/// Per input hyperedge: its keep probability, the resistance score behind it
/// (absent for edges dropped before a score was assigned), and the outcome.
#[derive(Debug, Clone, Copy)]
pub struct EdgeDiagnostics {
    pub p: f64,
    pub r_max: Option<f64>,
    pub kept: bool,
}

/// A reweighted sub-hypergraph plus per-hyperedge sampling diagnostics.
/// Kept hyperedges appear in the same order as in the input.
#[derive(Debug, Clone)]
pub struct SparsifierOutput {
    pub sparsifier: Hypergraph,
    pub diagnostics: Vec<EdgeDiagnostics>,
    pub seed: u64,
}

impl SparsifierOutput {
    pub fn kept_count(&self) -> usize {
        self.sparsifier.edges.len()
    }

    /// Σ_e p(e), the expected number of kept hyperedges.
    pub fn expected_size(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.p).sum()
    }
}

/// Maximum effective resistance over the clique slots of one hyperedge.
pub fn r_max(wa: &WeightAssignment, e_idx: usize, oracle: &ResistanceOracle) -> f64 {
    wa.clique_index[e_idx]
        .iter()
        .map(|&s| {
            let e = wa.graph.edges[s];
            oracle.resistance(e.u, e.v)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn sample_with_probs(
    h: &Hypergraph,
    raw: &[(f64, Option<f64>)],
    seed: u64,
    tag: u64,
) -> Result<SparsifierOutput> {
    let mut kept_edges = Vec::new();
    let mut diagnostics = Vec::with_capacity(h.edges.len());
    for (i, e) in h.edges.iter().enumerate() {
        let p = raw[i].0.min(1.0);
        if p <= 0.0 || !p.is_finite() {
            return Err(Error::Conditioning(format!(
                "keep probability for hyperedge {i} degenerated to {p}"
            )));
        }
        let kept = uniform(seed, tag, i as u64) < p;
        if kept {
            kept_edges.push(HyperEdge {
                vertices: e.vertices.clone(),
                weight: e.weight / p,
            });
        }
        diagnostics.push(EdgeDiagnostics {
            p,
            r_max: raw[i].1,
            kept,
        });
    }
    Ok(SparsifierOutput {
        sparsifier: Hypergraph::new(h.n, kept_edges)?,
        diagnostics,
        seed,
    })
}

/// Importance sampling against a balanced weight assignment: each hyperedge
/// is kept with `p(e) = min(1, w(e)·R^max(e)·λ)` and reweighted to `w/p`.
/// The assignment must pass the balance check at the configured (γ, η); the
/// check runs on a freshly built oracle.
pub fn importance_sparsify(
    wa: &WeightAssignment,
    cfg: &SamplingConfig,
) -> Result<SparsifierOutput> {
    cfg.validate()?;
    let h = &wa.hypergraph;
    let eta = cfg.eta_for(h.n);
    let check = check_assignment(wa, cfg.gamma, eta)?;
    if !check.balanced {
        let ratio = check.worst.map(|v| v.ratio()).unwrap_or(f64::NAN);
        return Err(Error::Precondition(format!(
            "assignment is not eta-approximately {}-balanced (worst ratio {ratio:.3})",
            cfg.gamma
        )));
    }
    let oracle = ResistanceOracle::build(&wa.graph)?;
    let lambda = cfg.oversample(h.n);
    let raw: Vec<(f64, Option<f64>)> = (0..h.edges.len())
        .map(|i| {
            let rm = r_max(wa, i, &oracle);
            (h.edges[i].weight * rm * lambda, Some(rm))
        })
        .collect();
    sample_with_probs(h, &raw, cfg.seed, TAG_KEEP_IMPORTANCE)
}

/// Resistance sampling for ordinary graphs: keep each edge with
/// `p(f) = min(1, λ·w(f)·R(f))` at weight `w/p`. Zero-weight edges are
/// never emitted.
pub fn ordinary_sparsify(g: &WeightedGraph, oversample: f64, seed: u64) -> Result<WeightedGraph> {
    if oversample.is_nan() || oversample <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "oversample must be positive, got {oversample}"
        )));
    }
    let oracle = ResistanceOracle::build(g)?;
    let mut out = WeightedGraph::new(g.n);
    for (i, e) in g.edges.iter().enumerate() {
        if e.weight <= 0.0 {
            continue;
        }
        let p = (oversample * e.weight * oracle.resistance(e.u, e.v)).min(1.0);
        if uniform(seed, TAG_KEEP_ORDINARY, i as u64) < p {
            out.add_edge(e.u, e.v, e.weight / p)?;
        }
    }
    Ok(out)
}

/// A certified sparse stand-in for the unit clique `K_r`: sampled by
/// resistance, retried with derived seeds until it passes the exact pencil
/// check at ε = 1/2 and stays within the κ·r·ln³r edge budget.
pub fn clique_surrogate(r: usize, seed: u64) -> Result<WeightedGraph> {
    clique_surrogate_with(r, 0.5, 1.0, 1.5, seed)
}

pub fn clique_surrogate_with(
    r: usize,
    eps: f64,
    kappa: f64,
    scale: f64,
    seed: u64,
) -> Result<WeightedGraph> {
    if r < 2 {
        return Err(Error::InvalidInput(format!(
            "clique surrogate needs r >= 2, got {r}"
        )));
    }
    if r == 2 {
        return WeightedGraph::with_edges(2, &[(0, 1, 1.0)]);
    }
    let clique = WeightedGraph::complete(r);
    let ln_r = (r as f64).ln();
    let oversample = scale * ln_r * ln_r;
    let budget = kappa * r as f64 * ln_r.powi(3);
    for attempt in 0..16 {
        let s = mix(seed, TAG_SURROGATE, attempt);
        let candidate = ordinary_sparsify(&clique, oversample, s)?;
        if candidate.edges.len() as f64 > budget {
            continue;
        }
        if let Ok((lo, hi)) = pencil_ratio(&clique, &candidate) {
            if lo >= 1.0 - eps - 1e-9 && hi <= 1.0 + eps + 1e-9 {
                return Ok(candidate);
            }
        }
    }
    Err(Error::Guard(format!(
        "no certified clique surrogate for r = {r} within 16 attempts (budget {budget:.1})"
    )))
}

/// Pre-sparsifier for near-uniform hypergraphs (every size in [r/2, r]):
/// builds a resistance proxy graph from weight-scaled clique surrogates,
/// scores each hyperedge by `max_v R(u₀, v)` from a fixed anchor u₀ (a
/// 2-approximation of the true clique maximum, by the resistance metric),
/// and keeps with `p(e) = min(1, 4·w(e)·R̃^max(e)·r⁴·ln n / (c·ε²))`.
pub fn uniform_sparsify(
    h: &Hypergraph,
    r: usize,
    cfg: &SamplingConfig,
) -> Result<SparsifierOutput> {
    cfg.validate()?;
    if h.n < 2 {
        return Err(Error::InvalidInput("need at least 2 vertices".into()));
    }
    for (i, e) in h.edges.iter().enumerate() {
        if 2 * e.arity() < r || e.arity() > r {
            return Err(Error::InvalidInput(format!(
                "hyperedge {i} has size {} outside [{}/2, {}]",
                e.arity(),
                r,
                r
            )));
        }
    }
    let mut surrogates: HashMap<usize, WeightedGraph> = HashMap::new();
    let mut g = WeightedGraph::new(h.n);
    for e in &h.edges {
        let size = e.arity();
        if let std::collections::hash_map::Entry::Vacant(slot) = surrogates.entry(size) {
            slot.insert(clique_surrogate_with(
                size,
                0.5,
                cfg.surrogate_kappa,
                cfg.surrogate_scale,
                mix(cfg.seed, TAG_SURROGATE, size as u64),
            )?);
        }
        let sur = &surrogates[&size];
        for ge in &sur.edges {
            g.add_edge(e.vertices[ge.u], e.vertices[ge.v], ge.weight * e.weight)?;
        }
    }
    let resistances = ComponentResistance::new(&g)?;
    let rate = 4.0 * (r as f64).powi(4) * (h.n as f64).ln() / (cfg.c * cfg.eps * cfg.eps);
    let raw: Vec<(f64, Option<f64>)> = h
        .edges
        .iter()
        .map(|e| {
            let u0 = e.vertices[0];
            let rt = e.vertices[1..]
                .iter()
                .map(|&v| {
                    resistances
                        .resistance(u0, v)
                        .expect("surrogate keeps each hyperedge support connected")
                })
                .fold(0.0f64, f64::max);
            (e.weight * rt * rate, Some(rt))
        })
        .collect();
    sample_with_probs(h, &raw, cfg.seed, TAG_KEEP_UNIFORM)
}

/// Size class of a hyperedge: class `i ≥ 1` holds sizes in `[2^i, 2^{i+1})`.
fn size_class(arity: usize) -> u32 {
    debug_assert!(arity >= 2);
    arity.ilog2()
}

/// Pre-sparsifier for arbitrary hypergraphs: partitions hyperedges by size
/// class, runs [`uniform_sparsify`] per class, and unions the results (kept
/// edges return in input order).
pub fn poly_size_sparsify(h: &Hypergraph, cfg: &SamplingConfig) -> Result<SparsifierOutput> {
    cfg.validate()?;
    if h.n < 2 {
        return Err(Error::InvalidInput("need at least 2 vertices".into()));
    }
    let m = h.edges.len();
    let mut class_members: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, e) in h.edges.iter().enumerate() {
        class_members
            .entry(size_class(e.arity()))
            .or_default()
            .push(i);
    }
    let mut classes: Vec<u32> = class_members.keys().copied().collect();
    classes.sort_unstable();

    let mut slots: Vec<Option<EdgeDiagnostics>> = vec![None; m];
    let mut kept_weight: Vec<Option<f64>> = vec![None; m];
    for i in classes {
        let members = &class_members[&i];
        let sub = Hypergraph::new(h.n, members.iter().map(|&e| h.edges[e].clone()).collect())?;
        let mut sub_cfg = cfg.clone();
        sub_cfg.seed = mix(cfg.seed, TAG_SIZE_CLASS, i as u64);
        let out = uniform_sparsify(&sub, 1usize << (i + 1), &sub_cfg)?;
        for (local, &orig) in members.iter().enumerate() {
            slots[orig] = Some(out.diagnostics[local]);
        }
        let mut kept_iter = out.sparsifier.edges.iter();
        for (local, &orig) in members.iter().enumerate() {
            if out.diagnostics[local].kept {
                kept_weight[orig] = Some(kept_iter.next().expect("kept edge present").weight);
            }
        }
    }
    let diagnostics: Vec<EdgeDiagnostics> = slots
        .into_iter()
        .map(|d| d.expect("every hyperedge classified"))
        .collect();
    let kept_edges: Vec<HyperEdge> = (0..m)
        .filter_map(|i| {
            kept_weight[i].map(|w| HyperEdge {
                vertices: h.edges[i].vertices.clone(),
                weight: w,
            })
        })
        .collect();
    Ok(SparsifierOutput {
        sparsifier: Hypergraph::new(h.n, kept_edges)?,
        diagnostics,
        seed: cfg.seed,
    })
}

/// Largest power of two not exceeding `w`; scaling by it is exact in binary
/// floating point, so normalization can be undone without rounding.
fn pow2_at_most(w: f64) -> f64 {
    w.log2().floor().exp2()
}

/// The full pipeline: pre-sparsify to polynomial size at ε/3, split the
/// surviving hyperedges into odd and even log-scale weight classes, balance
/// each side phase by phase (classes are n¹⁰-separated by construction, so
/// the phase-ordered balancer applies), importance-sample each side at ε/3,
/// and union. Energy is additive over hyperedges, so the union inherits the
/// per-side guarantees.
pub fn fast_sparsify(h: &Hypergraph, cfg: &SamplingConfig) -> Result<SparsifierOutput> {
    cfg.validate()?;
    if h.n < 2 {
        return Err(Error::InvalidInput("need at least 2 vertices".into()));
    }
    if !h.is_connected() {
        return Err(Error::Disconnected(
            "sparsification requires a connected hypergraph".into(),
        ));
    }
    let n = h.n;
    let stage_eps = cfg.eps / 3.0;

    let mut pre_cfg = cfg.clone();
    pre_cfg.eps = stage_eps;
    pre_cfg.seed = mix(cfg.seed, TAG_FAST_STAGE, 0);
    let pre = poly_size_sparsify(h, &pre_cfg)?;

    let mut diagnostics: Vec<EdgeDiagnostics> = pre
        .diagnostics
        .iter()
        .map(|d| EdgeDiagnostics {
            p: d.p,
            r_max: None,
            kept: false,
        })
        .collect();
    let mut final_weight: Vec<Option<f64>> = vec![None; h.edges.len()];

    let surviving: Vec<usize> = (0..h.edges.len())
        .filter(|&i| pre.diagnostics[i].kept)
        .collect();
    if !surviving.is_empty() {
        // log-scale weight classes on power-of-two-normalized weights
        let hp = &pre.sparsifier; // edges align with `surviving`
        let w_min = hp.min_weight().expect("nonempty");
        let norm = pow2_at_most(w_min);
        let ln_n = (n as f64).ln();
        let class_of: Vec<u32> = hp
            .edges
            .iter()
            .map(|e| ((e.weight / norm).ln() / (10.0 * ln_n)).floor() as u32 + 1)
            .collect();
        let separation = (n as f64).powi(10);

        for branch in 0..2u32 {
            // branch 0 takes the odd classes, branch 1 the even ones
            let wanted = 1 - branch;
            let members: Vec<usize> = (0..hp.edges.len())
                .filter(|&k| class_of[k] % 2 == wanted)
                .collect();
            if members.is_empty() {
                continue;
            }
            let branch_seed = mix(cfg.seed, TAG_FAST_STAGE, 1 + branch as u64);
            sparsify_parity_branch(
                h,
                hp,
                &surviving,
                &members,
                &class_of,
                norm,
                separation,
                stage_eps,
                branch_seed,
                cfg,
                &mut diagnostics,
                &mut final_weight,
            )?;
        }
    }

    let kept_edges: Vec<HyperEdge> = (0..h.edges.len())
        .filter_map(|i| {
            final_weight[i].map(|w| HyperEdge {
                vertices: h.edges[i].vertices.clone(),
                weight: w,
            })
        })
        .collect();
    Ok(SparsifierOutput {
        sparsifier: Hypergraph::new(n, kept_edges)?,
        diagnostics,
        seed: cfg.seed,
    })
}

/// Balances and importance-samples one parity branch of the fast pipeline.
/// The branch hypergraph need not be connected (its classes are arbitrary
/// subsets), so balancing runs per connected component.
#[allow(clippy::too_many_arguments)]
fn sparsify_parity_branch(
    h: &Hypergraph,
    hp: &Hypergraph,
    surviving: &[usize],
    members: &[usize],
    class_of: &[u32],
    norm: f64,
    separation: f64,
    stage_eps: f64,
    branch_seed: u64,
    cfg: &SamplingConfig,
    diagnostics: &mut [EdgeDiagnostics],
    final_weight: &mut [Option<f64>],
) -> Result<()> {
    // group branch members by connected component of their union support
    let mut dsu = crate::hypergraph::DisjointSets::new(hp.n);
    for &k in members {
        for pair in hp.edges[k].vertices.windows(2) {
            dsu.union(pair[0], pair[1]);
        }
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    for &k in members {
        let root = dsu.find(hp.edges[k].vertices[0]);
        by_root.entry(root).or_default().push(k);
    }
    let mut roots: Vec<usize> = by_root.keys().copied().collect();
    roots.sort_unstable();

    for (comp_idx, root) in roots.into_iter().enumerate() {
        let comp_members = &by_root[&root];
        // relabel the component's vertices
        let mut vertex_ids: Vec<usize> = comp_members
            .iter()
            .flat_map(|&k| hp.edges[k].vertices.iter().copied())
            .collect();
        vertex_ids.sort_unstable();
        vertex_ids.dedup();
        let local_of: HashMap<usize, usize> = vertex_ids
            .iter()
            .enumerate()
            .map(|(l, &v)| (v, l))
            .collect();
        let sub_edges: Vec<HyperEdge> = comp_members
            .iter()
            .map(|&k| HyperEdge {
                vertices: hp.edges[k].vertices.iter().map(|v| local_of[v]).collect(),
                weight: hp.edges[k].weight / norm,
            })
            .collect();
        let sub = Hypergraph::new(vertex_ids.len(), sub_edges)?;

        // classes restricted to the component, heaviest first
        let mut present: Vec<u32> = comp_members.iter().map(|&k| class_of[k]).collect();
        present.sort_unstable();
        present.dedup();
        present.reverse();
        let classes: Vec<Vec<usize>> = present
            .iter()
            .map(|&c| {
                (0..comp_members.len())
                    .filter(|&local| class_of[comp_members[local]] == c)
                    .collect()
            })
            .collect();

        // γ, η, and λ below all use the global vertex count, not the
        // component's: the quality target is for the whole input
        let params = cfg.balance_params(h.n);
        let run = separated_approx_balance(&sub, &classes, separation, separation, &params)?;

        let mut imp_cfg = cfg.clone();
        imp_cfg.eps = stage_eps;
        imp_cfg.gamma = 2.0 * cfg.gamma; // the phase-ordered balancer certifies 2γ
        imp_cfg.eta = Some(cfg.eta_for(h.n));
        imp_cfg.seed = mix(branch_seed, TAG_COMPONENT, comp_idx as u64);
        let out = importance_sparsify(&run.assignment, &imp_cfg)?;

        for (local, &k) in comp_members.iter().enumerate() {
            let orig = surviving[k];
            let d = out.diagnostics[local];
            diagnostics[orig] = EdgeDiagnostics {
                p: diagnostics[orig].p * d.p,
                r_max: d.r_max,
                kept: d.kept,
            };
        }
        let mut kept_iter = out.sparsifier.edges.iter();
        for (local, &k) in comp_members.iter().enumerate() {
            if out.diagnostics[local].kept {
                let w = kept_iter.next().expect("kept edge present").weight;
                final_weight[surviving[k]] = Some(w * norm);
            }
        }
    }
    Ok(())
}
