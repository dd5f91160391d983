//! Seeded instance generators. Every model produces a connected hypergraph
//! with exactly the requested number of hyperedges; the separated-weights
//! model additionally emits the weight-class partition it satisfies.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{HyperEdge, Hypergraph};
use crate::rng::{stream, TAG_GENERATE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Random hyperedges of size 2..=rank; a hidden spanning path keeps the
    /// instance connected.
    UniformRandom,
    /// Vertex blocks become full hyperedges ("planted cliques"), bridged by
    /// pair hyperedges, plus random intra-block edges.
    PlantedCliqueUnion,
    /// An explicit spanning path of pair hyperedges plus random extras.
    PathPlusHyperedges,
    /// Two weight classes separated by a configurable factor; see
    /// [`separated_weights`] for the knobs.
    SeparatedWeights,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-random" => Ok(Model::UniformRandom),
            "planted-clique-union" => Ok(Model::PlantedCliqueUnion),
            "path-plus-hyperedges" => Ok(Model::PathPlusHyperedges),
            "separated-weights" => Ok(Model::SeparatedWeights),
            other => Err(Error::InvalidInput(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub hypergraph: Hypergraph,
    /// Weight classes (heaviest first) for the separated model, `None`
    /// otherwise.
    pub classes: Option<Vec<Vec<usize>>>,
}

pub fn generate(
    model: Model,
    n: usize,
    m: usize,
    rank: usize,
    seed: u64,
) -> Result<GeneratedInstance> {
    check_shape(n, m, rank)?;
    match model {
        Model::UniformRandom => Ok(GeneratedInstance {
            hypergraph: uniform_random(n, m, rank, seed)?,
            classes: None,
        }),
        Model::PlantedCliqueUnion => Ok(GeneratedInstance {
            hypergraph: planted_clique_union(n, m, rank, seed)?,
            classes: None,
        }),
        Model::PathPlusHyperedges => Ok(GeneratedInstance {
            hypergraph: path_plus_hyperedges(n, m, rank, seed)?,
            classes: None,
        }),
        Model::SeparatedWeights => separated_weights(n, m, rank, (n as f64).powi(10), 2, seed),
    }
}

fn check_shape(n: usize, m: usize, rank: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least 2 vertices".into()));
    }
    if rank < 2 || rank > n {
        return Err(Error::InvalidInput(format!(
            "rank must lie in [2, n], got {rank}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidInput("need at least one hyperedge".into()));
    }
    Ok(())
}

/// Chops a shuffled vertex order into overlapping chunks of size ≤ rank; the
/// chunks alone connect the instance.
fn spanning_chunks(order: &[usize], rank: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let n = order.len();
    let mut chunks = Vec::new();
    let mut at = 0;
    while at + 1 < n {
        let hi = rank.min(n - at);
        let k = if hi <= 2 { 2 } else { rng.random_range(2..=hi) };
        chunks.push(order[at..at + k].to_vec());
        at += k - 1;
    }
    chunks
}

fn random_support(n: usize, rank: usize, rng: &mut impl Rng) -> Vec<usize> {
    let k = rng.random_range(2..=rank);
    let mut vs = Vec::with_capacity(k);
    while vs.len() < k {
        let v = rng.random_range(0..n);
        if !vs.contains(&v) {
            vs.push(v);
        }
    }
    vs
}

fn uniform_random(n: usize, m: usize, rank: usize, seed: u64) -> Result<Hypergraph> {
    let mut rng = stream(seed, TAG_GENERATE, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let chunks = spanning_chunks(&order, rank, &mut rng);
    if chunks.len() > m {
        return Err(Error::InvalidInput(format!(
            "m = {m} is too small to connect n = {n} vertices at rank {rank} (need {})",
            chunks.len()
        )));
    }
    let mut edges: Vec<HyperEdge> = chunks
        .into_iter()
        .map(|vs| HyperEdge::new(vs, 1.0))
        .collect::<Result<_>>()?;
    while edges.len() < m {
        edges.push(HyperEdge::new(random_support(n, rank, &mut rng), 1.0)?);
    }
    Hypergraph::new(n, edges)
}

fn planted_clique_union(n: usize, m: usize, rank: usize, seed: u64) -> Result<Hypergraph> {
    let mut rng = stream(seed, TAG_GENERATE, 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    // blocks of size in [2, rank]
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut at = 0;
    while at < n {
        let remaining = n - at;
        let k = if remaining <= rank {
            remaining
        } else {
            rng.random_range(2..=rank)
        };
        if remaining - k == 1 {
            // avoid a leftover singleton block
            blocks.push(order[at..at + k - 1].to_vec());
            at += k - 1;
        } else {
            blocks.push(order[at..at + k].to_vec());
            at += k;
        }
    }
    blocks.retain(|b| b.len() >= 2);
    if blocks.is_empty() {
        return Err(Error::InvalidInput(
            "too few vertices for block structure".into(),
        ));
    }
    let needed = blocks.len() + blocks.len().saturating_sub(1);
    if needed > m {
        return Err(Error::InvalidInput(format!(
            "m = {m} is too small for {} blocks plus bridges (need {needed})",
            blocks.len()
        )));
    }

    let mut edges: Vec<HyperEdge> = Vec::with_capacity(m);
    for b in &blocks {
        edges.push(HyperEdge::new(b.clone(), 1.0)?);
    }
    for pair in blocks.windows(2) {
        let u = pair[0][rng.random_range(0..pair[0].len())];
        let v = pair[1][rng.random_range(0..pair[1].len())];
        edges.push(HyperEdge::new(vec![u, v], 1.0)?);
    }
    while edges.len() < m {
        let b = &blocks[rng.random_range(0..blocks.len())];
        let k = rng.random_range(2..=b.len());
        let mut inside = b.clone();
        inside.shuffle(&mut rng);
        inside.truncate(k);
        edges.push(HyperEdge::new(inside, 1.0)?);
    }
    Hypergraph::new(n, edges)
}

fn path_plus_hyperedges(n: usize, m: usize, rank: usize, seed: u64) -> Result<Hypergraph> {
    if m < n - 1 {
        return Err(Error::InvalidInput(format!(
            "m = {m} is too small for a spanning path on n = {n} vertices"
        )));
    }
    let mut rng = stream(seed, TAG_GENERATE, 2);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<HyperEdge> = order
        .windows(2)
        .map(|p| HyperEdge::new(vec![p[0], p[1]], 1.0))
        .collect::<Result<_>>()?;
    while edges.len() < m {
        edges.push(HyperEdge::new(random_support(n, rank, &mut rng), 1.0)?);
    }
    Hypergraph::new(n, edges)
}

/// Separated-weights model: the uniform-random structure with weights drawn
/// in `classes` bands. Consecutive bands are separated by at least `beta`
/// and each band spreads by less than a factor 2, so the emitted partition
/// satisfies the (α, β) conditions for any α ≥ 2.
pub fn separated_weights(
    n: usize,
    m: usize,
    rank: usize,
    beta: f64,
    classes: usize,
    seed: u64,
) -> Result<GeneratedInstance> {
    check_shape(n, m, rank)?;
    if classes == 0 || classes > m {
        return Err(Error::InvalidInput(format!(
            "class count {classes} must lie in [1, m]"
        )));
    }
    if beta < 1.0 || !beta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "beta must be >= 1, got {beta}"
        )));
    }
    let mut h = uniform_random(n, m, rank, seed)?;
    let mut rng = stream(seed, TAG_GENERATE, 3);
    let per = m.div_ceil(classes);
    let mut partition: Vec<Vec<usize>> = Vec::with_capacity(classes);
    for c in 0..classes {
        let lo = c * per;
        let hi = ((c + 1) * per).min(m);
        if lo >= hi {
            break;
        }
        // heaviest class first: scale = (2β)^(ℓ−1−c)
        let exponent = (classes - 1 - c) as i32;
        let scale = (2.0 * beta).powi(exponent);
        if !scale.is_finite() {
            return Err(Error::InvalidInput(
                "weight scale overflows; lower beta or classes".into(),
            ));
        }
        for e in lo..hi {
            h.edges[e].weight = scale * rng.random_range(1.0..2.0);
        }
        partition.push((lo..hi).collect());
    }
    Ok(GeneratedInstance {
        hypergraph: h,
        classes: Some(partition),
    })
}
