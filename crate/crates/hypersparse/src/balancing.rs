//! Balanced weight assignments: replace each hyperedge with a clique on its
//! support whose edge weights sum to the hyperedge weight, then greedily
//! shift weight inside cliques from low-resistance pairs to high-resistance
//! pairs until every clique's resistances agree within a factor γ. The
//! spanning-tree potential increases with every shift, which is what makes
//! the greedy loops terminate.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, WeightedGraph};
use crate::potential::update_delta;
use crate::resistance::{ComponentResistance, ResistanceOracle};

/// A weight assignment: one clique of edge slots per hyperedge, all slots
/// concatenated into a single multigraph. Parallel slots across hyperedges
/// stay distinct entries of `graph.edges`.
#[derive(Debug, Clone)]
pub struct WeightAssignment {
    pub hypergraph: Hypergraph,
    pub graph: WeightedGraph,
    /// Per hyperedge, the indices of its clique slots in `graph.edges`.
    pub clique_index: Vec<Vec<usize>>,
}

impl WeightAssignment {
    /// Largest relative violation of the per-clique conservation law
    /// `Σ_{f∈F_e} w(f) = w(e)`.
    pub fn clique_weight_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (e_idx, slots) in self.clique_index.iter().enumerate() {
            let target = self.hypergraph.edges[e_idx].weight;
            let sum: f64 = slots.iter().map(|&s| self.graph.edges[s].weight).sum();
            worst = worst.max((sum - target).abs() / target);
        }
        worst
    }

    pub fn slot_weights(&self) -> Vec<f64> {
        self.graph.edges.iter().map(|e| e.weight).collect()
    }
}

/// Parameters shared by the balancing loops.
#[derive(Debug, Clone, Copy)]
pub struct BalanceParams {
    /// Balance ratio γ > 1 (the approximate loops require γ ≥ 4).
    pub gamma: f64,
    /// Approximation threshold η ∈ (0, 1]; slots below η·w(e) may stay
    /// unbalanced. Zero selects the exact variant (every positive slot counts).
    pub eta: f64,
    /// Iteration cap; `None` picks a default derived from the instance.
    pub max_rounds: Option<u64>,
    /// Oracle refresh interval; `None` picks one rebuild per n updates.
    pub rebuild_cadence: Option<usize>,
}

impl BalanceParams {
    pub fn exact(gamma: f64) -> Self {
        Self {
            gamma,
            eta: 0.0,
            max_rounds: None,
            rebuild_cadence: None,
        }
    }

    pub fn approx(gamma: f64, eta: f64) -> Self {
        Self {
            gamma,
            eta,
            max_rounds: None,
            rebuild_cadence: None,
        }
    }

    /// The pipeline default: γ = 4, η = 1/n².
    pub fn pipeline_default(n: usize) -> Self {
        Self::approx(4.0, 1.0 / (n as f64 * n as f64))
    }
}

/// Outcome of a balancing run.
#[derive(Debug, Clone)]
pub struct BalanceRun {
    pub assignment: WeightAssignment,
    pub rounds: u64,
    /// Total potential gain accumulated over all steps.
    pub psi_gain: f64,
    /// Smallest per-step potential gain observed (infinity if no steps ran).
    pub min_step_gain: f64,
    /// For the phase-ordered variant: all slot weights at the end of each
    /// phase, for verifying that earlier phases are never touched again.
    pub phase_snapshots: Vec<Vec<f64>>,
}

/// One violating triple: slots f, g of hyperedge e with R(f) > γ·R(g).
#[derive(Debug, Clone, Copy)]
pub struct Violation {
    pub hyperedge: usize,
    pub f_slot: usize,
    pub g_slot: usize,
    pub r_f: f64,
    pub r_g: f64,
}

impl Violation {
    pub fn ratio(&self) -> f64 {
        self.r_f / self.r_g
    }
}

/// Verdict of a balance check, with the worst resistance-ratio triple seen.
#[derive(Debug, Clone)]
pub struct BalanceCheck {
    pub balanced: bool,
    pub worst: Option<Violation>,
}

/// Uniform initial assignment: every slot of hyperedge `e` starts at
/// `w(e) / C(|e|, 2)`.
pub fn init_assignment(h: &Hypergraph) -> Result<WeightAssignment> {
    if h.n < 2 {
        return Err(Error::InvalidInput(
            "assignment needs at least 2 vertices".into(),
        ));
    }
    if !h.is_connected() {
        return Err(Error::Disconnected(
            "balancing requires a connected hypergraph".into(),
        ));
    }
    let mut graph = WeightedGraph::new(h.n);
    let mut clique_index = Vec::with_capacity(h.edges.len());
    for e in &h.edges {
        let share = e.weight / e.pair_count() as f64;
        let mut slots = Vec::with_capacity(e.pair_count());
        for i in 0..e.vertices.len() {
            for j in (i + 1)..e.vertices.len() {
                slots.push(graph.edges.len());
                graph.add_edge(e.vertices[i], e.vertices[j], share)?;
            }
        }
        clique_index.push(slots);
    }
    Ok(WeightAssignment {
        hypergraph: h.clone(),
        graph,
        clique_index,
    })
}

/// Checks the balance condition with a freshly built oracle:
/// `γ · min_{g: w(g) ≥ η·w(e)} R(g) ≥ max_f R(f)` per clique (with η = 0 the
/// minimum runs over slots of positive weight). Returns the triple that
/// maximizes `R(f)/R(g)` alongside the verdict.
pub fn check_assignment(wa: &WeightAssignment, gamma: f64, eta: f64) -> Result<BalanceCheck> {
    let oracle = ResistanceOracle::build(&wa.graph)?;
    let worst = worst_triple(&oracle, wa, None, eta);
    let balanced = worst.is_none_or(|v| v.r_f <= gamma * v.r_g);
    Ok(BalanceCheck { balanced, worst })
}

fn worst_triple(
    oracle: &ResistanceOracle,
    wa: &WeightAssignment,
    active: Option<&[usize]>,
    eta: f64,
) -> Option<Violation> {
    let mut worst: Option<Violation> = None;
    let all: Vec<usize>;
    let ids = match active {
        Some(ids) => ids,
        None => {
            all = (0..wa.hypergraph.edges.len()).collect();
            &all
        }
    };
    for &e_idx in ids {
        if let Some(v) = clique_extremes(oracle, wa, e_idx, eta) {
            let replace = match &worst {
                None => true,
                Some(w) => v.ratio() > w.ratio(),
            };
            if replace {
                worst = Some(v);
            }
        }
    }
    worst
}

/// The argmax/argmin resistance slots of one clique (min over slots at or
/// above the η threshold). Ties resolve to the lowest slot index.
fn clique_extremes(
    oracle: &ResistanceOracle,
    wa: &WeightAssignment,
    e_idx: usize,
    eta: f64,
) -> Option<Violation> {
    let slots = &wa.clique_index[e_idx];
    if slots.len() < 2 {
        return None;
    }
    let graph = oracle.graph();
    let threshold = eta * wa.hypergraph.edges[e_idx].weight;
    let mut f_best: Option<(usize, f64)> = None;
    let mut g_best: Option<(usize, f64)> = None;
    for &s in slots {
        let ge = graph.edges[s];
        let r = oracle.resistance(ge.u, ge.v);
        match f_best {
            Some((_, rf)) if r <= rf => {}
            _ => f_best = Some((s, r)),
        }
        let eligible = if eta > 0.0 {
            ge.weight >= threshold
        } else {
            ge.weight > 0.0
        };
        if eligible {
            match g_best {
                Some((_, rg)) if r >= rg => {}
                _ => g_best = Some((s, r)),
            }
        }
    }
    let ((f_slot, r_f), (g_slot, r_g)) = (f_best?, g_best?);
    if f_slot == g_slot {
        return None;
    }
    Some(Violation {
        hyperedge: e_idx,
        f_slot,
        g_slot,
        r_f,
        r_g,
    })
}

#[derive(Clone, Copy)]
enum StepRule {
    /// λ = min(w(g), (γ−1) / (2γ·R(g)))
    Exact,
    /// λ = min(w(g), 1 / (2·R(g)))
    Half,
}

impl StepRule {
    fn lambda(self, gamma: f64, w_g: f64, r_g: f64) -> f64 {
        match self {
            StepRule::Exact => w_g.min((gamma - 1.0) / (2.0 * gamma * r_g)),
            StepRule::Half => w_g.min(0.5 / r_g),
        }
    }
}

struct RunState {
    rounds: u64,
    cap: u64,
    psi_gain: f64,
    min_step_gain: f64,
}

/// Runs one greedy phase to completion over the `active` hyperedges.
/// Scans hyperedges in index order and fixes the first violating clique it
/// finds; termination is confirmed against a freshly rebuilt oracle so no
/// incremental drift can fake a balanced state.
fn run_phase(
    oracle: &mut ResistanceOracle,
    wa: &WeightAssignment,
    active: &[usize],
    gamma: f64,
    eta: f64,
    rule: StepRule,
    state: &mut RunState,
) -> Result<()> {
    loop {
        let step = match first_violation(oracle, wa, active, gamma, eta) {
            Some(s) => s,
            None => {
                oracle.rebuild()?;
                match first_violation(oracle, wa, active, gamma, eta) {
                    Some(s) => s,
                    None => return Ok(()),
                }
            }
        };
        if state.rounds >= state.cap {
            let partial = WeightAssignment {
                hypergraph: wa.hypergraph.clone(),
                graph: oracle.graph().clone(),
                clique_index: wa.clique_index.clone(),
            };
            return Err(Error::RoundCapExceeded {
                cap: state.cap,
                partial: Box::new(partial),
            });
        }
        let w_g = oracle.graph().edges[step.g_slot].weight;
        let lambda = rule.lambda(gamma, w_g, step.r_g);

        // shift +λ onto f, then −λ off g; the two closed-form deltas compose
        // to the exact potential gain of the step
        let d1 = update_delta(step.r_f, lambda)?;
        oracle.shift_edge(step.f_slot, lambda)?;
        let g_edge = oracle.graph().edges[step.g_slot];
        let r_g_after = oracle.resistance(g_edge.u, g_edge.v);
        let d2 = update_delta(r_g_after, -lambda)?;
        oracle.shift_edge(step.g_slot, -lambda)?;

        let gain = d1 + d2;
        state.psi_gain += gain;
        state.min_step_gain = state.min_step_gain.min(gain);
        state.rounds += 1;
    }
}

fn first_violation(
    oracle: &ResistanceOracle,
    wa: &WeightAssignment,
    active: &[usize],
    gamma: f64,
    eta: f64,
) -> Option<Violation> {
    active.iter().find_map(|&e_idx| {
        clique_extremes(oracle, wa, e_idx, eta).filter(|v| v.r_f > gamma * v.r_g)
    })
}

fn finish_run(
    oracle: ResistanceOracle,
    mut wa: WeightAssignment,
    state: RunState,
    phase_snapshots: Vec<Vec<f64>>,
) -> BalanceRun {
    wa.graph = oracle.into_graph();
    BalanceRun {
        assignment: wa,
        rounds: state.rounds,
        psi_gain: state.psi_gain,
        min_step_gain: state.min_step_gain,
        phase_snapshots,
    }
}

fn default_cap_approx(h: &Hypergraph, eta: f64, n: usize) -> u64 {
    let m_total = h.total_weight();
    let w_min = h.min_weight().unwrap_or(1.0);
    let nf = n as f64;
    let cap = 10.0 * (m_total / (eta * w_min)) * nf.powi(4);
    cap.clamp(10_000.0, 9e18) as u64
}

const DEFAULT_CAP_EXACT: u64 = 10_000_000;

/// Exact greedy balancing. Terminates with an assignment in which every
/// positive-weight slot of a clique has resistance within γ of the clique
/// maximum. No polynomial round bound exists for this variant; it is kept
/// for study and testing, the pipeline uses the approximate loops.
pub fn greedy_balance(h: &Hypergraph, params: &BalanceParams) -> Result<BalanceRun> {
    if params.gamma <= 1.0 {
        return Err(Error::InvalidInput(format!(
            "gamma must exceed 1, got {}",
            params.gamma
        )));
    }
    let wa = init_assignment(h)?;
    let cadence = params.rebuild_cadence.unwrap_or(h.n.max(1));
    let mut oracle = ResistanceOracle::with_cadence(&wa.graph, cadence)?;
    let active: Vec<usize> = (0..h.edges.len()).collect();
    let mut state = RunState {
        rounds: 0,
        cap: params.max_rounds.unwrap_or(DEFAULT_CAP_EXACT),
        psi_gain: 0.0,
        min_step_gain: f64::INFINITY,
    };
    run_phase(
        &mut oracle,
        &wa,
        &active,
        params.gamma,
        0.0,
        StepRule::Exact,
        &mut state,
    )?;
    Ok(finish_run(oracle, wa, state, Vec::new()))
}

/// Approximate greedy balancing: slots lighter than η·w(e) are exempt from
/// the balance condition, which bounds the round count polynomially in the
/// weight aspect ratio. Requires γ ≥ 4 and η ∈ (0, 1].
pub fn greedy_approx_balance(h: &Hypergraph, params: &BalanceParams) -> Result<BalanceRun> {
    validate_approx_params(params)?;
    let wa = init_assignment(h)?;
    let cadence = params.rebuild_cadence.unwrap_or(h.n.max(1));
    let mut oracle = ResistanceOracle::with_cadence(&wa.graph, cadence)?;
    let active: Vec<usize> = (0..h.edges.len()).collect();
    let mut state = RunState {
        rounds: 0,
        cap: params
            .max_rounds
            .unwrap_or_else(|| default_cap_approx(h, params.eta, h.n)),
        psi_gain: 0.0,
        min_step_gain: f64::INFINITY,
    };
    run_phase(
        &mut oracle,
        &wa,
        &active,
        params.gamma,
        params.eta,
        StepRule::Half,
        &mut state,
    )?;
    Ok(finish_run(oracle, wa, state, Vec::new()))
}

fn validate_approx_params(params: &BalanceParams) -> Result<()> {
    if params.gamma < 4.0 {
        return Err(Error::InvalidInput(format!(
            "approximate balancing requires gamma >= 4, got {}",
            params.gamma
        )));
    }
    if !(params.eta > 0.0 && params.eta <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "eta must lie in (0, 1], got {}",
            params.eta
        )));
    }
    Ok(())
}

/// Checks that `classes` partitions the hyperedges of `h` into groups whose
/// weights are within factor α inside each class and separated by at least a
/// factor β between consecutive classes (heaviest class first), and that β
/// clears the `5·|E|·γ/η` threshold the phase-ordered balancing needs.
pub fn validate_partition(
    h: &Hypergraph,
    classes: &[Vec<usize>],
    alpha: f64,
    beta: f64,
    gamma: f64,
    eta: f64,
) -> Result<()> {
    if alpha < 1.0 || beta < 1.0 {
        return Err(Error::InvalidInput(
            "alpha and beta must be at least 1".into(),
        ));
    }
    let m = h.edges.len();
    let mut seen = vec![false; m];
    for class in classes {
        if class.is_empty() {
            return Err(Error::InvalidInput("empty weight class".into()));
        }
        for &e in class {
            if e >= m {
                return Err(Error::InvalidInput(format!(
                    "class references hyperedge {e}, m = {m}"
                )));
            }
            if seen[e] {
                return Err(Error::InvalidInput(format!(
                    "hyperedge {e} appears in two classes"
                )));
            }
            seen[e] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidInput(
            "classes do not cover every hyperedge".into(),
        ));
    }
    let bound = 5.0 * m as f64 * gamma / eta;
    if beta < bound {
        return Err(Error::InvalidInput(format!(
            "beta = {beta} is below the required 5·|E|·gamma/eta = {bound}"
        )));
    }
    const REL: f64 = 1.0 + 1e-9;
    let spread = |class: &[usize]| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &e in class {
            lo = lo.min(h.edges[e].weight);
            hi = hi.max(h.edges[e].weight);
        }
        (lo, hi)
    };
    for (i, class) in classes.iter().enumerate() {
        let (lo, hi) = spread(class);
        if hi > alpha * lo * REL {
            return Err(Error::InvalidInput(format!(
                "class {i} spreads by {} which exceeds alpha = {alpha}",
                hi / lo
            )));
        }
        if i + 1 < classes.len() {
            let (_, next_hi) = spread(&classes[i + 1]);
            if lo * REL < beta * next_hi {
                return Err(Error::InvalidInput(format!(
                    "classes {i} and {} are separated by {} which is below beta = {beta}",
                    i + 1,
                    lo / next_hi
                )));
            }
        }
    }
    Ok(())
}

/// Phase-ordered balancing for weight-separated hypergraphs: classes are
/// processed heaviest first and never revisited, so later (much lighter)
/// phases cannot disturb the balance certificates of earlier ones by more
/// than the factor the separation allows. The output satisfies the
/// η-approximate balance condition at ratio 2γ.
pub fn separated_approx_balance(
    h: &Hypergraph,
    classes: &[Vec<usize>],
    alpha: f64,
    beta: f64,
    params: &BalanceParams,
) -> Result<BalanceRun> {
    validate_approx_params(params)?;
    validate_partition(h, classes, alpha, beta, params.gamma, params.eta)?;
    let wa = init_assignment(h)?;
    let cadence = params.rebuild_cadence.unwrap_or(h.n.max(1));
    let mut oracle = ResistanceOracle::with_cadence(&wa.graph, cadence)?;
    let cap = params.max_rounds.unwrap_or_else(|| {
        let m = h.edges.len() as f64;
        let cap = 10.0 * (alpha / params.eta) * m * m * (h.n as f64).powi(4);
        cap.clamp(10_000.0, 9e18) as u64
    });
    let mut state = RunState {
        rounds: 0,
        cap,
        psi_gain: 0.0,
        min_step_gain: f64::INFINITY,
    };
    let mut phase_snapshots = Vec::with_capacity(classes.len());
    for class in classes {
        run_phase(
            &mut oracle,
            &wa,
            class,
            params.gamma,
            params.eta,
            StepRule::Half,
            &mut state,
        )?;
        phase_snapshots.push(oracle.graph().edges.iter().map(|e| e.weight).collect());
    }
    Ok(finish_run(oracle, wa, state, phase_snapshots))
}

/// Both resistances a split-graph comparison needs: `r_combined` in the union
/// `G₊ ∪ G₋` and `r_plus` in `G₊` alone (absent when u, v are disconnected
/// there), together with ζ, the total weight of `G₋`.
#[derive(Debug, Clone, Copy)]
pub struct SeparatedBounds {
    pub zeta: f64,
    pub r_combined: f64,
    pub r_plus: Option<f64>,
}

impl SeparatedBounds {
    /// Sides of `1/R_G ≤ 1/R_{G₊} + ζ` (needs u, v connected in G₊).
    pub fn transfer_sides(&self) -> Option<(f64, f64)> {
        self.r_plus
            .map(|rp| (1.0 / self.r_combined, 1.0 / rp + self.zeta))
    }

    /// Whether the combined resistance is small enough (`R_G ≤ 1/(5ζ)`) for
    /// the lower bound `R_G ≥ (4/5)·R_{G₊}` to apply.
    pub fn lower_bound_applies(&self) -> bool {
        self.zeta == 0.0 || self.r_combined <= 1.0 / (5.0 * self.zeta)
    }
}

/// Evaluates the two resistances that relate a graph to its heavy part.
pub fn separated_resistance_bounds(
    g_plus: &WeightedGraph,
    g_minus: &WeightedGraph,
    u: usize,
    v: usize,
) -> Result<SeparatedBounds> {
    if g_plus.n != g_minus.n {
        return Err(Error::InvalidInput(
            "graphs must share the vertex set".into(),
        ));
    }
    if u >= g_plus.n || v >= g_plus.n || u == v {
        return Err(Error::InvalidInput(format!(
            "invalid query pair ({u}, {v})"
        )));
    }
    let mut union = g_plus.clone();
    union.edges.extend_from_slice(&g_minus.edges);
    let zeta = g_minus.total_weight();
    let combined = ComponentResistance::new(&union)?;
    let r_combined = combined.resistance(u, v).ok_or_else(|| {
        Error::Disconnected(format!(
            "({u}, {v}) are disconnected even in the union graph"
        ))
    })?;
    let plus = ComponentResistance::new(g_plus)?;
    let r_plus = plus.resistance(u, v);
    Ok(SeparatedBounds {
        zeta,
        r_combined,
        r_plus,
    })
}
