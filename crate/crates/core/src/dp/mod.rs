//! Exact dynamic program over vertical separators of the warehouse grid.
//!
//! Grid edges are added one at a time (see [`edge_order`]). A state records,
//! for each vertex on the current separator, its degree parity and its
//! connected component in the partial tour subgraph. Every layer keeps the
//! cheapest partial solution per state together with a back pointer, and the
//! optimum is rebuilt by walking the pointers from the best final state.

mod state;
mod transition;

use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

pub use state::{DpState, Parity, MAX_SLOTS};
pub use transition::{edge_order, vertical_transitions, Step, VerticalKind, VerticalTransition};

use crate::graph::{build_steiner_graph, SteinerGraph};
use crate::tour::{euler_tour, Tour, TourSubgraph};
use crate::warehouse::{Dist, PickingInstance};
use state::Frontier;

/// Limits and execution mode of the solver.
#[derive(Debug, Clone)]
pub struct DpConfig {
    /// Largest number of cross-aisles accepted.
    pub max_h: usize,
    /// Estimated memory ceiling of the state tables, in bytes.
    pub max_table_bytes: Option<u64>,
    /// Largest number of states allowed in one layer.
    pub max_live_states: Option<usize>,
    /// Expand each layer on the rayon thread pool.
    pub parallel: bool,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self { max_h: 9, max_table_bytes: None, max_live_states: None, parallel: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DpStats {
    pub layers: usize,
    pub peak_states: usize,
    pub expansions: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Error)]
pub enum DpError {
    #[error("resource cap exceeded: {reason}")]
    ResourceCapExceeded { reason: String, stats: DpStats },
}

/// A transition chosen for one grid edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Vertical(VerticalKind),
    /// Multiplicity of a cross-aisle segment.
    Horizontal(u8),
}

/// The optimum expressed on the grid: a covering kind per sub-aisle and a
/// multiplicity per cross-aisle segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSolution {
    aisles: usize,
    cross_aisles: usize,
    /// Indexed `aisle * blocks + block`.
    pub verticals: Vec<VerticalTransition>,
    /// Indexed `aisle * cross_aisles + cross_aisle` for `aisle < aisles - 1`.
    pub horizontals: Vec<u8>,
}

impl GridSolution {
    fn empty(instance: &PickingInstance) -> Self {
        let layout = instance.layout();
        let none = VerticalTransition {
            kind: VerticalKind::None,
            cost: 0,
            lo: 0,
            hi: layout.sub_aisle_length(),
        };
        Self {
            aisles: layout.aisles(),
            cross_aisles: layout.cross_aisles(),
            verticals: vec![none; layout.sub_aisle_count()],
            horizontals: vec![0; (layout.aisles() - 1) * layout.cross_aisles()],
        }
    }

    pub fn vertical(&self, aisle: usize, block: usize) -> &VerticalTransition {
        &self.verticals[aisle * (self.cross_aisles - 1) + block]
    }

    pub fn horizontal(&self, aisle: usize, cross_aisle: usize) -> u8 {
        self.horizontals[aisle * self.cross_aisles + cross_aisle]
    }

    /// Expands the grid solution onto any Steiner graph of the same layout
    /// whose sub-aisle products form a subset of the original ones.
    pub fn to_tour_subgraph(&self, graph: &SteinerGraph) -> TourSubgraph {
        let mut ts = TourSubgraph::new();
        for a in 0..self.aisles {
            for b in 0..self.cross_aisles - 1 {
                let choice = self.vertical(a, b);
                let chain = graph.sub_aisle_chain(a, b);
                for w in chain.windows(2) {
                    let o1 = graph.chain_offset(w[0], a, b).expect("chain vertex");
                    let o2 = graph.chain_offset(w[1], a, b).expect("chain vertex");
                    ts.set(w[0], w[1], choice.multiplicity(o1, o2));
                }
            }
            if a + 1 < self.aisles {
                for c in 0..self.cross_aisles {
                    ts.set(graph.grid_vertex(a, c), graph.grid_vertex(a + 1, c), self.horizontal(a, c));
                }
            }
        }
        ts
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub cost: Dist,
    pub solution: GridSolution,
    pub graph: SteinerGraph,
    pub tour_subgraph: TourSubgraph,
    pub tour: Tour,
    pub stats: DpStats,
}

/// Precomputed transition system of one instance.
#[derive(Debug, Clone)]
pub struct DpModel {
    slots: usize,
    depot: (usize, usize),
    steps: Vec<Step>,
    verticals: Vec<Vec<VerticalTransition>>,
    products_after: Vec<usize>,
    aisle_pitch: Dist,
    last_aisle: usize,
}

const HORIZONTAL: [Transition; 3] =
    [Transition::Horizontal(0), Transition::Horizontal(1), Transition::Horizontal(2)];

impl DpModel {
    pub fn new(instance: &PickingInstance) -> Self {
        let layout = instance.layout();
        let (v, h) = (layout.aisles(), layout.cross_aisles());
        let mut verticals = Vec::with_capacity(layout.sub_aisle_count());
        let mut per_aisle = vec![0; v];
        for a in 0..v {
            for b in 0..h - 1 {
                let offsets = instance.sub_aisle_offsets(a, b);
                per_aisle[a] += offsets.len();
                verticals.push(vertical_transitions(&offsets, layout.sub_aisle_length()));
            }
        }
        let mut products_after = vec![0; v];
        for a in (0..v.saturating_sub(1)).rev() {
            products_after[a] = products_after[a + 1] + per_aisle[a + 1];
        }
        let depot = instance.depot();
        Self {
            slots: h,
            depot: (depot.aisle, depot.cross_aisle),
            steps: edge_order(layout),
            verticals,
            products_after,
            aisle_pitch: layout.aisle_pitch(),
            last_aisle: v - 1,
        }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Transitions available at `step` with their lengths.
    pub fn transitions(&self, step: Step) -> Vec<(Transition, Dist)> {
        match step {
            Step::Vertical { aisle, block } => self.verticals[aisle * (self.slots - 1) + block]
                .iter()
                .map(|t| (Transition::Vertical(t.kind), t.cost))
                .collect(),
            Step::Horizontal { .. } => {
                HORIZONTAL.iter().map(|&t| (t, self.horizontal_cost(t))).collect()
            }
        }
    }

    #[inline]
    fn horizontal_cost(&self, t: Transition) -> Dist {
        match t {
            Transition::Horizontal(m) => m as Dist * self.aisle_pitch,
            Transition::Vertical(_) => unreachable!(),
        }
    }

    /// Applies `tr` at `step` and checks the result; `None` when the
    /// successor is not a valid partial tour subgraph.
    pub fn apply(&self, state: DpState, step: Step, tr: Transition) -> Option<DpState> {
        match (step, tr) {
            (Step::Vertical { .. }, Transition::Vertical(kind)) => {
                if state.is_closed() {
                    return (kind == VerticalKind::None).then_some(state);
                }
                let Step::Vertical { block, .. } = step else { unreachable!() };
                let (bottom, top, connect) = kind.effect();
                let mut f = Frontier::unpack(state, self.slots);
                f.add(block, bottom);
                f.add(block + 1, top);
                if connect {
                    f.merge(block, block + 1);
                }
                f.pack()
            }
            (Step::Horizontal { aisle, cross_aisle: c }, Transition::Horizontal(m)) => {
                if state.is_closed() {
                    return (m == 0).then_some(state);
                }
                let mut f = Frontier::unpack(state, self.slots);
                f.add(c, m);
                if f.odd[c] {
                    return None;
                }
                if (aisle, c) == self.depot && f.comp[c] == 0 {
                    return None;
                }
                if m > 0 {
                    f.odd[c] = m == 1;
                } else {
                    let vanishing = f.comp[c] != 0 && f.is_sole_member(c);
                    f.comp[c] = 0;
                    if vanishing {
                        let depot_left = aisle > self.depot.0 || (aisle == self.depot.0 && c >= self.depot.1);
                        let done = f.all_zero() && self.products_after[aisle] == 0 && depot_left;
                        return done.then_some(DpState::CLOSED);
                    }
                }
                f.pack()
            }
            _ => None,
        }
    }

    /// Acceptance of a state after the last step.
    pub fn is_final(&self, state: DpState) -> bool {
        if state.is_closed() {
            return true;
        }
        let mut seen_one = false;
        for i in 0..self.slots {
            if state.is_odd(i) {
                return false;
            }
            match state.component(i) {
                0 => {}
                1 => seen_one = true,
                _ => return false,
            }
        }
        let depot_ok = self.depot.0 != self.last_aisle || state.component(self.depot.1) != 0;
        seen_one && depot_ok
    }

    fn vertical_choice(&self, step: Step, kind: VerticalKind) -> VerticalTransition {
        let Step::Vertical { aisle, block } = step else { unreachable!() };
        *self.verticals[aisle * (self.slots - 1) + block]
            .iter()
            .find(|t| t.kind == kind)
            .expect("kind offered at this step")
    }
}

#[inline]
fn encode(tr: Transition) -> u8 {
    match tr {
        Transition::Vertical(k) => k.code(),
        Transition::Horizontal(m) => m,
    }
}

#[inline]
fn decode(step: Step, code: u8) -> Transition {
    match step {
        Step::Vertical { .. } => Transition::Vertical(VerticalKind::from_code(code)),
        Step::Horizontal { .. } => Transition::Horizontal(code),
    }
}

/// Back pointers of one layer, aligned with the layer's states.
struct Layer {
    pred: Vec<u32>,
    tr: Vec<u8>,
}

/// Best proposal per successor state: `(cost, predecessor, transition)`.
type Proposals = FxHashMap<DpState, (Dist, u32, u8)>;

/// Keeps the proposal with the smallest `(cost, predecessor state,
/// transition)`. Ties never depend on the order of the previous layer, so
/// sequential and parallel runs pick the same solution.
#[inline]
fn propose(map: &mut Proposals, current: &[(DpState, Dist)], state: DpState, entry: (Dist, u32, u8)) {
    map.entry(state)
        .and_modify(|e| {
            let rank = |x: &(Dist, u32, u8)| (x.0, current[x.1 as usize].0, x.2);
            if rank(&entry) < rank(e) {
                *e = entry;
            }
        })
        .or_insert(entry);
}

const RETAINED_BYTES: u64 = 5;
const LIVE_BYTES: u64 = 72;

struct Run<'a> {
    model: &'a DpModel,
    config: &'a DpConfig,
    stats: DpStats,
    retained: u64,
    start: Instant,
}

impl Run<'_> {
    fn check_caps(&mut self, live: usize) -> Result<(), DpError> {
        if let Some(cap) = self.config.max_live_states {
            if live > cap {
                return Err(self.fail(format!("{live} states in one layer (cap {cap})")));
            }
        }
        if let Some(cap) = self.config.max_table_bytes {
            let bytes = self.retained + live as u64 * LIVE_BYTES;
            if bytes > cap {
                return Err(self.fail(format!("state tables need about {bytes} bytes (cap {cap})")));
            }
        }
        Ok(())
    }

    fn fail(&mut self, reason: String) -> DpError {
        self.stats.elapsed_ms = self.start.elapsed().as_secs_f64() * 1e3;
        DpError::ResourceCapExceeded { reason, stats: self.stats.clone() }
    }

    fn expand_sequential(&mut self, step: Step, current: &[(DpState, Dist)]) -> Result<Proposals, DpError> {
        let transitions = self.model.transitions(step);
        let mut next = Proposals::default();
        next.reserve(current.len());
        for (idx, &(state, cost)) in current.iter().enumerate() {
            for &(tr, len) in &transitions {
                self.stats.expansions += 1;
                if let Some(succ) = self.model.apply(state, step, tr) {
                    propose(&mut next, current, succ, (cost + len, idx as u32, encode(tr)));
                }
            }
            if idx % 1024 == 0 {
                self.check_caps(next.len() + current.len())?;
            }
        }
        Ok(next)
    }

    fn expand_parallel(&mut self, step: Step, current: &[(DpState, Dist)]) -> Result<Proposals, DpError> {
        const CHUNK: usize = 2048;
        let transitions = self.model.transitions(step);
        let model = self.model;
        let partial: Vec<Proposals> = current
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(chunk, states)| {
                let mut local = Proposals::default();
                for (offset, &(state, cost)) in states.iter().enumerate() {
                    let idx = (chunk * CHUNK + offset) as u32;
                    for &(tr, len) in &transitions {
                        if let Some(succ) = model.apply(state, step, tr) {
                            propose(&mut local, current, succ, (cost + len, idx, encode(tr)));
                        }
                    }
                }
                local
            })
            .collect();
        self.stats.expansions += (current.len() * transitions.len()) as u64;
        let mut next = Proposals::default();
        for local in partial {
            for (state, entry) in local {
                propose(&mut next, current, state, entry);
            }
        }
        self.check_caps(next.len() + current.len())?;
        Ok(next)
    }
}

/// Solves with the default configuration.
pub fn solve_dp(instance: &PickingInstance) -> Result<SolveResult, DpError> {
    solve_dp_with(instance, &DpConfig::default())
}

pub fn solve_dp_with(instance: &PickingInstance, config: &DpConfig) -> Result<SolveResult, DpError> {
    let start = Instant::now();
    let h = instance.layout().cross_aisles();
    if h > config.max_h || h > MAX_SLOTS {
        return Err(DpError::ResourceCapExceeded {
            reason: format!("{h} cross-aisles exceed the limit of {}", config.max_h.min(MAX_SLOTS)),
            stats: DpStats::default(),
        });
    }
    let graph = build_steiner_graph(instance);
    if instance.n() == 0 {
        let tour_subgraph = TourSubgraph::new();
        let tour = euler_tour(&graph, &tour_subgraph);
        return Ok(SolveResult {
            cost: 0,
            solution: GridSolution::empty(instance),
            graph,
            tour_subgraph,
            tour,
            stats: DpStats { elapsed_ms: start.elapsed().as_secs_f64() * 1e3, ..DpStats::default() },
        });
    }

    let model = DpModel::new(instance);
    let mut run = Run { model: &model, config, stats: DpStats::default(), retained: 0, start };
    let mut layers: Vec<Layer> = Vec::with_capacity(model.steps.len());
    let mut current: Vec<(DpState, Dist)> = vec![(DpState::EMPTY, 0)];

    for &step in &model.steps {
        let next = if config.parallel {
            run.expand_parallel(step, &current)?
        } else {
            run.expand_sequential(step, &current)?
        };
        let entries: Vec<(DpState, (Dist, u32, u8))> = next.into_iter().collect();
        run.retained += entries.len() as u64 * RETAINED_BYTES;
        run.stats.layers += 1;
        run.stats.peak_states = run.stats.peak_states.max(entries.len());
        run.check_caps(entries.len())?;
        layers.push(Layer {
            pred: entries.iter().map(|e| e.1 .1).collect(),
            tr: entries.iter().map(|e| e.1 .2).collect(),
        });
        current = entries.into_iter().map(|(s, (c, _, _))| (s, c)).collect();
    }

    let (best_idx, cost) = current
        .iter()
        .enumerate()
        .filter(|(_, (s, _))| model.is_final(*s))
        .min_by_key(|(_, &(s, c))| (c, s))
        .map(|(i, &(_, c))| (i, c))
        .expect("a tour always exists");

    let mut solution = GridSolution::empty(instance);
    let mut idx = best_idx;
    for (layer, &step) in layers.iter().zip(&model.steps).rev() {
        match (step, decode(step, layer.tr[idx])) {
            (Step::Vertical { aisle, block }, Transition::Vertical(kind)) => {
                solution.verticals[aisle * (h - 1) + block] = model.vertical_choice(step, kind);
            }
            (Step::Horizontal { aisle, cross_aisle }, Transition::Horizontal(m)) => {
                solution.horizontals[aisle * h + cross_aisle] = m;
            }
            _ => unreachable!(),
        }
        idx = layer.pred[idx] as usize;
    }

    let tour_subgraph = solution.to_tour_subgraph(&graph);
    let tour = euler_tour(&graph, &tour_subgraph);
    run.stats.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveResult { cost, solution, graph, tour_subgraph, tour, stats: run.stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing;
    use crate::tour::validate_tour_subgraph;

    fn cost(inst: &PickingInstance) -> Dist {
        let r = solve_dp(inst).unwrap();
        assert_eq!(validate_tour_subgraph(&r.graph, &r.tour_subgraph), Ok(r.cost));
        assert_eq!(r.tour.walk_length(&r.graph), Some(r.cost));
        r.cost
    }

    #[test]
    fn two_aisles_one_product_each() {
        // min(2*4 + 2*3 + 2*5, 2*10 + 2*3) = 24
        let inst = testing::instance(2, 2, 10, 3, (0, 0), &[(0, 0, 4), (1, 0, 5)]);
        assert_eq!(cost(&inst), 24);
    }

    #[test]
    fn loop_wins_when_products_are_deep() {
        let inst = testing::instance(2, 2, 10, 3, (0, 0), &[(0, 0, 8), (1, 0, 9)]);
        let r = solve_dp(&inst).unwrap();
        assert_eq!(r.cost, 26);
        assert_eq!(r.solution.vertical(0, 0).kind, VerticalKind::Single);
        assert_eq!(r.solution.vertical(1, 0).kind, VerticalKind::Single);
    }

    #[test]
    fn no_products() {
        let inst = testing::instance(3, 3, 10, 3, (0, 1), &[]);
        let r = solve_dp(&inst).unwrap();
        assert_eq!(r.cost, 0);
        assert!(r.tour_subgraph.is_empty());
        assert_eq!(r.tour.walk, vec![0]);
    }

    #[test]
    fn out_and_back() {
        let inst = testing::instance(1, 2, 10, 3, (0, 0), &[(0, 0, 4)]);
        let r = solve_dp(&inst).unwrap();
        assert_eq!(r.cost, 8);
        assert_eq!(r.tour.walk, vec![0, 1, 0]);
    }

    #[test]
    fn figure_four() {
        assert_eq!(cost(&testing::figure_four_instance()), 20);
    }

    #[test]
    fn figure_one() {
        // central depot, products in the upper block of aisles 2 and 3
        let inst = testing::figure_one_instance();
        let r = solve_dp(&inst).unwrap();
        assert_eq!(validate_tour_subgraph(&r.graph, &r.tour_subgraph), Ok(r.cost));
        assert_eq!(r.cost, 2 * 10 + 2 * 3 + 2 * 10);
    }

    #[test]
    fn depot_on_upper_cross_aisle_of_last_column() {
        let inst = testing::instance(3, 3, 6, 2, (2, 2), &[(0, 0, 2), (2, 1, 3)]);
        let r = solve_dp(&inst).unwrap();
        assert_eq!(validate_tour_subgraph(&r.graph, &r.tour_subgraph), Ok(r.cost));
    }

    #[test]
    fn figure_three_state_is_reachable() {
        // three slots: slot 0 and 1 joined by a double sub-aisle, slot 2 on its own
        let inst = testing::instance(2, 3, 10, 3, (0, 0), &[(0, 1, 5)]);
        let model = DpModel::new(&inst);
        let steps = model.steps();
        let s = model.apply(DpState::EMPTY, steps[0], Transition::Vertical(VerticalKind::DoubleFull));
        let s = model.apply(s.unwrap(), steps[1], Transition::Vertical(VerticalKind::TopReturn));
        assert_eq!(s.unwrap().display(3), "{(E,E,E)(1,1,2)}");
    }

    #[test]
    fn horizontal_single_joins_components() {
        let inst = testing::instance(2, 2, 10, 3, (0, 0), &[(0, 0, 4), (1, 0, 5)]);
        let model = DpModel::new(&inst);
        let start = DpState::from_slots(&[(1, false), (2, false)]).unwrap();
        let mut f = Frontier::unpack(start, 2);
        f.add(0, 1);
        f.add(1, 1);
        f.merge(0, 1);
        assert_eq!(f.pack().unwrap().display(2), "{(U,U)(1,1)}");
        // an odd vertex cannot leave the frontier
        let odd = DpState::from_slots(&[(1, true), (1, true)]).unwrap();
        let step = Step::Horizontal { aisle: 0, cross_aisle: 0 };
        assert_eq!(model.apply(odd, step, Transition::Horizontal(0)), None);
        assert!(model.apply(odd, step, Transition::Horizontal(1)).is_some());
    }

    #[test]
    fn last_layer_needs_one_component() {
        let inst = testing::instance(2, 3, 10, 3, (0, 0), &[(1, 0, 5)]);
        let model = DpModel::new(&inst);
        let two = DpState::from_slots(&[(1, false), (0, false), (2, false)]).unwrap();
        assert!(!model.is_final(two));
        let one = DpState::from_slots(&[(1, false), (0, false), (1, false)]).unwrap();
        assert!(model.is_final(one));
        assert!(model.is_final(DpState::CLOSED));
    }

    #[test]
    fn resource_caps() {
        let inst = testing::instance(4, 5, 10, 3, (0, 0), &[(0, 0, 4), (3, 3, 5), (2, 1, 2)]);
        let tight = DpConfig { max_h: 4, ..DpConfig::default() };
        assert!(matches!(solve_dp_with(&inst, &tight), Err(DpError::ResourceCapExceeded { .. })));
        let tiny = DpConfig { max_live_states: Some(3), ..DpConfig::default() };
        match solve_dp_with(&inst, &tiny) {
            Err(DpError::ResourceCapExceeded { stats, .. }) => assert!(stats.layers < 20),
            other => panic!("expected cap error, got {other:?}"),
        }
        let bytes = DpConfig { max_table_bytes: Some(2_000), ..DpConfig::default() };
        assert!(solve_dp_with(&inst, &bytes).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let inst = testing::random_instance(&mut rng, 5, 4, 8, 2, 12);
            let seq = solve_dp(&inst).unwrap();
            let par = solve_dp_with(&inst, &DpConfig { parallel: true, ..DpConfig::default() }).unwrap();
            assert_eq!(seq.cost, par.cost);
            assert_eq!(seq.solution, par.solution);
            assert_eq!(seq.stats.peak_states, par.stats.peak_states);
        }
    }
}
