//! Size reductions that keep the optimal tour length.
//!
//! Vertex reductions rely on the largest gap of a sub-aisle: in an optimal
//! tour the products below it (`S`) and above it (`T`) are each collected in
//! one go. With side constraints available only the extremes of `S` and `T`
//! are kept and the arc between each pair of extremes is forced; without
//! constraints a product is dropped only when the largest gap stays where it
//! was. Edge reduction keeps a subgraph preserving every required-pair
//! distance.

use std::collections::HashMap;

use crate::graph::{edge_key, Location, SteinerGraph, VertexId, UNREACHABLE};
use crate::warehouse::{Dist, PickingInstance, ProductLocation};
use crate::graph::build_steiner_graph;

/// Position of the largest gap of a sorted offset list in `(0, length)`,
/// counting both bounding intersections. Ties go to the lowest gap.
pub fn largest_gap(offsets: &[Dist], length: Dist) -> (Dist, Dist) {
    let mut best = (0, length);
    let mut best_len = None;
    let mut prev = 0;
    for &o in offsets.iter().chain(std::iter::once(&length)) {
        let gap = o - prev;
        if best_len.is_none_or(|b| gap > b) {
            best = (prev, o);
            best_len = Some(gap);
        }
        prev = o;
    }
    best
}

/// Largest-gap structure of one sub-aisle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapAnalysis {
    pub aisle: usize,
    pub block: usize,
    /// Product offsets, bottom to top.
    pub offsets: Vec<Dist>,
    /// Lower and upper end of the largest gap (0 and `L` stand for the
    /// intersections).
    pub gap: (Dist, Dist),
    /// Products below the gap.
    pub below: Vec<Dist>,
    /// Products above the gap.
    pub above: Vec<Dist>,
}

impl GapAnalysis {
    pub fn new(aisle: usize, block: usize, offsets: Vec<Dist>, length: Dist) -> Self {
        let gap = largest_gap(&offsets, length);
        let (below, above) = offsets.iter().partition(|&&o| o <= gap.0);
        Self { aisle, block, offsets, gap, below, above }
    }

    pub fn largest_gap(&self) -> Dist {
        self.gap.1 - self.gap.0
    }

    /// `(b_S, t_S)`: lowest and highest product below the gap.
    pub fn below_extremes(&self) -> Option<(Dist, Dist)> {
        Some((*self.below.first()?, *self.below.last()?))
    }

    /// `(b_T, t_T)`: lowest and highest product above the gap.
    pub fn above_extremes(&self) -> Option<(Dist, Dist)> {
        Some((*self.above.first()?, *self.above.last()?))
    }

    /// The deduplicated extremes of both sides, bottom to top.
    pub fn kept_offsets(&self) -> Vec<Dist> {
        let mut kept: Vec<Dist> = [self.below_extremes(), self.above_extremes()]
            .into_iter()
            .flatten()
            .flat_map(|(lo, hi)| [lo, hi])
            .collect();
        kept.dedup();
        kept
    }
}

/// Gap analysis of every sub-aisle, in `(aisle, block)` order.
pub fn analyze_gaps(instance: &PickingInstance) -> Vec<GapAnalysis> {
    let layout = instance.layout();
    let mut out = Vec::with_capacity(layout.sub_aisle_count());
    for a in 0..layout.aisles() {
        for b in 0..layout.blocks() {
            out.push(GapAnalysis::new(a, b, instance.sub_aisle_offsets(a, b), layout.sub_aisle_length()));
        }
    }
    out
}

/// Result of the constrained vertex reduction.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub instance: PickingInstance,
    pub graph: SteinerGraph,
    /// Vertex pairs of which at least one direction must be traversed.
    pub forced_pairs: Vec<(VertexId, VertexId)>,
    /// Original graph vertex to reduced graph vertex; `None` for removed
    /// products.
    pub vertex_map: Vec<Option<VertexId>>,
    /// Gap analysis of the original instance.
    pub gaps: Vec<GapAnalysis>,
}

impl ReducedInstance {
    /// Forced pairs expressed as product locations.
    pub fn forced_locations(&self) -> Vec<(ProductLocation, ProductLocation)> {
        self.forced_pairs
            .iter()
            .map(|&(u, v)| {
                let loc = |x: VertexId| match self.graph.vertex(x).location {
                    Location::Slot(p) => p,
                    Location::Grid { .. } => unreachable!("forced pairs join products"),
                };
                (loc(u), loc(v))
            })
            .collect()
    }
}

/// Keeps only `b_S, t_S, b_T, t_T` in every sub-aisle and forces the arcs
/// `{t_S, b_S}` and `{t_T, b_T}` when the sets are not singletons.
pub fn reduce_with_constraints(instance: &PickingInstance) -> ReducedInstance {
    let gaps = analyze_gaps(instance);
    let mut kept = Vec::new();
    let mut forced = Vec::new();
    for g in &gaps {
        kept.extend(g.kept_offsets().into_iter().map(|o| ProductLocation::new(g.aisle, g.block, o)));
        for (lo, hi) in [g.below_extremes(), g.above_extremes()].into_iter().flatten() {
            if lo != hi {
                forced.push((
                    ProductLocation::new(g.aisle, g.block, lo),
                    ProductLocation::new(g.aisle, g.block, hi),
                ));
            }
        }
    }
    let reduced = instance.with_products(kept).expect("kept products come from a valid instance");
    let graph = build_steiner_graph(&reduced);
    let forced_pairs = forced
        .iter()
        .map(|&(p, q)| {
            let u = graph.product_vertex(p).expect("kept product");
            let v = graph.product_vertex(q).expect("kept product");
            edge_key(u, v)
        })
        .collect();
    let original = build_steiner_graph(instance);
    let vertex_map = map_vertices(&original, &graph);
    ReducedInstance { instance: reduced, graph, forced_pairs, vertex_map, gaps }
}

/// Maps every vertex of `from` to the vertex at the same warehouse location
/// in `to`, if any.
pub fn map_vertices(from: &SteinerGraph, to: &SteinerGraph) -> Vec<Option<VertexId>> {
    from.vertices()
        .iter()
        .map(|vx| match vx.location {
            Location::Grid { aisle, cross_aisle } => Some(to.grid_vertex(aisle, cross_aisle)),
            Location::Slot(p) => to.product_vertex(p),
        })
        .collect()
}

/// Drops interior products while the largest gap of the sub-aisle stays
/// between `t_S` and `b_T`. Products are tried bottom to top and the guard is
/// re-checked after each removal. No side constraints are needed.
pub fn reduce_plain(instance: &PickingInstance) -> PickingInstance {
    let length = instance.layout().sub_aisle_length();
    let mut kept = Vec::with_capacity(instance.n());
    for g in analyze_gaps(instance) {
        let extremes = g.kept_offsets();
        let mut current = g.offsets.clone();
        for &o in &g.offsets {
            if extremes.contains(&o) {
                continue;
            }
            let trial: Vec<Dist> = current.iter().copied().filter(|&x| x != o).collect();
            if largest_gap(&trial, length) == g.gap {
                current = trial;
            }
        }
        kept.extend(current.into_iter().map(|o| ProductLocation::new(g.aisle, g.block, o)));
    }
    instance.with_products(kept).expect("kept products come from a valid instance")
}

/// A 1-spanner over the required vertices: a subgraph in which every
/// required pair keeps its exact distance.
///
/// Edges are examined longest first (ties by edge id) and dropped whenever
/// all required-pair distances survive. An edge that lies on no shortest
/// required-pair path is dropped without a search; otherwise distances are
/// recomputed from the affected sources only.
pub fn one_spanner(graph: &SteinerGraph) -> SteinerGraph {
    let required: Vec<VertexId> = graph.required().collect();
    // Rows are distances from each required vertex; they may go stale (too
    // small) after deletions, which only makes the filter below conservative.
    let mut rows: Vec<Vec<Dist>> = required.iter().map(|&i| graph.dijkstra(i)).collect();
    let target: Vec<Vec<Dist>> =
        rows.iter().map(|r| required.iter().map(|&j| r[j]).collect()).collect();

    let mut order: Vec<usize> = (0..graph.edges().len()).collect();
    order.sort_by_key(|&e| (std::cmp::Reverse(graph.edge(e).length), e));
    let mut alive = vec![true; graph.edges().len()];

    for e in order {
        let edge = *graph.edge(e);
        let on_path = |ri: usize, rows: &[Vec<Dist>]| {
            required.iter().enumerate().any(|(rj, _)| {
                let want = target[ri][rj];
                let through = |a: VertexId, b: VertexId| {
                    rows[ri][a].saturating_add(edge.length).saturating_add(rows[rj][b]) == want
                };
                want != UNREACHABLE && (through(edge.u, edge.v) || through(edge.v, edge.u))
            })
        };
        let affected: Vec<usize> = (0..required.len()).filter(|&ri| on_path(ri, &rows)).collect();
        if affected.is_empty() {
            alive[e] = false;
            continue;
        }
        let mut recomputed = Vec::with_capacity(affected.len());
        let mut preserved = true;
        for &ri in &affected {
            let dist = graph.dijkstra_masked(required[ri], Some(&alive), Some(e));
            if required.iter().enumerate().any(|(rj, &j)| dist[j] != target[ri][rj]) {
                preserved = false;
                break;
            }
            recomputed.push((ri, dist));
        }
        if preserved {
            alive[e] = false;
            for (ri, dist) in recomputed {
                rows[ri] = dist;
            }
        }
    }
    graph.with_edges((0..alive.len()).filter(|&e| alive[e]))
}

/// Number of products per sub-aisle, keyed by `(aisle, block)`.
pub fn products_per_sub_aisle(instance: &PickingInstance) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for p in instance.products() {
        *counts.entry((p.aisle, p.block)).or_insert(0) += 1;
    }
    counts
}
