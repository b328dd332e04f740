//! Tour subgraphs (edge multiplicities) and the closed walks they encode.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{edge_key, SteinerGraph, VertexId};
use crate::warehouse::Dist;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TourError {
    #[error("vertex {0} has odd degree")]
    OddDegree(VertexId),
    #[error("required vertex {0} is not collected")]
    UncollectedRequired(VertexId),
    #[error("the tour subgraph has more than one connected component")]
    Disconnected,
    #[error("edge ({0}, {1}) does not exist in the graph")]
    UnknownEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) has multiplicity {2}, expected 0, 1 or 2")]
    BadMultiplicity(VertexId, VertexId, u8),
}

/// Edge multiplicities keyed by `(u, v)` with `u < v`. Zero entries are not
/// stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TourSubgraph {
    multiplicity: BTreeMap<(VertexId, VertexId), u8>,
}

impl TourSubgraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, a: VertexId, b: VertexId, mult: u8) {
        let key = edge_key(a, b);
        if mult == 0 {
            self.multiplicity.remove(&key);
        } else {
            self.multiplicity.insert(key, mult);
        }
    }

    pub fn get(&self, a: VertexId, b: VertexId) -> u8 {
        self.multiplicity.get(&edge_key(a, b)).copied().unwrap_or(0)
    }

    /// Non-zero edges in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = ((VertexId, VertexId), u8)> + '_ {
        self.multiplicity.iter().map(|(&k, &m)| (k, m))
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicity.is_empty()
    }

    pub fn len(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.multiplicity
            .iter()
            .filter(|(&(a, b), _)| a == v || b == v)
            .map(|(_, &m)| m as usize)
            .sum()
    }

    /// `Σ mult × length`; `None` when an edge is missing from `graph`.
    pub fn length(&self, graph: &SteinerGraph) -> Option<Dist> {
        self.edges().try_fold(0, |acc, ((a, b), m)| {
            graph.edge_length(a, b).map(|len| acc + m as Dist * len)
        })
    }
}

/// A closed walk starting and ending at the depot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub walk: Vec<VertexId>,
    pub length: Dist,
}

/// Checks that `ts` is a tour subgraph of `graph` and returns its length.
///
/// An empty subgraph is accepted only when the depot is the sole required
/// vertex.
pub fn validate_tour_subgraph(graph: &SteinerGraph, ts: &TourSubgraph) -> Result<Dist, TourError> {
    let n = graph.vertex_count();
    let mut degree = vec![0usize; n];
    let mut parent: Vec<VertexId> = (0..n).collect();
    fn find(parent: &mut [VertexId], mut x: VertexId) -> VertexId {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut length = 0;
    for ((a, b), m) in ts.edges() {
        if m > 2 {
            return Err(TourError::BadMultiplicity(a, b, m));
        }
        let len = graph.edge_length(a, b).ok_or(TourError::UnknownEdge(a, b))?;
        length += m as Dist * len;
        degree[a] += m as usize;
        degree[b] += m as usize;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    if let Some(v) = (0..n).find(|&v| degree[v] % 2 == 1) {
        return Err(TourError::OddDegree(v));
    }
    if ts.is_empty() && graph.required_count() == 1 {
        return Ok(0);
    }
    if let Some(v) = graph.required().find(|&v| degree[v] == 0) {
        return Err(TourError::UncollectedRequired(v));
    }
    let root = find(&mut parent, graph.depot());
    if (0..n).any(|v| degree[v] > 0 && find(&mut parent, v) != root) {
        return Err(TourError::Disconnected);
    }
    Ok(length)
}

/// Directs a valid tour subgraph: doubled edges become one arc each way and
/// single edges are oriented along cycles, so every arc is used at most
/// once and every vertex is balanced.
pub fn orient(ts: &TourSubgraph) -> Vec<(VertexId, VertexId)> {
    let mut arcs = Vec::new();
    let mut singles: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for ((a, b), m) in ts.edges() {
        if m == 2 {
            arcs.push((a, b));
            arcs.push((b, a));
        } else {
            singles.entry(a).or_default().push(b);
            singles.entry(b).or_default().push(a);
        }
    }
    // Peel cycles off the even-degree single-edge subgraph.
    while let Some(&start) = singles.iter().find(|(_, nb)| !nb.is_empty()).map(|(v, _)| v) {
        let mut u = start;
        while let Some(v) = singles.get_mut(&u).and_then(|nb| nb.pop()) {
            if let Some(nb) = singles.get_mut(&v) {
                if let Some(pos) = nb.iter().position(|&x| x == u) {
                    nb.swap_remove(pos);
                }
            }
            arcs.push((u, v));
            u = v;
            if u == start && singles.get(&u).is_none_or(|nb| nb.is_empty()) {
                break;
            }
        }
    }
    arcs.sort_unstable();
    arcs
}

/// Euler circuit over the oriented arcs, starting at the depot.
pub fn euler_tour(graph: &SteinerGraph, ts: &TourSubgraph) -> Tour {
    let depot = graph.depot();
    let arcs = orient(ts);
    let length = ts.length(graph).unwrap_or(0);
    if arcs.is_empty() {
        return Tour { walk: vec![depot], length };
    }
    let mut out: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &(u, v) in arcs.iter().rev() {
        out.entry(u).or_default().push(v);
    }
    // Hierholzer; adjacency lists are popped from the back, so the smallest
    // successor is taken first.
    let mut stack = vec![depot];
    let mut walk = Vec::with_capacity(arcs.len() + 1);
    while let Some(&u) = stack.last() {
        match out.get_mut(&u).and_then(|next| next.pop()) {
            Some(v) => stack.push(v),
            None => walk.push(stack.pop().unwrap()),
        }
    }
    walk.reverse();
    Tour { walk, length }
}

impl Tour {
    /// Length recomputed from the walk.
    pub fn walk_length(&self, graph: &SteinerGraph) -> Option<Dist> {
        self.walk.windows(2).try_fold(0, |acc, w| graph.edge_length(w[0], w[1]).map(|d| acc + d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_steiner_graph;
    use crate::testing;

    fn out_and_back() -> (SteinerGraph, TourSubgraph) {
        let g = build_steiner_graph(&testing::instance(1, 2, 10, 3, (0, 0), &[(0, 0, 4)]));
        let mut ts = TourSubgraph::new();
        ts.set(0, 1, 2);
        (g, ts)
    }

    #[test]
    fn out_and_back_walk() {
        let (g, ts) = out_and_back();
        assert_eq!(validate_tour_subgraph(&g, &ts), Ok(8));
        let tour = euler_tour(&g, &ts);
        assert_eq!(tour.walk, vec![0, 1, 0]);
        assert_eq!(tour.length, 8);
    }

    #[test]
    fn detects_each_failure() {
        let g = build_steiner_graph(&testing::figure_four_instance());
        let mut ts = TourSubgraph::new();
        ts.set(0, 3, 2);
        ts.set(3, 1, 2);
        assert_eq!(validate_tour_subgraph(&g, &ts), Err(TourError::UncollectedRequired(2)));
        ts.set(1, 5, 1);
        assert_eq!(validate_tour_subgraph(&g, &ts), Err(TourError::OddDegree(1)));
        let mut split = TourSubgraph::new();
        split.set(0, 3, 2);
        split.set(3, 1, 2);
        split.set(2, 7, 2);
        assert_eq!(validate_tour_subgraph(&g, &split), Err(TourError::Disconnected));
        let mut unknown = TourSubgraph::new();
        unknown.set(0, 1, 2);
        assert_eq!(validate_tour_subgraph(&g, &unknown), Err(TourError::UnknownEdge(0, 1)));
    }

    #[test]
    fn empty_subgraph_only_without_products() {
        let g = build_steiner_graph(&testing::instance(2, 2, 10, 3, (0, 0), &[]));
        assert_eq!(validate_tour_subgraph(&g, &TourSubgraph::new()), Ok(0));
        let (g, _) = out_and_back();
        assert_eq!(
            validate_tour_subgraph(&g, &TourSubgraph::new()),
            Err(TourError::UncollectedRequired(0))
        );
    }

    #[test]
    fn loop_tour_orients_singles_consistently() {
        // 0 -c- 1 -b- 2 -a- f -e- 0 as a single loop on the Fig. 4 graph
        let g = build_steiner_graph(&testing::figure_four_instance());
        let mut ts = TourSubgraph::new();
        for (a, b) in [(0, 3), (3, 1), (1, 5), (5, 2), (2, 7), (7, 6), (6, 4), (4, 0)] {
            ts.set(a, b, 1);
        }
        assert_eq!(validate_tour_subgraph(&g, &ts), Ok(24));
        let arcs = orient(&ts);
        assert_eq!(arcs.len(), 8);
        for v in 0..g.vertex_count() {
            let out = arcs.iter().filter(|a| a.0 == v).count();
            let inn = arcs.iter().filter(|a| a.1 == v).count();
            assert_eq!(out, inn);
        }
        let tour = euler_tour(&g, &ts);
        assert_eq!(tour.walk.first(), Some(&0));
        assert_eq!(tour.walk.last(), Some(&0));
        assert_eq!(tour.walk_length(&g), Some(24));
    }
}
