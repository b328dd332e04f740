//! The sparse Steiner graph of a picking instance and exact shortest-path
//! services on it.
//!
//! Vertex numbering is deterministic: the depot is vertex 0, products follow
//! as `1..=n` in `(aisle, block, offset)` order, and the remaining grid
//! intersections come last in row-major order (bottom cross-aisle first,
//! left to right). The depot replaces the intersection it sits on.
//!
//! Arcs follow four rules: horizontally adjacent intersections, the two
//! intersections bounding an empty sub-aisle, an extreme product and its
//! adjacent intersection, and two adjacent products. Every arc exists in both
//! directions with the same length, so the graph is stored undirected.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::warehouse::{Dist, PickingInstance, ProductLocation, WarehouseLayout};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Unreachable marker returned by the distance routines.
pub const UNREACHABLE: Dist = Dist::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Depot,
    Product,
    Intersection,
}

impl VertexKind {
    #[inline]
    pub fn is_required(self) -> bool {
        !matches!(self, VertexKind::Intersection)
    }
}

/// Where a vertex sits in the warehouse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    Grid { aisle: usize, cross_aisle: usize },
    Slot(ProductLocation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub kind: VertexKind,
    pub location: Location,
    pub x: Dist,
    pub y: Dist,
}

/// Undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub length: Dist,
}

#[inline]
pub fn edge_key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone)]
pub struct SteinerGraph {
    layout: WarehouseLayout,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
    grid: Vec<VertexId>,
    n_required: usize,
}

impl SteinerGraph {
    fn assemble(
        layout: WarehouseLayout,
        vertices: Vec<Vertex>,
        mut edges: Vec<Edge>,
        grid: Vec<VertexId>,
    ) -> Self {
        edges.sort_unstable();
        edges.dedup_by_key(|e| (e.u, e.v));
        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
            edge_index.insert((e.u, e.v), id);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let n_required = vertices.iter().filter(|v| v.kind.is_required()).count();
        Self { layout, vertices, edges, adjacency, edge_index, grid, n_required }
    }

    /// Subgraph on the same vertex set keeping only `keep`.
    pub fn with_edges(&self, keep: impl IntoIterator<Item = EdgeId>) -> Self {
        let edges = keep.into_iter().map(|id| self.edges[id]).collect();
        Self::assemble(self.layout, self.vertices.clone(), edges, self.grid.clone())
    }

    #[inline]
    pub fn layout(&self) -> &WarehouseLayout {
        &self.layout
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Number of directed arcs (twice the undirected edge count).
    pub fn arc_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// Directed arcs `(tail, head, length)` in ascending `(tail, head)` order.
    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId, Dist)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(u, list)| {
            list.iter().map(move |&(v, e)| (u, v, self.edges[e].length))
        })
    }

    #[inline]
    pub fn depot(&self) -> VertexId {
        0
    }

    /// Size of the required set `R` (depot plus products).
    #[inline]
    pub fn required_count(&self) -> usize {
        self.n_required
    }

    /// Number of products `n`.
    #[inline]
    pub fn product_count(&self) -> usize {
        self.n_required - 1
    }

    #[inline]
    pub fn is_required(&self, v: VertexId) -> bool {
        v < self.n_required
    }

    pub fn required(&self) -> std::ops::Range<VertexId> {
        0..self.n_required
    }

    /// Neighbours of `v` with the connecting edge id, ascending by vertex.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&edge_key(a, b)).copied()
    }

    pub fn edge_length(&self, a: VertexId, b: VertexId) -> Option<Dist> {
        self.edge_between(a, b).map(|e| self.edges[e].length)
    }

    /// The vertex at grid position `(aisle, cross_aisle)`: the depot or an
    /// intersection.
    #[inline]
    pub fn grid_vertex(&self, aisle: usize, cross_aisle: usize) -> VertexId {
        self.grid[cross_aisle * self.layout.aisles() + aisle]
    }

    pub fn product_vertex(&self, loc: ProductLocation) -> Option<VertexId> {
        let products = &self.vertices[1..self.n_required];
        products
            .binary_search_by(|v| match v.location {
                Location::Slot(p) => p.cmp(&loc),
                Location::Grid { .. } => unreachable!(),
            })
            .ok()
            .map(|i| i + 1)
    }

    /// Product vertices of sub-aisle `(aisle, block)`, bottom to top.
    pub fn sub_aisle_product_range(&self, aisle: usize, block: usize) -> std::ops::Range<VertexId> {
        let products = &self.vertices[1..self.n_required];
        let key = |v: &Vertex| match v.location {
            Location::Slot(p) => (p.aisle, p.block),
            Location::Grid { .. } => unreachable!(),
        };
        let lo = products.partition_point(|v| key(v) < (aisle, block));
        let hi = products.partition_point(|v| key(v) <= (aisle, block));
        (lo + 1)..(hi + 1)
    }

    /// Offset of `v` along sub-aisle `(aisle, block)`, or `None` when the
    /// vertex does not belong to that sub-aisle.
    pub fn chain_offset(&self, v: VertexId, aisle: usize, block: usize) -> Option<Dist> {
        match self.vertices[v].location {
            Location::Grid { aisle: a, cross_aisle: c } if a == aisle => {
                if c == block {
                    Some(0)
                } else if c == block + 1 {
                    Some(self.layout.sub_aisle_length())
                } else {
                    None
                }
            }
            Location::Slot(p) if p.aisle == aisle && p.block == block => Some(p.offset),
            _ => None,
        }
    }

    /// Vertices of sub-aisle `(aisle, block)` from the lower intersection,
    /// through its products, to the upper intersection. The products are
    /// the ones present in the graph, whatever edges remain.
    pub fn sub_aisle_chain(&self, aisle: usize, block: usize) -> Vec<VertexId> {
        let mut chain = vec![self.grid_vertex(aisle, block)];
        chain.extend(self.sub_aisle_product_range(aisle, block));
        chain.push(self.grid_vertex(aisle, block + 1));
        chain
    }

    /// Single-source shortest distances; unreachable vertices get
    /// [`UNREACHABLE`].
    pub fn dijkstra(&self, source: VertexId) -> Vec<Dist> {
        self.dijkstra_masked(source, None, None)
    }

    /// Dijkstra restricted to edges with `alive[e]` (all when `None`),
    /// additionally ignoring edge `skip`.
    pub(crate) fn dijkstra_masked(
        &self,
        source: VertexId,
        alive: Option<&[bool]>,
        skip: Option<EdgeId>,
    ) -> Vec<Dist> {
        let mut dist = vec![UNREACHABLE; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0;
        heap.push(Reverse((0, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, e) in &self.adjacency[u] {
                if Some(e) == skip || alive.is_some_and(|a| !a[e]) {
                    continue;
                }
                let nd = d + self.edges[e].length;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }

    /// Distances together with the number of distinct shortest paths from
    /// `source` to every vertex.
    pub fn shortest_path_counts(&self, source: VertexId) -> (Vec<Dist>, Vec<BigUint>) {
        let dist = self.dijkstra(source);
        let mut order: Vec<VertexId> =
            (0..self.vertices.len()).filter(|&v| dist[v] != UNREACHABLE).collect();
        order.sort_by_key(|&v| dist[v]);
        let mut count = vec![BigUint::zero(); self.vertices.len()];
        count[source] = BigUint::one();
        for &u in &order {
            if count[u].is_zero() {
                continue;
            }
            let cu = count[u].clone();
            for &(v, e) in &self.adjacency[u] {
                if dist[v] != UNREACHABLE && dist[u] + self.edges[e].length == dist[v] {
                    count[v] += &cu;
                }
            }
        }
        (dist, count)
    }
}

/// Builds the Steiner graph of `instance`.
pub fn build_steiner_graph(instance: &PickingInstance) -> SteinerGraph {
    let layout = *instance.layout();
    let (v, h) = (layout.aisles(), layout.cross_aisles());
    let depot = instance.depot();

    let mut vertices = Vec::with_capacity(1 + instance.n() + v * h);
    vertices.push(Vertex {
        kind: VertexKind::Depot,
        location: Location::Grid { aisle: depot.aisle, cross_aisle: depot.cross_aisle },
        x: layout.aisle_x(depot.aisle),
        y: layout.cross_aisle_y(depot.cross_aisle),
    });
    for p in instance.products() {
        vertices.push(Vertex {
            kind: VertexKind::Product,
            location: Location::Slot(*p),
            x: layout.aisle_x(p.aisle),
            y: layout.cross_aisle_y(p.block) + p.offset,
        });
    }
    let mut grid = vec![0; v * h];
    for c in 0..h {
        for a in 0..v {
            if (a, c) == (depot.aisle, depot.cross_aisle) {
                grid[c * v + a] = 0;
                continue;
            }
            grid[c * v + a] = vertices.len();
            vertices.push(Vertex {
                kind: VertexKind::Intersection,
                location: Location::Grid { aisle: a, cross_aisle: c },
                x: layout.aisle_x(a),
                y: layout.cross_aisle_y(c),
            });
        }
    }

    let mut edges = Vec::new();
    let mut push = |a: VertexId, b: VertexId, length: Dist| {
        let (u, v) = edge_key(a, b);
        edges.push(Edge { u, v, length });
    };
    for c in 0..h {
        for a in 0..v.saturating_sub(1) {
            push(grid[c * v + a], grid[c * v + a + 1], layout.aisle_pitch());
        }
    }
    let l = layout.sub_aisle_length();
    let mut product_id = 1;
    for a in 0..v {
        for b in 0..layout.blocks() {
            let mut prev = (grid[b * v + a], 0);
            for p in instance.sub_aisle_products(a, b) {
                push(prev.0, product_id, p.offset - prev.1);
                prev = (product_id, p.offset);
                product_id += 1;
            }
            push(prev.0, grid[(b + 1) * v + a], l - prev.1);
        }
    }
    SteinerGraph::assemble(layout, vertices, edges, grid)
}

/// Exact shortest-path length between `i` and `j`.
pub fn shortest_distance(graph: &SteinerGraph, i: VertexId, j: VertexId) -> Dist {
    if i == j {
        return 0;
    }
    graph.dijkstra(i)[j]
}

/// Symmetric matrix of shortest distances between required vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricClosure {
    size: usize,
    data: Vec<Dist>,
}

impl MetricClosure {
    pub fn from_rows(rows: Vec<Vec<Dist>>) -> Self {
        let size = rows.len();
        assert!(rows.iter().all(|r| r.len() == size), "closure must be square");
        Self { size, data: rows.into_iter().flatten().collect() }
    }

    /// Number of required vertices (`n + 1`).
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Dist {
        self.data[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<Dist>> {
        self.data.chunks(self.size.max(1)).take(self.size).map(|r| r.to_vec()).collect()
    }
}

pub fn metric_closure(graph: &SteinerGraph) -> MetricClosure {
    let r = graph.required_count();
    let rows = graph.required().map(|i| graph.dijkstra(i)[..r].to_vec()).collect();
    MetricClosure::from_rows(rows)
}

/// All shortest paths between `i` and `j`, each listed as a vertex
/// sequence from `i` to `j`. The set can be exponentially large; use
/// [`SteinerGraph::shortest_path_counts`] when only counts are needed.
pub fn enumerate_shortest_paths(graph: &SteinerGraph, i: VertexId, j: VertexId) -> Vec<Vec<VertexId>> {
    let from_i = graph.dijkstra(i);
    let to_j = graph.dijkstra(j);
    let target = from_i[j];
    if target == UNREACHABLE {
        return Vec::new();
    }
    let mut paths = Vec::new();
    let mut stack = vec![i];
    fn walk(
        graph: &SteinerGraph,
        from_i: &[Dist],
        to_j: &[Dist],
        target: Dist,
        j: VertexId,
        stack: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        let u = *stack.last().unwrap();
        if u == j {
            out.push(stack.clone());
            return;
        }
        for &(v, e) in graph.neighbors(u) {
            let len = graph.edge(e).length;
            if to_j[v] != UNREACHABLE && from_i[u] + len == from_i[v] && from_i[v] + to_j[v] == target {
                stack.push(v);
                walk(graph, from_i, to_j, target, j, stack, out);
                stack.pop();
            }
        }
    }
    walk(graph, &from_i, &to_j, target, j, &mut stack, &mut paths);
    paths
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing;

    #[test]
    fn figure_one_graph_matches_drawn_arcs() {
        let g = build_steiner_graph(&testing::figure_one_instance());
        let drawn = [
            (4, 5), (4, 8), (9, 5), (0, 5), (0, 10), (0, 6), (11, 6), (7, 6), (7, 12),
            (11, 12), (17, 12), (11, 2), (11, 10), (9, 10), (1, 10), (9, 14), (9, 8),
            (13, 8), (13, 14), (15, 14), (15, 1), (15, 16), (3, 16), (2, 3), (17, 16),
        ];
        let mut expected: Vec<_> = drawn.iter().map(|&(a, b)| edge_key(a, b)).collect();
        expected.sort_unstable();
        let actual: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(actual, expected);
        assert!(g.edge_between(4, 9).is_none());
        assert_eq!(g.vertex_count(), 18);
        assert_eq!(g.required_count(), 4);
    }

    #[test]
    fn single_aisle_is_a_path() {
        let inst = testing::instance(1, 2, 10, 3, (0, 0), &[(0, 0, 4)]);
        let g = build_steiner_graph(&inst);
        // depot (bottom intersection) -- product -- top intersection
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_length(0, 1), Some(4));
        assert_eq!(g.edge_length(1, 2), Some(6));
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn empty_two_by_two_is_a_four_cycle() {
        let inst = testing::instance(2, 2, 10, 3, (0, 0), &[]);
        let g = build_steiner_graph(&inst);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges().len(), 4);
        assert!((0..4).all(|v| g.degree(v) == 2));
        let mut lengths: Vec<_> = g.edges().iter().map(|e| e.length).collect();
        lengths.sort_unstable();
        assert_eq!(lengths, vec![3, 3, 10, 10]);
        // bottom-left to top-right
        assert_eq!(shortest_distance(&g, 0, g.grid_vertex(1, 1)), 13);
    }

    #[test]
    fn figure_four_distances() {
        let g = build_steiner_graph(&testing::figure_four_instance());
        assert_eq!(shortest_distance(&g, 0, 1), 6);
        assert_eq!(shortest_distance(&g, 0, 2), 10);
        assert_eq!(shortest_distance(&g, 1, 2), 4);
        assert_eq!(shortest_distance(&g, 5, 5), 0);
        let closure = metric_closure(&g);
        assert_eq!(closure.rows(), vec![vec![0, 6, 10], vec![6, 0, 4], vec![10, 4, 0]]);
    }

    #[test]
    fn figure_four_shortest_path_sets() {
        let g = build_steiner_graph(&testing::figure_four_instance());
        // vertex 3 is the intersection labelled `c` in the drawing
        assert_eq!(enumerate_shortest_paths(&g, 0, 1), vec![vec![0, 3, 1]]);
        let p02 = enumerate_shortest_paths(&g, 0, 2);
        assert_eq!(p02.len(), 2);
        let (_, counts) = g.shortest_path_counts(0);
        assert_eq!(counts[2], BigUint::from(2u32));
    }

    #[test]
    fn square_cycle_has_two_diagonal_paths() {
        let inst = testing::instance(2, 2, 5, 5, (0, 0), &[]);
        let g = build_steiner_graph(&inst);
        let paths = enumerate_shortest_paths(&g, 0, g.grid_vertex(1, 1));
        assert_eq!(paths.len(), 2);
    }

    #[test]
    fn single_product_closure() {
        let inst = testing::instance(1, 2, 10, 3, (0, 0), &[(0, 0, 7)]);
        let closure = metric_closure(&build_steiner_graph(&inst));
        assert_eq!(closure.rows(), vec![vec![0, 7], vec![7, 0]]);
    }
}
