//! Independent exact references for the solvers.

use thiserror::Error;

use crate::graph::{MetricClosure, SteinerGraph, VertexId};
use crate::tour::{validate_tour_subgraph, TourSubgraph};
use crate::warehouse::Dist;

pub const HELD_KARP_CAP: usize = 16;
pub const ENUMERATION_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance size {size} exceeds the oracle cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("forced pairs must be disjoint pairs of distinct products")]
    BadPairs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Required vertices in visiting order, starting and ending at the depot.
    VisitOrder(Vec<usize>),
    Subgraph(TourSubgraph),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub cost: Dist,
    pub witness: Witness,
}

/// Exact TSP optimum over the metric closure (index 0 is the depot).
pub fn held_karp(closure: &MetricClosure) -> Result<OracleResult, OracleError> {
    held_karp_with_cap(closure, HELD_KARP_CAP)
}

pub fn held_karp_with_cap(closure: &MetricClosure, cap: usize) -> Result<OracleResult, OracleError> {
    held_karp_forced(closure, &[], cap)
}

/// Held–Karp where each pair in `pairs` must be visited consecutively (in
/// either direction).
pub fn held_karp_forced(
    closure: &MetricClosure,
    pairs: &[(usize, usize)],
    cap: usize,
) -> Result<OracleResult, OracleError> {
    let n = closure.size() - 1;
    if n > cap {
        return Err(OracleError::CapExceeded { size: n, cap });
    }
    // Units are single products or forced pairs; a unit entered at `ends.0`
    // is left at `ends.1` and vice versa.
    let mut in_pair = vec![false; n + 1];
    let mut units: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in pairs {
        if a == b || a == 0 || b == 0 || a > n || b > n || in_pair[a] || in_pair[b] {
            return Err(OracleError::BadPairs);
        }
        in_pair[a] = true;
        in_pair[b] = true;
        units.push((a, b));
    }
    units.extend((1..=n).filter(|&p| !in_pair[p]).map(|p| (p, p)));
    let k = units.len();
    if k == 0 {
        return Ok(OracleResult { cost: 0, witness: Witness::VisitOrder(vec![0, 0]) });
    }
    let d = |i: usize, j: usize| closure.get(i, j);
    // Orientation 0 enters at `.0`, orientation 1 at `.1`.
    let entry = |u: usize, o: usize| if o == 0 { units[u].0 } else { units[u].1 };
    let exit = |u: usize, o: usize| if o == 0 { units[u].1 } else { units[u].0 };
    let inner = |u: usize| d(units[u].0, units[u].1);

    let states = 1usize << k;
    let idx = |mask: usize, u: usize, o: usize| (mask * k + u) * 2 + o;
    let mut best = vec![Dist::MAX; states * k * 2];
    let mut parent = vec![u32::MAX; states * k * 2];
    for u in 0..k {
        for o in 0..2 {
            best[idx(1 << u, u, o)] = d(0, entry(u, o)) + inner(u);
        }
    }
    for mask in 1..states {
        for u in 0..k {
            if mask & (1 << u) == 0 {
                continue;
            }
            for o in 0..2 {
                let cur = best[idx(mask, u, o)];
                if cur == Dist::MAX {
                    continue;
                }
                let from = exit(u, o);
                for w in 0..k {
                    if mask & (1 << w) != 0 {
                        continue;
                    }
                    for ow in 0..2 {
                        let next = mask | (1 << w);
                        let cand = cur + d(from, entry(w, ow)) + inner(w);
                        let slot = idx(next, w, ow);
                        if cand < best[slot] {
                            best[slot] = cand;
                            parent[slot] = idx(mask, u, o) as u32;
                        }
                    }
                }
            }
        }
    }
    let full = states - 1;
    let (mut at, cost) = (0..k)
        .flat_map(|u| (0..2).map(move |o| (u, o)))
        .map(|(u, o)| (idx(full, u, o), best[idx(full, u, o)] + d(exit(u, o), 0)))
        .min_by_key(|&(i, c)| (c, i))
        .expect("at least one unit");
    let mut order = vec![0];
    loop {
        let u = (at / 2) % k;
        let o = at % 2;
        order.push(exit(u, o));
        if units[u].0 != units[u].1 {
            order.push(entry(u, o));
        }
        if parent[at] == u32::MAX {
            break;
        }
        at = parent[at] as usize;
    }
    order.push(0);
    order.reverse();
    Ok(OracleResult { cost, witness: Witness::VisitOrder(order) })
}

/// Length of a closed visiting order over the closure.
pub fn order_length(closure: &MetricClosure, order: &[usize]) -> Dist {
    order.windows(2).map(|w| closure.get(w[0], w[1])).sum()
}

/// Cheapest multiplicity assignment in `{0,1,2}` per edge of `graph` that
/// forms a tour subgraph.
pub fn enumerate_tour_subgraphs(graph: &SteinerGraph, max_edges: usize) -> Result<OracleResult, OracleError> {
    let m = graph.edges().len();
    let cap = max_edges.min(ENUMERATION_CAP);
    if m > cap {
        return Err(OracleError::CapExceeded { size: m, cap });
    }
    let n = graph.vertex_count();
    // Vertices whose last incident edge is `e` are checked right after `e`.
    let mut closes_at: Vec<Vec<VertexId>> = vec![Vec::new(); m];
    for v in 0..n {
        if let Some(&(_, last)) = graph.neighbors(v).iter().max_by_key(|(_, e)| *e) {
            closes_at[last].push(v);
        }
    }

    struct Search<'a> {
        graph: &'a SteinerGraph,
        closes_at: Vec<Vec<VertexId>>,
        mult: Vec<u8>,
        degree: Vec<usize>,
        best: Option<(Dist, Vec<u8>)>,
    }

    impl Search<'_> {
        fn go(&mut self, e: usize, cost: Dist) {
            if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
                return;
            }
            if e == self.mult.len() {
                let mut ts = TourSubgraph::new();
                for (id, &k) in self.mult.iter().enumerate() {
                    let edge = self.graph.edge(id);
                    ts.set(edge.u, edge.v, k);
                }
                if validate_tour_subgraph(self.graph, &ts).is_ok() {
                    self.best = Some((cost, self.mult.clone()));
                }
                return;
            }
            let edge = *self.graph.edge(e);
            for k in 0..=2u8 {
                self.mult[e] = k;
                self.degree[edge.u] += k as usize;
                self.degree[edge.v] += k as usize;
                let ok = self.closes_at[e].iter().all(|&v| {
                    self.degree[v].is_multiple_of(2) && (!self.graph.is_required(v) || self.degree[v] > 0 || self.graph.required_count() == 1)
                });
                if ok {
                    self.go(e + 1, cost + k as Dist * edge.length);
                }
                self.degree[edge.u] -= k as usize;
                self.degree[edge.v] -= k as usize;
            }
            self.mult[e] = 0;
        }
    }

    let mut search = Search { graph, closes_at, mult: vec![0; m], degree: vec![0; n], best: None };
    search.go(0, 0);
    let (cost, mult) = search.best.expect("doubling a spanning tree always yields a tour subgraph");
    let mut ts = TourSubgraph::new();
    for (id, &k) in mult.iter().enumerate() {
        let edge = graph.edge(id);
        ts.set(edge.u, edge.v, k);
    }
    Ok(OracleResult { cost, witness: Witness::Subgraph(ts) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_steiner_graph, metric_closure};
    use crate::testing;

    fn brute_force(closure: &MetricClosure) -> Dist {
        fn permute(rest: &mut Vec<usize>, k: usize, closure: &MetricClosure, best: &mut Dist) {
            if k == rest.len() {
                let mut order = vec![0];
                order.extend_from_slice(rest);
                order.push(0);
                *best = (*best).min(order_length(closure, &order));
                return;
            }
            for i in k..rest.len() {
                rest.swap(k, i);
                permute(rest, k + 1, closure, best);
                rest.swap(k, i);
            }
        }
        let mut rest: Vec<usize> = (1..closure.size()).collect();
        let mut best = Dist::MAX;
        permute(&mut rest, 0, closure, &mut best);
        best
    }

    #[test]
    fn figure_four_closure() {
        let closure = MetricClosure::from_rows(vec![vec![0, 6, 10], vec![6, 0, 4], vec![10, 4, 0]]);
        let r = held_karp(&closure).unwrap();
        assert_eq!(r.cost, 20);
        let Witness::VisitOrder(order) = r.witness else { panic!() };
        assert_eq!(order_length(&closure, &order), 20);
    }

    #[test]
    fn single_product() {
        let closure = MetricClosure::from_rows(vec![vec![0, 7], vec![7, 0]]);
        assert_eq!(held_karp(&closure).unwrap().cost, 14);
        let empty = MetricClosure::from_rows(vec![vec![0]]);
        assert_eq!(held_karp(&empty).unwrap().cost, 0);
    }

    #[test]
    fn matches_permutations() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let inst = testing::random_instance(&mut rng, 4, 3, 9, 2, 6);
            let closure = metric_closure(&build_steiner_graph(&inst));
            let r = held_karp(&closure).unwrap();
            assert_eq!(r.cost, brute_force(&closure));
            let Witness::VisitOrder(order) = r.witness else { panic!() };
            assert_eq!(order_length(&closure, &order), r.cost);
            let mut seen = order[1..order.len() - 1].to_vec();
            seen.sort_unstable();
            assert_eq!(seen, (1..closure.size()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn forced_pairs_are_adjacent() {
        // 0 -- 1 far apart from 2 and 3; forcing {1, 3} changes the order
        let rows = vec![
            vec![0, 1, 5, 6],
            vec![1, 0, 4, 5],
            vec![5, 4, 0, 1],
            vec![6, 5, 1, 0],
        ];
        let closure = MetricClosure::from_rows(rows);
        assert_eq!(held_karp(&closure).unwrap().cost, 12);
        let r = held_karp_forced(&closure, &[(1, 3)], 16).unwrap();
        let Witness::VisitOrder(order) = &r.witness else { panic!() };
        let pos = |v: usize| order.iter().position(|&x| x == v).unwrap();
        assert_eq!(pos(1).abs_diff(pos(3)), 1);
        assert_eq!(order_length(&closure, order), r.cost);
        assert!(r.cost >= 12);
        assert_eq!(held_karp_forced(&closure, &[(1, 1)], 16), Err(OracleError::BadPairs));
    }

    #[test]
    fn cap_is_enforced() {
        let rows = vec![vec![0; 18]; 18];
        let closure = MetricClosure::from_rows(rows);
        assert!(matches!(held_karp(&closure), Err(OracleError::CapExceeded { size: 17, .. })));
    }

    #[test]
    fn enumeration_small_cases() {
        let inst = testing::instance(1, 2, 10, 3, (0, 0), &[(0, 0, 4)]);
        let g = build_steiner_graph(&inst);
        assert_eq!(enumerate_tour_subgraphs(&g, 14).unwrap().cost, 8);
        let empty = build_steiner_graph(&testing::instance(2, 2, 10, 3, (0, 0), &[]));
        assert_eq!(enumerate_tour_subgraphs(&empty, 14).unwrap().cost, 0);
        let two = build_steiner_graph(&testing::instance(2, 2, 10, 3, (0, 0), &[(0, 0, 4), (1, 0, 5)]));
        assert_eq!(enumerate_tour_subgraphs(&two, 14).unwrap().cost, 24);
        let fig4 = build_steiner_graph(&testing::figure_four_instance());
        assert_eq!(enumerate_tour_subgraphs(&fig4, 14).unwrap().cost, 20);
    }
}
