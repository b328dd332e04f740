use std::collections::HashSet;

use num_traits::Zero;

use super::scfs::{x_name, y_name};
use super::{one, rational, Assignment, MilpModel, Rational};
use crate::graph::{SteinerGraph, VertexId};
use crate::tour::{euler_tour, TourSubgraph};

/// Flow on every step of a closed walk: the arc leaving `walk[t]` carries
/// the number of products not yet visited among `walk[0..=t]`.
pub fn flows_along_walk(graph: &SteinerGraph, walk: &[VertexId]) -> Vec<((VertexId, VertexId), i64)> {
    let n = graph.product_count() as i64;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(walk.len().saturating_sub(1));
    for w in walk.windows(2) {
        if w[0] != graph.depot() && graph.is_required(w[0]) {
            seen.insert(w[0]);
        }
        out.push(((w[0], w[1]), n - seen.len() as i64));
    }
    out
}

/// Integer SCFS solution of a tour subgraph: `x` from its Euler circuit
/// and `y` from [`flows_along_walk`].
pub fn assignment_from_tour(graph: &SteinerGraph, ts: &TourSubgraph) -> Assignment {
    let tour = euler_tour(graph, ts);
    let mut a = Assignment::new();
    for ((u, v), flow) in flows_along_walk(graph, &tour.walk) {
        *a.entry(x_name(u, v)).or_insert_with(Rational::zero) += rational(1);
        if flow > 0 {
            *a.entry(y_name(u, v)).or_insert_with(Rational::zero) += rational(flow);
        }
    }
    a
}

/// Sets every pattern auxiliary to the conjunction of its two arcs.
pub fn complete_auxiliaries(model: &MilpModel, assignment: &mut Assignment) {
    let zero = Rational::zero();
    for &(z, q, r) in model.gadgets() {
        let value = |v: usize| assignment.get(&model.variable(v).name).unwrap_or(&zero).clone();
        let (qv, rv) = (value(q), value(r));
        let both = qv == one() && rv == one();
        assignment.insert(model.variable(z).name.clone(), rational(both as i64));
    }
}
