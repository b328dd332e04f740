use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use super::scfs::{x_name, y_name};
use super::{Assignment, Rational};
use crate::graph::{enumerate_shortest_paths, SteinerGraph, VertexId};
use crate::warehouse::Dist;

/// Arc values obtained by spreading every closure arc evenly over all
/// shortest paths between its endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Projection {
    pub x: BTreeMap<(VertexId, VertexId), Rational>,
    pub y: BTreeMap<(VertexId, VertexId), Rational>,
}

impl Projection {
    pub fn x_value(&self, u: VertexId, v: VertexId) -> Rational {
        self.x.get(&(u, v)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn to_assignment(&self) -> Assignment {
        let mut out = Assignment::new();
        for (&(u, v), value) in &self.x {
            out.insert(x_name(u, v), value.clone());
        }
        for (&(u, v), value) in &self.y {
            out.insert(y_name(u, v), value.clone());
        }
        out
    }

    /// `Σ d_uv x_uv`.
    pub fn objective(&self, graph: &SteinerGraph) -> Rational {
        self.x
            .iter()
            .map(|(&(u, v), value)| value * dist(graph.edge_length(u, v).expect("projected arc")))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Checks that every required vertex is left at least as often as in
    /// `x_prime`, that every vertex is balanced and that the objective is
    /// preserved. Returns the failed checks.
    pub fn property_violations(&self, graph: &SteinerGraph, x_prime: &[Vec<Rational>]) -> Vec<String> {
        let mut out = Vec::new();
        let mut leaving = vec![Rational::zero(); graph.vertex_count()];
        let mut entering = vec![Rational::zero(); graph.vertex_count()];
        for (&(u, v), value) in &self.x {
            leaving[u] += value;
            entering[v] += value;
        }
        for i in graph.required() {
            let demand = x_prime[i].iter().fold(Rational::zero(), |a, b| a + b);
            if leaving[i] < demand {
                out.push(format!("visits:{i}"));
            }
        }
        for v in 0..graph.vertex_count() {
            if leaving[v] != entering[v] {
                out.push(format!("balance:{v}"));
            }
        }
        let closure_cost = closure_objective(graph, x_prime);
        if self.objective(graph) != closure_cost {
            out.push("objective".to_string());
        }
        out
    }
}

fn dist(d: Dist) -> Rational {
    Rational::from_integer(BigInt::from(d))
}

fn big(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

/// `Σ d(i, j) x'_ij` over the closure.
pub fn closure_objective(graph: &SteinerGraph, x_prime: &[Vec<Rational>]) -> Rational {
    let mut total = Rational::zero();
    for (i, row) in x_prime.iter().enumerate() {
        let d = graph.dijkstra(i);
        for (j, value) in row.iter().enumerate() {
            if i != j && !value.is_zero() {
                total += value * dist(d[j]);
            }
        }
    }
    total
}

/// Projects closure values `x'`, `y'` (indexed by required vertex) onto
/// the arcs of `graph`. Arc `(u, v)` receives the share
/// `σ_i(u) σ_j(v) / σ_i(j)` of `x'_ij` when it lies on a shortest
/// `i`–`j` path, where `σ_s(t)` counts shortest `s`–`t` paths.
pub fn project_solution(graph: &SteinerGraph, x_prime: &[Vec<Rational>], y_prime: &[Vec<Rational>]) -> Projection {
    let required: Vec<VertexId> = graph.required().collect();
    let counts: Vec<(Vec<Dist>, Vec<BigUint>)> = required.iter().map(|&i| graph.shortest_path_counts(i)).collect();
    let arcs: Vec<(VertexId, VertexId, Dist)> = graph.arcs().collect();
    let mut projection = Projection::default();
    for &i in &required {
        for &j in &required {
            let (xv, yv) = (&x_prime[i][j], &y_prime[i][j]);
            if i == j || (xv.is_zero() && yv.is_zero()) {
                continue;
            }
            let (di, si) = &counts[i];
            let (dj, sj) = &counts[j];
            let total = big(&si[j]);
            for &(u, v, d) in &arcs {
                if di[u].saturating_add(d).saturating_add(dj[v]) != di[j] {
                    continue;
                }
                let share = big(&si[u]) * big(&sj[v]) / &total;
                add(&mut projection.x, (u, v), xv * &share);
                add(&mut projection.y, (u, v), yv * &share);
            }
        }
    }
    projection
}

/// The same projection computed by listing every shortest path.
pub fn project_solution_by_paths(
    graph: &SteinerGraph,
    x_prime: &[Vec<Rational>],
    y_prime: &[Vec<Rational>],
) -> Projection {
    let mut projection = Projection::default();
    for i in graph.required() {
        for j in graph.required() {
            let (xv, yv) = (&x_prime[i][j], &y_prime[i][j]);
            if i == j || (xv.is_zero() && yv.is_zero()) {
                continue;
            }
            let paths = enumerate_shortest_paths(graph, i, j);
            let count = Rational::from_integer(BigInt::from(paths.len()));
            for path in &paths {
                for w in path.windows(2) {
                    add(&mut projection.x, (w[0], w[1]), xv / &count);
                    add(&mut projection.y, (w[0], w[1]), yv / &count);
                }
            }
        }
    }
    projection
}

fn add(map: &mut BTreeMap<(VertexId, VertexId), Rational>, key: (VertexId, VertexId), value: Rational) {
    if value.is_zero() {
        return;
    }
    let entry = map.entry(key).or_insert_with(Rational::zero);
    *entry += value;
    if entry.is_zero() {
        map.remove(&key);
    }
}
