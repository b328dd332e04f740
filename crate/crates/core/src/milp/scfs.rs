use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::{build_scf, MilpError, MilpModel, Sense, VarKind};
use crate::graph::{metric_closure, SteinerGraph, VertexId, VertexKind};
use crate::preprocess::{reduce_with_constraints, ReducedInstance};
use crate::warehouse::{PickingInstance, ProductLocation};

pub(crate) fn x_name(u: VertexId, v: VertexId) -> String {
    format!("x_{u}_{v}")
}

pub(crate) fn y_name(u: VertexId, v: VertexId) -> String {
    format!("y_{u}_{v}")
}

fn x_of(model: &MilpModel, u: VertexId, v: VertexId) -> Option<usize> {
    model.var(&x_name(u, v))
}

/// The Steiner single-commodity flow model: one integer `x` and one
/// continuous `y` per arc, visit, conservation and flow constraints, and
/// `y_ij <= n x_ij`.
pub fn build_scfs(graph: &SteinerGraph) -> MilpModel {
    let mut model = MilpModel::new();
    let n = graph.product_count() as i64;
    let arcs: Vec<_> = graph.arcs().collect();
    let xs: Vec<usize> =
        arcs.iter().map(|&(u, v, _)| model.add_variable(&x_name(u, v), VarKind::Integer, 0, None)).collect();
    let ys: Vec<usize> =
        arcs.iter().map(|&(u, v, _)| model.add_variable(&y_name(u, v), VarKind::Continuous, 0, None)).collect();
    model.set_objective(arcs.iter().zip(&xs).map(|(&(_, _, d), &x)| (x, d as i64)).collect());

    let out_arcs = |i: VertexId| graph.neighbors(i).iter().map(move |&(j, _)| (i, j));
    let x = |m: &MilpModel, (u, v): (VertexId, VertexId)| x_of(m, u, v).expect("arc variable");
    let y = |m: &MilpModel, (u, v): (VertexId, VertexId)| m.var(&y_name(u, v)).expect("arc variable");

    if n > 0 {
        for i in graph.required() {
            let terms = out_arcs(i).map(|a| (x(&model, a), 1)).collect();
            model.add_constraint(format!("visit_{i}"), terms, Sense::Ge, 1);
        }
    }
    for i in 0..graph.vertex_count() {
        if graph.degree(i) == 0 {
            continue;
        }
        let mut terms: Vec<(usize, i64)> = out_arcs(i).map(|a| (x(&model, a), 1)).collect();
        terms.extend(out_arcs(i).map(|(i, j)| (x(&model, (j, i)), -1)));
        model.add_constraint(format!("cons_{i}"), terms, Sense::Eq, 0);
    }
    for i in 1..graph.vertex_count() {
        if graph.degree(i) == 0 {
            continue;
        }
        let mut terms: Vec<(usize, i64)> = out_arcs(i).map(|(i, j)| (y(&model, (j, i)), 1)).collect();
        terms.extend(out_arcs(i).map(|a| (y(&model, a), -1)));
        let delivered = graph.is_required(i) as i64;
        model.add_constraint(format!("flow_{i}"), terms, Sense::Eq, delivered);
    }
    for ((&(u, v, _), &xv), &yv) in arcs.iter().zip(&xs).zip(&ys) {
        model.add_constraint(format!("ybound_{u}_{v}"), vec![(yv, 1), (xv, -n)], Sense::Le, 0);
    }
    model
}

/// `x_uv + x_vu >= 1` for every pair.
pub fn add_forced_arc_constraints(
    model: &mut MilpModel,
    pairs: &[(VertexId, VertexId)],
) -> Result<(), MilpError> {
    for (k, &(u, v)) in pairs.iter().enumerate() {
        let (Some(a), Some(b)) = (x_of(model, u, v), x_of(model, v, u)) else {
            return Err(MilpError::UnknownArc(u, v));
        };
        model.add_constraint(format!("forced_{k}"), vec![(a, 1), (b, 1)], Sense::Ge, 1);
    }
    Ok(())
}

/// Least number of products a walk from the depot passes strictly before
/// first reaching each vertex.
pub fn n_required_before(graph: &SteinerGraph) -> Vec<usize> {
    let weight = |v: VertexId| (v != graph.depot() && graph.is_required(v)) as usize;
    let mut dist = vec![usize::MAX; graph.vertex_count()];
    let mut queue = VecDeque::new();
    dist[graph.depot()] = 0;
    queue.push_back(graph.depot());
    while let Some(u) = queue.pop_front() {
        for &(v, _) in graph.neighbors(u) {
            let nd = dist[u] + weight(v);
            if nd < dist[v] {
                dist[v] = nd;
                if weight(v) == 0 {
                    queue.push_front(v);
                } else {
                    queue.push_back(v);
                }
            }
        }
    }
    (0..graph.vertex_count())
        .map(|v| if dist[v] == usize::MAX { 0 } else { dist[v] - weight(v) })
        .collect()
}

/// Replaces `y_ij <= n x_ij` by `y_ij <= (n - n_R(i)) x_ij`.
pub fn strengthen_flow_bounds(model: &mut MilpModel, graph: &SteinerGraph) {
    let n = graph.product_count() as i64;
    let before = n_required_before(graph);
    let positions: HashMap<String, usize> =
        model.constraints.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
    for (u, v, _) in graph.arcs() {
        let Some(&pos) = positions.get(&format!("ybound_{u}_{v}")) else { continue };
        let xv = x_of(model, u, v).expect("arc variable");
        let terms = &mut model.constraints[pos].terms;
        for term in terms.iter_mut() {
            if term.0 == xv {
                term.1 = -(n - before[u] as i64);
            }
        }
        terms.retain(|t| t.1 != 0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutFamily {
    HorizontalLine,
    VerticalLine,
    CornerBox,
    SubAisle,
    Cross,
}

impl CutFamily {
    pub fn tag(self) -> &'static str {
        match self {
            CutFamily::HorizontalLine => "hline",
            CutFamily::VerticalLine => "vline",
            CutFamily::CornerBox => "box",
            CutFamily::SubAisle => "subaisle",
            CutFamily::Cross => "cross",
        }
    }
}

/// A vertex set `S` whose outgoing arcs must carry at least one unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSet {
    pub family: CutFamily,
    pub members: Vec<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutStats {
    pub horizontal: usize,
    pub vertical: usize,
    pub corner: usize,
    pub sub_aisle: usize,
    pub cross: usize,
}

impl CutStats {
    pub fn total(&self) -> usize {
        self.horizontal + self.vertical + self.corner + self.sub_aisle + self.cross
    }
}

/// All cut sets of the five families, keeping only sets with a required
/// vertex on both sides. Identical sets are emitted once.
pub fn cut_sets(graph: &SteinerGraph) -> Vec<CutSet> {
    let layout = *graph.layout();
    let (v, h) = (layout.aisles(), layout.cross_aisles());
    let (len, pitch) = (layout.sub_aisle_length(), layout.aisle_pitch());
    let vertices = graph.vertices();
    let mut candidates: Vec<(CutFamily, Vec<bool>)> = Vec::new();
    let by = |pred: &dyn Fn(u64, u64) -> bool| vertices.iter().map(|x| pred(x.x, x.y)).collect::<Vec<bool>>();

    for c in 0..h - 1 {
        let (low, high) = (c as u64 * len, (c as u64 + 1) * len);
        candidates.push((CutFamily::HorizontalLine, by(&|_, y| y <= low)));
        candidates.push((CutFamily::HorizontalLine, by(&|_, y| y < high)));
    }
    for a in 0..v - 1 {
        let xa = a as u64 * pitch;
        candidates.push((CutFamily::VerticalLine, by(&|x, _| x <= xa)));
    }
    for a in 0..v - 1 {
        let (left, right) = (a as u64 * pitch, (a as u64 + 1) * pitch);
        for c in 0..h - 1 {
            let (low, high) = (c as u64 * len, (c as u64 + 1) * len);
            candidates.push((CutFamily::CornerBox, by(&|x, y| x <= left && y <= low)));
            candidates.push((CutFamily::CornerBox, by(&|x, y| x >= right && y <= low)));
            candidates.push((CutFamily::CornerBox, by(&|x, y| x <= left && y >= high)));
            candidates.push((CutFamily::CornerBox, by(&|x, y| x >= right && y >= high)));
        }
    }
    for a in 0..v {
        for b in 0..h - 1 {
            let products: Vec<VertexId> = graph.sub_aisle_product_range(a, b).collect();
            for i in 0..products.len() {
                for j in i + 1..products.len() {
                    let mut members = vec![false; vertices.len()];
                    for &p in &products[i..=j] {
                        members[p] = true;
                    }
                    candidates.push((CutFamily::SubAisle, members));
                }
            }
        }
        for b in 0..h.saturating_sub(2) {
            let lower: Vec<VertexId> = graph.sub_aisle_product_range(a, b).collect();
            let upper: Vec<VertexId> = graph.sub_aisle_product_range(a, b + 1).collect();
            if lower.is_empty() || upper.is_empty() {
                continue;
            }
            let mut members = vec![false; vertices.len()];
            for &p in lower.iter().chain(&upper) {
                members[p] = true;
            }
            members[graph.grid_vertex(a, b + 1)] = true;
            candidates.push((CutFamily::Cross, members));
        }
    }

    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    candidates
        .into_iter()
        .filter(|(_, s)| {
            let inside = graph.required().any(|r| s[r]);
            let outside = graph.required().any(|r| !s[r]);
            inside && outside
        })
        .filter(|(_, s)| seen.insert(s.clone()))
        .map(|(family, members)| CutSet { family, members })
        .collect()
}

/// `x(S : V \ S) >= 1` for every set of [`cut_sets`].
pub fn add_cut_inequalities(model: &mut MilpModel, graph: &SteinerGraph) -> CutStats {
    let mut stats = CutStats::default();
    for (k, cut) in cut_sets(graph).into_iter().enumerate() {
        let terms: Vec<(usize, i64)> = graph
            .arcs()
            .filter(|&(u, v, _)| cut.members[u] && !cut.members[v])
            .map(|(u, v, _)| (x_of(model, u, v).expect("arc variable"), 1))
            .collect();
        model.add_constraint(format!("cut_{}_{k}", cut.family.tag()), terms, Sense::Ge, 1);
        match cut.family {
            CutFamily::HorizontalLine => stats.horizontal += 1,
            CutFamily::VerticalLine => stats.vertical += 1,
            CutFamily::CornerBox => stats.corner += 1,
            CutFamily::SubAisle => stats.sub_aisle += 1,
            CutFamily::Cross => stats.cross += 1,
        }
    }
    stats
}

/// A tour entering an intersection other than the depot leaves it through
/// a different neighbour, and symmetrically.
pub fn add_intersection_connexity(model: &mut MilpModel, graph: &SteinerGraph) {
    for i in 0..graph.vertex_count() {
        if graph.vertex(i).kind != VertexKind::Intersection {
            continue;
        }
        for &(j, _) in graph.neighbors(i) {
            let others = graph.neighbors(i).iter().filter(|&&(k, _)| k != j);
            let mut into: Vec<(usize, i64)> = vec![(x_of(model, i, j).expect("arc variable"), 1)];
            into.extend(others.clone().map(|&(k, _)| (x_of(model, k, i).expect("arc variable"), -1)));
            model.add_constraint(format!("conn_in_{i}_{j}"), into, Sense::Le, 0);
            let mut out: Vec<(usize, i64)> = vec![(x_of(model, j, i).expect("arc variable"), 1)];
            out.extend(others.map(|&(k, _)| (x_of(model, i, k).expect("arc variable"), -1)));
            model.add_constraint(format!("conn_out_{i}_{j}"), out, Sense::Le, 0);
        }
    }
}

/// Labels of a sub-aisle: `t` and `s` are the bottom and top
/// intersections, `a`, `b` the extremes below the largest gap and `c`, `d`
/// the extremes above it.
#[derive(Debug, Clone, Copy)]
struct Labels {
    t: VertexId,
    a: Option<VertexId>,
    b: Option<VertexId>,
    c: Option<VertexId>,
    d: Option<VertexId>,
    s: VertexId,
}

/// Implications derived from the ways a sub-aisle can be traversed:
/// `x_sd ⇒ x_dc`, `x_ds ⇒ x_cd`, `x_ta ⇒ x_ab`, `x_at ⇒ x_dc`,
/// `x_cb ⇒ x_dc ∧ x_ba` and `x_bc ⇒ x_ab ∧ x_cd`. Implications naming a
/// missing product, a loop or a missing arc are skipped.
pub fn add_pattern_constraints(model: &mut MilpModel, reduced: &ReducedInstance) {
    let graph = &reduced.graph;
    let mut z_count = model.variables().iter().filter(|v| v.name.starts_with("z_")).count();
    for gap in &reduced.gaps {
        let vertex = |o: Option<u64>| o.and_then(|o| graph.product_vertex(ProductLocation::new(gap.aisle, gap.block, o)));
        let below = gap.below_extremes();
        let above = gap.above_extremes();
        let l = Labels {
            t: graph.grid_vertex(gap.aisle, gap.block),
            a: vertex(below.map(|e| e.0)),
            b: vertex(below.map(|e| e.1)),
            c: vertex(above.map(|e| e.0)),
            d: vertex(above.map(|e| e.1)),
            s: graph.grid_vertex(gap.aisle, gap.block + 1),
        };
        let arc = |m: &MilpModel, u: Option<VertexId>, v: Option<VertexId>| -> Option<usize> {
            let (u, v) = (u?, v?);
            if u == v {
                return None;
            }
            x_of(m, u, v)
        };
        let singles = [
            ((Some(l.s), l.d), (l.d, l.c)),
            ((l.d, Some(l.s)), (l.c, l.d)),
            ((Some(l.t), l.a), (l.a, l.b)),
            ((l.a, Some(l.t)), (l.d, l.c)),
        ];
        let prefix = format!("pat_{}_{}", gap.aisle, gap.block);
        for (k, ((p1, p2), (q1, q2))) in singles.into_iter().enumerate() {
            if let (Some(p), Some(q)) = (arc(model, p1, p2), arc(model, q1, q2)) {
                model.add_constraint(format!("{prefix}_{k}"), vec![(p, 1), (q, -1)], Sense::Le, 0);
            }
        }
        let conjunctions = [
            ((l.c, l.b), (l.d, l.c), (l.b, l.a)),
            ((l.b, l.c), (l.a, l.b), (l.c, l.d)),
        ];
        for (k, ((p1, p2), (q1, q2), (r1, r2))) in conjunctions.into_iter().enumerate() {
            let (Some(p), Some(q), Some(r)) = (arc(model, p1, p2), arc(model, q1, q2), arc(model, r1, r2)) else {
                continue;
            };
            let z = model.add_variable(&format!("z_{z_count}"), VarKind::Integer, 0, Some(1));
            z_count += 1;
            let name = format!("{prefix}_{}", k + 4);
            model.add_constraint(format!("{name}_and"), vec![(z, 1), (q, -1), (r, -1)], Sense::Ge, -1);
            model.add_constraint(format!("{name}_q"), vec![(z, 1), (q, -1)], Sense::Le, 0);
            model.add_constraint(format!("{name}_r"), vec![(z, 1), (r, -1)], Sense::Le, 0);
            model.add_constraint(format!("{name}_p"), vec![(p, 1), (z, -1)], Sense::Le, 0);
            model.add_gadget(z, q, r);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Plain Steiner flow model on the full graph.
    Scfs,
    /// Reduced graph with forced arcs, strengthened bounds, cuts,
    /// intersection connexity and patterns.
    ScfsPlus,
    /// Complete-graph flow model over the metric closure.
    Scf,
}

impl FromStr for Formulation {
    type Err = MilpError;
    fn from_str(s: &str) -> Result<Self, MilpError> {
        match s {
            "scfs" => Ok(Formulation::Scfs),
            "scfs+" => Ok(Formulation::ScfsPlus),
            "scf" => Ok(Formulation::Scf),
            other => Err(MilpError::UnknownFormulation(other.to_string())),
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Scfs => "scfs",
            Formulation::ScfsPlus => "scfs+",
            Formulation::Scf => "scf",
        })
    }
}

/// Builds a complete model of `instance`. For `scfs+` the reduction used
/// is returned as well.
pub fn build_formulation(
    instance: &PickingInstance,
    formulation: Formulation,
) -> (MilpModel, Option<ReducedInstance>) {
    match formulation {
        Formulation::Scfs => (build_scfs(&crate::graph::build_steiner_graph(instance)), None),
        Formulation::Scf => (build_scf(&metric_closure(&crate::graph::build_steiner_graph(instance))), None),
        Formulation::ScfsPlus => {
            let reduced = reduce_with_constraints(instance);
            let graph = &reduced.graph;
            let mut model = build_scfs(graph);
            add_forced_arc_constraints(&mut model, &reduced.forced_pairs)
                .expect("forced pairs are adjacent in the reduced graph");
            strengthen_flow_bounds(&mut model, graph);
            add_cut_inequalities(&mut model, graph);
            add_intersection_connexity(&mut model, graph);
            add_pattern_constraints(&mut model, &reduced);
            (model, Some(reduced))
        }
    }
}
