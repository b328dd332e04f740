use num_traits::Zero;

use super::{rational, Assignment, MilpModel, Rational, Sense, VarKind};
use crate::graph::MetricClosure;

/// Gavish–Graves single-commodity flow model over the metric closure:
/// binary `x_i_j`, continuous `y_i_j`, one arc out of and into every
/// required vertex, one unit delivered at every product and
/// `y_ij <= n x_ij`.
pub fn build_scf(closure: &MetricClosure) -> MilpModel {
    let mut model = MilpModel::new();
    let size = closure.size();
    if size <= 1 {
        return model;
    }
    let n = size as i64 - 1;
    let pairs: Vec<(usize, usize)> =
        (0..size).flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let x: Vec<usize> = pairs
        .iter()
        .map(|&(i, j)| model.add_variable(&format!("x_{i}_{j}"), VarKind::Integer, 0, Some(1)))
        .collect();
    let y: Vec<usize> = pairs
        .iter()
        .map(|&(i, j)| model.add_variable(&format!("y_{i}_{j}"), VarKind::Continuous, 0, None))
        .collect();
    model.set_objective(pairs.iter().zip(&x).map(|(&(i, j), &v)| (v, closure.get(i, j) as i64)).collect());

    let pick = |vars: &[usize], f: &dyn Fn(usize, usize) -> bool, coef: i64| -> Vec<(usize, i64)> {
        pairs.iter().zip(vars).filter(|(&(i, j), _)| f(i, j)).map(|(_, &v)| (v, coef)).collect()
    };
    for k in 0..size {
        model.add_constraint(format!("out_{k}"), pick(&x, &|i, _| i == k, 1), Sense::Eq, 1);
        model.add_constraint(format!("in_{k}"), pick(&x, &|_, j| j == k, 1), Sense::Eq, 1);
    }
    for k in 1..size {
        let mut terms = pick(&y, &|_, j| j == k, 1);
        terms.extend(pick(&y, &|i, _| i == k, -1));
        model.add_constraint(format!("flow_{k}"), terms, Sense::Eq, 1);
    }
    for (&(i, j), (&xv, &yv)) in pairs.iter().zip(x.iter().zip(&y)) {
        model.add_constraint(format!("ybound_{i}_{j}"), vec![(yv, 1), (xv, -n)], Sense::Le, 0);
    }
    model
}

/// Integer SCF solution of the tour `0, order[0], …, order[n-1], 0`, with
/// the arc leaving the `t`-th vertex carrying `n - t` units.
pub fn scf_tour_assignment(order: &[usize]) -> Assignment {
    let mut a = Assignment::new();
    if order.is_empty() {
        return a;
    }
    let n = order.len() as i64;
    let cycle: Vec<usize> = std::iter::once(0).chain(order.iter().copied()).chain(std::iter::once(0)).collect();
    for (t, w) in cycle.windows(2).enumerate() {
        a.insert(format!("x_{}_{}", w[0], w[1]), rational(1));
        if n - t as i64 > 0 {
            a.insert(format!("y_{}_{}", w[0], w[1]), rational(n - t as i64));
        }
    }
    a
}

/// Reads `x_i_j` and `y_i_j` of an SCF assignment into dense matrices.
pub fn closure_matrices(assignment: &Assignment, size: usize) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let get = |prefix: &str, i: usize, j: usize| {
        assignment.get(&format!("{prefix}_{i}_{j}")).cloned().unwrap_or_else(Rational::zero)
    };
    let x = (0..size).map(|i| (0..size).map(|j| get("x", i, j)).collect()).collect();
    let y = (0..size).map(|i| (0..size).map(|j| get("y", i, j)).collect()).collect();
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_steiner_graph, metric_closure};
    use crate::milp::feasibility_check;
    use crate::testing;

    #[test]
    fn figure_four_integer_solutions() {
        let closure = metric_closure(&build_steiner_graph(&testing::figure_four_instance()));
        let model = build_scf(&closure);
        let x_names: Vec<String> =
            model.variables().iter().filter(|v| v.name.starts_with("x_")).map(|v| v.name.clone()).collect();
        assert_eq!(x_names.len(), 6);
        let mut feasible = Vec::new();
        for mask in 0u32..1 << x_names.len() {
            let mut a = Assignment::new();
            for (k, name) in x_names.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    a.insert(name.clone(), rational(1));
                }
            }
            // assignment constraints only: flows are checked on the tours below
            let violated = feasibility_check(&model, &a, false).violations;
            if violated.iter().all(|v| !v.starts_with("out_") && !v.starts_with("in_")) {
                feasible.push(mask);
            }
        }
        assert_eq!(feasible.len(), 2);
        for order in [[1, 2], [2, 1]] {
            let check = feasibility_check(&model, &scf_tour_assignment(&order), false);
            assert!(check.is_feasible(), "{:?}", check.violations);
            assert_eq!(check.objective, rational(20));
        }
    }

    #[test]
    fn single_product_out_and_back() {
        let closure = MetricClosure::from_rows(vec![vec![0, 7], vec![7, 0]]);
        let model = build_scf(&closure);
        let check = feasibility_check(&model, &scf_tour_assignment(&[1]), false);
        assert!(check.is_feasible());
        assert_eq!(check.objective, rational(14));
    }

    #[test]
    fn trivial_closure_has_empty_model() {
        let model = build_scf(&MetricClosure::from_rows(vec![vec![0]]));
        assert!(model.variables().is_empty() && model.constraints().is_empty());
    }

    #[test]
    fn subtours_violate_flow() {
        let closure = MetricClosure::from_rows(vec![vec![0; 4]; 4]);
        let model = build_scf(&closure);
        let mut a = Assignment::new();
        for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            a.insert(format!("x_{i}_{j}"), rational(1));
        }
        a.insert("y_0_1".into(), rational(3));
        a.insert("y_1_0".into(), rational(2));
        let check = feasibility_check(&model, &a, true);
        assert!(!check.is_feasible());
        let (x, _) = closure_matrices(&a, 4);
        assert_eq!(x[2][3], rational(1));
    }
}
