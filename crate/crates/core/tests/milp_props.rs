use pickroute::dp::solve_dp;
use pickroute::graph::{build_steiner_graph, metric_closure};
use pickroute::milp::{
    assignment_from_tour, build_formulation, build_scf, complete_auxiliaries, emit_lp, feasibility_check,
    n_required_before, parse_lp, rational, scf_tour_assignment, Formulation,
};
use pickroute::oracle::{held_karp, Witness};
use pickroute::testing;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, v: usize, h: usize, len: u64, pitch: u64, n: usize) -> pickroute::warehouse::PickingInstance {
    testing::random_instance(&mut ChaCha8Rng::seed_from_u64(seed), v, h, len, pitch, n)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(120) })]

    #[test]
    fn dp_optimum_is_feasible_for_every_formulation(seed in any::<u64>(), v in 1usize..=5, h in 2usize..=5,
                                                    len in 3u64..=12, pitch in 1u64..=4, n in 0usize..=20) {
        let inst = instance(seed, v, h, len, pitch, n);
        let dp = solve_dp(&inst).unwrap();
        for f in [Formulation::Scfs, Formulation::ScfsPlus] {
            let (model, reduced) = build_formulation(&inst, f);
            let mut a = match &reduced {
                Some(r) => assignment_from_tour(&r.graph, &dp.solution.to_tour_subgraph(&r.graph)),
                None => assignment_from_tour(&dp.graph, &dp.tour_subgraph),
            };
            complete_auxiliaries(&model, &mut a);
            let check = feasibility_check(&model, &a, false);
            prop_assert!(check.is_feasible(), "{}: {:?}", f, check.violations);
            prop_assert_eq!(check.objective, rational(dp.cost as i64));
        }
    }

    #[test]
    fn held_karp_tour_is_feasible_for_scf(seed in any::<u64>(), v in 1usize..=4, h in 2usize..=4, n in 1usize..=8) {
        let inst = instance(seed, v, h, 8, 2, n);
        let closure = metric_closure(&build_steiner_graph(&inst));
        let hk = held_karp(&closure).unwrap();
        let Witness::VisitOrder(order) = hk.witness else { unreachable!() };
        let inner: Vec<usize> = order[1..order.len() - 1].to_vec();
        let check = feasibility_check(&build_scf(&closure), &scf_tour_assignment(&inner), false);
        prop_assert!(check.is_feasible(), "{:?}", check.violations);
        prop_assert_eq!(check.objective, rational(hk.cost as i64));
    }

    #[test]
    fn lp_text_round_trips(seed in any::<u64>(), v in 1usize..=4, h in 2usize..=4, n in 0usize..=12, f in 0usize..3) {
        let inst = instance(seed, v, h, 9, 3, n);
        let formulation = [Formulation::Scfs, Formulation::ScfsPlus, Formulation::Scf][f];
        let (model, _) = build_formulation(&inst, formulation);
        let text = emit_lp(&model);
        let parsed = parse_lp(&text).unwrap();
        prop_assert_eq!(parsed.variables(), model.variables());
        prop_assert_eq!(parsed.constraints(), model.constraints());
        prop_assert_eq!(parsed.objective(), model.objective());
        prop_assert_eq!(emit_lp(&parsed), text);
    }

    #[test]
    fn required_before_is_bounded(seed in any::<u64>(), v in 1usize..=5, h in 2usize..=5, n in 0usize..=25) {
        let inst = instance(seed, v, h, 10, 2, n);
        let reduced = pickroute::preprocess::reduce_with_constraints(&inst);
        let before = n_required_before(&reduced.graph);
        prop_assert_eq!(before[0], 0);
        prop_assert!(before.iter().all(|&b| b <= reduced.graph.product_count()));
    }
}
