//! The acceptance suite: every criterion runs, prints one line, and the
//! test fails afterwards if any of them failed.

use std::ops::RangeInclusive;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::Zero;
use pickroute::dp::{solve_dp, solve_dp_with, DpConfig, DpError};
use pickroute::graph::{build_steiner_graph, metric_closure, MetricClosure};
use pickroute::instance_io::{generate, generate_file, serialize, InstanceClass, Policy};
use pickroute::milp::{
    assignment_from_tour, build_formulation, build_scf, build_scfs, closure_matrices, complete_auxiliaries, emit_lp,
    feasibility_check, project_solution, project_solution_by_paths, ratio, rational, scf_tour_assignment, Assignment,
    Formulation, Rational,
};
use pickroute::oracle::{enumerate_tour_subgraphs, held_karp, held_karp_forced, HELD_KARP_CAP};
use pickroute::preprocess::{one_spanner, products_per_sub_aisle, reduce_plain, reduce_with_constraints};
use pickroute::render::render_svg;
use pickroute::testing;
use pickroute::warehouse::{DepotKind, PickingInstance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn draw(
    rng: &mut ChaCha8Rng,
    v: RangeInclusive<usize>,
    h: RangeInclusive<usize>,
    len: RangeInclusive<u64>,
    pitch: RangeInclusive<u64>,
    n: RangeInclusive<usize>,
) -> PickingInstance {
    let (v, h, len, pitch, n) =
        (rng.gen_range(v), rng.gen_range(h), rng.gen_range(len), rng.gen_range(pitch), rng.gen_range(n));
    testing::random_instance(rng, v, h, len, pitch, n)
}

fn check(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..200 {
        let (v, h, n) = (rng.gen_range(1..=6), rng.gen_range(2..=4), rng.gen_range(0..=10));
        let (len, pitch) = (rng.gen_range(2..=12), rng.gen_range(1..=6));
        let inst = testing::random_instance(&mut rng, v, h, len, pitch, n);
        let dp = solve_dp(&inst).map_err(|e| e.to_string())?;
        let hk = held_karp(&metric_closure(&dp.graph)).map_err(|e| e.to_string())?;
        check(dp.cost == hk.cost, || format!("instance {k}: dp {} vs held-karp {}", dp.cost, hk.cost))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("200 instances equal, {secs:.2} s"))
}

fn transition_certification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut done = 0;
    let mut max_edges = 0;
    while done < 50 {
        let (v, h) = [(1, 2), (2, 2), (1, 3), (1, 4), (2, 3), (3, 2), (2, 4), (3, 3)][rng.gen_range(0..8)];
        let inst = draw(&mut rng, v..=v, h..=h, 2..=9, 1..=5, 0..=4);
        let graph = build_steiner_graph(&inst);
        if graph.edges().len() > 14 {
            continue;
        }
        max_edges = max_edges.max(graph.edges().len());
        let dp = solve_dp(&inst).map_err(|e| e.to_string())?;
        let brute = enumerate_tour_subgraphs(&graph, 14).map_err(|e| e.to_string())?;
        check(dp.cost == brute.cost, || format!("instance {done}: dp {} vs enumeration {}", dp.cost, brute.cost))?;
        done += 1;
    }
    Ok(format!("50 instances equal, up to {max_edges} edges"))
}

fn preprocessing_safety() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut shrunk = 0;
    for k in 0..100 {
        let inst = draw(&mut rng, 1..=4, 2..=4, 6..=14, 1..=4, 0..=40);
        let plain = reduce_plain(&inst);
        shrunk += (plain.n() < inst.n()) as usize;
        let (a, b) = (solve_dp(&inst).map_err(|e| e.to_string())?, solve_dp(&plain).map_err(|e| e.to_string())?);
        check(a.cost == b.cost, || format!("plain reduction, instance {k}: {} vs {}", a.cost, b.cost))?;
        let reduced = reduce_with_constraints(&inst);
        let most = products_per_sub_aisle(&reduced.instance).values().copied().max().unwrap_or(0);
        check(most <= 4, || format!("instance {k}: {most} products left in a sub-aisle"))?;
    }
    let mut forced_used = 0;
    for k in 0..100 {
        let inst = draw(&mut rng, 1..=3, 2..=3, 6..=14, 1..=4, 0..=10);
        let original = held_karp(&metric_closure(&build_steiner_graph(&inst))).map_err(|e| e.to_string())?;
        let reduced = reduce_with_constraints(&inst);
        forced_used += (!reduced.forced_pairs.is_empty()) as usize;
        let forced = held_karp_forced(&metric_closure(&reduced.graph), &reduced.forced_pairs, HELD_KARP_CAP)
            .map_err(|e| e.to_string())?;
        check(forced.cost == original.cost, || {
            format!("constrained reduction, instance {k}: {} vs {}", forced.cost, original.cost)
        })?;
    }
    Ok(format!("plain reduction shrank {shrunk}/100; forced pairs present in {forced_used}/100"))
}

fn spanner_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..100 {
        let inst = draw(&mut rng, 1..=8, 2..=6, 2..=12, 1..=6, 0..=30);
        let graph = build_steiner_graph(&inst);
        let spanner = one_spanner(&graph);
        check(metric_closure(&graph) == metric_closure(&spanner), || format!("instance {k}: distances changed"))?;
    }
    let class = InstanceClass::new(15, 6, 60, Policy::Random, DepotKind::Central);
    let seeds = 50;
    let mut removed = 0;
    for seed in 0..seeds {
        let graph = build_steiner_graph(&generate(&class, seed).map_err(|e| e.to_string())?);
        removed += (one_spanner(&graph).arc_count() < graph.arc_count()) as u64;
    }
    check(removed * 10 >= seeds * 9, || format!("arcs removed on {removed}/{seeds} instances of {class}"))?;
    Ok(format!("100 instances exact; arcs removed on {removed}/{seeds} of {class}"))
}

fn milp_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = 0;
    for k in 0..100 {
        let inst = draw(&mut rng, 1..=6, 2..=5, 4..=14, 1..=5, 0..=25);
        let dp = solve_dp(&inst).map_err(|e| e.to_string())?;
        let (model, reduced) = build_formulation(&inst, Formulation::ScfsPlus);
        let reduced = reduced.expect("scfs+ reduces the instance");
        let mut a = assignment_from_tour(&reduced.graph, &dp.solution.to_tour_subgraph(&reduced.graph));
        complete_auxiliaries(&model, &mut a);
        let result = feasibility_check(&model, &a, false);
        check(result.is_feasible(), || format!("instance {k}: violates {:?}", result.violations))?;
        check(result.objective == rational(dp.cost as i64), || {
            format!("instance {k}: objective {} vs dp {}", result.objective, dp.cost)
        })?;
        rows += model.constraints().len();
    }
    Ok(format!("100 DP optima feasible for scfs+ ({rows} rows checked)"))
}

fn figure_four() -> Outcome {
    let inst = testing::figure_four_instance();
    let graph = build_steiner_graph(&inst);
    let closure = metric_closure(&graph);
    check(closure == MetricClosure::from_rows(vec![vec![0, 6, 10], vec![6, 0, 4], vec![10, 4, 0]]), || {
        format!("closure {:?}", closure.rows())
    })?;
    let hk = held_karp(&closure).map_err(|e| e.to_string())?;
    check(hk.cost == 20, || format!("held-karp {}", hk.cost))?;

    let mut frac = Assignment::new();
    for name in ["x_0_4", "x_0_3", "x_3_1", "x_5_1", "x_2_5", "x_5_2", "x_2_7", "x_7_2", "x_4_5"] {
        frac.insert(name.into(), ratio(1, 2));
    }
    for name in ["x_3_0", "x_1_3", "y_0_4", "y_0_3", "y_3_1", "y_5_2", "y_4_5"] {
        frac.insert(name.into(), rational(1));
    }
    let lp = feasibility_check(&build_scfs(&graph), &frac, true);
    check(lp.is_feasible(), || format!("fractional solution violates {:?}", lp.violations))?;
    check(lp.objective == rational(18), || format!("fractional objective {}", lp.objective))?;

    // every 0/1 x' on the three-node closure, with the flow it forces
    let scf = build_scf(&closure);
    let arcs: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
    let mut best: Option<Rational> = None;
    for mask in 0u32..1 << arcs.len() {
        let chosen: Vec<(usize, usize)> = arcs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &a)| a).collect();
        let mut a = Assignment::new();
        for &(i, j) in &chosen {
            a.insert(format!("x_{i}_{j}"), rational(1));
        }
        // follow successors from the depot; flow drops by one per product
        let mut at = 0;
        let mut remaining = 2;
        for _ in 0..3 {
            let Some(&(_, next)) = chosen.iter().find(|&&(i, _)| i == at) else { break };
            if remaining > 0 {
                a.insert(format!("y_{at}_{next}"), rational(remaining));
            }
            remaining -= 1;
            at = next;
        }
        let result = feasibility_check(&scf, &a, false);
        if result.is_feasible() && best.as_ref().is_none_or(|b| result.objective < *b) {
            best = Some(result.objective);
        }
    }
    check(best == Some(rational(20)), || format!("SCF enumeration minimum {best:?}"))?;
    Ok("closure (6,10,4), held-karp 20, SCFS relaxation 18, SCF integer minimum 20".into())
}

/// Random convex combination of one to three Hamiltonian tours.
fn random_scf_point(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let size = n + 1;
    let tours = rng.gen_range(1..=3);
    let weights: Vec<i64> = (0..tours).map(|_| rng.gen_range(1..=7)).collect();
    let total: i64 = weights.iter().sum();
    let mut x = vec![vec![Rational::zero(); size]; size];
    let mut y = x.clone();
    for &w in &weights {
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(rng);
        let (tx, ty) = closure_matrices(&scf_tour_assignment(&order), size);
        let share = ratio(w, total);
        for i in 0..size {
            for j in 0..size {
                x[i][j] += &tx[i][j] * &share;
                y[i][j] += &ty[i][j] * &share;
            }
        }
    }
    (x, y)
}

fn projection_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vectors = 0;
    while vectors < 1000 {
        let inst = draw(&mut rng, 1..=4, 2..=4, 2..=8, 1..=4, 1..=6);
        let graph = build_steiner_graph(&inst);
        if graph.product_count() == 0 {
            continue;
        }
        let scf = build_scf(&metric_closure(&graph));
        let scfs = build_scfs(&graph);
        for _ in 0..5 {
            let (x, y) = random_scf_point(&mut rng, graph.product_count());
            let mut point = Assignment::new();
            for i in 0..x.len() {
                for j in 0..x.len() {
                    if i != j {
                        point.insert(format!("x_{i}_{j}"), x[i][j].clone());
                        point.insert(format!("y_{i}_{j}"), y[i][j].clone());
                    }
                }
            }
            let relaxed = feasibility_check(&scf, &point, true);
            check(relaxed.is_feasible(), || format!("vector {vectors} is not SCF-feasible: {:?}", relaxed.violations))?;
            let p = project_solution(&graph, &x, &y);
            let broken = p.property_violations(&graph, &x);
            check(broken.is_empty(), || format!("vector {vectors}: {broken:?}"))?;
            check(p.objective(&graph) == relaxed.objective, || format!("vector {vectors}: objective changed"))?;
            check(p == project_solution_by_paths(&graph, &x, &y), || format!("vector {vectors}: path enumeration differs"))?;
            let lifted = feasibility_check(&scfs, &p.to_assignment(), true);
            check(lifted.is_feasible(), || format!("vector {vectors}: projection violates {:?}", lifted.violations))?;
            vectors += 1;
        }
    }
    Ok("1000 vectors: visits, balance and objective exact; projections SCFS-feasible".into())
}

fn dp_performance() -> Outcome {
    let desk = InstanceClass::new(60, 6, 240, Policy::Random, DepotKind::Central);
    let scholz = InstanceClass::scholz(30, 90);
    let mut worst = [0f64; 2];
    for (k, (class, limit)) in [(desk, 5.0), (scholz, 0.1)].into_iter().enumerate() {
        for seed in 0..3 {
            let inst = generate(&class, seed).map_err(|e| e.to_string())?;
            let start = Instant::now();
            solve_dp(&inst).map_err(|e| e.to_string())?;
            let secs = start.elapsed().as_secs_f64();
            worst[k] = worst[k].max(secs);
            check(secs < limit, || format!("{class} seed {seed}: {secs:.3} s (limit {limit} s)"))?;
        }
    }
    Ok(format!("{desk} worst {:.3} s; {scholz} worst {:.4} s", worst[0], worst[1]))
}

fn resource_cap() -> Outcome {
    let class = InstanceClass::new(60, 11, 240, Policy::Random, DepotKind::Central);
    let inst = generate(&class, 0).map_err(|e| e.to_string())?;
    let config = DpConfig { max_h: 15, max_table_bytes: Some(1_000_000_000), ..DpConfig::default() };
    let start = Instant::now();
    match solve_dp_with(&inst, &config) {
        Err(DpError::ResourceCapExceeded { reason, stats }) => Ok(format!(
            "{class}: {reason} after {:.1} s, peak {} states",
            start.elapsed().as_secs_f64(),
            stats.peak_states
        )),
        Ok(r) => Err(format!("solved with cost {} instead of hitting the cap", r.cost)),
    }
}

fn determinism() -> Outcome {
    let class = InstanceClass::new(5, 3, 15, Policy::Volume, DepotKind::Central);
    let text = serialize(&generate_file(&class, 7).map_err(|e| e.to_string())?);
    check(text == serialize(&generate_file(&class, 7).map_err(|e| e.to_string())?), || "generate differs".into())?;
    check(text == include_str!("golden/5_3_15_V_central_7.json"), || "generated instance differs from golden".into())?;

    let fig4 = build_scfs(&build_steiner_graph(&testing::figure_four_instance()));
    check(emit_lp(&fig4) == include_str!("golden/figure_four_scfs.lp"), || "LP differs from golden".into())?;
    let inst = generate(&class, 7).map_err(|e| e.to_string())?;
    for f in [Formulation::Scfs, Formulation::ScfsPlus, Formulation::Scf] {
        let (a, b) = (build_formulation(&inst, f).0, build_formulation(&inst, f).0);
        check(emit_lp(&a) == emit_lp(&b), || format!("{f} LP differs between runs"))?;
    }

    let fig1 = testing::figure_one_instance();
    let dp = solve_dp(&fig1).map_err(|e| e.to_string())?;
    let cuts = pickroute::milp::cut_sets(&dp.graph);
    let svg = render_svg(&fig1, Some(&dp.tour_subgraph), &cuts);
    check(svg == include_str!("golden/figure_one.svg"), || "SVG differs from golden".into())?;
    let dp2 = solve_dp(&fig1).map_err(|e| e.to_string())?;
    check(svg == render_svg(&fig1, Some(&dp2.tour_subgraph), &cuts), || "SVG differs between runs".into())?;
    Ok("generate, serialize, emit_lp and render match between runs and golden files".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("transition-system certification", transition_certification),
        ("preprocessing safety", preprocessing_safety),
        ("spanner exactness", spanner_exactness),
        ("MILP validity", milp_validity),
        ("three-product example", figure_four),
        ("projection properties", projection_properties),
        ("DP performance", dp_performance),
        ("resource cap", resource_cap),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", k + 1),
            Err(detail) => {
                println!("[FAIL] {}. {name}: {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
