//! Benchmark harness: generated instances, solved by each algorithm, one
//! row per (class, seed, algorithm).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dp::{solve_dp_with, DpConfig};
use crate::graph::{build_steiner_graph, metric_closure};
use crate::instance_io::{generate, InstanceClass};
use crate::milp::cut_sets;
use crate::oracle::{held_karp, order_length, Witness};
use crate::preprocess::{one_spanner, reduce_with_constraints};
use crate::tour::validate_tour_subgraph;
use crate::warehouse::{Dist, PickingInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algo {
    Dp,
    Oracle,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Dp => "dp",
            Algo::Oracle => "oracle",
        }
    }
}

impl FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dp" => Ok(Algo::Dp),
            "oracle" => Ok(Algo::Oracle),
            other => Err(format!("unknown algorithm `{other}` (expected dp or oracle)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub classes: Vec<InstanceClass>,
    pub seeds: Vec<u64>,
    pub algos: Vec<Algo>,
    /// Timed runs per row; the median is reported.
    pub repeats: usize,
    /// Run once untimed before measuring.
    pub warmup: bool,
    pub dp: DpConfig,
    /// Solve instances concurrently. Rows keep their order.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            classes: Vec::new(),
            seeds: (0..10).collect(),
            algos: vec![Algo::Dp],
            repeats: 3,
            warmup: true,
            dp: DpConfig::default(),
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub class: String,
    pub seed: u64,
    pub algo: String,
    pub cost: Option<Dist>,
    pub time_ms: Option<f64>,
    pub arcs_before: usize,
    pub arcs_after: usize,
    pub peak_states: Option<usize>,
    pub valid: bool,
    pub cuts: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

struct InstanceSizes {
    arcs_before: usize,
    arcs_after: usize,
    cuts: usize,
}

fn sizes(instance: &PickingInstance) -> InstanceSizes {
    let graph = build_steiner_graph(instance);
    let reduced = reduce_with_constraints(instance);
    let spanner = one_spanner(&reduced.graph);
    InstanceSizes { arcs_before: graph.arc_count(), arcs_after: spanner.arc_count(), cuts: cut_sets(&reduced.graph).len() }
}

fn median(mut times: Vec<f64>) -> f64 {
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

/// Solves once, returning cost, peak states and whether the witness checks.
fn run_once(instance: &PickingInstance, algo: Algo, dp: &DpConfig) -> Result<(Dist, Option<usize>, bool), String> {
    match algo {
        Algo::Dp => {
            let r = solve_dp_with(instance, dp).map_err(|e| e.to_string())?;
            let valid = validate_tour_subgraph(&r.graph, &r.tour_subgraph) == Ok(r.cost)
                && r.tour.walk_length(&r.graph) == Some(r.cost);
            Ok((r.cost, Some(r.stats.peak_states), valid))
        }
        Algo::Oracle => {
            let closure = metric_closure(&build_steiner_graph(instance));
            let r = held_karp(&closure).map_err(|e| e.to_string())?;
            let valid = match &r.witness {
                Witness::VisitOrder(order) => order_length(&closure, order) == r.cost,
                Witness::Subgraph(_) => false,
            };
            Ok((r.cost, None, valid))
        }
    }
}

fn bench_row(class: &InstanceClass, seed: u64, algo: Algo, instance: &PickingInstance, sizes: &InstanceSizes, config: &BenchConfig) -> BenchRow {
    let mut row = BenchRow {
        class: class.name(),
        seed,
        algo: algo.name().to_string(),
        cost: None,
        time_ms: None,
        arcs_before: sizes.arcs_before,
        arcs_after: sizes.arcs_after,
        peak_states: None,
        valid: false,
        cuts: sizes.cuts,
        error: String::new(),
    };
    if config.warmup {
        if let Err(e) = run_once(instance, algo, &config.dp) {
            row.error = e;
            return row;
        }
    }
    let mut times = Vec::with_capacity(config.repeats.max(1));
    for _ in 0..config.repeats.max(1) {
        let start = Instant::now();
        match run_once(instance, algo, &config.dp) {
            Ok((cost, peak, valid)) => {
                times.push(start.elapsed().as_secs_f64() * 1e3);
                row.cost = Some(cost);
                row.peak_states = peak;
                row.valid = valid;
            }
            Err(e) => {
                row.error = e;
                return row;
            }
        }
    }
    row.time_ms = Some(median(times));
    row
}

fn bench_instance(class: &InstanceClass, seed: u64, config: &BenchConfig) -> Vec<BenchRow> {
    let instance = match generate(class, seed) {
        Ok(i) => i,
        Err(e) => {
            return config
                .algos
                .iter()
                .map(|a| BenchRow {
                    class: class.name(),
                    seed,
                    algo: a.name().to_string(),
                    cost: None,
                    time_ms: None,
                    arcs_before: 0,
                    arcs_after: 0,
                    peak_states: None,
                    valid: false,
                    cuts: 0,
                    error: e.to_string(),
                })
                .collect()
        }
    };
    let sizes = sizes(&instance);
    config.algos.iter().map(|&a| bench_row(class, seed, a, &instance, &sizes, config)).collect()
}

/// Runs every (class, seed, algorithm) combination. Failures are recorded
/// in the row and do not stop the run.
pub fn bench(config: &BenchConfig) -> BenchReport {
    let jobs: Vec<(&InstanceClass, u64)> =
        config.classes.iter().flat_map(|c| config.seeds.iter().map(move |&s| (c, s))).collect();
    let rows: Vec<Vec<BenchRow>> = if config.parallel {
        jobs.par_iter().map(|&(c, s)| bench_instance(c, s, config)).collect()
    } else {
        jobs.iter().map(|&(c, s)| bench_instance(c, s, config)).collect()
    };
    BenchReport { rows: rows.into_iter().flatten().collect() }
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record([
                "class", "seed", "algo", "cost", "timeMs", "arcsBefore", "arcsAfter", "peakStates", "valid", "cuts",
                "error",
            ])
            .expect("in-memory write");
        }
        for row in &self.rows {
            w.serialize(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
    }

    /// Whether every instance solved by several algorithms got one cost.
    pub fn costs_agree(&self) -> bool {
        let mut by_instance: BTreeMap<(&str, u64), Dist> = BTreeMap::new();
        self.rows.iter().filter_map(|r| r.cost.map(|c| ((r.class.as_str(), r.seed), c))).all(|(key, cost)| {
            *by_instance.entry(key).or_insert(cost) == cost
        })
    }

    /// Per class and algorithm averages, one line each.
    pub fn to_table(&self) -> String {
        struct Acc {
            rows: usize,
            solved: usize,
            cost: f64,
            time: f64,
            before: f64,
            after: f64,
            peak: usize,
            valid: usize,
            cuts: f64,
        }
        let mut groups: Vec<((String, String), Acc)> = Vec::new();
        for r in &self.rows {
            let key = (r.class.clone(), r.algo.clone());
            let pos = match groups.iter().position(|(k, _)| *k == key) {
                Some(p) => p,
                None => {
                    let acc = Acc { rows: 0, solved: 0, cost: 0.0, time: 0.0, before: 0.0, after: 0.0, peak: 0, valid: 0, cuts: 0.0 };
                    groups.push((key, acc));
                    groups.len() - 1
                }
            };
            let acc = &mut groups[pos].1;
            acc.rows += 1;
            acc.before += r.arcs_before as f64;
            acc.after += r.arcs_after as f64;
            acc.cuts += r.cuts as f64;
            acc.valid += r.valid as usize;
            if let (Some(c), Some(t)) = (r.cost, r.time_ms) {
                acc.solved += 1;
                acc.cost += c as f64;
                acc.time += t;
            }
            acc.peak = acc.peak.max(r.peak_states.unwrap_or(0));
        }
        let mut out = String::new();
        writeln!(
            out,
            "{:<22} {:<6} {:>6} {:>10} {:>10} {:>9} {:>9} {:>7} {:>10} {:>7} {:>6}",
            "class", "algo", "solved", "avgCost", "avgMs", "arcsBef", "arcsAft", "arcs%", "peakStates", "cuts/hv", "valid"
        )
        .unwrap();
        for ((class, algo), a) in &groups {
            let rows = a.rows.max(1) as f64;
            let solved = a.solved.max(1) as f64;
            let (before, after) = (a.before / rows, a.after / rows);
            let change = if before > 0.0 { 100.0 * (after - before) / before } else { 0.0 };
            let hv = class_hv(class).unwrap_or(1) as f64;
            writeln!(
                out,
                "{:<22} {:<6} {:>3}/{:<2} {:>10.1} {:>10.2} {:>9.1} {:>9.1} {:>6.1}% {:>10} {:>7.2} {:>3}/{:<2}",
                class,
                algo,
                a.solved,
                a.rows,
                a.cost / solved,
                a.time / solved,
                before,
                after,
                change,
                a.peak,
                a.cuts / rows / hv,
                a.valid,
                a.rows
            )
            .unwrap();
        }
        out
    }
}

/// `h·v` from a class name such as `5_3_15_R_central`.
fn class_hv(name: &str) -> Option<usize> {
    let mut parts = name.split('_');
    let v: usize = parts.next()?.parse().ok()?;
    let h: usize = parts.next()?.parse().ok()?;
    Some(v * h)
}
