//! Instance files and seeded benchmark-class generation.
//!
//! Files are JSON documents:
//!
//! ```json
//! {
//!   "v": 5, "h": 3, "L": 11, "w": 2,
//!   "depot": {"c": 0, "a": 2, "kind": "central"},
//!   "products": [{"a": 0, "b": 1, "o": 4}],
//!   "meta": {"class": "5_3_15_R_central", "seed": 1}
//! }
//! ```
//!
//! `forcedArcPairs` (pairs of product locations) and `spannerEdges` (vertex
//! id pairs of the Steiner graph) are optional and written by the
//! preprocessing command.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::warehouse::{
    Depot, DepotKind, Dist, InstanceError, PickingInstance, ProductLocation, WarehouseLayout,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed instance file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(#[from] InstanceError),
    #[error("forced pair {0} - {1} does not name two products of the instance")]
    UnknownForcedProduct(ProductLocation, ProductLocation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meta {
    pub class: String,
    pub seed: u64,
}

/// Everything an instance file can carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub instance: PickingInstance,
    pub meta: Option<Meta>,
    pub forced_arc_pairs: Vec<(ProductLocation, ProductLocation)>,
    pub spanner_edges: Option<Vec<(usize, usize)>>,
}

impl InstanceFile {
    pub fn new(instance: PickingInstance) -> Self {
        Self { instance, meta: None, forced_arc_pairs: Vec::new(), spanner_edges: None }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDepot {
    c: usize,
    a: usize,
    kind: DepotKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    class: String,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    v: usize,
    h: usize,
    #[serde(rename = "L")]
    length: Dist,
    w: Dist,
    depot: RawDepot,
    products: Vec<ProductLocation>,
    #[serde(default)]
    meta: Option<RawMeta>,
    #[serde(default, rename = "forcedArcPairs")]
    forced_arc_pairs: Vec<(ProductLocation, ProductLocation)>,
    #[serde(default, rename = "spannerEdges")]
    spanner_edges: Option<Vec<(usize, usize)>>,
}

pub fn parse(text: &str) -> Result<InstanceFile, FormatError> {
    let raw: RawFile = serde_json::from_str(text)?;
    let layout = WarehouseLayout::new(raw.v, raw.h, raw.length, raw.w)?;
    let depot = Depot::new(raw.depot.c, raw.depot.a, raw.depot.kind);
    let instance = PickingInstance::new(layout, depot, raw.products)?;
    for &(p, q) in &raw.forced_arc_pairs {
        if instance.products().binary_search(&p).is_err() || instance.products().binary_search(&q).is_err() {
            return Err(FormatError::UnknownForcedProduct(p, q));
        }
    }
    Ok(InstanceFile {
        instance,
        meta: raw.meta.map(|m| Meta { class: m.class, seed: m.seed }),
        forced_arc_pairs: raw.forced_arc_pairs,
        spanner_edges: raw.spanner_edges,
    })
}

/// Parses a file that must describe a plain instance.
pub fn parse_instance(text: &str) -> Result<PickingInstance, FormatError> {
    parse(text).map(|f| f.instance)
}

fn location(p: &ProductLocation) -> String {
    format!("{{\"a\": {}, \"b\": {}, \"o\": {}}}", p.aisle, p.block, p.offset)
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

/// Canonical text form: fixed key order, one product per line.
pub fn serialize(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let layout = inst.layout();
    let depot = inst.depot();
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"v\": {},", layout.aisles());
    let _ = writeln!(out, "  \"h\": {},", layout.cross_aisles());
    let _ = writeln!(out, "  \"L\": {},", layout.sub_aisle_length());
    let _ = writeln!(out, "  \"w\": {},", layout.aisle_pitch());
    let _ = writeln!(
        out,
        "  \"depot\": {{\"c\": {}, \"a\": {}, \"kind\": \"{}\"}},",
        depot.cross_aisle, depot.aisle, depot.kind
    );
    let mut sections = Vec::new();
    let mut products = String::from("  \"products\": [");
    if !inst.products().is_empty() {
        products.push('\n');
        let lines: Vec<String> = inst.products().iter().map(|p| format!("    {}", location(p))).collect();
        products.push_str(&lines.join(",\n"));
        products.push_str("\n  ");
    }
    products.push(']');
    sections.push(products);
    if !file.forced_arc_pairs.is_empty() {
        let lines: Vec<String> = file
            .forced_arc_pairs
            .iter()
            .map(|(p, q)| format!("    [{}, {}]", location(p), location(q)))
            .collect();
        sections.push(format!("  \"forcedArcPairs\": [\n{}\n  ]", lines.join(",\n")));
    }
    if let Some(edges) = &file.spanner_edges {
        let items: Vec<String> = edges.iter().map(|(u, v)| format!("[{u}, {v}]")).collect();
        sections.push(format!("  \"spannerEdges\": [{}]", items.join(", ")));
    }
    if let Some(meta) = &file.meta {
        sections.push(format!(
            "  \"meta\": {{\"class\": {}, \"seed\": {}}}",
            json_string(&meta.class),
            meta.seed
        ));
    }
    out.push_str(&sections.join(",\n"));
    out.push_str("\n}\n");
    out
}

pub fn serialize_instance(instance: &PickingInstance) -> String {
    serialize(&InstanceFile::new(instance.clone()))
}

/// Product placement rule of a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Uniform over all slots.
    Random,
    /// A share of the picks comes from the slots nearest the depot's
    /// cross-aisle.
    Volume,
}

impl Policy {
    fn letter(self) -> char {
        match self {
            Policy::Random => 'R',
            Policy::Volume => 'V',
        }
    }
}

impl FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "r" => Ok(Policy::Random),
            "volume" | "v" => Ok(Policy::Volume),
            other => Err(format!("unknown policy `{other}` (expected random or volume)")),
        }
    }
}

/// Rack geometry of generated instances. Slots sit at offsets
/// `1..=slots_per_sub_aisle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    pub slots_per_sub_aisle: usize,
    pub sub_aisle_length: Dist,
    pub aisle_pitch: Dist,
}

impl Geometry {
    pub fn with_slots(slots_per_sub_aisle: usize) -> Self {
        Self {
            slots_per_sub_aisle,
            sub_aisle_length: slots_per_sub_aisle as Dist + 1,
            aisle_pitch: 2,
        }
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Self::with_slots(10)
    }
}

/// Parameters of a generated instance family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceClass {
    pub v: usize,
    pub h: usize,
    pub n: usize,
    pub policy: Policy,
    pub depot: DepotKind,
    pub geometry: Geometry,
    /// Share of picks drawn from the hot slots under [`Policy::Volume`].
    pub hot_pick_share: f64,
    /// Share of slots considered hot.
    pub hot_slot_share: f64,
}

impl InstanceClass {
    pub fn new(v: usize, h: usize, n: usize, policy: Policy, depot: DepotKind) -> Self {
        Self { v, h, n, policy, depot, geometry: Geometry::default(), hot_pick_share: 0.8, hot_slot_share: 0.2 }
    }

    /// Two cross-aisles, 45 slots per sub-aisle, depot in the corner.
    pub fn scholz(v: usize, n: usize) -> Self {
        Self { geometry: Geometry::with_slots(45), ..Self::new(v, 2, n, Policy::Random, DepotKind::Decentral) }
    }

    /// Identifier such as `15_6_60_R_central`.
    pub fn name(&self) -> String {
        format!("{}_{}_{}_{}_{}", self.v, self.h, self.n, self.policy.letter(), self.depot)
    }

    pub fn slot_count(&self) -> usize {
        self.v * (self.h - 1) * self.geometry.slots_per_sub_aisle
    }

    /// The published parameter grid (`v`, `h`, `n`, policy, depot kind).
    pub fn grid() -> Vec<InstanceClass> {
        let mut out = Vec::new();
        for v in [5, 15, 60] {
            for h in [3, 6, 11] {
                for n in [15, 60, 240] {
                    for policy in [Policy::Random, Policy::Volume] {
                        for depot in [DepotKind::Central, DepotKind::Decentral] {
                            out.push(Self::new(v, h, n, policy, depot));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn scholz_grid() -> Vec<InstanceClass> {
        let mut out = Vec::new();
        for v in [5, 10, 15, 20, 25, 30] {
            for n in [30, 45, 60, 75, 90] {
                out.push(Self::scholz(v, n));
            }
        }
        out
    }
}

impl fmt::Display for InstanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses `v,h,n,policy,depot`, e.g. `15,6,60,random,central`, or the
/// shorthand `scholz,v,n`.
impl FromStr for InstanceClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split([',', '_']).map(str::trim).collect();
        let num = |p: &str, what: &str| p.parse::<usize>().map_err(|_| format!("bad {what} `{p}` in class `{s}`"));
        match parts.as_slice() {
            ["scholz", v, n] => Ok(Self::scholz(num(v, "v")?, num(n, "n")?)),
            [v, h, n, policy, depot] => {
                let depot = match depot.to_ascii_lowercase().as_str() {
                    "central" | "c" => DepotKind::Central,
                    "decentral" | "d" => DepotKind::Decentral,
                    other => return Err(format!("unknown depot kind `{other}`")),
                };
                let class = Self::new(num(v, "v")?, num(h, "h")?, num(n, "n")?, policy.parse()?, depot);
                if class.v < 1 || class.h < 2 {
                    return Err(format!("class `{s}` needs v >= 1 and h >= 2"));
                }
                Ok(class)
            }
            _ => Err(format!("class `{s}` is not of the form v,h,n,policy,depot")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("{n} products do not fit into {slots} slots")]
    TooManyProducts { n: usize, slots: usize },
    #[error("invalid class: {0}")]
    Invalid(#[from] InstanceError),
}

/// Draws an instance of `class`; the seed fully determines the result.
pub fn generate(class: &InstanceClass, seed: u64) -> Result<PickingInstance, GenerateError> {
    let g = class.geometry;
    let layout = WarehouseLayout::new(class.v, class.h, g.sub_aisle_length, g.aisle_pitch)?;
    if g.slots_per_sub_aisle as Dist >= g.sub_aisle_length {
        return Err(InstanceError::InvalidLayout("slots must lie strictly inside a sub-aisle".into()).into());
    }
    let depot = Depot::on_first_cross_aisle(&layout, class.depot);
    let slots = class.slot_count();
    if class.n > slots {
        return Err(GenerateError::TooManyProducts { n: class.n, slots });
    }
    let mut all: Vec<ProductLocation> = Vec::with_capacity(slots);
    for a in 0..class.v {
        for b in 0..class.h - 1 {
            for o in 1..=g.slots_per_sub_aisle as Dist {
                all.push(ProductLocation::new(a, b, o));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = match class.policy {
        Policy::Random => all.choose_multiple(&mut rng, class.n).copied().collect::<Vec<_>>(),
        Policy::Volume => {
            let depot_y = layout.cross_aisle_y(depot.cross_aisle);
            let y = |p: &ProductLocation| layout.cross_aisle_y(p.block) + p.offset;
            all.sort_by_key(|p| (y(p).abs_diff(depot_y), *p));
            let hot_len = ((slots as f64) * class.hot_slot_share).ceil() as usize;
            let mut cold = all.split_off(hot_len.min(slots));
            let mut hot = all;
            let mut picks = Vec::with_capacity(class.n);
            for _ in 0..class.n {
                let from_hot = !hot.is_empty() && (cold.is_empty() || rng.gen_bool(class.hot_pick_share));
                // a cold pick is uniform over every free slot
                let pool_hot = from_hot || rng.gen_range(0..hot.len() + cold.len()) < hot.len();
                let pool = if pool_hot { &mut hot } else { &mut cold };
                let i = rng.gen_range(0..pool.len());
                picks.push(pool.swap_remove(i));
            }
            picks
        }
    };
    Ok(PickingInstance::new(layout, depot, picks)?)
}

/// [`generate`] wrapped in a file with class metadata.
pub fn generate_file(class: &InstanceClass, seed: u64) -> Result<InstanceFile, GenerateError> {
    let instance = generate(class, seed)?;
    Ok(InstanceFile { meta: Some(Meta { class: class.name(), seed }), ..InstanceFile::new(instance) })
}
