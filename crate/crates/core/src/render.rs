//! Static SVG pictures of a warehouse, optionally with a tour subgraph and
//! cut sets drawn on top.

use std::fmt::Write as _;

use crate::graph::{build_steiner_graph, SteinerGraph, VertexKind};
use crate::milp::CutSet;
use crate::tour::TourSubgraph;
use crate::warehouse::{Dist, PickingInstance};

const MARGIN: Dist = 20;

struct Frame {
    ux: Dist,
    uy: Dist,
    width: Dist,
    height: Dist,
}

impl Frame {
    fn new(graph: &SteinerGraph) -> Self {
        let layout = graph.layout();
        let ux = (40 / layout.aisle_pitch()).max(4);
        let uy = (120 / layout.sub_aisle_length()).max(4);
        let width = layout.aisle_x(layout.aisles() - 1) * ux;
        let height = layout.cross_aisle_y(layout.cross_aisles() - 1) * uy;
        Self { ux, uy, width, height }
    }

    fn px(&self, x: Dist) -> Dist {
        MARGIN + x * self.ux
    }

    fn py(&self, y: Dist) -> Dist {
        MARGIN + self.height - y * self.uy
    }
}

/// Renders `instance`. Every tour edge becomes one `line` element carrying
/// its endpoints and multiplicity; every cut becomes the bounding box of its
/// vertex set. The output depends only on the arguments.
pub fn render_svg(instance: &PickingInstance, tour: Option<&TourSubgraph>, cuts: &[CutSet]) -> String {
    let graph = build_steiner_graph(instance);
    render_graph(&graph, tour, cuts)
}

pub fn render_graph(graph: &SteinerGraph, tour: Option<&TourSubgraph>, cuts: &[CutSet]) -> String {
    let f = Frame::new(graph);
    let layout = graph.layout();
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = f.width + 2 * MARGIN,
        h = f.height + 2 * MARGIN
    )
    .unwrap();
    out.push_str(
        "<style>.grid{stroke:#bbb;stroke-width:1}.m1{stroke:#1f5fbf;stroke-width:2}\
         .m2{stroke:#1f5fbf;stroke-width:5;stroke-opacity:.6}.cut{fill:#e08a00;fill-opacity:.12;\
         stroke:#e08a00;stroke-dasharray:4 3}</style>\n",
    );

    out.push_str("<g class=\"layout\">\n");
    for a in 0..layout.aisles() {
        let x = f.px(layout.aisle_x(a));
        writeln!(out, r#"<line class="grid" x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#, f.py(0), f.py(f.height / f.uy)).unwrap();
    }
    for c in 0..layout.cross_aisles() {
        let y = f.py(layout.cross_aisle_y(c));
        writeln!(out, r#"<line class="grid" x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#, f.px(0), f.px(f.width / f.ux)).unwrap();
    }
    out.push_str("</g>\n");

    for (k, cut) in cuts.iter().enumerate() {
        let members: Vec<_> = graph.vertices().iter().zip(&cut.members).filter(|(_, &m)| m).map(|(v, _)| v).collect();
        let (Some(x0), Some(x1)) = (members.iter().map(|v| v.x).min(), members.iter().map(|v| v.x).max()) else {
            continue;
        };
        let y0 = members.iter().map(|v| v.y).min().unwrap_or(0);
        let y1 = members.iter().map(|v| v.y).max().unwrap_or(0);
        let (left, top) = (f.px(x0) - 6, f.py(y1) - 6);
        writeln!(
            out,
            r#"<rect class="cut" data-family="{}" data-index="{k}" x="{left}" y="{top}" width="{}" height="{}"/>"#,
            cut.family.tag(),
            f.px(x1) + 6 - left,
            f.py(y0) + 6 - top
        )
        .unwrap();
    }

    if let Some(ts) = tour {
        out.push_str("<g class=\"tour\">\n");
        for ((u, v), m) in ts.edges() {
            let (a, b) = (graph.vertex(u), graph.vertex(v));
            writeln!(
                out,
                r#"<line class="m{m}" data-u="{u}" data-v="{v}" data-mult="{m}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                f.px(a.x),
                f.py(a.y),
                f.px(b.x),
                f.py(b.y)
            )
            .unwrap();
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g class=\"vertices\">\n");
    for (id, v) in graph.vertices().iter().enumerate() {
        let (x, y) = (f.px(v.x), f.py(v.y));
        match v.kind {
            VertexKind::Depot => {
                writeln!(out, r##"<rect class="depot" x="{}" y="{}" width="10" height="10" fill="#c0392b"/>"##, x - 5, y - 5)
                    .unwrap()
            }
            VertexKind::Product => {
                writeln!(out, r#"<circle class="product" data-id="{id}" cx="{x}" cy="{y}" r="3"/>"#).unwrap()
            }
            VertexKind::Intersection => {}
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
