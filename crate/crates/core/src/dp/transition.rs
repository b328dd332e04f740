use crate::preprocess::GapAnalysis;
use crate::warehouse::{Dist, WarehouseLayout};

/// The ways a sub-aisle can be covered by an optimal tour subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerticalKind {
    None,
    Single,
    DoubleFull,
    /// Double edges from the top intersection down to the lowest product.
    TopReturn,
    /// Double edges from the bottom intersection up to the highest product.
    BottomReturn,
    /// Double edges on both sides of the largest gap.
    GapSplit,
}

impl VerticalKind {
    pub const ALL: [VerticalKind; 6] = [
        VerticalKind::None,
        VerticalKind::Single,
        VerticalKind::DoubleFull,
        VerticalKind::TopReturn,
        VerticalKind::BottomReturn,
        VerticalKind::GapSplit,
    ];

    #[inline]
    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    #[inline]
    pub(crate) fn from_code(code: u8) -> Self {
        Self::ALL[code as usize]
    }

    /// Degree added to the bottom and top intersections, and whether the
    /// two become connected.
    #[inline]
    pub fn effect(self) -> (u8, u8, bool) {
        match self {
            VerticalKind::None => (0, 0, false),
            VerticalKind::Single => (1, 1, true),
            VerticalKind::DoubleFull => (2, 2, true),
            VerticalKind::TopReturn => (0, 2, false),
            VerticalKind::BottomReturn => (2, 0, false),
            VerticalKind::GapSplit => (2, 2, false),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VerticalKind::None => "none",
            VerticalKind::Single => "single",
            VerticalKind::DoubleFull => "doubleFull",
            VerticalKind::TopReturn => "topReturn",
            VerticalKind::BottomReturn => "bottomReturn",
            VerticalKind::GapSplit => "gapSplit",
        }
    }
}

/// A vertical transition with its cost. For the partial kinds the doubled
/// part of the sub-aisle is everything outside the open span `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerticalTransition {
    pub kind: VerticalKind,
    pub cost: Dist,
    pub lo: Dist,
    pub hi: Dist,
}

impl VerticalTransition {
    /// Multiplicity of the chain edge between offsets `o1 < o2`.
    #[inline]
    pub fn multiplicity(&self, o1: Dist, o2: Dist) -> u8 {
        match self.kind {
            VerticalKind::None => 0,
            VerticalKind::Single => 1,
            VerticalKind::DoubleFull => 2,
            _ if o2 <= self.lo || o1 >= self.hi => 2,
            _ => 0,
        }
    }
}

/// Applicable transitions of a sub-aisle with sorted product `offsets`.
pub fn vertical_transitions(offsets: &[Dist], length: Dist) -> Vec<VerticalTransition> {
    let whole = |kind, cost| VerticalTransition { kind, cost, lo: 0, hi: length };
    if offsets.is_empty() {
        return vec![
            whole(VerticalKind::None, 0),
            whole(VerticalKind::Single, length),
            whole(VerticalKind::DoubleFull, 2 * length),
        ];
    }
    let (p_min, p_max) = (offsets[0], offsets[offsets.len() - 1]);
    let mut out = vec![
        whole(VerticalKind::Single, length),
        whole(VerticalKind::DoubleFull, 2 * length),
        VerticalTransition { kind: VerticalKind::TopReturn, cost: 2 * (length - p_min), lo: 0, hi: p_min },
        VerticalTransition { kind: VerticalKind::BottomReturn, cost: 2 * p_max, lo: p_max, hi: length },
    ];
    let gaps = GapAnalysis::new(0, 0, offsets.to_vec(), length);
    if !gaps.below.is_empty() && !gaps.above.is_empty() {
        out.push(VerticalTransition {
            kind: VerticalKind::GapSplit,
            cost: 2 * (length - gaps.largest_gap()),
            lo: gaps.gap.0,
            hi: gaps.gap.1,
        });
    }
    out
}

/// One grid edge in processing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// Sub-aisle between cross-aisles `block` and `block + 1`.
    Vertical { aisle: usize, block: usize },
    /// Cross-aisle segment from `aisle` to `aisle + 1`.
    Horizontal { aisle: usize, cross_aisle: usize },
}

/// Grid edges column by column: the column's sub-aisles bottom to top,
/// then the cross-aisle segments to the next column bottom to top.
pub fn edge_order(layout: &WarehouseLayout) -> Vec<Step> {
    let (v, h) = (layout.aisles(), layout.cross_aisles());
    let mut steps = Vec::with_capacity(v * (h - 1) + (v - 1) * h);
    for aisle in 0..v {
        steps.extend((0..h - 1).map(|block| Step::Vertical { aisle, block }));
        if aisle + 1 < v {
            steps.extend((0..h).map(|cross_aisle| Step::Horizontal { aisle, cross_aisle }));
        }
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_steiner_graph;
    use crate::testing;

    fn costs(list: &[VerticalTransition]) -> Vec<(VerticalKind, Dist)> {
        list.iter().map(|t| (t.kind, t.cost)).collect()
    }

    #[test]
    fn empty_sub_aisle() {
        assert_eq!(
            costs(&vertical_transitions(&[], 10)),
            vec![(VerticalKind::None, 0), (VerticalKind::Single, 10), (VerticalKind::DoubleFull, 20)]
        );
    }

    #[test]
    fn three_products() {
        assert_eq!(
            costs(&vertical_transitions(&[2, 3, 7], 10)),
            vec![
                (VerticalKind::Single, 10),
                (VerticalKind::DoubleFull, 20),
                (VerticalKind::TopReturn, 16),
                (VerticalKind::BottomReturn, 14),
                (VerticalKind::GapSplit, 12),
            ]
        );
    }

    #[test]
    fn single_product_has_no_gap_split() {
        assert_eq!(
            costs(&vertical_transitions(&[1], 10)),
            vec![
                (VerticalKind::Single, 10),
                (VerticalKind::DoubleFull, 20),
                (VerticalKind::TopReturn, 18),
                (VerticalKind::BottomReturn, 2),
            ]
        );
    }

    #[test]
    fn multiplicities_match_costs() {
        let offsets = [2, 3, 7];
        let points = [0, 2, 3, 7, 10];
        for t in vertical_transitions(&offsets, 10) {
            let total: Dist = points
                .windows(2)
                .map(|w| t.multiplicity(w[0], w[1]) as Dist * (w[1] - w[0]))
                .sum();
            assert_eq!(total, t.cost, "{:?}", t.kind);
        }
    }

    #[test]
    fn figure_one_order_prefix() {
        let inst = testing::figure_one_instance();
        let g = build_steiner_graph(&inst);
        let ends = |s: Step| match s {
            Step::Vertical { aisle, block } => (g.grid_vertex(aisle, block), g.grid_vertex(aisle, block + 1)),
            Step::Horizontal { aisle, cross_aisle } => {
                (g.grid_vertex(aisle, cross_aisle), g.grid_vertex(aisle + 1, cross_aisle))
            }
        };
        let prefix: Vec<_> = edge_order(inst.layout()).into_iter().take(6).map(ends).collect();
        assert_eq!(prefix, vec![(4, 8), (8, 13), (4, 5), (8, 9), (13, 14), (5, 9)]);
    }

    #[test]
    fn edge_count() {
        for (v, h) in [(1, 2), (1, 4), (5, 3), (7, 6)] {
            let layout = WarehouseLayout::new(v, h, 10, 2).unwrap();
            let order = edge_order(&layout);
            assert_eq!(order.len(), v * (h - 1) + (v - 1) * h);
            if v == 1 {
                assert!(order.iter().all(|s| matches!(s, Step::Vertical { .. })));
            }
        }
    }
}
