//! Small fixtures shared by unit tests, integration tests and benches.

use rand::Rng;

use crate::warehouse::{Depot, DepotKind, Dist, PickingInstance, ProductLocation, WarehouseLayout};

/// Builds an instance from plain tuples; `depot` is `(cross_aisle, aisle)`
/// and products are `(aisle, block, offset)`.
pub fn instance(
    aisles: usize,
    cross_aisles: usize,
    sub_aisle_length: Dist,
    aisle_pitch: Dist,
    depot: (usize, usize),
    products: &[(usize, usize, Dist)],
) -> PickingInstance {
    let layout = WarehouseLayout::new(aisles, cross_aisles, sub_aisle_length, aisle_pitch).unwrap();
    let kind = if depot.1 == 0 { DepotKind::Decentral } else { DepotKind::Central };
    PickingInstance::new(
        layout,
        Depot::new(depot.0, depot.1, kind),
        products.iter().map(|&(a, b, o)| ProductLocation::new(a, b, o)),
    )
    .unwrap()
}

/// The warehouse drawn with its Steiner graph: five aisles, three
/// cross-aisles, a central depot and three products in the upper block.
pub fn figure_one_instance() -> PickingInstance {
    instance(5, 3, 10, 3, (0, 2), &[(2, 1, 6), (3, 1, 3), (3, 1, 7)])
}

/// The three-product example comparing the Steiner and complete-graph
/// formulations. Vertex ids: depot 0, products 1 and 2, then the
/// intersections `c`=3, `e`=4, `b`=5, `f`=6, `a`=7.
pub fn figure_four_instance() -> PickingInstance {
    instance(2, 3, 4, 4, (0, 0), &[(1, 0, 2), (1, 1, 2)])
}

/// Uniformly random instance with the given shape. Offsets are drawn from
/// `1..sub_aisle_length`; duplicate slots collapse, so the final `n` may be
/// smaller than `products`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    aisles: usize,
    cross_aisles: usize,
    sub_aisle_length: Dist,
    aisle_pitch: Dist,
    products: usize,
) -> PickingInstance {
    let layout = WarehouseLayout::new(aisles, cross_aisles, sub_aisle_length, aisle_pitch).unwrap();
    let depot = Depot::new(
        rng.gen_range(0..cross_aisles),
        rng.gen_range(0..aisles),
        DepotKind::Central,
    );
    let items: Vec<ProductLocation> = (0..products)
        .map(|_| {
            ProductLocation::new(
                rng.gen_range(0..aisles),
                rng.gen_range(0..cross_aisles - 1),
                rng.gen_range(1..sub_aisle_length),
            )
        })
        .collect();
    PickingInstance::new(layout, depot, items).unwrap()
}
