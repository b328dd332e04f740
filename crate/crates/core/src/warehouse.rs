//! Warehouse geometry and picking instances.
//!
//! A warehouse has `aisles` vertical aisles and `cross_aisles` horizontal
//! cross-aisles. Aisles are narrow (both rack sides of an aisle share one
//! coordinate) and every sub-aisle, the segment of an aisle between two
//! consecutive cross-aisles, has the same length. All distances are
//! non-negative integers; rational inputs must be scaled beforehand.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer distance unit used throughout the crate.
pub type Dist = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("product {0} has aisle index outside [0, {1})")]
    AisleOutOfRange(ProductLocation, usize),
    #[error("product {0} has block index outside [0, {1})")]
    BlockOutOfRange(ProductLocation, usize),
    #[error("product {0} has offset outside the open interval (0, {1})")]
    OffsetOutOfRange(ProductLocation, Dist),
    #[error("depot at cross-aisle {cross_aisle}, aisle {aisle} lies outside the grid")]
    DepotOutOfRange { cross_aisle: usize, aisle: usize },
}

/// Rectangular warehouse geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WarehouseLayout {
    aisles: usize,
    cross_aisles: usize,
    sub_aisle_length: Dist,
    aisle_pitch: Dist,
}

impl WarehouseLayout {
    pub fn new(
        aisles: usize,
        cross_aisles: usize,
        sub_aisle_length: Dist,
        aisle_pitch: Dist,
    ) -> Result<Self, InstanceError> {
        if aisles < 1 {
            return Err(InstanceError::InvalidLayout("at least one aisle is required".into()));
        }
        if cross_aisles < 2 {
            return Err(InstanceError::InvalidLayout("at least two cross-aisles are required".into()));
        }
        if sub_aisle_length < 1 || aisle_pitch < 1 {
            return Err(InstanceError::InvalidLayout(
                "sub-aisle length and aisle pitch must be positive".into(),
            ));
        }
        Ok(Self { aisles, cross_aisles, sub_aisle_length, aisle_pitch })
    }

    /// Number of vertical aisles (`v`).
    #[inline]
    pub fn aisles(&self) -> usize {
        self.aisles
    }

    /// Number of cross-aisles (`h`).
    #[inline]
    pub fn cross_aisles(&self) -> usize {
        self.cross_aisles
    }

    /// Number of blocks, i.e. sub-aisles per aisle.
    #[inline]
    pub fn blocks(&self) -> usize {
        self.cross_aisles - 1
    }

    #[inline]
    pub fn sub_aisle_length(&self) -> Dist {
        self.sub_aisle_length
    }

    #[inline]
    pub fn aisle_pitch(&self) -> Dist {
        self.aisle_pitch
    }

    pub fn aisle_x(&self, aisle: usize) -> Dist {
        aisle as Dist * self.aisle_pitch
    }

    pub fn cross_aisle_y(&self, cross_aisle: usize) -> Dist {
        cross_aisle as Dist * self.sub_aisle_length
    }

    pub fn sub_aisle_count(&self) -> usize {
        self.aisles * self.blocks()
    }
}

/// A product slot: aisle, block (sub-aisle between cross-aisles `block` and
/// `block + 1`) and offset measured from the lower cross-aisle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProductLocation {
    #[serde(rename = "a")]
    pub aisle: usize,
    #[serde(rename = "b")]
    pub block: usize,
    #[serde(rename = "o")]
    pub offset: Dist,
}

impl ProductLocation {
    pub fn new(aisle: usize, block: usize, offset: Dist) -> Self {
        Self { aisle, block, offset }
    }
}

impl fmt::Display for ProductLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, b={}, o={})", self.aisle, self.block, self.offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepotKind {
    Central,
    Decentral,
}

impl DepotKind {
    /// Aisle index of the depot for this kind on a warehouse with `aisles` aisles.
    pub fn aisle_for(self, aisles: usize) -> usize {
        match self {
            DepotKind::Central => aisles / 2,
            DepotKind::Decentral => 0,
        }
    }
}

impl fmt::Display for DepotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepotKind::Central => "central",
            DepotKind::Decentral => "decentral",
        })
    }
}

/// The depot sits on a cross-aisle, aligned with an aisle, so it coincides
/// with a grid intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Depot {
    #[serde(rename = "c")]
    pub cross_aisle: usize,
    #[serde(rename = "a")]
    pub aisle: usize,
    pub kind: DepotKind,
}

impl Depot {
    pub fn new(cross_aisle: usize, aisle: usize, kind: DepotKind) -> Self {
        Self { cross_aisle, aisle, kind }
    }

    /// Depot on the first cross-aisle at the aisle implied by `kind`.
    pub fn on_first_cross_aisle(layout: &WarehouseLayout, kind: DepotKind) -> Self {
        Self { cross_aisle: 0, aisle: kind.aisle_for(layout.aisles()), kind }
    }
}

/// Layout, depot and a deduplicated, sorted picking list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PickingInstance {
    layout: WarehouseLayout,
    depot: Depot,
    products: Vec<ProductLocation>,
}

impl PickingInstance {
    pub fn new(
        layout: WarehouseLayout,
        depot: Depot,
        products: impl IntoIterator<Item = ProductLocation>,
    ) -> Result<Self, InstanceError> {
        if depot.aisle >= layout.aisles() || depot.cross_aisle >= layout.cross_aisles() {
            return Err(InstanceError::DepotOutOfRange {
                cross_aisle: depot.cross_aisle,
                aisle: depot.aisle,
            });
        }
        let mut products: Vec<ProductLocation> = products.into_iter().collect();
        for p in &products {
            if p.aisle >= layout.aisles() {
                return Err(InstanceError::AisleOutOfRange(*p, layout.aisles()));
            }
            if p.block >= layout.blocks() {
                return Err(InstanceError::BlockOutOfRange(*p, layout.blocks()));
            }
            if p.offset == 0 || p.offset >= layout.sub_aisle_length() {
                return Err(InstanceError::OffsetOutOfRange(*p, layout.sub_aisle_length()));
            }
        }
        products.sort_unstable();
        products.dedup();
        Ok(Self { layout, depot, products })
    }

    #[inline]
    pub fn layout(&self) -> &WarehouseLayout {
        &self.layout
    }

    #[inline]
    pub fn depot(&self) -> Depot {
        self.depot
    }

    /// Products sorted by `(aisle, block, offset)`.
    #[inline]
    pub fn products(&self) -> &[ProductLocation] {
        &self.products
    }

    /// Number of products `n` after deduplication.
    #[inline]
    pub fn n(&self) -> usize {
        self.products.len()
    }

    /// Products of one sub-aisle, ordered bottom to top.
    pub fn sub_aisle_products(&self, aisle: usize, block: usize) -> &[ProductLocation] {
        let lo = self.products.partition_point(|p| (p.aisle, p.block) < (aisle, block));
        let hi = self.products.partition_point(|p| (p.aisle, p.block) <= (aisle, block));
        &self.products[lo..hi]
    }

    /// Offsets of the products of one sub-aisle, ordered bottom to top.
    pub fn sub_aisle_offsets(&self, aisle: usize, block: usize) -> Vec<Dist> {
        self.sub_aisle_products(aisle, block).iter().map(|p| p.offset).collect()
    }

    /// Same layout and depot with a different picking list.
    pub fn with_products(
        &self,
        products: impl IntoIterator<Item = ProductLocation>,
    ) -> Result<Self, InstanceError> {
        Self::new(self.layout, self.depot, products)
    }
}
