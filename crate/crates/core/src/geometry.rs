//! Hexagonal cluster geometry.
//!
//! Cells sit on a hexagonal lattice with center-to-vertex radius `R`, so
//! adjacent centers are `√3·R` apart. The reference cell (id 1) is at the
//! origin; tier-1 cells get ids 2..=7 counter-clockwise from angle 0, tier-2
//! cells continue from 8. Band labels follow the reuse-7 tiling of the
//! seven-cell cluster: the reference carries X, cells 2/4/6 carry A and
//! cells 3/5/7 carry B. Outer rings inherit the label of the cluster
//! position they occupy in a neighbouring copy of the cluster.

use std::fmt;

use crate::error::{Error, Result};

/// Axial lattice directions, ordered counter-clockwise from angle 0.
const DIRECTIONS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Reuse-7 cluster shifts: positions of the reference cell's co-channel repeats.
const REUSE_SHIFTS: [(i32, i32); 6] = [(1, 2), (-2, 3), (-3, 1), (-1, -2), (2, -3), (3, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar position in kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    X,
    A,
    B,
}

/// A band together with the cluster position that carries it, e.g. `A6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BandLabel {
    pub band: Band,
    pub index: u8,
}

impl BandLabel {
    fn for_position(index: u8) -> Self {
        let band = match index {
            1 => Band::X,
            i if i % 2 == 0 => Band::A,
            _ => Band::B,
        };
        BandLabel { band, index }
    }
}

impl fmt::Display for BandLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.band, self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSite {
    pub id: CellId,
    pub center: Point,
    pub tier: u32,
    pub band_label: BandLabel,
    axial: (i32, i32),
}

impl CellSite {
    pub fn axial(&self) -> (i32, i32) {
        self.axial
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Zone {
    Inner,
    Outer,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Zone::Inner => "Inner",
            Zone::Outer => "Outer",
        })
    }
}

/// Which channels serve a user in the reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceBand {
    /// The reference cell's own X band.
    Original,
    /// A channel borrowed from `donor`.
    Borrowed { donor: CellId },
}

/// An interfering transmitter: either a cell of the layout or one of the
/// six reuse-distance co-channel repeats of the reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Cell(CellId),
    CoChannel(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub site: Site,
    pub center: Point,
    pub tier: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLayout {
    cells: Vec<CellSite>,
    cell_radius: f64,
    tier_count: u32,
}

fn axial_to_point(axial: (i32, i32), radius: f64) -> Point {
    let (q, r) = (f64::from(axial.0), f64::from(axial.1));
    Point {
        x: 3f64.sqrt() * radius * (q + r / 2.0),
        y: 1.5 * radius * r,
    }
}

/// Cluster position (1..=7) of a lattice cell under the reuse-7 tiling.
fn cluster_position(axial: (i32, i32)) -> u8 {
    // (q + 3r) mod 7 is a proper reuse-7 colouring; map each colour to the
    // id of the tier-1 cell that carries it in the reference cluster.
    const POSITION_OF_COLOUR: [u8; 7] = [1, 2, 4, 3, 6, 7, 5];
    let colour = (axial.0 + 3 * axial.1).rem_euclid(7) as usize;
    POSITION_OF_COLOUR[colour]
}

fn ring(tier: u32) -> Vec<(i32, i32)> {
    let t = tier as i32;
    let mut cell = (DIRECTIONS[0].0 * t, DIRECTIONS[0].1 * t);
    let mut out = Vec::with_capacity(6 * tier as usize);
    for side in 0..6 {
        let step = DIRECTIONS[(side + 2) % 6];
        for _ in 0..tier {
            out.push(cell);
            cell = (cell.0 + step.0, cell.1 + step.1);
        }
    }
    out
}

impl ClusterLayout {
    pub const REFERENCE: CellId = CellId(1);

    /// Build the reference cell plus `tier_count` rings around it.
    pub fn build(cell_radius: f64, tier_count: u32) -> Result<Self> {
        if !(cell_radius.is_finite() && cell_radius > 0.0) {
            return Err(Error::param("cell_radius", format!("must be > 0, got {cell_radius}")));
        }
        if !(1..=2).contains(&tier_count) {
            return Err(Error::UnsupportedGeometry(tier_count));
        }
        let mut cells = Vec::new();
        let mut push = |axial: (i32, i32), tier: u32| {
            let id = CellId(cells.len() as u32 + 1);
            cells.push(CellSite {
                id,
                center: axial_to_point(axial, cell_radius),
                tier,
                band_label: BandLabel::for_position(cluster_position(axial)),
                axial,
            });
        };
        push((0, 0), 0);
        for tier in 1..=tier_count {
            for axial in ring(tier) {
                push(axial, tier);
            }
        }
        Ok(ClusterLayout {
            cells,
            cell_radius,
            tier_count,
        })
    }

    pub fn cells(&self) -> &[CellSite] {
        &self.cells
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    pub fn tier_count(&self) -> u32 {
        self.tier_count
    }

    pub fn reference(&self) -> CellId {
        Self::REFERENCE
    }

    /// Center-to-center spacing of adjacent cells.
    pub fn neighbor_spacing(&self) -> f64 {
        3f64.sqrt() * self.cell_radius
    }

    /// Distance between co-channel cells under reuse-7.
    pub fn reuse_distance(&self) -> f64 {
        21f64.sqrt() * self.cell_radius
    }

    pub fn cell(&self, id: CellId) -> Result<&CellSite> {
        (id.0 as usize)
            .checked_sub(1)
            .and_then(|i| self.cells.get(i))
            .ok_or(Error::UnknownCell(id))
    }

    pub fn distance(&self, id: CellId, point: Point) -> Result<f64> {
        Ok(self.cell(id)?.center.distance_to(&point))
    }

    /// Inner iff the point lies in the closed disk of radius `inner_ratio·R`.
    pub fn zone_of(&self, id: CellId, point: Point, inner_ratio: f64) -> Result<Zone> {
        check_inner_ratio(inner_ratio)?;
        let d = self.distance(id, point)?;
        Ok(if d <= inner_ratio * self.cell_radius {
            Zone::Inner
        } else {
            Zone::Outer
        })
    }

    /// Whether `point` falls inside the hexagon of cell `id`: no lattice
    /// neighbour center is strictly closer. Boundary points count as inside.
    pub fn contains(&self, id: CellId, point: Point) -> Result<bool> {
        let site = self.cell(id)?;
        let own = site.center.distance_to(&point);
        let (q, r) = site.axial;
        Ok(DIRECTIONS.iter().all(|&(dq, dr)| {
            let neighbour = axial_to_point((q + dq, r + dr), self.cell_radius);
            neighbour.distance_to(&point) >= own - 1e-12
        }))
    }

    /// Tier-1 cells carrying the same band as `donor`, excluding the donor.
    pub fn same_band_partners(&self, donor: CellId) -> Result<Vec<CellId>> {
        let band = self.cell(donor)?.band_label.band;
        Ok(self
            .cells
            .iter()
            .filter(|c| c.tier == 1 && c.id != donor && c.band_label.band == band)
            .map(|c| c.id)
            .collect())
    }

    /// The reference cell's reuse-7 co-channel repeats at `√21·R`.
    /// Empty unless the layout considers two tiers.
    pub fn cochannel_sites(&self) -> Vec<Point> {
        if self.tier_count < 2 {
            return Vec::new();
        }
        REUSE_SHIFTS
            .iter()
            .map(|&s| axial_to_point(s, self.cell_radius))
            .collect()
    }

    /// Interferers seen by a reference-cell user at `point` served on `service`.
    ///
    /// Original (X) service has no tier-1 co-channel cell, so only the tier-2
    /// repeats remain. Borrowed service adds the donor's tier-1 same-band
    /// partners; the donor itself is not transmitting the lent channel.
    pub fn cochannel_interferers(&self, service: ServiceBand, point: Point) -> Result<Vec<Interferer>> {
        let mut out = Vec::new();
        let tier1_band = match service {
            ServiceBand::Original => self.cell(Self::REFERENCE)?.band_label.band,
            ServiceBand::Borrowed { donor } => {
                let site = self.cell(donor)?;
                if site.tier != 1 {
                    return Err(Error::param("donor", format!("cell {donor} is not a tier-1 cell")));
                }
                site.band_label.band
            }
        };
        let donor = match service {
            ServiceBand::Borrowed { donor } => Some(donor),
            ServiceBand::Original => None,
        };
        for c in self.cells.iter().filter(|c| c.tier == 1) {
            if c.band_label.band == tier1_band && Some(c.id) != donor {
                out.push(Interferer {
                    site: Site::Cell(c.id),
                    center: c.center,
                    tier: 1,
                    distance: c.center.distance_to(&point),
                });
            }
        }
        for (i, center) in self.cochannel_sites().into_iter().enumerate() {
            out.push(Interferer {
                site: Site::CoChannel(i as u8),
                center,
                tier: 2,
                distance: center.distance_to(&point),
            });
        }
        Ok(out)
    }
}

pub(crate) fn check_inner_ratio(inner_ratio: f64) -> Result<()> {
    if inner_ratio > 0.0 && inner_ratio < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "inner_ratio",
            format!("must be in (0, 1), got {inner_ratio}"),
        ))
    }
}
