//! Finite regions of the pentagrid {5,4}, the heptagrid {7,3} and the
//! dodecagrid {5,3,4}.
//!
//! Tiles are generated breadth-first in the hyperboloid model. Each cell
//! keeps an orientation-preserving isometry mapping the base tile onto it;
//! the cell's side (or face) slots are the images of the base tile's slots,
//! so every cell's numbering is a rotated image of the base numbering.
//! Duplicate tiles are merged by comparing centres within
//! [`DEDUP_TOLERANCE`].
//!
//! Slots are 0-based positions in a cell's neighbour list. On planar grids
//! slot `i` is side `i + 1` and slots increase clockwise; on the dodecagrid
//! slot `i` is face `i` of the face adjacency table.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use hashbrown::HashMap;
use libm::{acosh, atanh, cos, floor, sin, sqrt, tan};

use crate::lorentz::{self, Mat4, Vec4};
use crate::symmetry::{self, FacePermutation, FACE_TABLE};

/// Two centres closer than this (sup norm, hyperboloid coordinates) are the
/// same tile. Distinct centres are at least `sinh(d/2)` apart in sup norm
/// (over 0.57 on every grid, `d` the centre spacing), while rounding drift
/// grows like `ε·e^dist` and stays below 2e-6 in the largest supported
/// regions.
pub const DEDUP_TOLERANCE: f64 = 1e-3;

/// Threshold for a point or normal lying on a reference plane. Side centres
/// not on the plane stay a fixed hyperbolic distance away from it.
const PLANE_TOLERANCE: f64 = 1e-2;

/// Bucket edge of the centre index. Distinct tile centres are at least
/// `2 sinh(d/2) > 1` apart, where `d` is the centre spacing of the grid, so a
/// bucket never holds two tiles.
const BUCKET: f64 = 0.25;

const NO_CELL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum GridKind {
    Pentagrid,
    Heptagrid,
    Dodecagrid,
}

impl GridKind {
    pub const ALL: [GridKind; 3] = [GridKind::Pentagrid, GridKind::Heptagrid, GridKind::Dodecagrid];

    /// Sides per cell (faces for the dodecagrid).
    pub fn arity(self) -> usize {
        match self {
            GridKind::Pentagrid => 5,
            GridKind::Heptagrid => 7,
            GridKind::Dodecagrid => 12,
        }
    }

    pub fn is_planar(self) -> bool {
        !matches!(self, GridKind::Dodecagrid)
    }

    /// Largest generation radius accepted by [`build_region`].
    pub fn max_radius(self) -> u32 {
        match self {
            GridKind::Pentagrid | GridKind::Heptagrid => 10,
            GridKind::Dodecagrid => 6,
        }
    }

    /// Human numbering of a slot: sides 1..k on planar grids, faces 0..11 on
    /// the dodecagrid.
    pub fn label(self, slot: usize) -> usize {
        if self.is_planar() {
            slot + 1
        } else {
            slot
        }
    }

    pub fn slot(self, label: usize) -> Option<usize> {
        let slot = if self.is_planar() { label.checked_sub(1)? } else { label };
        (slot < self.arity()).then_some(slot)
    }

    pub fn name(self) -> &'static str {
        match self {
            GridKind::Pentagrid => "pentagrid",
            GridKind::Heptagrid => "heptagrid",
            GridKind::Dodecagrid => "dodecagrid",
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for GridKind {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pentagrid" | "5,4" => Ok(GridKind::Pentagrid),
            "heptagrid" | "7,3" => Ok(GridKind::Heptagrid),
            "dodecagrid" | "5,3,4" => Ok(GridKind::Dodecagrid),
            _ => Err(GridError::UnknownGrid),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct CellId(pub u32);

impl CellId {
    pub const CENTRAL: CellId = CellId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// What lies across a side: another generated cell, or the edge of the
/// region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Adjacent {
    Cell(CellId),
    Boundary,
}

impl Adjacent {
    pub fn cell(self) -> Option<CellId> {
        match self {
            Adjacent::Cell(c) => Some(c),
            Adjacent::Boundary => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("radius {radius} exceeds the supported maximum {max} for the {grid}")]
    RadiusTooLarge { grid: GridKind, radius: u32, max: u32 },
    #[error("radius must be positive")]
    ZeroRadius,
    #[error("coordinate drift {residual:e} is too close to the deduplication tolerance {tolerance:e}; depth too large")]
    PrecisionExhausted { residual: f64, tolerance: f64 },
    #[error("side {label} is out of range for the {grid}")]
    SideOutOfRange { grid: GridKind, label: usize },
    #[error("cell {0} is not in the region")]
    UnknownCell(u32),
    #[error("guideline construction failed at index {0}")]
    GuidelineBroken(i64),
    #[error("unknown grid kind")]
    UnknownGrid,
    #[error("unknown construction")]
    UnknownConstruction,
}

/// One cell of the guideline with the slots through which it sees its left
/// and right one-dimensional neighbours.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GuidelineCell {
    pub cell: CellId,
    /// Position on the line; the central cell is 0, left is negative.
    pub index: i64,
    pub left_slot: u8,
    pub right_slot: u8,
    /// Canonical numbering of this cell: `frame[i]` is the slot playing the
    /// role of canonical slot `i`. Planar grids: canonical slot 0 is the left
    /// neighbour. Dodecagrid: canonical face 0 lies on the reference plane,
    /// face 5 touches the guideline, faces 1 and 4 lead left and right.
    pub frame: Vec<u8>,
}

impl GuidelineCell {
    /// The same record read with left and right exchanged.
    pub fn reversed(&self) -> GuidelineCell {
        GuidelineCell {
            index: -self.index,
            left_slot: self.right_slot,
            right_slot: self.left_slot,
            ..self.clone()
        }
    }
}

/// The base tile: slot normals, slot centres, vertices and the
/// orientation-preserving maps onto each neighbour.
pub(crate) struct Polytope {
    pub normals: Vec<Vec4>,
    pub side_centers: Vec<Vec4>,
    pub half_turns: Vec<Mat4>,
    /// Per slot, the vertices of that side (planar: its two endpoints in
    /// clockwise order) or face (dodecagrid: five vertices, clockwise from
    /// outside).
    pub slot_vertices: Vec<Vec<Vec4>>,
}

fn planar_polytope(p: usize, q: usize, first_angle: f64) -> Polytope {
    let a = 2.0 * PI / p as f64;
    let b = 2.0 * PI / q as f64;
    let inradius = acosh(sqrt((1.0 + cos(b)) / (1.0 - cos(a))));
    let circumradius = acosh(1.0 / (tan(PI / p as f64) * tan(PI / q as f64)));
    let dir = |angle: f64| [cos(angle), sin(angle), 0.0];
    let angle = |k: usize| first_angle - a * k as f64;
    let mut poly = Polytope {
        normals: Vec::new(),
        side_centers: Vec::new(),
        half_turns: Vec::new(),
        slot_vertices: Vec::new(),
    };
    for k in 0..p {
        let u = dir(angle(k));
        let n = lorentz::plane_normal(u, inradius);
        // Mirror through the origin and the side midpoint; keeps the tile.
        let keep = lorentz::spatial_reflection([-u[1], u[0], 0.0]);
        poly.half_turns.push(lorentz::mul(&lorentz::reflection(&n), &keep));
        poly.normals.push(n);
        poly.side_centers.push(lorentz::point_at(u, inradius));
        let v0 = lorentz::point_at(dir(angle(k) + a / 2.0), circumradius);
        let v1 = lorentz::point_at(dir(angle(k) - a / 2.0), circumradius);
        poly.slot_vertices.push(vec![v0, v1]);
    }
    poly
}

/// Unit face directions of the base dodecahedron, labelled to agree with
/// [`FACE_TABLE`] including its clockwise orientation.
pub(crate) fn dodecahedron_directions() -> [[f64; 3]; 12] {
    let z = 1.0 / sqrt(5.0);
    let rho = 2.0 / sqrt(5.0);
    let offset = -162.0_f64.to_radians();
    let step = 72.0_f64.to_radians();
    let mut dirs = [[0.0; 3]; 12];
    dirs[0] = [0.0, 0.0, -1.0];
    dirs[11] = [0.0, 0.0, 1.0];
    for k in 1..=5 {
        let lower = offset - step * (k - 1) as f64;
        dirs[k] = [rho * cos(lower), rho * sin(lower), -z];
        let upper = lower + step / 2.0;
        dirs[k + 5] = [rho * cos(upper), rho * sin(upper), z];
    }
    dirs
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn dodecahedral_polytope() -> Polytope {
    // Right dihedral angles: tanh² r equals the cosine between adjacent
    // face directions, 1/√5.
    let inradius = atanh(sqrt(1.0 / sqrt(5.0)));
    let dirs = dodecahedron_directions();
    let normals: Vec<Vec4> = dirs.iter().map(|u| lorentz::plane_normal(*u, inradius)).collect();
    let mut poly = Polytope {
        normals: normals.clone(),
        side_centers: dirs.iter().map(|u| lorentz::point_at(*u, inradius)).collect(),
        half_turns: Vec::new(),
        slot_vertices: Vec::new(),
    };
    for f in 0..12 {
        let g = FACE_TABLE[f][0] as usize;
        // Mirror plane perpendicular to the edge shared by faces f and g.
        let keep = lorentz::spatial_reflection(unit(cross(dirs[f], dirs[g])));
        poly.half_turns.push(lorentz::mul(&lorentz::reflection(&normals[f]), &keep));
        let row = &FACE_TABLE[f];
        let verts = (0..5)
            .map(|i| {
                let a = row[i] as usize;
                let b = row[(i + 1) % 5] as usize;
                lorentz::common_point(&normals[f], &normals[a], &normals[b])
                    .expect("adjacent faces of a right dodecahedron meet")
            })
            .collect();
        poly.slot_vertices.push(verts);
    }
    poly
}

impl GridKind {
    pub(crate) fn polytope(self) -> Polytope {
        match self {
            // Side 5 faces straight down so the guideline is horizontal.
            GridKind::Pentagrid => planar_polytope(5, 4, (-90.0_f64 + 4.0 * 72.0).to_radians()),
            // Sides 6 and 7 straddle the downward direction.
            GridKind::Heptagrid => {
                let a: f64 = 360.0 / 7.0;
                planar_polytope(7, 3, (-90.0 + a / 2.0 + 5.0 * a).to_radians())
            }
            GridKind::Dodecagrid => dodecahedral_polytope(),
        }
    }
}

/// Planes that locate the guideline; see [`Region::guideline`].
#[derive(Clone, Debug)]
struct GuideGeometry {
    /// Pentagrid: the line. Heptagrid: the mid-point line. Dodecagrid: the
    /// reference plane.
    primary: Vec4,
    /// Dodecagrid only: the plane through the guideline perpendicular to the
    /// reference plane.
    secondary: Option<Vec4>,
}

impl GuideGeometry {
    fn new(grid: GridKind, poly: &Polytope) -> GuideGeometry {
        match grid {
            GridKind::Pentagrid => GuideGeometry { primary: poly.normals[4], secondary: None },
            GridKind::Heptagrid => {
                let ez = [0.0, 0.0, 1.0, 0.0];
                let mut n = lorentz::common_normal(&poly.side_centers[5], &poly.side_centers[6], &ez)
                    .expect("mid-point line exists");
                // Orient so the central cell lies on the negative side.
                if lorentz::dot(&n, &lorentz::ORIGIN) > 0.0 {
                    n.iter_mut().for_each(|x| *x = -*x);
                }
                GuideGeometry { primary: n, secondary: None }
            }
            GridKind::Dodecagrid => GuideGeometry {
                primary: poly.normals[0],
                secondary: Some(poly.normals[5]),
            },
        }
    }
}

fn same_plane(a: &Vec4, b: &Vec4, tol: f64) -> bool {
    let neg = [-b[0], -b[1], -b[2], -b[3]];
    lorentz::sup_distance(a, b) < tol || lorentz::sup_distance(a, &neg) < tol
}

/// Centre lookup keyed by coarse buckets; a query probes every bucket within
/// the tolerance of the point.
#[derive(Clone, Debug, Default)]
struct CenterIndex {
    buckets: HashMap<[i64; 4], u32>,
}

impl CenterIndex {
    fn key(p: &Vec4) -> [i64; 4] {
        [0, 1, 2, 3].map(|i| floor(p[i] / BUCKET) as i64)
    }

    fn candidates(p: &Vec4, tol: f64) -> Vec<[i64; 4]> {
        let mut keys = vec![[0i64; 4]];
        for i in 0..4 {
            let lo = floor((p[i] - tol) / BUCKET) as i64;
            let hi = floor((p[i] + tol) / BUCKET) as i64;
            let mut next = Vec::with_capacity(keys.len() * 2);
            for k in &keys {
                for v in lo..=hi {
                    let mut k = *k;
                    k[i] = v;
                    next.push(k);
                }
            }
            keys = next;
        }
        keys
    }
}

/// A finite, immutable piece of one of the three tilings around a segment
/// of its guideline.
#[derive(Clone, Debug)]
pub struct Region {
    grid: GridKind,
    radius: u32,
    halfwidth: u32,
    transforms: Vec<Mat4>,
    adjacency: Vec<u32>,
    distance: Vec<u32>,
    guideline: Vec<GuidelineCell>,
    guideline_pos: HashMap<u32, usize>,
    index: CenterIndex,
    max_residual: f64,
    guide: GuideGeometry,
}

struct Builder {
    grid: GridKind,
    arity: usize,
    poly: Polytope,
    guide: GuideGeometry,
    motions: Vec<FacePermutation>,
    transforms: Vec<Mat4>,
    adjacency: Vec<u32>,
    distance: Vec<u32>,
    index: CenterIndex,
    max_residual: f64,
}

impl Builder {
    fn find(&mut self, p: &Vec4) -> Option<u32> {
        for key in CenterIndex::candidates(p, DEDUP_TOLERANCE) {
            if let Some(&id) = self.index.buckets.get(&key) {
                let q = lorentz::center_of(&self.transforms[id as usize]);
                let r = lorentz::sup_distance(p, &q);
                if r < DEDUP_TOLERANCE {
                    self.max_residual = self.max_residual.max(r);
                    return Some(id);
                }
            }
        }
        None
    }

    fn insert(&mut self, t: Mat4, dist: u32) -> Result<u32, GridError> {
        let id = self.transforms.len() as u32;
        let key = CenterIndex::key(&lorentz::center_of(&t));
        if self.index.buckets.insert(key, id).is_some() {
            // Two distinct centres in one bucket: the coordinates have
            // drifted far from the exact tiling.
            return Err(GridError::PrecisionExhausted {
                residual: f64::INFINITY,
                tolerance: DEDUP_TOLERANCE,
            });
        }
        self.transforms.push(t);
        self.adjacency.extend(std::iter::repeat_n(NO_CELL, self.arity));
        self.distance.push(dist);
        Ok(id)
    }

    fn slot_center(&self, cell: u32, slot: usize) -> Vec4 {
        lorentz::apply(&self.transforms[cell as usize], &self.poly.side_centers[slot])
    }

    fn slot_normal(&self, cell: u32, slot: usize) -> Vec4 {
        lorentz::apply(&self.transforms[cell as usize], &self.poly.normals[slot])
    }

    /// Slot of `other` that faces `cell` across `slot`.
    fn back_slot(&mut self, cell: u32, slot: usize, other: u32) -> Option<usize> {
        let mid = self.slot_center(cell, slot);
        (0..self.arity).find(|&j| {
            let r = lorentz::sup_distance(&self.slot_center(other, j), &mid);
            if r < DEDUP_TOLERANCE {
                self.max_residual = self.max_residual.max(r);
                true
            } else {
                false
            }
        })
    }

    fn link(&mut self, a: u32, sa: usize, b: u32, sb: usize) {
        self.adjacency[a as usize * self.arity + sa] = b;
        self.adjacency[b as usize * self.arity + sb] = a;
    }

    /// Follow `slot` out of `cell`, creating the neighbour if `create` is
    /// set. Returns the neighbour and its back slot.
    fn step(&mut self, cell: u32, slot: usize, create: Option<u32>) -> Result<Option<(u32, usize)>, GridError> {
        let existing = self.adjacency[cell as usize * self.arity + slot];
        if existing != NO_CELL {
            let back = self.back_slot(cell, slot, existing).ok_or(GridError::PrecisionExhausted {
                residual: f64::INFINITY,
                tolerance: DEDUP_TOLERANCE,
            })?;
            return Ok(Some((existing, back)));
        }
        let t = lorentz::mul(&self.transforms[cell as usize], &self.poly.half_turns[slot]);
        let center = lorentz::center_of(&t);
        let (other, back) = match self.find(&center) {
            Some(other) => {
                let back = self.back_slot(cell, slot, other).ok_or(GridError::PrecisionExhausted {
                    residual: f64::INFINITY,
                    tolerance: DEDUP_TOLERANCE,
                })?;
                (other, back)
            }
            None => match create {
                // The half-turn maps the shared side onto itself.
                Some(dist) => (self.insert(t, dist)?, slot),
                None => return Ok(None),
            },
        };
        self.link(cell, slot, other, back);
        Ok(Some((other, back)))
    }

    /// Guideline record of `cell`, if it is a guideline cell.
    fn record(&self, cell: u32, index: i64) -> Option<GuidelineCell> {
        let k = self.arity;
        let center = lorentz::center_of(&self.transforms[cell as usize]);
        let tol = PLANE_TOLERANCE;
        let on_side = |n: &Vec4| lorentz::dot(&center, n) < 0.0;
        let id = CellId(cell);
        match self.grid {
            GridKind::Pentagrid => {
                if !on_side(&self.guide.primary) {
                    return None;
                }
                let line = (0..k).find(|&s| same_plane(&self.slot_normal(cell, s), &self.guide.primary, tol))?;
                let left = (line + 1) % k;
                Some(GuidelineCell {
                    cell: id,
                    index,
                    left_slot: left as u8,
                    right_slot: ((line + 4) % k) as u8,
                    frame: (0..k).map(|i| ((left + i) % k) as u8).collect(),
                })
            }
            GridKind::Heptagrid => {
                if !on_side(&self.guide.primary) {
                    return None;
                }
                let crossed: Vec<bool> = (0..k)
                    .map(|s| libm::fabs(lorentz::dot(&self.slot_center(cell, s), &self.guide.primary)) < tol)
                    .collect();
                if crossed.iter().filter(|c| **c).count() != 2 {
                    return None;
                }
                let first = (0..k).find(|&s| crossed[s] && crossed[(s + 1) % k])?;
                let left = (first + 2) % k;
                Some(GuidelineCell {
                    cell: id,
                    index,
                    left_slot: left as u8,
                    right_slot: ((first + k - 1) % k) as u8,
                    frame: (0..k).map(|i| ((left + i) % k) as u8).collect(),
                })
            }
            GridKind::Dodecagrid => {
                let reference = self.guide.primary;
                let upright = self.guide.secondary?;
                if !on_side(&reference) || !on_side(&upright) {
                    return None;
                }
                let a = (0..k).find(|&s| same_plane(&self.slot_normal(cell, s), &reference, tol))?;
                let b = (0..k).find(|&s| same_plane(&self.slot_normal(cell, s), &upright, tol))?;
                let frame = self.motions.iter().find(|m| m.image(0) as usize == a && m.image(5) as usize == b)?;
                Some(GuidelineCell {
                    cell: id,
                    index,
                    left_slot: frame.image(1),
                    right_slot: frame.image(4),
                    frame: frame.0.to_vec(),
                })
            }
        }
    }

    /// Walk one guideline step from `from` towards the left (`leftward`) or
    /// right.
    fn walk(&mut self, from: &GuidelineCell, leftward: bool, create: Option<u32>) -> Result<Option<GuidelineCell>, GridError> {
        let (slot, index) = if leftward {
            (from.left_slot as usize, from.index - 1)
        } else {
            (from.right_slot as usize, from.index + 1)
        };
        let Some((next, back)) = self.step(from.cell.0, slot, create)? else {
            return Ok(None);
        };
        let rec = self.record(next, index).ok_or(GridError::GuidelineBroken(index))?;
        let expected = if leftward { rec.right_slot } else { rec.left_slot };
        if expected as usize != back {
            return Err(GridError::GuidelineBroken(index));
        }
        Ok(Some(rec))
    }
}

/// Generates every cell within graph distance `radius` of the guideline
/// segment `[-halfwidth, halfwidth]`.
pub fn build_region(grid: GridKind, radius: u32, halfwidth: u32) -> Result<Region, GridError> {
    if radius == 0 {
        return Err(GridError::ZeroRadius);
    }
    if radius > grid.max_radius() {
        return Err(GridError::RadiusTooLarge { grid, radius, max: grid.max_radius() });
    }
    let poly = grid.polytope();
    let guide = GuideGeometry::new(grid, &poly);
    let mut b = Builder {
        grid,
        arity: grid.arity(),
        poly,
        guide,
        motions: symmetry::enumerate_motions(),
        transforms: Vec::new(),
        adjacency: Vec::new(),
        distance: Vec::new(),
        index: CenterIndex::default(),
        max_residual: 0.0,
    };
    let central = b.insert(lorentz::IDENTITY, 0)?;
    let central_rec = b.record(central, 0).ok_or(GridError::GuidelineBroken(0))?;

    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut cur = central_rec.clone();
    for _ in 0..halfwidth {
        cur = b.walk(&cur, true, Some(0))?.ok_or(GridError::GuidelineBroken(cur.index - 1))?;
        left.push(cur.clone());
    }
    cur = central_rec.clone();
    for _ in 0..halfwidth {
        cur = b.walk(&cur, false, Some(0))?.ok_or(GridError::GuidelineBroken(cur.index + 1))?;
        right.push(cur.clone());
    }

    let mut queue: VecDeque<u32> = (0..b.transforms.len() as u32).collect();
    while let Some(cell) = queue.pop_front() {
        let d = b.distance[cell as usize];
        let create = (d < radius).then_some(d + 1);
        for slot in 0..b.arity {
            if b.adjacency[cell as usize * b.arity + slot] != NO_CELL {
                continue;
            }
            let before = b.transforms.len();
            b.step(cell, slot, create)?;
            if b.transforms.len() > before {
                queue.push_back(before as u32);
            }
        }
    }

    // Extend the guideline through every guideline cell the ball reached.
    let mut cur = left.last().cloned().unwrap_or_else(|| central_rec.clone());
    while let Some(next) = b.walk(&cur, true, None)? {
        left.push(next.clone());
        cur = next;
    }
    let mut cur = right.last().cloned().unwrap_or_else(|| central_rec.clone());
    while let Some(next) = b.walk(&cur, false, None)? {
        right.push(next.clone());
        cur = next;
    }

    if b.max_residual > 0.1 * DEDUP_TOLERANCE {
        return Err(GridError::PrecisionExhausted { residual: b.max_residual, tolerance: DEDUP_TOLERANCE });
    }

    left.reverse();
    let mut guideline = left;
    guideline.push(central_rec);
    guideline.extend(right);
    let guideline_pos = guideline.iter().enumerate().map(|(i, g)| (g.cell.0, i)).collect();

    Ok(Region {
        grid,
        radius,
        halfwidth,
        transforms: b.transforms,
        adjacency: b.adjacency,
        distance: b.distance,
        guideline,
        guideline_pos,
        index: b.index,
        max_residual: b.max_residual,
        guide: b.guide,
    })
}

impl Region {
    pub fn grid(&self) -> GridKind {
        self.grid
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn halfwidth(&self) -> u32 {
        self.halfwidth
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = CellId> {
        (0..self.transforms.len() as u32).map(CellId)
    }

    pub fn contains(&self, c: CellId) -> bool {
        c.index() < self.len()
    }

    /// Neighbour across the side or face with the given human label.
    pub fn neighbor(&self, c: CellId, label: usize) -> Result<Adjacent, GridError> {
        if !self.contains(c) {
            return Err(GridError::UnknownCell(c.0));
        }
        let slot = self.grid.slot(label).ok_or(GridError::SideOutOfRange { grid: self.grid, label })?;
        Ok(self.neighbor_at(c, slot))
    }

    /// Neighbour across a 0-based slot.
    #[inline]
    pub fn neighbor_at(&self, c: CellId, slot: usize) -> Adjacent {
        match self.adjacency[c.index() * self.grid.arity() + slot] {
            NO_CELL => Adjacent::Boundary,
            id => Adjacent::Cell(CellId(id)),
        }
    }

    /// All neighbours in slot order.
    pub fn neighbors(&self, c: CellId) -> impl Iterator<Item = Adjacent> + '_ {
        let k = self.grid.arity();
        self.adjacency[c.index() * k..(c.index() + 1) * k].iter().map(|&id| match id {
            NO_CELL => Adjacent::Boundary,
            id => Adjacent::Cell(CellId(id)),
        })
    }

    /// Raw neighbour ids, `u32::MAX` marking the boundary.
    pub(crate) fn raw_neighbors(&self, c: usize) -> &[u32] {
        let k = self.grid.arity();
        &self.adjacency[c * k..(c + 1) * k]
    }

    /// Slot of `d` through which it sees `c`, if they are adjacent.
    pub fn back_slot(&self, c: CellId, d: CellId) -> Option<usize> {
        self.neighbors(d).position(|a| a == Adjacent::Cell(c))
    }

    pub fn is_interior(&self, c: CellId) -> bool {
        self.raw_neighbors(c.index()).iter().all(|&id| id != NO_CELL)
    }

    /// Graph distance from the guideline segment.
    pub fn distance(&self, c: CellId) -> u32 {
        self.distance[c.index()]
    }

    /// Ordered left to right.
    pub fn guideline(&self) -> &[GuidelineCell] {
        &self.guideline
    }

    pub fn guideline_record(&self, c: CellId) -> Option<&GuidelineCell> {
        self.guideline_pos.get(&c.0).map(|&i| &self.guideline[i])
    }

    pub fn is_guideline(&self, c: CellId) -> bool {
        self.guideline_pos.contains_key(&c.0)
    }

    /// Guideline cell at a line index, if generated.
    pub fn guideline_at(&self, index: i64) -> Option<&GuidelineCell> {
        let first = self.guideline.first()?.index;
        let i = usize::try_from(index - first).ok()?;
        self.guideline.get(i)
    }

    pub fn transform(&self, c: CellId) -> &Mat4 {
        &self.transforms[c.index()]
    }

    /// Hyperboloid coordinates `(x, y, z, t)` of the cell centre.
    pub fn center(&self, c: CellId) -> Vec4 {
        lorentz::center_of(&self.transforms[c.index()])
    }

    /// Poincaré-disk coordinates of a planar cell centre.
    pub fn disk_center(&self, c: CellId) -> Option<[f64; 2]> {
        self.grid.is_planar().then(|| lorentz::to_disk(&self.center(c)))
    }

    pub fn side_normal(&self, c: CellId, slot: usize) -> Vec4 {
        let poly = self.grid.polytope();
        lorentz::apply(self.transform(c), &poly.normals[slot])
    }

    pub fn side_center(&self, c: CellId, slot: usize) -> Vec4 {
        let poly = self.grid.polytope();
        lorentz::apply(self.transform(c), &poly.side_centers[slot])
    }

    /// Vertices of a planar cell in clockwise order, starting with the
    /// vertex between side 1 and side 2.
    pub fn polygon(&self, c: CellId) -> Vec<Vec4> {
        let poly = self.grid.polytope();
        let t = self.transform(c);
        poly.slot_vertices.iter().map(|v| lorentz::apply(t, &v[1])).collect()
    }

    /// Vertices of one face of a dodecagrid cell (or the endpoints of one
    /// side of a planar cell).
    pub fn slot_vertices(&self, c: CellId, slot: usize) -> Vec<Vec4> {
        let poly = self.grid.polytope();
        let t = self.transform(c);
        poly.slot_vertices[slot].iter().map(|v| lorentz::apply(t, v)).collect()
    }

    /// Unit normal of the plane carrying the guideline: the line itself on
    /// the pentagrid, the mid-point line on the heptagrid, the reference
    /// plane on the dodecagrid. Guideline cells lie on its negative side.
    pub fn guide_normal(&self) -> Vec4 {
        self.guide.primary
    }

    /// Dodecagrid: the plane through the guideline perpendicular to the
    /// reference plane.
    pub fn upright_normal(&self) -> Option<Vec4> {
        self.guide.secondary
    }

    /// Cell whose centre is within the deduplication tolerance of `p`.
    pub fn locate(&self, p: &Vec4) -> Option<CellId> {
        CenterIndex::candidates(p, DEDUP_TOLERANCE).into_iter().find_map(|key| {
            let &id = self.index.buckets.get(&key)?;
            (lorentz::sup_distance(p, &self.center(CellId(id))) < DEDUP_TOLERANCE).then_some(CellId(id))
        })
    }

    /// Largest coordinate discrepancy seen when two constructions of the
    /// same tile were merged.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Smallest sup-norm distance between two distinct cell centres. Exact
    /// when below 1; otherwise some value of at least 1 (or infinity).
    pub fn min_center_separation(&self) -> f64 {
        let key = |p: &Vec4| p.map(|x| floor(x) as i64);
        let mut cells: HashMap<[i64; 4], Vec<u32>> = HashMap::new();
        for c in self.cells() {
            cells.entry(key(&self.center(c))).or_default().push(c.0);
        }
        let mut best = f64::INFINITY;
        for c in self.cells() {
            let p = self.center(c);
            let k = key(&p);
            for probe in 0..81 {
                let mut q = k;
                let mut code = probe;
                for x in q.iter_mut() {
                    *x += code % 3 - 1;
                    code /= 3;
                }
                for &other in cells.get(&q).into_iter().flatten() {
                    if other != c.0 {
                        best = best.min(lorentz::sup_distance(&p, &self.center(CellId(other))));
                    }
                }
            }
        }
        best
    }

    /// Breadth-first distances from `sources` over the region's adjacency.
    pub fn bfs_distances(&self, sources: &[CellId]) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s.index()] = Some(0);
            queue.push_back(s);
        }
        while let Some(c) = queue.pop_front() {
            let d = dist[c.index()].unwrap_or(0);
            for n in self.neighbors(c).filter_map(Adjacent::cell) {
                if dist[n.index()].is_none() {
                    dist[n.index()] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }
}

/// The three embeddings of a one-dimensional automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Construction {
    /// One extra state; every grid. Markers only on the dodecagrid.
    T1,
    /// No extra state; pentagrid, fixable source automaton.
    T3,
    /// No extra state; heptagrid or dodecagrid.
    T4,
}

impl Construction {
    pub const ALL: [Construction; 3] = [Construction::T1, Construction::T3, Construction::T4];

    pub fn supports(self, grid: GridKind) -> bool {
        self.canonical_slots(grid).is_some()
    }

    pub fn name(self) -> &'static str {
        match self {
            Construction::T1 => "t1",
            Construction::T3 => "t3",
            Construction::T4 => "t4",
        }
    }

    /// Canonical slots (see [`GuidelineCell::frame`]) of a guideline cell's
    /// marker neighbours, or `None` if the construction does not apply to `grid`.
    pub fn canonical_slots(self, grid: GridKind) -> Option<&'static [u8]> {
        match (self, grid) {
            (Construction::T1, GridKind::Pentagrid | GridKind::Heptagrid) => Some(&[]),
            (Construction::T1, GridKind::Dodecagrid) => Some(&[3]),
            (Construction::T3, GridKind::Pentagrid) => Some(&[1]),
            (Construction::T4, GridKind::Heptagrid) => Some(&[1, 3]),
            (Construction::T4, GridKind::Dodecagrid) => Some(&[0, 3, 9, 10]),
            _ => None,
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Construction {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "t1" | "1" => Ok(Construction::T1),
            "t3" | "3" => Ok(Construction::T3),
            "t4" | "4" => Ok(Construction::T4),
            _ => Err(GridError::UnknownConstruction),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MarkerError {
    #[error("construction does not apply to the {0}")]
    WrongGrid(GridKind),
    #[error("marker of guideline cell {index} falls outside the region")]
    RegionTooSmall { index: i64 },
}

/// For every guideline cell, the slots whose neighbours carry markers.
/// Guideline cells whose markers would fall outside the region are skipped
/// unless they lie within the guideline segment.
pub fn marker_cells(region: &Region, construction: Construction) -> Result<BTreeMap<CellId, Vec<u8>>, MarkerError> {
    let canonical = construction.canonical_slots(region.grid()).ok_or(MarkerError::WrongGrid(region.grid()))?;
    let mut out = BTreeMap::new();
    for g in region.guideline() {
        let slots: Vec<u8> = canonical.iter().map(|&s| g.frame[s as usize]).collect();
        let complete = slots.iter().all(|&s| region.neighbor_at(g.cell, s as usize) != Adjacent::Boundary);
        if !complete {
            if g.index.unsigned_abs() <= region.halfwidth() as u64 {
                return Err(MarkerError::RegionTooSmall { index: g.index });
            }
            continue;
        }
        out.insert(g.cell, slots);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_regions_have_one_ring() {
        assert_eq!(build_region(GridKind::Pentagrid, 1, 0).unwrap().len(), 6);
        assert_eq!(build_region(GridKind::Heptagrid, 1, 0).unwrap().len(), 8);
        assert_eq!(build_region(GridKind::Dodecagrid, 1, 0).unwrap().len(), 13);
    }

    #[test]
    fn radius_limits_are_enforced() {
        assert!(matches!(build_region(GridKind::Dodecagrid, 7, 0), Err(GridError::RadiusTooLarge { .. })));
        assert!(matches!(build_region(GridKind::Pentagrid, 11, 0), Err(GridError::RadiusTooLarge { .. })));
        assert_eq!(build_region(GridKind::Heptagrid, 0, 0).unwrap_err(), GridError::ZeroRadius);
    }

    #[test]
    fn side_label_out_of_range() {
        let r = build_region(GridKind::Pentagrid, 1, 0).unwrap();
        assert!(matches!(r.neighbor(CellId::CENTRAL, 0), Err(GridError::SideOutOfRange { .. })));
        assert!(matches!(r.neighbor(CellId::CENTRAL, 6), Err(GridError::SideOutOfRange { .. })));
        assert!(r.neighbor(CellId::CENTRAL, 5).is_ok());
        let d = build_region(GridKind::Dodecagrid, 1, 0).unwrap();
        assert!(d.neighbor(CellId::CENTRAL, 0).is_ok());
        assert!(d.neighbor(CellId::CENTRAL, 12).is_err());
    }

    #[test]
    fn central_cell_numbering_follows_the_conventions() {
        let p = build_region(GridKind::Pentagrid, 1, 0).unwrap();
        let g = p.guideline_record(CellId::CENTRAL).unwrap();
        assert_eq!((g.left_slot, g.right_slot), (0, 3));
        let h = build_region(GridKind::Heptagrid, 1, 0).unwrap();
        let g = h.guideline_record(CellId::CENTRAL).unwrap();
        assert_eq!((g.left_slot, g.right_slot), (0, 4));
        let d = build_region(GridKind::Dodecagrid, 1, 0).unwrap();
        let g = d.guideline_record(CellId::CENTRAL).unwrap();
        assert_eq!((g.left_slot, g.right_slot), (1, 4));
        assert_eq!(g.frame, FacePermutation::IDENTITY.0.to_vec());
    }

    #[test]
    fn base_dodecahedron_matches_the_face_table() {
        let dirs = dodecahedron_directions();
        let dot3 = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        for f in 0..12 {
            for g in 0..12 {
                if f == g {
                    continue;
                }
                let adjacent = (dot3(dirs[f], dirs[g]) - 1.0 / sqrt(5.0)).abs() < 1e-9;
                assert_eq!(adjacent, symmetry::faces_adjacent(f as u8, g as u8), "{f} {g}");
            }
            // Clockwise seen from outside: consecutive crown faces turn
            // negatively about the outward direction.
            let row = FACE_TABLE[f];
            for i in 0..5 {
                let a = dirs[row[i] as usize];
                let b = dirs[row[(i + 1) % 5] as usize];
                let turn = dot3(cross(a, b), dirs[f]);
                assert!(turn < 0.0, "row {f} is not clockwise");
            }
        }
    }

    #[test]
    fn half_turns_keep_the_shared_slot() {
        for grid in GridKind::ALL {
            let poly = grid.polytope();
            for (k, h) in poly.half_turns.iter().enumerate() {
                let moved = lorentz::apply(h, &poly.side_centers[k]);
                assert!(lorentz::sup_distance(&moved, &poly.side_centers[k]) < 1e-12);
                let c = lorentz::center_of(h);
                assert!(lorentz::dot(&c, &poly.normals[k]) > 0.0, "{grid} slot {k}");
            }
        }
    }
}
