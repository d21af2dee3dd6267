//! Lattice geometry: boxes, annuli and half-annuli on two lattices.
//!
//! Cells carry an integer `(row, col)` position.
//!
//! * Triangular site lattice (equivalently, faces of the hexagonal lattice):
//!   `row = r`, `col = q` in axial coordinates; the Euclidean position is
//!   `x = q + r/2`, `y = r * sqrt(3)/2`, so every membership test reduces to
//!   integer inequalities on `2x = 2q + r` and `3 r^2`.
//! * Square bond lattice: a cell is an edge of Z^2, `row = y`,
//!   `col = 2x + dir` with `dir = 0` for the edge `(x,y)-(x+1,y)` and
//!   `dir = 1` for `(x,y)-(x,y+1)`. Black clusters use primal adjacency (shared
//!   endpoint), white clusters dual adjacency (edges on a common face).
//!
//! Membership conventions (fixed, deterministic):
//!
//! * triangular `Box(n)`: sites whose centre lies in `[0,n) x [0,n)`;
//! * triangular `Annulus(m,n)`: centre in `[-n,n]^2 \ (-m,m)^2`;
//! * bond `Box(n)`: edges with both endpoints in `[0,n]^2`;
//! * bond `Annulus(m,n)`: edges with both endpoints at sup-norm in `[m,n]`;
//! * half-annuli additionally require `y >= 0`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Upper bound on the number of cells in a single region.
pub const MAX_CELLS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    TriangularSite,
    SquareBond,
}

impl LatticeKind {
    pub fn tag(self) -> &'static str {
        match self {
            LatticeKind::TriangularSite => "tri",
            LatticeKind::SquareBond => "z2",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "tri" => Ok(LatticeKind::TriangularSite),
            "z2" => Ok(LatticeKind::SquareBond),
            other => Err(param(format!("unknown lattice `{other}` (expected tri or z2)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Box { n: u32 },
    Annulus { m: u32, n: u32 },
    HalfAnnulus { m: u32, n: u32 },
}

impl Shape {
    pub fn validate(self) -> Result<Self> {
        match self {
            Shape::Box { n } if n < 1 => Err(param("box size must be >= 1")),
            Shape::Annulus { m, n } | Shape::HalfAnnulus { m, n } if m < 1 || m > n => {
                Err(param(format!("annulus radii must satisfy 1 <= m <= n, got m={m}, n={n}")))
            }
            s => Ok(s),
        }
    }

    pub fn outer(self) -> u32 {
        match self {
            Shape::Box { n } | Shape::Annulus { n, .. } | Shape::HalfAnnulus { n, .. } => n,
        }
    }

    pub fn inner(self) -> Option<u32> {
        match self {
            Shape::Box { .. } => None,
            Shape::Annulus { m, .. } | Shape::HalfAnnulus { m, .. } => Some(m),
        }
    }

    pub fn is_annular(self) -> bool {
        !matches!(self, Shape::Box { .. })
    }

    pub fn is_half(self) -> bool {
        matches!(self, Shape::HalfAnnulus { .. })
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Box { .. } => "box",
            Shape::Annulus { .. } => "annulus",
            Shape::HalfAnnulus { .. } => "half_annulus",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Box { n } => write!(f, "Box({n})"),
            Shape::Annulus { m, n } => write!(f, "Annulus({m},{n})"),
            Shape::HalfAnnulus { m, n } => write!(f, "HalfAnnulus({m},{n})"),
        }
    }
}

/// Dense index into a region's cell list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct CellIndex(pub u32);

impl CellIndex {
    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    White = 0,
    Black = 1,
}

impl Color {
    #[inline]
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Color::Black
        } else {
            Color::White
        }
    }

    #[inline]
    pub fn bit(self) -> bool {
        matches!(self, Color::Black)
    }
}

/// Integer lattice position of a cell (see module docs for the meaning per lattice).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: i32,
    pub col: i32,
}

/// Compressed adjacency lists.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    offsets: Vec<u32>,
    targets: Vec<CellIndex>,
}

impl Csr {
    fn from_lists(lists: Vec<Vec<CellIndex>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            targets.extend_from_slice(&l);
            offsets.push(targets.len() as u32);
        }
        Csr { offsets, targets }
    }

    #[inline]
    pub fn of(&self, i: usize) -> &[CellIndex] {
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

pub(crate) mod flags {
    pub const INNER: u8 = 1;
    pub const OUTER: u8 = 2;
    pub const LEFT: u8 = 4;
    pub const RIGHT: u8 = 8;
    pub const BOTTOM: u8 = 16;
    pub const TOP: u8 = 32;
    /// Inner/outer boundary for white (dual) arms; equal to `INNER`/`OUTER` on the triangular lattice.
    pub const INNER_W: u8 = 64;
    pub const OUTER_W: u8 = 128;

    /// Boundary flags relevant to a cluster of the given colour.
    #[inline]
    pub fn inner_for(black: bool) -> u8 {
        if black {
            INNER
        } else {
            INNER_W
        }
    }

    #[inline]
    pub fn outer_for(black: bool) -> u8 {
        if black {
            OUTER
        } else {
            OUTER_W
        }
    }
}

/// One position along the inner boundary: the cells through which an arm can
/// attach there. On the bond lattice a ring vertex admits open arms only (all
/// open edges at the vertex), a ring edge admits either colour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub cells: Vec<CellIndex>,
    pub black_only: bool,
}

/// An immutable finite set of cells with adjacency and boundary metadata.
#[derive(Clone, Debug)]
pub struct Region {
    kind: LatticeKind,
    shape: Shape,
    cells: Vec<Cell>,
    lookup: Lookup,
    black: Csr,
    white: Option<Csr>,
    flags: Vec<u8>,
    inner_boundary: Vec<CellIndex>,
    inner_slots: Vec<Slot>,
    outer_boundary: Vec<CellIndex>,
    axis_boundary: Vec<CellIndex>,
    left: Vec<CellIndex>,
    right: Vec<CellIndex>,
    bottom: Vec<CellIndex>,
    top: Vec<CellIndex>,
}

#[derive(Clone, Debug)]
struct Lookup {
    row0: i32,
    col0: i32,
    width: usize,
    height: usize,
    slots: Vec<u32>,
}

impl Lookup {
    fn new(cells: &[Cell]) -> Self {
        let (mut r0, mut r1, mut c0, mut c1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
        for c in cells {
            r0 = r0.min(c.row);
            r1 = r1.max(c.row);
            c0 = c0.min(c.col);
            c1 = c1.max(c.col);
        }
        if cells.is_empty() {
            return Lookup { row0: 0, col0: 0, width: 0, height: 0, slots: Vec::new() };
        }
        let width = (c1 - c0 + 1) as usize;
        let height = (r1 - r0 + 1) as usize;
        let mut slots = vec![u32::MAX; width * height];
        for (i, c) in cells.iter().enumerate() {
            slots[(c.row - r0) as usize * width + (c.col - c0) as usize] = i as u32;
        }
        Lookup { row0: r0, col0: c0, width, height, slots }
    }

    #[inline]
    fn get(&self, cell: Cell) -> Option<CellIndex> {
        let r = cell.row - self.row0;
        let c = cell.col - self.col0;
        if r < 0 || c < 0 || r as usize >= self.height || c as usize >= self.width {
            return None;
        }
        let v = self.slots[r as usize * self.width + c as usize];
        (v != u32::MAX).then_some(CellIndex(v))
    }
}

const TRI_DIRS: [(i32, i32); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

// Triangular geometry helpers; `x2` is twice the abscissa.
#[inline]
fn tri_x2(c: Cell) -> i64 {
    2 * c.col as i64 + c.row as i64
}

#[inline]
fn tri_in_box(c: Cell, n: u32) -> bool {
    let (x2, r, n) = (tri_x2(c), c.row as i64, n as i64);
    r >= 0 && 3 * r * r < 4 * n * n && x2 >= 0 && x2 < 2 * n
}

#[inline]
fn tri_in_square(c: Cell, n: u32) -> bool {
    let (x2, r, n) = (tri_x2(c), c.row as i64, n as i64);
    3 * r * r <= 4 * n * n && x2.abs() <= 2 * n
}

#[inline]
fn tri_in_hole(c: Cell, m: u32) -> bool {
    let (x2, r, m) = (tri_x2(c), c.row as i64, m as i64);
    3 * r * r < 4 * m * m && x2.abs() < 2 * m
}

// Bond geometry helpers.
#[inline]
fn bond_ends(c: Cell) -> [(i64, i64); 2] {
    let x = c.col.div_euclid(2) as i64;
    let y = c.row as i64;
    if c.col.rem_euclid(2) == 0 {
        [(x, y), (x + 1, y)]
    } else {
        [(x, y), (x, y + 1)]
    }
}

#[inline]
fn bond_cell(x: i64, y: i64, vertical: bool) -> Cell {
    Cell { row: y as i32, col: (2 * x + vertical as i64) as i32 }
}

#[inline]
fn sup(v: (i64, i64)) -> i64 {
    v.0.abs().max(v.1.abs())
}

impl Region {
    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: CellIndex) -> Cell {
        self.cells[c.get()]
    }

    pub fn index_of(&self, cell: Cell) -> Option<CellIndex> {
        self.lookup.get(cell)
    }

    pub fn check(&self, c: CellIndex) -> Result<()> {
        if c.get() < self.cells.len() {
            Ok(())
        } else {
            Err(param(format!("cell index {} out of range for {} cells", c.0, self.cells.len())))
        }
    }

    /// Black-connectivity neighbours of `c` (the only adjacency on the triangular lattice).
    pub fn neighbors(&self, c: CellIndex) -> Result<&[CellIndex]> {
        self.neighbors_of(c, Color::Black)
    }

    /// Neighbours of `c` for clusters of the given color: primal adjacency for black,
    /// dual adjacency for white on the bond lattice.
    pub fn neighbors_of(&self, c: CellIndex, color: Color) -> Result<&[CellIndex]> {
        self.check(c)?;
        Ok(self.adjacency(color).of(c.get()))
    }

    #[inline]
    pub fn adjacency(&self, color: Color) -> &Csr {
        match (color, &self.white) {
            (Color::White, Some(w)) => w,
            _ => &self.black,
        }
    }

    pub(crate) fn flags(&self) -> &[u8] {
        &self.flags
    }

    /// Cells from which a black arm can start, counter-clockwise from angle 0.
    pub fn inner_boundary(&self) -> &[CellIndex] {
        &self.inner_boundary
    }

    /// Attachment positions along the inner boundary, counter-clockwise from
    /// angle 0 (right to left for half-annuli).
    pub fn inner_slots(&self) -> &[Slot] {
        &self.inner_slots
    }

    pub fn outer_boundary(&self) -> &[CellIndex] {
        &self.outer_boundary
    }

    /// Cells on the horizontal axis of a half-annulus, right to left.
    pub fn axis_boundary(&self) -> &[CellIndex] {
        &self.axis_boundary
    }

    pub fn left(&self) -> &[CellIndex] {
        &self.left
    }

    pub fn right(&self) -> &[CellIndex] {
        &self.right
    }

    pub fn top(&self) -> &[CellIndex] {
        &self.top
    }

    pub fn bottom(&self) -> &[CellIndex] {
        &self.bottom
    }

    pub fn is_inner(&self, c: CellIndex) -> bool {
        self.flags[c.get()] & flags::INNER != 0
    }

    pub fn is_outer(&self, c: CellIndex) -> bool {
        self.flags[c.get()] & flags::OUTER != 0
    }

    /// Stable fingerprint of `(kind, shape)`.
    pub fn id(&self) -> u64 {
        let (tag, a, b) = match self.shape {
            Shape::Box { n } => (1u64, 0u64, n as u64),
            Shape::Annulus { m, n } => (2, m as u64, n as u64),
            Shape::HalfAnnulus { m, n } => (3, m as u64, n as u64),
        };
        let k = match self.kind {
            LatticeKind::TriangularSite => 1u64,
            LatticeKind::SquareBond => 2,
        };
        crate::rng::mix64(k ^ crate::rng::mix64(tag ^ crate::rng::mix64(a ^ crate::rng::mix64(b))))
    }

    /// Angular key: a vector whose direction equals the cell's direction from the origin
    /// up to a positive rescaling of each axis.
    fn angle_vec(&self, c: Cell) -> (i64, i64) {
        match self.kind {
            LatticeKind::TriangularSite => (tri_x2(c), c.row as i64),
            LatticeKind::SquareBond => {
                let [a, b] = bond_ends(c);
                (a.0 + b.0, a.1 + b.1)
            }
        }
    }

    /// For every cell of `self`, its index in `other` (matched by position).
    pub fn map_into(&self, other: &Region) -> Result<Vec<CellIndex>> {
        if self.kind != other.kind {
            return Err(Error::RegionKind { expected: self.kind.tag(), got: other.kind.tag().into() });
        }
        self.cells
            .iter()
            .map(|&c| {
                other.index_of(c).ok_or_else(|| param(format!("{} is not contained in {}", self.shape, other.shape)))
            })
            .collect()
    }

    /// True when consecutive inner-boundary cells are adjacent (cyclically for full annuli).
    pub fn inner_boundary_is_cycle(&self) -> bool {
        let ib = &self.inner_boundary;
        if ib.is_empty() {
            return false;
        }
        let adjacent = |a: CellIndex, b: CellIndex| {
            self.black.of(a.get()).contains(&b) || self.adjacency(Color::White).of(a.get()).contains(&b)
        };
        let linear_ok = ib.windows(2).all(|w| adjacent(w[0], w[1]));
        let mut seen = ib.clone();
        seen.sort_unstable();
        seen.dedup();
        let distinct = seen.len() == ib.len();
        if self.shape.is_half() {
            linear_ok && distinct
        } else {
            linear_ok && distinct && (ib.len() < 3 || adjacent(ib[ib.len() - 1], ib[0]))
        }
    }
}

/// Build a region; cell order is row-major `(row, col)` and therefore deterministic.
pub fn build_region(kind: LatticeKind, shape: Shape) -> Result<Region> {
    let shape = shape.validate()?;
    let n = shape.outer() as i64;
    // Rough cell-count bound before allocating.
    let estimate = match shape {
        Shape::Box { .. } => 2 * (n + 1) * (n + 1),
        _ => 10 * (n + 1) * (n + 1),
    } as usize;
    if estimate > 4 * MAX_CELLS {
        return Err(Error::ResourceLimit { cells: estimate, limit: MAX_CELLS });
    }
    let cells = match kind {
        LatticeKind::TriangularSite => tri_cells(shape),
        LatticeKind::SquareBond => bond_cells(shape),
    };
    if cells.len() > MAX_CELLS {
        return Err(Error::ResourceLimit { cells: cells.len(), limit: MAX_CELLS });
    }
    let lookup = Lookup::new(&cells);
    let mut region = Region {
        kind,
        shape,
        cells,
        lookup,
        black: Csr::default(),
        white: None,
        flags: Vec::new(),
        inner_boundary: Vec::new(),
        inner_slots: Vec::new(),
        outer_boundary: Vec::new(),
        axis_boundary: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
        bottom: Vec::new(),
        top: Vec::new(),
    };
    match kind {
        LatticeKind::TriangularSite => tri_adjacency(&mut region),
        LatticeKind::SquareBond => bond_adjacency(&mut region),
    }
    region.flags = vec![0; region.cells.len()];
    match kind {
        LatticeKind::TriangularSite => tri_boundaries(&mut region),
        LatticeKind::SquareBond => bond_boundaries(&mut region),
    }
    let collect = |r: &Region, f: u8| -> Vec<CellIndex> {
        (0..r.cells.len() as u32).filter(|&i| r.flags[i as usize] & f != 0).map(CellIndex).collect()
    };
    region.outer_boundary = collect(&region, flags::OUTER);
    region.left = collect(&region, flags::LEFT);
    region.right = collect(&region, flags::RIGHT);
    region.bottom = collect(&region, flags::BOTTOM);
    region.top = collect(&region, flags::TOP);
    if shape.is_annular() {
        let mut inner = collect(&region, flags::INNER);
        sort_by_angle(&region, &mut inner);
        region.inner_slots = match kind {
            LatticeKind::TriangularSite => inner.iter().map(|&c| Slot { cells: vec![c], black_only: false }).collect(),
            LatticeKind::SquareBond => bond_ring_slots(&region),
        };
        region.inner_boundary = inner;
    }
    Ok(region)
}

fn sort_by_angle(region: &Region, cells: &mut [CellIndex]) {
    let key = |c: CellIndex| {
        let (x, y) = region.angle_vec(region.cell(c));
        let half = if y > 0 || (y == 0 && x > 0) { 0 } else { 1 };
        (half, x, y)
    };
    cells.sort_by(|&a, &b| {
        let (ha, xa, ya) = key(a);
        let (hb, xb, yb) = key(b);
        ha.cmp(&hb)
            .then_with(|| {
                let cross = xa * yb - xb * ya;
                0.cmp(&cross)
            })
            .then_with(|| a.cmp(&b))
    });
}

fn tri_cells(shape: Shape) -> Vec<Cell> {
    let n = shape.outer() as i32;
    let rmax = 2 * n + 1;
    let mut out = Vec::new();
    for r in -rmax..=rmax {
        let qlo = (-2 * n - r) / 2 - 2;
        let qhi = (2 * n - r) / 2 + 2;
        for q in qlo..=qhi {
            let c = Cell { row: r, col: q };
            let inside = match shape {
                Shape::Box { n } => tri_in_box(c, n),
                Shape::Annulus { m, n } => tri_in_square(c, n) && !tri_in_hole(c, m),
                Shape::HalfAnnulus { m, n } => r >= 0 && tri_in_square(c, n) && !tri_in_hole(c, m),
            };
            if inside {
                out.push(c);
            }
        }
    }
    out
}

fn tri_adjacency(region: &mut Region) {
    let lists = region
        .cells
        .iter()
        .map(|&c| {
            TRI_DIRS
                .iter()
                .filter_map(|&(dq, dr)| region.lookup.get(Cell { row: c.row + dr, col: c.col + dq }))
                .collect()
        })
        .collect();
    region.black = Csr::from_lists(lists);
}

fn tri_boundaries(region: &mut Region) {
    let shape = region.shape;
    let cells = region.cells.clone();
    match shape {
        Shape::Box { .. } => {
            let max_row = cells.iter().map(|c| c.row).max().unwrap_or(0);
            for (i, &c) in cells.iter().enumerate() {
                let f = &mut region.flags[i];
                let left = Cell { row: c.row, col: c.col - 1 };
                let right = Cell { row: c.row, col: c.col + 1 };
                if region.lookup.get(left).is_none() {
                    *f |= flags::LEFT;
                }
                if region.lookup.get(right).is_none() {
                    *f |= flags::RIGHT;
                }
                if c.row == 0 {
                    *f |= flags::BOTTOM;
                }
                if c.row == max_row {
                    *f |= flags::TOP;
                }
            }
        }
        Shape::Annulus { m, n } | Shape::HalfAnnulus { m, n } => {
            for (i, &c) in cells.iter().enumerate() {
                for &(dq, dr) in &TRI_DIRS {
                    let nb = Cell { row: c.row + dr, col: c.col + dq };
                    if tri_in_hole(nb, m) {
                        region.flags[i] |= flags::INNER | flags::INNER_W;
                    } else if !tri_in_square(nb, n) {
                        region.flags[i] |= flags::OUTER | flags::OUTER_W;
                    }
                }
            }
            if shape.is_half() {
                let mut axis: Vec<CellIndex> =
                    (0..cells.len() as u32).filter(|&i| cells[i as usize].row == 0).map(CellIndex).collect();
                axis.sort_by_key(|&c| std::cmp::Reverse(tri_x2(cells[c.get()])));
                region.axis_boundary = axis;
            }
        }
    }
}

fn bond_vertex_in(shape: Shape, v: (i64, i64)) -> bool {
    match shape {
        Shape::Box { n } => v.0 >= 0 && v.1 >= 0 && v.0 <= n as i64 && v.1 <= n as i64,
        Shape::Annulus { m, n } => (m as i64..=n as i64).contains(&sup(v)),
        Shape::HalfAnnulus { m, n } => v.1 >= 0 && (m as i64..=n as i64).contains(&sup(v)),
    }
}

fn bond_cells(shape: Shape) -> Vec<Cell> {
    let n = shape.outer() as i64;
    let mut out = Vec::new();
    for y in -n..=n {
        for x in -n..=n {
            for vertical in [false, true] {
                let c = bond_cell(x, y, vertical);
                let [a, b] = bond_ends(c);
                if bond_vertex_in(shape, a) && bond_vertex_in(shape, b) {
                    out.push(c);
                }
            }
        }
    }
    out.sort();
    out
}

fn bond_adjacency(region: &mut Region) {
    let shape = region.shape;
    let mut black: Vec<Vec<CellIndex>> = vec![Vec::new(); region.cells.len()];
    let mut white: Vec<Vec<CellIndex>> = vec![Vec::new(); region.cells.len()];
    let n = shape.outer() as i64;
    let get = |x: i64, y: i64, v: bool| region.lookup.get(bond_cell(x, y, v));
    for y in -n - 1..=n + 1 {
        for x in -n - 1..=n + 1 {
            // Edges incident to vertex (x, y).
            let incident: Vec<CellIndex> =
                [get(x, y, false), get(x - 1, y, false), get(x, y, true), get(x, y - 1, true)]
                    .into_iter()
                    .flatten()
                    .collect();
            for &a in &incident {
                for &b in &incident {
                    if a != b {
                        black[a.get()].push(b);
                    }
                }
            }
            // Face with lower-left corner (x, y).
            let corners = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)];
            if corners.iter().all(|&v| bond_vertex_in(shape, v)) {
                let sides: Vec<CellIndex> =
                    [get(x, y, false), get(x, y + 1, false), get(x, y, true), get(x + 1, y, true)]
                        .into_iter()
                        .flatten()
                        .collect();
                for &a in &sides {
                    for &b in &sides {
                        if a != b {
                            white[a.get()].push(b);
                        }
                    }
                }
            }
        }
    }
    region.black = Csr::from_lists(black);
    region.white = Some(Csr::from_lists(white));
}

fn bond_boundaries(region: &mut Region) {
    let shape = region.shape;
    let cells = region.cells.clone();
    for (i, &c) in cells.iter().enumerate() {
        let ends = bond_ends(c);
        let f = &mut region.flags[i];
        match shape {
            Shape::Box { n } => {
                let n = n as i64;
                for v in ends {
                    if v.0 == 0 {
                        *f |= flags::LEFT;
                    }
                    if v.0 == n {
                        *f |= flags::RIGHT;
                    }
                    if v.1 == 0 {
                        *f |= flags::BOTTOM;
                    }
                    if v.1 == n {
                        *f |= flags::TOP;
                    }
                }
            }
            Shape::Annulus { m, n } | Shape::HalfAnnulus { m, n } => {
                // open arms attach at ring vertices, dual arms cross ring edges
                for v in ends {
                    if sup(v) == m as i64 {
                        *f |= flags::INNER;
                    }
                    if sup(v) == n as i64 {
                        *f |= flags::OUTER;
                    }
                }
                if ends.iter().all(|&v| sup(v) == m as i64) {
                    *f |= flags::INNER_W;
                }
                if ends.iter().all(|&v| sup(v) == n as i64) {
                    *f |= flags::OUTER_W;
                }
            }
        }
    }
    if shape.is_half() {
        let mut axis: Vec<CellIndex> = (0..cells.len() as u32)
            .filter(|&i| bond_ends(cells[i as usize]).iter().any(|v| v.1 == 0))
            .map(CellIndex)
            .collect();
        axis.sort_by(|&a, &b| {
            let [a0, a1] = bond_ends(cells[a.get()]);
            let [b0, b1] = bond_ends(cells[b.get()]);
            (b0.0 + b1.0).cmp(&(a0.0 + a1.0)).then(a.cmp(&b))
        });
        region.axis_boundary = axis;
    }
}

/// Vertices of the sup-norm ring of radius `m`, counter-clockwise from `(m, 0)`;
/// the half-plane ring stops at `(-m, 0)`.
fn ring_vertices(m: i64, half: bool) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for y in 0..m {
        v.push((m, y));
    }
    for x in (-m + 1..=m).rev() {
        v.push((x, m));
    }
    if half {
        for y in (0..=m).rev() {
            v.push((-m, y));
        }
        return v;
    }
    for y in (-m + 1..=m).rev() {
        v.push((-m, y));
    }
    for x in -m..m {
        v.push((x, -m));
    }
    for y in -m..0 {
        v.push((m, y));
    }
    v
}

fn bond_edge(a: (i64, i64), b: (i64, i64)) -> Cell {
    let (lo, hi) = if (a.1, a.0) <= (b.1, b.0) { (a, b) } else { (b, a) };
    bond_cell(lo.0, lo.1, hi.0 == lo.0)
}

fn bond_ring_slots(region: &Region) -> Vec<Slot> {
    let m = region.shape.inner().unwrap_or(1) as i64;
    let half = region.shape.is_half();
    let ring = ring_vertices(m, half);
    let mut slots = Vec::new();
    for (k, &v) in ring.iter().enumerate() {
        let incident: Vec<CellIndex> = [
            bond_cell(v.0, v.1, false),
            bond_cell(v.0 - 1, v.1, false),
            bond_cell(v.0, v.1, true),
            bond_cell(v.0, v.1 - 1, true),
        ]
        .into_iter()
        .filter_map(|c| region.lookup.get(c))
        .collect();
        slots.push(Slot { cells: incident, black_only: true });
        let next = if k + 1 < ring.len() {
            ring[k + 1]
        } else if half {
            break;
        } else {
            ring[0]
        };
        if let Some(e) = region.lookup.get(bond_edge(v, next)) {
            slots.push(Slot { cells: vec![e], black_only: false });
        }
    }
    slots
}

/// Compare two cells by angle around the origin (used by tests and arm ordering).
pub fn angular_cmp(region: &Region, a: CellIndex, b: CellIndex) -> Ordering {
    let mut v = [a, b];
    sort_by_angle(region, &mut v);
    if a == b {
        Ordering::Equal
    } else if v[0] == a {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}
