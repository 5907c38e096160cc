//! Compact domains, their metrics, and dyadic box grids.
//!
//! Every grid cell is a half-open box `[lo, hi)` per axis. On non-periodic
//! axes the closing right/top boundary of the domain is folded into the last
//! cell, so the cells partition the domain exactly.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 2;

/// Largest supported grid, as a power of two.
pub const MAX_BOXES_LOG2: u32 = 24;

/// Slack added to distance comparisons so rounding never drops a box from an
/// over-approximating set.
pub(crate) const DIST_SLACK: f64 = 1e-12;

/// A point in a domain of dimension 1 or 2.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new1(x: f64) -> Self {
        Point {
            coords: [x, 0.0],
            dim: 1,
        }
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            coords: [x, y],
            dim: 2,
        }
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        match *c {
            [x] => Ok(Point::new1(x)),
            [x, y] => Ok(Point::new2(x, y)),
            _ => Err(Error::Dimension {
                expected: MAX_DIM,
                got: c.len(),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn get(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    pub(crate) fn set(&mut self, axis: usize, v: f64) {
        self.coords[axis] = v;
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

// serialized as its coordinate list
impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Point::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Interval,
    Square,
    Circle,
    Torus,
}

impl DomainKind {
    pub fn dim(self) -> usize {
        match self {
            DomainKind::Interval | DomainKind::Circle => 1,
            DomainKind::Square | DomainKind::Torus => 2,
        }
    }

    pub fn is_periodic(self) -> bool {
        matches!(self, DomainKind::Circle | DomainKind::Torus)
    }
}

/// A compact metric space: a closed interval or rectangle with the Euclidean
/// metric, or the unit circle / torus `[0,1)^d` with the wraparound metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    kind: DomainKind,
    bounds: [(f64, f64); MAX_DIM],
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "axis range [{lo}, {hi}] must be finite and nonempty"
        )))
    }
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        check_range(lo, hi)?;
        Ok(Domain {
            kind: DomainKind::Interval,
            bounds: [(lo, hi), (0.0, 0.0)],
        })
    }

    pub fn unit_interval() -> Self {
        Domain::interval(0.0, 1.0).unwrap()
    }

    pub fn square(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        check_range(x.0, x.1)?;
        check_range(y.0, y.1)?;
        Ok(Domain {
            kind: DomainKind::Square,
            bounds: [x, y],
        })
    }

    pub fn circle() -> Self {
        Domain {
            kind: DomainKind::Circle,
            bounds: [(0.0, 1.0), (0.0, 0.0)],
        }
    }

    pub fn torus() -> Self {
        Domain {
            kind: DomainKind::Torus,
            bounds: [(0.0, 1.0), (0.0, 1.0)],
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn is_periodic(&self) -> bool {
        self.kind.is_periodic()
    }

    pub fn axis(&self, axis: usize) -> (f64, f64) {
        self.bounds[axis]
    }

    pub fn span(&self, axis: usize) -> f64 {
        self.bounds[axis].1 - self.bounds[axis].0
    }

    /// Largest distance between two points of the domain.
    pub fn diameter(&self) -> f64 {
        let per_axis = |a: usize| {
            if self.is_periodic() {
                0.5
            } else {
                self.span(a)
            }
        };
        (0..self.dim())
            .map(|a| per_axis(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim(),
                got: p.dim(),
            })
        }
    }

    /// Maps a point to its canonical representative. Periodic coordinates are
    /// reduced into `[0,1)`; on non-periodic domains points outside the
    /// bounds are rejected.
    pub fn wrap(&self, p: Point) -> Result<Point> {
        self.check_dim(&p)?;
        if self.is_periodic() {
            let mut q = p;
            for a in 0..self.dim() {
                let v = p.get(a);
                if !v.is_finite() {
                    return Err(self.domain_error(&p));
                }
                q.set(a, wrap_unit(v));
            }
            Ok(q)
        } else if self.contains(&p) {
            Ok(p)
        } else {
            Err(self.domain_error(&p))
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        if self.is_periodic() {
            return p.coords().iter().all(|v| v.is_finite());
        }
        (0..self.dim()).all(|a| {
            let (lo, hi) = self.bounds[a];
            let v = p.get(a);
            v >= lo && v <= hi
        })
    }

    /// Nearest point of a non-periodic domain; wraps on periodic ones.
    pub fn clamp(&self, p: Point) -> Point {
        let mut q = p;
        for a in 0..self.dim() {
            let v = p.get(a);
            let v = if self.is_periodic() {
                wrap_unit(v)
            } else {
                let (lo, hi) = self.bounds[a];
                v.clamp(lo, hi)
            };
            q.set(a, v);
        }
        q
    }

    pub(crate) fn domain_error(&self, p: &Point) -> Error {
        Error::Domain {
            point: p.coords().to_vec(),
            domain: format!("{self}"),
        }
    }

    /// Signed per-axis displacement from `p` to `q`; on periodic axes the
    /// representative in `[-1/2, 1/2)` is used.
    pub fn displacement(&self, p: &Point, q: &Point, axis: usize) -> f64 {
        let d = q.get(axis) - p.get(axis);
        if self.is_periodic() {
            wrap_signed(d)
        } else {
            d
        }
    }

    /// Euclidean distance, with the per-axis `min(|Δ|, 1-|Δ|)` rule on
    /// periodic axes.
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        // |q - p| is exactly symmetric; the periodic fold keeps it so.
        (0..self.dim())
            .map(|a| {
                let d = (q.get(a) - p.get(a)).abs();
                let d = if self.is_periodic() {
                    let t = d.rem_euclid(1.0);
                    t.min(1.0 - t)
                } else {
                    d
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Gap between the closed intervals `[a.0, a.1]` and `[b.0, b.1]` along
    /// one axis. Intervals on periodic axes may be unwrapped (extend past
    /// `[0,1]`).
    pub(crate) fn axis_gap(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let gap = |shift: f64| (b.0 + shift - a.1).max(a.0 - (b.1 + shift)).max(0.0);
        if self.is_periodic() {
            if a.1 - a.0 >= 1.0 || b.1 - b.0 >= 1.0 {
                return 0.0;
            }
            let base = (a.0.floor() - b.0.floor()) as i64;
            (base - 2..=base + 2)
                .map(|k| gap(k as f64))
                .fold(f64::INFINITY, f64::min)
        } else {
            gap(0.0)
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Interval => {
                write!(f, "interval [{}, {}]", self.bounds[0].0, self.bounds[0].1)
            }
            DomainKind::Square => write!(
                f,
                "square [{}, {}] x [{}, {}]",
                self.bounds[0].0, self.bounds[0].1, self.bounds[1].0, self.bounds[1].1
            ),
            DomainKind::Circle => write!(f, "circle R/Z"),
            DomainKind::Torus => write!(f, "torus R^2/Z^2"),
        }
    }
}

/// Reduces `v` into `[0,1)`.
pub(crate) fn wrap_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduces `d` into `[-1/2, 1/2)`.
pub(crate) fn wrap_signed(d: f64) -> f64 {
    let r = wrap_unit(d + 0.5) - 0.5;
    // rounding can push the result just below -1/2
    r.max(-0.5)
}

/// A uniform point of the domain.
pub(crate) fn random_point<R: rand::Rng>(domain: &Domain, rng: &mut R) -> Point {
    let coord = |a: usize, rng: &mut R| {
        let (lo, hi) = domain.axis(a);
        rng.gen_range(lo..hi)
    };
    match domain.dim() {
        1 => Point::new1(coord(0, rng)),
        _ => {
            let x = coord(0, rng);
            Point::new2(x, coord(1, rng))
        }
    }
}

/// Index of a grid cell, `iy * 2^depth + ix` in two dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxId(pub u32);

impl BoxId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for BoxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered set of boxes. Iteration is always in ascending id order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxSet(BTreeSet<BoxId>);

impl BoxSet {
    pub fn new() -> Self {
        BoxSet(BTreeSet::new())
    }

    pub fn insert(&mut self, b: BoxId) -> bool {
        self.0.insert(b)
    }

    pub fn is_subset(&self, other: &BoxSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &BoxSet) -> BoxSet {
        BoxSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &BoxSet) -> BoxSet {
        BoxSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn from_indices<I: IntoIterator<Item = u32>>(it: I) -> Self {
        it.into_iter().map(BoxId).collect()
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| BoxId(i as u32))
            .collect()
    }

    pub fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for b in &self.0 {
            m[b.index()] = true;
        }
        m
    }
}

impl Deref for BoxSet {
    type Target = BTreeSet<BoxId>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl FromIterator<BoxId> for BoxSet {
    fn from_iter<T: IntoIterator<Item = BoxId>>(iter: T) -> Self {
        BoxSet(iter.into_iter().collect())
    }
}

impl IntoIterator for BoxSet {
    type Item = BoxId;
    type IntoIter = std::collections::btree_set::IntoIter<BoxId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a BoxSet {
    type Item = &'a BoxId;
    type IntoIter = std::collections::btree_set::Iter<'a, BoxId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl Extend<BoxId> for BoxSet {
    fn extend<T: IntoIterator<Item = BoxId>>(&mut self, iter: T) {
        self.0.extend(iter)
    }
}

/// Dyadic subdivision of a domain into `2^(depth * dim)` congruent boxes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    domain: Domain,
    depth: u32,
    cells: u32,
}

/// Subdivides `domain` into `2^depth` cells per axis.
pub fn subdivide(domain: Domain, depth: u32) -> Result<Grid> {
    let dim = domain.dim();
    if (depth as u64) * (dim as u64) > MAX_BOXES_LOG2 as u64 {
        return Err(Error::Size {
            depth,
            dim,
            max_log2: MAX_BOXES_LOG2,
        });
    }
    Ok(Grid {
        domain,
        depth,
        cells: 1 << depth,
    })
}

impl Grid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Cells per axis.
    pub fn cells_per_axis(&self) -> u32 {
        self.cells
    }

    pub fn box_count(&self) -> usize {
        (self.cells as usize).pow(self.dim() as u32)
    }

    pub fn boxes(&self) -> impl Iterator<Item = BoxId> {
        (0..self.box_count() as u32).map(BoxId)
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.domain.span(axis) / self.cells as f64
    }

    /// Largest per-axis box width.
    pub fn max_width(&self) -> f64 {
        (0..self.dim()).map(|a| self.width(a)).fold(0.0, f64::max)
    }

    pub fn box_diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.width(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn cell_coords(&self, b: BoxId) -> [u32; MAX_DIM] {
        let n = self.cells;
        match self.dim() {
            1 => [b.0, 0],
            _ => [b.0 % n, b.0 / n],
        }
    }

    pub fn box_from_cell(&self, cell: [u32; MAX_DIM]) -> BoxId {
        match self.dim() {
            1 => BoxId(cell[0]),
            _ => BoxId(cell[1] * self.cells + cell[0]),
        }
    }

    /// Closed per-axis bounds of a box.
    pub fn bounds(&self, b: BoxId) -> [(f64, f64); MAX_DIM] {
        let cell = self.cell_coords(b);
        let mut out = [(0.0, 0.0); MAX_DIM];
        for (a, slot) in out.iter_mut().enumerate().take(self.dim()) {
            let (lo, _) = self.domain.axis(a);
            let w = self.width(a);
            *slot = (lo + cell[a] as f64 * w, lo + (cell[a] + 1) as f64 * w);
        }
        out
    }

    pub fn center(&self, b: BoxId) -> Point {
        let bounds = self.bounds(b);
        let mid = |a: usize| 0.5 * (bounds[a].0 + bounds[a].1);
        match self.dim() {
            1 => Point::new1(mid(0)),
            _ => Point::new2(mid(0), mid(1)),
        }
    }

    fn axis_cell(&self, axis: usize, v: f64) -> u32 {
        let (lo, _) = self.domain.axis(axis);
        let idx = ((v - lo) / self.width(axis)).floor();
        (idx.max(0.0) as u32).min(self.cells - 1)
    }

    /// The box containing `p` (after wrapping on periodic domains).
    pub fn box_of(&self, p: &Point) -> Result<BoxId> {
        let q = self.domain.wrap(*p)?;
        let mut cell = [0u32; MAX_DIM];
        for (a, c) in cell.iter_mut().enumerate().take(self.dim()) {
            *c = self.axis_cell(a, q.get(a));
        }
        Ok(self.box_from_cell(cell))
    }

    /// The box one level up that contains `b`.
    pub fn parent(&self, b: BoxId) -> Option<BoxId> {
        if self.depth == 0 {
            return None;
        }
        let cell = self.cell_coords(b);
        let n = self.cells / 2;
        Some(match self.dim() {
            1 => BoxId(cell[0] / 2),
            _ => BoxId((cell[1] / 2) * n + cell[0] / 2),
        })
    }

    /// Distance from a point to a box (zero inside).
    pub fn point_box_distance(&self, p: &Point, b: BoxId) -> f64 {
        let bounds = self.bounds(b);
        (0..self.dim())
            .map(|a| {
                self.domain
                    .axis_gap((p.get(a), p.get(a)), bounds[a])
                    .powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Cell indices along one axis within `reach` cells of `center`,
    /// wrapped on periodic axes and clipped otherwise.
    fn axis_window(&self, center: u32, reach: u32) -> Vec<u32> {
        let n = self.cells as i64;
        let r = reach as i64;
        if self.domain.is_periodic() {
            if 2 * r + 1 >= n {
                return (0..self.cells).collect();
            }
            (-r..=r)
                .map(|k| (center as i64 + k).rem_euclid(n) as u32)
                .collect()
        } else {
            let lo = (center as i64 - r).max(0);
            let hi = (center as i64 + r).min(n - 1);
            (lo..=hi).map(|i| i as u32).collect()
        }
    }

    /// Boxes whose lattice (Chebyshev) distance to `b` is at most `reach`.
    pub(crate) fn cell_window(&self, b: BoxId, reach: u32) -> Vec<BoxId> {
        let cell = self.cell_coords(b);
        let xs = self.axis_window(cell[0], reach);
        match self.dim() {
            1 => xs.into_iter().map(BoxId).collect(),
            _ => {
                let ys = self.axis_window(cell[1], reach);
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for &y in &ys {
                    for &x in &xs {
                        out.push(self.box_from_cell([x, y]));
                    }
                }
                out
            }
        }
    }

    /// Dilates a set by `k` cells in the lattice sup-norm.
    pub fn dilate(&self, s: &BoxSet, k: u32) -> BoxSet {
        if k == 0 {
            return s.clone();
        }
        let mut mask = vec![false; self.box_count()];
        for &b in s {
            for c in self.cell_window(b, k) {
                mask[c.index()] = true;
            }
        }
        BoxSet::from_mask(&mask)
    }
}

/// Euclidean (or wraparound) distance between two points of `domain`.
pub fn metric_distance(p: &Point, q: &Point, domain: &Domain) -> f64 {
    domain.distance(p, q)
}

/// Boxes whose center lies within `r + diameter/2` of some box of `s`.
///
/// This is a superset of every box meeting the open `r`-neighbourhood of the
/// union of `s`. With `r = 0` it adds the boxes touching `s`.
pub fn neighborhood_boxes(s: &BoxSet, r: f64, grid: &Grid) -> BoxSet {
    let r = r.max(0.0);
    let threshold = r + 0.5 * grid.box_diameter() + DIST_SLACK;
    let reach = (threshold / grid.max_width()).ceil() as u32 + 1;
    let mut mask = vec![false; grid.box_count()];
    for &b in s {
        mask[b.index()] = true;
        for c in grid.cell_window(b, reach) {
            if !mask[c.index()] && grid.point_box_distance(&grid.center(c), b) <= threshold {
                mask[c.index()] = true;
            }
        }
    }
    BoxSet::from_mask(&mask)
}
