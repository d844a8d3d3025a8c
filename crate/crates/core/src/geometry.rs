//! Node deployments over a rectangular region.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::math::{ceil, floor, isqrt, sqrt};
use crate::rng::seeded;
use crate::{Error, Result};

/// Default side length (meters) of the square deployment region.
pub const DEFAULT_SIDE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        sqrt(self.dist2(other))
    }
}

/// Axis-aligned rectangle `[0, width] x [0, height]`, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl Region {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let r = Self { width, height };
        r.validate()?;
        Ok(r)
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0
            && self.height > 0.0
            && self.width.is_finite()
            && self.height.is_finite())
        {
            return Err(Error::InvalidRegion {
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    /// Distance from `p` to the nearest boundary edge.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        p.x.min(self.width - p.x).min(p.y).min(self.height - p.y)
    }

    pub fn center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(0.0, 0.0),
            Point::new(self.width, 0.0),
            Point::new(self.width, self.height),
            Point::new(0.0, self.height),
        ]
    }
}

impl Default for Region {
    fn default() -> Self {
        Self {
            width: DEFAULT_SIDE,
            height: DEFAULT_SIDE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DeploymentKind {
    /// Each coordinate drawn independently and uniformly over the region.
    UniformIid,
    /// One uniform node per equal-area cell.
    RandomisedLattice,
    /// Nodes at the centers of a `sqrt(n) x sqrt(n)` cell grid.
    Grid,
}

impl DeploymentKind {
    pub const ALL: [DeploymentKind; 3] = [
        DeploymentKind::UniformIid,
        DeploymentKind::RandomisedLattice,
        DeploymentKind::Grid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DeploymentKind::UniformIid => "uniform-iid",
            DeploymentKind::RandomisedLattice => "randomised-lattice",
            DeploymentKind::Grid => "grid",
        }
    }
}

impl fmt::Display for DeploymentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for DeploymentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-iid" | "uniform" | "iid" => Ok(DeploymentKind::UniformIid),
            "randomised-lattice" | "randomized-lattice" | "lattice" => {
                Ok(DeploymentKind::RandomisedLattice)
            }
            "grid" => Ok(DeploymentKind::Grid),
            _ => Err(Error::InvalidParameter {
                name: "kind",
                reason: "unknown deployment kind",
            }),
        }
    }
}

/// Node positions together with how they were generated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Deployment {
    pub kind: DeploymentKind,
    pub region: Region,
    pub seed: u64,
    pub positions: Vec<Point>,
}

/// Cell layout of a randomised lattice: `rows x cols` cells, the first `n`
/// of them (row-major) in use.
pub fn lattice_shape(n: usize) -> (usize, usize) {
    let rows = isqrt(n).max(1);
    let cols = n.div_ceil(rows);
    (rows, cols)
}

pub fn generate_deployment(
    kind: DeploymentKind,
    n: usize,
    region: Region,
    seed: u64,
) -> Result<Deployment> {
    region.validate()?;
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }
    let mut rng = seeded(seed);
    let (w, h) = (region.width, region.height);
    let positions = match kind {
        DeploymentKind::UniformIid => (0..n)
            .map(|_| {
                let x = w * rng.random::<f64>();
                let y = h * rng.random::<f64>();
                Point::new(x, y)
            })
            .collect(),
        DeploymentKind::RandomisedLattice => {
            let (rows, cols) = lattice_shape(n);
            let (cw, ch) = (w / cols as f64, h / rows as f64);
            (0..n)
                .map(|cell| {
                    let (r, c) = (cell / cols, cell % cols);
                    let x = (c as f64 + rng.random::<f64>()) * cw;
                    let y = (r as f64 + rng.random::<f64>()) * ch;
                    Point::new(x.min(w), y.min(h))
                })
                .collect()
        }
        DeploymentKind::Grid => {
            let k = isqrt(n);
            if k * k != n {
                return Err(Error::NotPerfectSquare { n });
            }
            let (sx, sy) = (w / k as f64, h / k as f64);
            (0..n)
                .map(|id| {
                    let (r, c) = (id / k, id % k);
                    Point::new((c as f64 + 0.5) * sx, (r as f64 + 0.5) * sy)
                })
                .collect()
        }
    };
    Ok(Deployment {
        kind,
        region,
        seed,
        positions,
    })
}

impl Deployment {
    /// Builds a deployment from explicit positions (used for fixtures and
    /// file input). Positions must lie inside the region.
    pub fn from_positions(
        kind: DeploymentKind,
        region: Region,
        seed: u64,
        positions: Vec<Point>,
    ) -> Result<Self> {
        let d = Self {
            kind,
            region,
            seed,
            positions,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        let n = self.positions.len();
        if n < 2 {
            return Err(Error::TooFewNodes { n });
        }
        if self.positions.iter().any(|p| !self.region.contains(*p)) {
            return Err(Error::InvalidParameter {
                name: "positions",
                reason: "position outside region",
            });
        }
        if self.kind == DeploymentKind::Grid && isqrt(n) * isqrt(n) != n {
            return Err(Error::NotPerfectSquare { n });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, i: usize) -> Result<Point> {
        self.positions.get(i).copied().ok_or(Error::NodeOutOfRange {
            id: i,
            n: self.len(),
        })
    }

    /// Euclidean distance between nodes `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.position(i)?.dist(self.position(j)?))
    }

    #[inline]
    pub(crate) fn d(&self, i: usize, j: usize) -> f64 {
        self.positions[i].dist(self.positions[j])
    }

    /// Ids of nodes at least `margin` from every boundary, ascending.
    pub fn interior_nodes(&self, margin: f64) -> Result<Vec<usize>> {
        let limit = self.region.width.min(self.region.height) / 2.0;
        if !(0.0..limit).contains(&margin) {
            return Err(Error::MarginOutOfRange { margin, limit });
        }
        Ok((0..self.len())
            .filter(|&i| self.region.boundary_distance(self.positions[i]) >= margin)
            .collect())
    }

    /// Sub-deployment over `ids` (renumbered in the given order). The
    /// result keeps the original region and kind, so a grid subset is not
    /// required to have a square node count.
    pub fn subset(&self, ids: &[usize]) -> Result<Deployment> {
        let positions = ids
            .iter()
            .map(|&i| self.position(i))
            .collect::<Result<Vec<_>>>()?;
        if positions.len() < 2 {
            return Err(Error::TooFewNodes { n: positions.len() });
        }
        Ok(Deployment {
            kind: self.kind,
            region: self.region,
            seed: self.seed,
            positions,
        })
    }

    /// Node closest to `p` (smallest id on ties).
    pub fn nearest_to(&self, p: Point) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, q) in self.positions.iter().enumerate() {
            let d = q.dist2(p);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }
}

pub fn pairwise_distance(dep: &Deployment, i: usize, j: usize) -> Result<f64> {
    dep.distance(i, j)
}

pub fn interior_nodes(dep: &Deployment, margin: f64) -> Result<Vec<usize>> {
    dep.interior_nodes(margin)
}

/// Uniform bucket grid over the region for fixed-radius neighbour queries.
#[derive(Debug)]
pub(crate) struct CellIndex {
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl CellIndex {
    pub(crate) fn new(dep: &Deployment, cell: f64) -> Self {
        let n = dep.len().max(1);
        // keep the bucket count within O(n)
        let min_cell = sqrt(dep.region.area() / (4.0 * n as f64));
        let cell = if cell.is_finite() && cell > 0.0 {
            cell.max(min_cell)
        } else {
            dep.region.width.max(dep.region.height)
        };
        let cols = (ceil(dep.region.width / cell) as usize).max(1);
        let rows = (ceil(dep.region.height / cell) as usize).max(1);
        let mut buckets = alloc::vec![Vec::new(); cols * rows];
        for (i, p) in dep.positions.iter().enumerate() {
            let (c, r) = Self::locate(cell, cols, rows, *p);
            buckets[r * cols + c].push(i as u32);
        }
        Self {
            cell,
            cols,
            rows,
            buckets,
        }
    }

    fn locate(cell: f64, cols: usize, rows: usize, p: Point) -> (usize, usize) {
        let c = (floor(p.x / cell).max(0.0) as usize).min(cols - 1);
        let r = (floor(p.y / cell).max(0.0) as usize).min(rows - 1);
        (c, r)
    }

    /// Calls `f` for every indexed node whose bucket is within `radius` of `p`
    /// (a superset of the nodes within `radius`).
    pub(crate) fn for_each_candidate(&self, p: Point, radius: f64, mut f: impl FnMut(usize)) {
        let span = ceil(radius / self.cell) as isize;
        let (c0, r0) = Self::locate(self.cell, self.cols, self.rows, p);
        let (c0, r0) = (c0 as isize, r0 as isize);
        for r in (r0 - span).max(0)..=(r0 + span).min(self.rows as isize - 1) {
            for c in (c0 - span).max(0)..=(c0 + span).min(self.cols as isize - 1) {
                for &i in &self.buckets[r as usize * self.cols + c as usize] {
                    f(i as usize);
                }
            }
        }
    }
}

/// Unordered pairs `(i, j)`, `i < j`, with `d(i, j) <= radius`, sorted.
/// Compares rooted distances so the result agrees with [`Deployment::distance`].
pub(crate) fn pairs_within(dep: &Deployment, radius: f64) -> Vec<(u32, u32)> {
    let n = dep.len();
    let mut out = Vec::new();
    if radius.is_infinite() || radius * radius * 4.0 >= dep.region.area() {
        for i in 0..n {
            for j in i + 1..n {
                if dep.positions[i].dist(dep.positions[j]) <= radius {
                    out.push((i as u32, j as u32));
                }
            }
        }
        return out;
    }
    let index = CellIndex::new(dep, radius);
    for i in 0..n {
        let p = dep.positions[i];
        index.for_each_candidate(p, radius, |j| {
            if j > i && p.dist(dep.positions[j]) <= radius {
                out.push((i as u32, j as u32));
            }
        });
    }
    out.sort_unstable();
    out
}
