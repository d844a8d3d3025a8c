//! Localization from hop-count ratios to beacons.
//!
//! Hop distance is roughly proportional to Euclidean distance, so the ratio
//! `r = h(S, B_i) / h(S, B_j)` places `S` on the Apollonius curve
//! `|S - B_i| = r |S - B_j|`, i.e.
//!
//! ```text
//! (1 - r^2)(x^2 + y^2) - 2(x_i - r^2 x_j) x - 2(y_i - r^2 y_j) y
//!     + (x_i^2 + y_i^2) - r^2 (x_j^2 + y_j^2) = 0
//! ```
//!
//! The estimate minimises the squared residuals of all beacon pairs.

use alloc::vec::Vec;

use crate::geometry::{Deployment, Point};
use crate::graphs::{hop_distances, EdgeGraph, HopTable};
use crate::math::sqrt;
use crate::{Error, Result};

/// Beacons: nodes with known positions.
#[derive(Debug, Clone, PartialEq)]
pub struct BeaconSet {
    ids: Vec<usize>,
    positions: Vec<Point>,
}

impl BeaconSet {
    pub const MIN_BEACONS: usize = 4;

    pub fn new(ids: Vec<usize>, positions: Vec<Point>) -> Result<Self> {
        if ids.len() != positions.len() {
            return Err(Error::InvalidParameter {
                name: "beacons",
                reason: "ids and positions differ in length",
            });
        }
        if ids.len() < Self::MIN_BEACONS {
            return Err(Error::TooFewBeacons {
                required: Self::MIN_BEACONS,
                got: ids.len(),
            });
        }
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                if ids[a] == ids[b] || positions[a] == positions[b] {
                    return Err(Error::CoincidentBeacons);
                }
            }
        }
        Ok(Self { ids, positions })
    }

    /// Beacons at the given nodes of `dep`.
    pub fn from_nodes(dep: &Deployment, ids: Vec<usize>) -> Result<Self> {
        let positions = ids
            .iter()
            .map(|&i| dep.position(i))
            .collect::<Result<_>>()?;
        Self::new(ids, positions)
    }

    /// The distinct nodes nearest to the four region corners.
    pub fn corners(dep: &Deployment) -> Result<Self> {
        let mut ids: Vec<usize> = Vec::with_capacity(4);
        for c in dep.region.corners() {
            let pick = (0..dep.len())
                .filter(|i| !ids.contains(i))
                .min_by(|&a, &b| {
                    dep.positions[a]
                        .dist2(c)
                        .total_cmp(&dep.positions[b].dist2(c))
                });
            match pick {
                Some(i) => ids.push(i),
                None => {
                    return Err(Error::TooFewBeacons {
                        required: Self::MIN_BEACONS,
                        got: ids.len(),
                    })
                }
            }
        }
        Self::from_nodes(dep, ids)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn contains(&self, node: usize) -> bool {
        self.ids.contains(&node)
    }

    /// Beacon index pairs `(a, b)`, `a < b`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.len();
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
    }

    fn centroid(&self) -> Point {
        let k = self.len() as f64;
        let (sx, sy) = self
            .positions
            .iter()
            .fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        Point::new(sx / k, sy / k)
    }
}

/// `h(s, bi) / h(s, bj)` from a hop table whose sources include both
/// beacons.
pub fn hop_ratio(h: &HopTable, s: usize, bi: usize, bj: usize) -> Result<f64> {
    let hop = |b: usize| -> Result<u32> {
        match h.get(b, s) {
            Some(Some(v)) => Ok(v),
            Some(None) => Err(Error::Unreachable { from: s, to: b }),
            None => Err(Error::InvalidParameter {
                name: "hops",
                reason: "beacon is not a source of the table",
            }),
        }
    };
    let (hi, hj) = (hop(bi)?, hop(bj)?);
    if hj == 0 {
        return Err(Error::BeaconTarget { node: s });
    }
    Ok(hi as f64 / hj as f64)
}

/// `A (x^2 + y^2) + bx x + by y + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApolloniusCurve {
    pub a: f64,
    pub bx: f64,
    pub by: f64,
    pub c: f64,
}

impl ApolloniusCurve {
    /// Degenerates to the perpendicular bisector when the ratio is 1.
    pub fn is_line(&self) -> bool {
        self.a == 0.0
    }

    pub fn residual(&self, p: Point) -> f64 {
        self.a * (p.x * p.x + p.y * p.y) + self.bx * p.x + self.by * p.y + self.c
    }

    /// Scaled so the leading coefficient is 1 (`A` for a circle, the
    /// larger of `|bx|`, `|by|` for a line, positive).
    pub fn normalized(&self) -> Self {
        let k = if self.is_line() {
            if self.bx.abs() >= self.by.abs() {
                self.bx
            } else {
                self.by
            }
        } else {
            self.a
        };
        Self {
            a: self.a / k,
            bx: self.bx / k,
            by: self.by / k,
            c: self.c / k,
        }
    }

    /// Center and radius of a proper circle.
    pub fn center_radius(&self) -> Option<(Point, f64)> {
        if self.is_line() {
            return None;
        }
        let n = self.normalized();
        let center = Point::new(-n.bx / 2.0, -n.by / 2.0);
        let r2 = center.x * center.x + center.y * center.y - n.c;
        (r2 >= 0.0).then(|| (center, sqrt(r2)))
    }
}

/// Locus of points whose distances to `bi` and `bj` are in ratio `r`.
pub fn apollonius_curve(bi: Point, bj: Point, r: f64) -> Result<ApolloniusCurve> {
    if bi == bj {
        return Err(Error::CoincidentBeacons);
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: "must be positive and finite",
        });
    }
    let r2 = r * r;
    Ok(ApolloniusCurve {
        a: 1.0 - r2,
        bx: -2.0 * (bi.x - r2 * bj.x),
        by: -2.0 * (bi.y - r2 * bj.y),
        c: (bi.x * bi.x + bi.y * bi.y) - r2 * (bj.x * bj.x + bj.y * bj.y),
    })
}

/// Ratio `r` for beacon indices `(i, j)`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRatio {
    pub i: usize,
    pub j: usize,
    pub r: f64,
}

/// Ratios of every beacon pair from per-beacon distances (hops or meters).
pub fn pair_ratios(beacons: &BeaconSet, dist: &[f64]) -> Result<Vec<PairRatio>> {
    if dist.len() != beacons.len() {
        return Err(Error::InvalidParameter {
            name: "dist",
            reason: "one distance per beacon",
        });
    }
    if dist.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "dist",
            reason: "distances must be positive and finite",
        });
    }
    Ok(beacons
        .pairs()
        .map(|(i, j)| PairRatio {
            i,
            j,
            r: dist[i] / dist[j],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub position: Point,
    /// Objective value at `position`.
    pub residual: f64,
}

/// Gauss-Newton iteration cap per start.
pub const MAX_ITERATIONS: usize = 200;

/// Sum over pairs of `(residual / (1 + r^2))^2` at `p`.
pub fn objective(beacons: &BeaconSet, ratios: &[PairRatio], p: Point) -> Result<f64> {
    let mut f = 0.0;
    for pr in ratios {
        let c = apollonius_curve(beacons.positions[pr.i], beacons.positions[pr.j], pr.r)?;
        let e = c.residual(p) / (1.0 + pr.r * pr.r);
        f += e * e;
    }
    Ok(f)
}

/// Least-squares position from beacon-pair ratios.
///
/// Works in coordinates centered on the beacon centroid and scaled by the
/// beacons' spread. Damped Gauss-Newton with a central-difference Jacobian
/// and step halving runs from the centroid and four quadrant offsets; the
/// converged start with the smallest objective wins. If none converges
/// within [`MAX_ITERATIONS`], the error carries the best point found.
pub fn estimate_position(beacons: &BeaconSet, ratios: &[PairRatio]) -> Result<Estimate> {
    if ratios.is_empty() {
        return Err(Error::InvalidParameter {
            name: "ratios",
            reason: "need at least one beacon pair",
        });
    }
    for pr in ratios {
        if pr.i >= beacons.len() || pr.j >= beacons.len() {
            return Err(Error::NodeOutOfRange {
                id: pr.i.max(pr.j),
                n: beacons.len(),
            });
        }
        if !(pr.r > 0.0 && pr.r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "ratios",
                reason: "must be positive and finite",
            });
        }
    }
    let origin = beacons.centroid();
    let scale = beacons
        .positions
        .iter()
        .map(|p| p.dist(origin))
        .fold(0.0, f64::max);
    let local: Vec<Point> = beacons
        .positions
        .iter()
        .map(|p| Point::new((p.x - origin.x) / scale, (p.y - origin.y) / scale))
        .collect();
    let curves: Vec<(ApolloniusCurve, f64)> = ratios
        .iter()
        .map(|pr| {
            apollonius_curve(local[pr.i], local[pr.j], pr.r).map(|c| (c, 1.0 / (1.0 + pr.r * pr.r)))
        })
        .collect::<Result<_>>()?;
    let solver = GaussNewton { curves: &curves };

    let offsets = [
        (0.0, 0.0),
        (0.5, 0.5),
        (-0.5, 0.5),
        (-0.5, -0.5),
        (0.5, -0.5),
    ];
    let mut best: Option<(Point, f64, bool)> = None;
    for (dx, dy) in offsets {
        let (p, f, ok) = solver.solve(Point::new(dx, dy));
        let better = match best {
            None => true,
            Some((_, bf, bok)) => (ok && !bok) || (ok == bok && f < bf),
        };
        if better {
            best = Some((p, f, ok));
        }
    }
    let (p, f, ok) = best.expect("at least one start");
    let position = Point::new(origin.x + p.x * scale, origin.y + p.y * scale);
    let residual = f * scale * scale * scale * scale;
    if ok {
        Ok(Estimate { position, residual })
    } else {
        Err(Error::NoConvergence {
            x: position.x,
            y: position.y,
            residual,
        })
    }
}

struct GaussNewton<'a> {
    curves: &'a [(ApolloniusCurve, f64)],
}

impl GaussNewton<'_> {
    fn residuals(&self, p: Point, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.curves.iter().map(|(c, w)| c.residual(p) * w));
    }

    fn value(&self, p: Point) -> f64 {
        self.curves
            .iter()
            .map(|(c, w)| (c.residual(p) * w) * (c.residual(p) * w))
            .sum()
    }

    /// Returns the final point, its objective and whether it converged.
    fn solve(&self, start: Point) -> (Point, f64, bool) {
        const H: f64 = 1e-6;
        let mut p = start;
        let mut f = self.value(p);
        let (mut r, mut rxp, mut rxm, mut ryp, mut rym) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for _ in 0..MAX_ITERATIONS {
            if f <= 1e-30 {
                return (p, f, true);
            }
            self.residuals(p, &mut r);
            self.residuals(Point::new(p.x + H, p.y), &mut rxp);
            self.residuals(Point::new(p.x - H, p.y), &mut rxm);
            self.residuals(Point::new(p.x, p.y + H), &mut ryp);
            self.residuals(Point::new(p.x, p.y - H), &mut rym);
            let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for k in 0..r.len() {
                let jx = (rxp[k] - rxm[k]) / (2.0 * H);
                let jy = (ryp[k] - rym[k]) / (2.0 * H);
                a11 += jx * jx;
                a12 += jx * jy;
                a22 += jy * jy;
                g1 += jx * r[k];
                g2 += jy * r[k];
            }
            if sqrt(g1 * g1 + g2 * g2) <= 1e-15 {
                return (p, f, true);
            }
            let damp = 1e-12 * (a11 + a22).max(1e-300);
            let (a11, a22) = (a11 + damp, a22 + damp);
            let det = a11 * a22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                return (p, f, false);
            }
            let mut dx = -(a22 * g1 - a12 * g2) / det;
            let mut dy = -(a11 * g2 - a12 * g1) / det;
            let mut accepted = false;
            for _ in 0..40 {
                let q = Point::new(p.x + dx, p.y + dy);
                let fq = self.value(q);
                if fq <= f {
                    let step = sqrt(dx * dx + dy * dy);
                    let gain = f - fq;
                    p = q;
                    f = fq;
                    accepted = true;
                    if step <= 1e-8 * (1.0 + sqrt(p.x * p.x + p.y * p.y)) || gain <= 1e-9 * f {
                        return (p, f, true);
                    }
                    break;
                }
                dx /= 2.0;
                dy /= 2.0;
            }
            if !accepted {
                // No descent along the Gauss-Newton direction: a stationary point.
                return (p, f, true);
            }
        }
        (p, f, false)
    }
}

/// Hop-ratio estimate for node `s` from a hop table sourced at the beacons.
pub fn localize_node(beacons: &BeaconSet, hops: &HopTable, s: usize) -> Result<Estimate> {
    if beacons.contains(s) {
        return Err(Error::BeaconTarget { node: s });
    }
    let mut dist = Vec::with_capacity(beacons.len());
    for &b in beacons.ids() {
        match hops.get(b, s) {
            Some(Some(h)) => dist.push(h as f64),
            Some(None) => return Err(Error::Unreachable { from: s, to: b }),
            None => {
                return Err(Error::InvalidParameter {
                    name: "hops",
                    reason: "beacon is not a source of the table",
                })
            }
        }
    }
    estimate_position(beacons, &pair_ratios(beacons, &dist)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationRow {
    pub node: usize,
    pub truth: Point,
    pub estimate: Point,
    pub error: f64,
    /// Closer than the margin to the region boundary.
    pub edge_zone: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPattern {
    pub rows: Vec<LocalizationRow>,
    pub mean_error: f64,
    /// Mean over rows outside the edge zone; `None` if there are none.
    pub interior_mean_error: Option<f64>,
    /// Non-beacon nodes that cannot reach every beacon.
    pub unreachable: Vec<usize>,
}

/// Localizes every non-beacon node of `dep` from hop counts on `g`.
pub fn error_pattern(
    dep: &Deployment,
    beacons: &BeaconSet,
    g: &EdgeGraph,
    margin: f64,
) -> Result<ErrorPattern> {
    if g.n() != dep.len() {
        return Err(Error::NodeCountMismatch {
            left: dep.len(),
            right: g.n(),
        });
    }
    let interior = dep.interior_nodes(margin)?;
    let mut is_interior = alloc::vec![false; dep.len()];
    for i in interior {
        is_interior[i] = true;
    }
    let hops = hop_distances(g, beacons.ids())?;
    let mut rows = Vec::new();
    let mut unreachable = Vec::new();
    for s in (0..dep.len()).filter(|&s| !beacons.contains(s)) {
        let (estimate, converged) = match localize_node(beacons, &hops, s) {
            Ok(e) => (e.position, true),
            Err(Error::NoConvergence { x, y, .. }) => (Point::new(x, y), false),
            Err(Error::Unreachable { .. }) => {
                unreachable.push(s);
                continue;
            }
            Err(e) => return Err(e),
        };
        let truth = dep.positions[s];
        rows.push(LocalizationRow {
            node: s,
            truth,
            estimate,
            error: truth.dist(estimate),
            edge_zone: !is_interior[s],
            converged,
        });
    }
    if rows.is_empty() {
        return Err(Error::NotConnected);
    }
    let mean_error = rows.iter().map(|r| r.error).sum::<f64>() / rows.len() as f64;
    let inner: Vec<f64> = rows
        .iter()
        .filter(|r| !r.edge_zone)
        .map(|r| r.error)
        .collect();
    let interior_mean_error =
        (!inner.is_empty()).then(|| inner.iter().sum::<f64>() / inner.len() as f64);
    Ok(ErrorPattern {
        rows,
        mean_error,
        interior_mean_error,
        unreachable,
    })
}
