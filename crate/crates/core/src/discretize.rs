//! Distance discretisation by hop counts: statistics of `rho = d / h`.

use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{generate_deployment, Deployment, DeploymentKind, Region};
use crate::graphs::{bfs, critical_radius, EdgeGraph};
use crate::math::sqrt;
use crate::rng::{derive_seed, seeded};
use crate::stats::{ci_half_width, mean, variance};
use crate::{Error, Result};

/// Histogram resolution: the bin width is the longest edge over this.
pub const RHO_BINS: usize = 50;

/// Above this many nodes [`PairSample::Auto`] samples pairs.
pub const ALL_PAIRS_LIMIT: usize = 2000;

/// Sample size used by [`PairSample::Auto`] on large deployments.
pub const DEFAULT_PAIR_SAMPLE: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSample {
    All,
    /// Uniform sample of ordered pairs `i != j`, with replacement.
    Count(usize),
    /// All pairs up to [`ALL_PAIRS_LIMIT`] nodes, else
    /// [`DEFAULT_PAIR_SAMPLE`] sampled pairs.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoStats {
    pub samples: Vec<f64>,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    /// Standard deviation over mean.
    pub cv: f64,
    pub bin_width: f64,
    /// Normalised histogram; bin `k` covers `[k w, (k + 1) w)`, the last
    /// bin is closed.
    pub histogram: Vec<f64>,
    /// Sampled pairs dropped because they were disconnected.
    pub excluded: usize,
}

pub fn rho_stats(
    dep: &Deployment,
    g: &EdgeGraph,
    sample: PairSample,
    seed: u64,
) -> Result<RhoStats> {
    let n = dep.len();
    if g.n() != n {
        return Err(Error::NodeCountMismatch {
            left: n,
            right: g.n(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }
    let sample = match sample {
        PairSample::Auto if n <= ALL_PAIRS_LIMIT => PairSample::All,
        PairSample::Auto => PairSample::Count(DEFAULT_PAIR_SAMPLE),
        s => s,
    };
    let mut samples = Vec::new();
    let mut excluded = 0usize;
    let mut push = |i: usize, j: usize, h: Option<u32>| match h {
        Some(h) => samples.push(dep.d(i, j) / h as f64),
        None => excluded += 1,
    };
    match sample {
        PairSample::All => {
            for i in 0..n {
                let hops = bfs(g, i);
                for (j, &h) in hops.iter().enumerate().skip(i + 1) {
                    push(i, j, h);
                }
            }
        }
        PairSample::Count(k) => {
            let mut rng = seeded(seed);
            let mut by_source: Vec<Vec<u32>> = alloc::vec![Vec::new(); n];
            for _ in 0..k {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                by_source[i].push(j as u32);
            }
            for (i, targets) in by_source.iter().enumerate() {
                if targets.is_empty() {
                    continue;
                }
                let hops = bfs(g, i);
                for &j in targets {
                    push(i, j as usize, hops[j as usize]);
                }
            }
        }
        PairSample::Auto => unreachable!(),
    }
    if samples.is_empty() {
        return Err(Error::AllPairsExcluded { excluded });
    }
    let m = mean(&samples);
    let var = variance(&samples);
    let longest = g.max_edge_length(dep);
    let bin_width = if longest > 0.0 {
        longest / RHO_BINS as f64
    } else {
        1.0
    };
    let mut histogram = alloc::vec![0.0; RHO_BINS];
    let unit = 1.0 / samples.len() as f64;
    for &r in &samples {
        let b = ((r / bin_width) as usize).min(RHO_BINS - 1);
        histogram[b] += unit;
    }
    Ok(RhoStats {
        cv: sqrt(var) / m,
        mean: m,
        variance: var,
        bin_width,
        histogram,
        excluded,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub n: usize,
    pub var_rho: f64,
    pub cv_rho: f64,
    /// 95% half-widths over seeds; `None` with a single seed.
    pub ci_var: Option<f64>,
    pub ci_cv: Option<f64>,
}

/// Seed of replication `rep` at node count `n` in a trend study.
pub fn trend_seed(base: u64, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(base, n as u64), rep as u64)
}

/// Statistics of one uniform-iid replication on its critical graph.
pub fn rho_replication(region: Region, n: usize, seed: u64) -> Result<RhoStats> {
    let dep = generate_deployment(DeploymentKind::UniformIid, n, region, seed)?;
    let (_, g) = critical_radius(&dep)?;
    rho_stats(&dep, &g, PairSample::Auto, derive_seed(seed, 1))
}

/// Aggregates per-seed `(variance, cv)` pairs into a trend row.
pub fn trend_row(n: usize, per_seed: &[(f64, f64)]) -> TrendRow {
    let vars: Vec<f64> = per_seed.iter().map(|p| p.0).collect();
    let cvs: Vec<f64> = per_seed.iter().map(|p| p.1).collect();
    TrendRow {
        n,
        var_rho: mean(&vars),
        cv_rho: mean(&cvs),
        ci_var: ci_half_width(&vars),
        ci_cv: ci_half_width(&cvs),
    }
}

/// Mean `rho` variance and CV over `seeds_per_n` uniform-iid deployments
/// per node count, each on its exact critical graph.
pub fn rho_trend(
    region: Region,
    n_list: &[usize],
    seeds_per_n: usize,
    base_seed: u64,
) -> Result<Vec<TrendRow>> {
    if seeds_per_n == 0 {
        return Err(Error::InvalidParameter {
            name: "seeds_per_n",
            reason: "must be at least 1",
        });
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut per_seed = Vec::with_capacity(seeds_per_n);
        for rep in 0..seeds_per_n {
            let s = rho_replication(region, n, trend_seed(base_seed, n, rep))?;
            per_seed.push((s.variance, s.cv));
        }
        rows.push(trend_row(n, &per_seed));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::graphs::build_gg;

    fn line(xs: &[f64]) -> Deployment {
        let pts = xs.iter().map(|&x| Point::new(x, 1.0)).collect();
        Deployment::from_positions(DeploymentKind::UniformIid, Region::default(), 0, pts).unwrap()
    }

    #[test]
    fn two_nodes() {
        let d = line(&[0.0, 7.0]);
        let s = rho_stats(&d, &build_gg(&d, 7.0).unwrap(), PairSample::All, 0).unwrap();
        assert_eq!(s.samples, [7.0]);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.histogram[RHO_BINS - 1], 1.0);
    }

    #[test]
    fn equally_spaced_path() {
        let d = line(&[0.0, 3.0, 6.0, 9.0, 12.0]);
        let s = rho_stats(&d, &build_gg(&d, 3.0).unwrap(), PairSample::All, 0).unwrap();
        assert_eq!(s.samples.len(), 10);
        assert!(s.samples.iter().all(|&r| (r - 3.0).abs() < 1e-12));
        assert!(s.variance < 1e-20);
    }

    #[test]
    fn disconnected_pairs() {
        let d = line(&[0.0, 1.0, 5.0, 6.0]);
        let g = build_gg(&d, 1.0).unwrap();
        let s = rho_stats(&d, &g, PairSample::All, 0).unwrap();
        assert_eq!((s.samples.len(), s.excluded), (2, 4));
        let empty = build_gg(&d, 0.5).unwrap();
        assert_eq!(
            rho_stats(&d, &empty, PairSample::All, 0),
            Err(Error::AllPairsExcluded { excluded: 6 })
        );
    }

    #[test]
    fn sampling_is_seeded() {
        let d = generate_deployment(DeploymentKind::UniformIid, 300, Region::default(), 4).unwrap();
        let (_, g) = critical_radius(&d).unwrap();
        let a = rho_stats(&d, &g, PairSample::Count(500), 1).unwrap();
        assert_eq!(a, rho_stats(&d, &g, PairSample::Count(500), 1).unwrap());
        assert_eq!(a.samples.len(), 500);
        let mass: f64 = a.histogram.iter().sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_seed_has_no_interval() {
        let rows = rho_trend(Region::default(), &[100], 1, 7).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].ci_var.is_none() && rows[0].ci_cv.is_none());
        assert_eq!(rows, rho_trend(Region::default(), &[100], 1, 7).unwrap());
    }
}
