//! Slotted-Aloha Hello protocol under the SINR physical model.
//!
//! In every slot each node independently transmits a Hello with probability
//! `tx_prob` and listens otherwise. A listening node `j` decodes the Hello of
//! transmitter `i` when
//!
//! ```text
//!            H_ij P_t / d_ij^eta
//! ----------------------------------------  >=  beta
//! sigma^2 + sum_{k != i, k tx} H_kj P_t / d_kj^eta
//! ```
//!
//! Over `slots` slots node `j` counts `C_ij`, the Hellos of `i` it decoded,
//! and `i` counts `B_i`, the Hellos it broadcast. `C_ij / B_i` is the receive
//! link weight `j` assigns to `i`; it decreases with distance in a spatially
//! homogeneous deployment.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Geometric};

use crate::geometry::{Deployment, Point};
use crate::math::{floor, ln_1p, powf};
use crate::rng::seeded;
use crate::stats::EmpiricalCdf;
use crate::{Error, Result};

/// Fading law of the power coefficient `H_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Fading {
    /// `H = 1`.
    Deterministic,
    /// Rayleigh amplitude, i.e. exponentially distributed power with the
    /// given mean. Drawn fresh per slot and per ordered pair.
    RayleighPower { mean: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ChannelParams {
    /// Transmit power at the reference distance (W).
    pub tx_power: f64,
    /// Path-loss exponent `eta`.
    pub path_loss_exp: f64,
    /// Noise variance `sigma^2` (W).
    pub noise: f64,
    /// SINR decoding threshold `beta`.
    pub sinr_threshold: f64,
    /// Per-slot transmit probability `alpha`.
    pub tx_prob: f64,
    pub fading: Fading,
    pub slots: u64,
}

impl Default for ChannelParams {
    /// Defaults for a 1 km x 1 km region with on the order of 1000 nodes.
    fn default() -> Self {
        Self {
            tx_power: 1.0,
            path_loss_exp: 4.0,
            noise: 1.0e-12,
            sinr_threshold: 1.0,
            tx_prob: 0.05,
            fading: Fading::Deterministic,
            slots: 20_000,
        }
    }
}

impl ChannelParams {
    /// Rayleigh-faded preset whose link weights track distance closely:
    /// mean SNR is 1 at 60 m, `alpha = 0.01`, `10^5` slots.
    pub fn rayleigh_preset() -> Self {
        Self {
            noise: 1.0 / (60.0f64 * 60.0 * 60.0 * 60.0),
            tx_prob: 0.01,
            fading: Fading::RayleighPower { mean: 1.0 },
            slots: 100_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(self.tx_power > 0.0) {
            return bad("tx_power", "must be positive");
        }
        if !(self.path_loss_exp >= 2.0) {
            return bad("path_loss_exp", "must be at least 2");
        }
        if !(self.noise > 0.0) {
            return bad("noise", "must be positive");
        }
        if !(self.sinr_threshold > 0.0) {
            return bad("sinr_threshold", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.tx_prob) {
            return bad("tx_prob", "must lie in [0, 1]");
        }
        if self.slots == 0 {
            return bad("slots", "must be at least 1");
        }
        if let Fading::RayleighPower { mean } = self.fading {
            if !(mean > 0.0) {
                return bad("fading.mean", "must be positive");
            }
        }
        Ok(())
    }

    /// Mean received power `P_t / d^eta` at distance `d`.
    pub fn path_gain(&self, d: f64) -> f64 {
        self.gain_from_d2(d * d)
    }

    /// Same as [`path_gain`](Self::path_gain) from a squared distance.
    pub fn gain_from_d2(&self, d2: f64) -> f64 {
        if self.path_loss_exp == 4.0 {
            return self.tx_power / (d2 * d2);
        }
        let half = self.path_loss_exp / 2.0;
        let k = half as u32;
        let denom = if k as f64 == half && k <= 8 {
            let mut acc = 1.0;
            for _ in 0..k {
                acc *= d2;
            }
            acc
        } else {
            powf(d2, half)
        };
        self.tx_power / denom
    }

    fn draw_fading<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.fading {
            Fading::Deterministic => 1.0,
            Fading::RayleighPower { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
        }
    }
}

/// Independent per-node Bernoulli(`alpha`) transmit decisions, drawn as
/// geometric gaps between consecutive transmitters.
struct TxSampler {
    gap: Geometric,
    n: usize,
}

impl TxSampler {
    fn new(alpha: f64, n: usize) -> Result<Self> {
        let gap = Geometric::new(alpha).map_err(|_| Error::InvalidParameter {
            name: "tx_prob",
            reason: "must lie in [0, 1]",
        })?;
        Ok(Self { gap, n })
    }

    fn draw<R: Rng>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        let mut k = 0u64;
        loop {
            k = k.saturating_add(self.gap.sample(rng));
            if k >= self.n as u64 {
                return;
            }
            out.push(k as usize);
            k += 1;
        }
    }
}

/// Directed Hello counts and the derived weights `p_hat(i, j) = C_ij / B_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkWeightTable {
    n: usize,
    broadcasts: Vec<u64>,
    /// `counts[i * n + j]`: Hellos of `i` decoded at `j`.
    counts: Vec<u64>,
}

impl LinkWeightTable {
    /// Builds a table from raw counts, checking `C_ii = 0` and `C_ij <= B_i`.
    pub fn from_counts(n: usize, broadcasts: Vec<u64>, counts: Vec<u64>) -> Result<Self> {
        if broadcasts.len() != n || counts.len() != n * n {
            return Err(Error::InvalidParameter {
                name: "counts",
                reason: "table dimensions do not match n",
            });
        }
        for i in 0..n {
            if counts[i * n + i] != 0 {
                return Err(Error::InvalidParameter {
                    name: "counts",
                    reason: "self count must be zero",
                });
            }
            if counts[i * n..(i + 1) * n]
                .iter()
                .any(|&c| c > broadcasts[i])
            {
                return Err(Error::InvalidParameter {
                    name: "counts",
                    reason: "count exceeds broadcasts",
                });
            }
        }
        Ok(Self {
            n,
            broadcasts,
            counts,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn broadcasts(&self, i: usize) -> u64 {
        self.broadcasts[i]
    }

    /// Hellos of `i` decoded at `j`.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    /// `C_ij / B_i`, or 0 when `i` never broadcast.
    pub fn p_hat(&self, i: usize, j: usize) -> f64 {
        let b = self.broadcasts[i];
        if b == 0 {
            0.0
        } else {
            self.count(i, j) as f64 / b as f64
        }
    }

    /// Table over the nodes in `ids`, renumbered by position. Counts are
    /// kept as measured on the full deployment.
    pub fn restrict(&self, ids: &[usize]) -> Result<Self> {
        let m = ids.len();
        for &i in ids {
            if i >= self.n {
                return Err(Error::NodeOutOfRange { id: i, n: self.n });
            }
        }
        let broadcasts = ids.iter().map(|&i| self.broadcasts[i]).collect();
        let mut counts = alloc::vec![0; m * m];
        for (a, &i) in ids.iter().enumerate() {
            for (b, &j) in ids.iter().enumerate() {
                counts[a * m + b] = self.count(i, j);
            }
        }
        Ok(Self {
            n: m,
            broadcasts,
            counts,
        })
    }
}

impl crate::protocol::LinkWeights for LinkWeightTable {
    fn node_count(&self) -> usize {
        self.n
    }

    fn weight(&self, from: usize, to: usize) -> f64 {
        self.p_hat(from, to)
    }
}

/// Runs the Hello protocol for `params.slots` slots.
///
/// Fading coefficients are drawn fresh in every slot for every
/// (transmitter, listener) pair. The count table takes `O(n^2)` memory.
pub fn simulate_hello(
    dep: &Deployment,
    params: &ChannelParams,
    seed: u64,
) -> Result<LinkWeightTable> {
    params.validate()?;
    let n = dep.len();
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }
    if params.tx_prob == 0.0 {
        return Err(Error::NoBroadcasts);
    }
    let mut rng = seeded(seed);
    let mut broadcasts = alloc::vec![0u64; n];
    let mut counts = alloc::vec![0u64; n * n];
    let mut transmitting = alloc::vec![false; n];
    let mut tx: Vec<usize> = Vec::with_capacity(n);
    // rx[a * n + j]: power of the a-th transmitter at listener j.
    let mut rx: Vec<f64> = Vec::new();
    let mut total = alloc::vec![0.0; n];
    let (beta, noise) = (params.sinr_threshold, params.noise);
    let sampler = TxSampler::new(params.tx_prob, n)?;

    for _ in 0..params.slots {
        sampler.draw(&mut rng, &mut tx);
        if tx.is_empty() {
            continue;
        }
        for &i in &tx {
            transmitting[i] = true;
            broadcasts[i] += 1;
        }
        rx.clear();
        rx.resize(tx.len() * n, 0.0);
        total.fill(0.0);
        for (a, &k) in tx.iter().enumerate() {
            let pk = dep.positions[k];
            let row = &mut rx[a * n..(a + 1) * n];
            for j in 0..n {
                if !transmitting[j] {
                    let s = params.gain_from_d2(pk.dist2(dep.positions[j]))
                        * params.draw_fading(&mut rng);
                    row[j] = s;
                    total[j] += s;
                }
            }
        }
        for (a, &k) in tx.iter().enumerate() {
            let row = &rx[a * n..(a + 1) * n];
            let out = &mut counts[k * n..(k + 1) * n];
            for j in 0..n {
                let s = row[j];
                if !transmitting[j] && s >= beta * (noise + (total[j] - s)) {
                    out[j] += 1;
                }
            }
        }
        for &i in &tx {
            transmitting[i] = false;
        }
    }
    Ok(LinkWeightTable {
        n,
        broadcasts,
        counts,
    })
}

/// Predicted Hello success probability at distance `d`:
///
/// `p = (1 - alpha) * E_H[ F((1 + beta) H P_t / (beta d^eta) - sigma^2) ]`
///
/// where `F` is the CDF of the total received power at the listener. For
/// Rayleigh fading the expectation over `H` is a midpoint rule on the
/// quantile scale with 4096 nodes.
pub fn predict_p(d: f64, cdf: &EmpiricalCdf, params: &ChannelParams) -> f64 {
    let beta = params.sinr_threshold;
    let arg = |h: f64| (1.0 + beta) * h * params.path_gain(d) / beta - params.noise;
    let expectation = match params.fading {
        Fading::Deterministic => cdf.eval(arg(1.0)),
        Fading::RayleighPower { mean } => {
            const NODES: usize = 4096;
            let mut acc = 0.0;
            for k in 0..NODES {
                let u = (k as f64 + 0.5) / NODES as f64;
                let h = -mean * ln_1p(-u);
                acc += cdf.eval(arg(h));
            }
            acc / NODES as f64
        }
    };
    (1.0 - params.tx_prob) * expectation
}

/// One observation of total received power at a listening node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub node: u32,
    pub power: f64,
}

/// Total received power `sum_k H_kj P_t / d_kj^eta` (noise excluded) at every
/// listening node, recorded in each slot in which at least one node
/// transmits. Gains are computed on the fly, so memory stays `O(n)` per slot.
pub fn received_power_samples(
    dep: &Deployment,
    params: &ChannelParams,
    seed: u64,
) -> Result<Vec<PowerSample>> {
    params.validate()?;
    if params.tx_prob == 0.0 {
        return Err(Error::NoBroadcasts);
    }
    let n = dep.len();
    let mut rng = seeded(seed);
    let mut transmitting = alloc::vec![false; n];
    let mut tx: Vec<usize> = Vec::with_capacity(n);
    let mut out = Vec::new();
    let sampler = TxSampler::new(params.tx_prob, n)?;
    for _ in 0..params.slots {
        sampler.draw(&mut rng, &mut tx);
        if tx.is_empty() {
            continue;
        }
        for &i in &tx {
            transmitting[i] = true;
        }
        for (j, &pj) in dep.positions.iter().enumerate() {
            if transmitting[j] {
                continue;
            }
            let power: f64 = tx
                .iter()
                .map(|&k| {
                    params.gain_from_d2(dep.positions[k].dist2(pj)) * params.draw_fading(&mut rng)
                })
                .sum();
            out.push(PowerSample {
                node: j as u32,
                power,
            });
        }
        for &i in &tx {
            transmitting[i] = false;
        }
    }
    Ok(out)
}

/// Number of bins of every received-power histogram.
pub const POWER_BINS: usize = 200;

/// Normalised received-power histograms, one per square annulus, sharing
/// the bin width `max observed power / POWER_BINS`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerHistograms {
    pub bin_width: f64,
    /// `freqs[a][b]`; annulus 0 is the outermost ring.
    pub freqs: Vec<Vec<f64>>,
    pub sample_counts: Vec<usize>,
}

impl PowerHistograms {
    pub fn annuli(&self) -> usize {
        self.freqs.len()
    }

    /// Total-variation distance between two annuli's histograms.
    pub fn total_variation(&self, a: usize, b: usize) -> f64 {
        0.5 * self.freqs[a]
            .iter()
            .zip(&self.freqs[b])
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
    }
}

/// Annulus index of `p`: concentric square rings of width
/// `(side / 2) / annuli`, 0 at the boundary.
pub fn annulus_of(dep: &Deployment, p: Point, annuli: usize) -> usize {
    let width = dep.region.width.min(dep.region.height) / 2.0 / annuli as f64;
    let k = floor(dep.region.boundary_distance(p) / width) as usize;
    k.min(annuli - 1)
}

pub fn received_power_histogram(
    dep: &Deployment,
    params: &ChannelParams,
    seed: u64,
    annuli: usize,
) -> Result<PowerHistograms> {
    if annuli == 0 {
        return Err(Error::InvalidParameter {
            name: "annuli",
            reason: "must be at least 1",
        });
    }
    if dep.region.width != dep.region.height {
        return Err(Error::InvalidParameter {
            name: "region",
            reason: "annuli need a square region",
        });
    }
    let samples = received_power_samples(dep, params, seed)?;
    let ring: Vec<usize> = dep
        .positions
        .iter()
        .map(|&p| annulus_of(dep, p, annuli))
        .collect();
    let max = samples.iter().map(|s| s.power).fold(0.0, f64::max);
    let bin_width = if max > 0.0 {
        max / POWER_BINS as f64
    } else {
        f64::MIN_POSITIVE
    };
    let mut counts = alloc::vec![alloc::vec![0usize; POWER_BINS]; annuli];
    let mut totals = alloc::vec![0usize; annuli];
    for s in &samples {
        let a = ring[s.node as usize];
        let b = (floor(s.power / bin_width) as usize).min(POWER_BINS - 1);
        counts[a][b] += 1;
        totals[a] += 1;
    }
    let freqs = counts
        .iter()
        .zip(&totals)
        .map(|(c, &t)| {
            c.iter()
                .map(|&x| if t == 0 { 0.0 } else { x as f64 / t as f64 })
                .collect()
        })
        .collect();
    Ok(PowerHistograms {
        bin_width,
        freqs,
        sample_counts: totals,
    })
}

/// Outcome of the empirical spatial-homogeneity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homogeneity {
    pub pass: bool,
    /// Sampled density ratio `(N_r(x) / (pi r^2)) / (n / |A|)` farthest from 1.
    pub worst_ratio: f64,
    pub points: usize,
}

/// Checks that the node density in the closed disc of radius `r` around
/// every grid point of the interior `[r, W - r] x [r, H - r]` is within
/// `(1 +- eps)` of the network density.
pub fn homogeneity_check(
    dep: &Deployment,
    r: f64,
    eps: f64,
    grid_step: f64,
) -> Result<Homogeneity> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: "must be positive",
        });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: "must be positive",
        });
    }
    if !(grid_step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            reason: "must be positive",
        });
    }
    let (w, h) = (dep.region.width, dep.region.height);
    if 2.0 * r > w || 2.0 * r > h {
        return Err(Error::EmptyInterior { radius: r });
    }
    let density = dep.len() as f64 / dep.region.area();
    let disc = core::f64::consts::PI * r * r;
    let index = crate::geometry::CellIndex::new(dep, r);
    let axis = |lo: f64, hi: f64| {
        let steps = floor((hi - lo) / grid_step + 1e-9) as usize;
        (0..=steps).map(move |k| lo + k as f64 * grid_step)
    };
    let mut worst = 1.0f64;
    let mut pass = true;
    let mut points = 0;
    for y in axis(r, h - r) {
        for x in axis(r, w - r) {
            let c = Point::new(x, y);
            let mut count = 0usize;
            index.for_each_candidate(c, r, |i| {
                if dep.positions[i].dist(c) <= r {
                    count += 1;
                }
            });
            let ratio = count as f64 / disc / density;
            if (ratio - 1.0).abs() > (worst - 1.0).abs() {
                worst = ratio;
            }
            if ratio < 1.0 - eps || ratio > 1.0 + eps {
                pass = false;
            }
            points += 1;
        }
    }
    Ok(Homogeneity {
        pass,
        worst_ratio: worst,
        points,
    })
}

/// Interference-free success probability of a link of length `d` under
/// deterministic fading.
pub fn isolated_link_p(d: f64, params: &ChannelParams) -> f64 {
    let snr = params.path_gain(d) / params.noise;
    if snr >= params.sinr_threshold {
        1.0 - params.tx_prob
    } else {
        0.0
    }
}

/// Largest link length decodable without interference (deterministic
/// fading).
pub fn noise_limited_range(params: &ChannelParams) -> f64 {
    powf(
        params.tx_power / (params.sinr_threshold * params.noise),
        1.0 / params.path_loss_exp,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_deployment, DeploymentKind, Region};
    use alloc::vec;

    fn pair(d: f64) -> Deployment {
        Deployment::from_positions(
            DeploymentKind::UniformIid,
            Region::square(1000.0).unwrap(),
            0,
            vec![Point::new(100.0, 100.0), Point::new(100.0 + d, 100.0)],
        )
        .unwrap()
    }

    #[test]
    fn everyone_transmitting_hears_nothing() {
        let p = ChannelParams {
            tx_prob: 1.0,
            slots: 50,
            ..Default::default()
        };
        let t = simulate_hello(&pair(10.0), &p, 1).unwrap();
        assert_eq!(t.broadcasts(0), 50);
        assert_eq!(t.p_hat(0, 1), 0.0);
        assert_eq!(t.p_hat(1, 0), 0.0);
    }

    #[test]
    fn silent_network_is_an_error() {
        let p = ChannelParams {
            tx_prob: 0.0,
            ..Default::default()
        };
        assert_eq!(simulate_hello(&pair(10.0), &p, 1), Err(Error::NoBroadcasts));
        assert_eq!(
            received_power_histogram(&pair(10.0), &p, 1, 1),
            Err(Error::NoBroadcasts)
        );
    }

    #[test]
    fn interference_free_pair_matches_closed_form() {
        let p = ChannelParams {
            tx_prob: 0.5,
            slots: 100_000,
            ..Default::default()
        };
        assert!(p.path_gain(50.0) / p.noise >= p.sinr_threshold);
        let t = simulate_hello(&pair(50.0), &p, 42).unwrap();
        assert!((t.p_hat(0, 1) - 0.5).abs() <= 0.01);
        assert!((t.p_hat(1, 0) - 0.5).abs() <= 0.01);
        assert_eq!(isolated_link_p(50.0, &p), 0.5);
    }

    #[test]
    fn counts_never_exceed_broadcasts() {
        let d = generate_deployment(DeploymentKind::UniformIid, 60, Region::default(), 3).unwrap();
        let p = ChannelParams {
            slots: 2000,
            tx_prob: 0.2,
            ..Default::default()
        };
        let t = simulate_hello(&d, &p, 9).unwrap();
        let total: u64 = (0..60).map(|i| t.broadcasts(i)).sum();
        assert!(total > 0);
        for i in 0..60 {
            assert_eq!(t.count(i, i), 0);
            for j in 0..60 {
                assert!(t.count(i, j) <= t.broadcasts(i));
                assert!((0.0..=1.0).contains(&t.p_hat(i, j)));
            }
        }
        assert_eq!(simulate_hello(&d, &p, 9).unwrap(), t);
    }

    #[test]
    fn rayleigh_runs_and_is_deterministic() {
        let d = generate_deployment(DeploymentKind::UniformIid, 30, Region::default(), 3).unwrap();
        let p = ChannelParams {
            slots: 500,
            tx_prob: 0.1,
            fading: Fading::RayleighPower { mean: 1.0 },
            ..Default::default()
        };
        assert_eq!(
            simulate_hello(&d, &p, 1).unwrap(),
            simulate_hello(&d, &p, 1).unwrap()
        );
    }

    #[test]
    fn point_mass_histogram_for_two_nodes() {
        let p = ChannelParams {
            tx_prob: 0.5,
            slots: 400,
            ..Default::default()
        };
        let d = pair(40.0);
        let samples = received_power_samples(&d, &p, 5).unwrap();
        assert!(!samples.is_empty());
        assert!(samples.iter().all(|s| s.power == p.path_gain(40.0)));
        let h = received_power_histogram(&d, &p, 5, 1).unwrap();
        let mass: f64 = h.freqs[0].iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert_eq!(h.freqs[0][POWER_BINS - 1], 1.0);
    }

    #[test]
    fn predict_p_shapes() {
        let p = ChannelParams::default();
        let cdf = EmpiricalCdf::new(vec![1e-12, 5e-11, 2e-10, 1e-9]);
        let direct = (1.0 - p.tx_prob) * cdf.eval(2.0 * p.path_gain(80.0) - p.noise);
        assert_eq!(predict_p(80.0, &cdf, &p), direct);
        assert_eq!(predict_p(1e9, &cdf, &p), 0.0);
        for fading in [Fading::Deterministic, Fading::RayleighPower { mean: 1.0 }] {
            let q = ChannelParams { fading, ..p };
            let mut last = 1.0;
            for k in 1..200 {
                let v = predict_p(k as f64 * 2.0, &cdf, &q);
                assert!(v <= last);
                last = v;
            }
        }
    }

    #[test]
    fn homogeneity_on_grid_and_cluster() {
        let region = Region::default();
        let g = generate_deployment(DeploymentKind::Grid, 2500, region, 0).unwrap();
        assert!(homogeneity_check(&g, 100.0, 0.2, 25.0).unwrap().pass);

        let cluster: Vec<Point> = (0..400)
            .map(|k| Point::new((k % 20) as f64, (k / 20) as f64))
            .collect();
        let c = Deployment::from_positions(DeploymentKind::UniformIid, region, 0, cluster).unwrap();
        let h = homogeneity_check(&c, 100.0, 0.5, 25.0).unwrap();
        assert!(!h.pass);
        assert_eq!(h.worst_ratio, 0.0);

        assert!(matches!(
            homogeneity_check(&g, 600.0, 0.2, 25.0),
            Err(Error::EmptyInterior { .. })
        ));
    }

    #[test]
    fn annuli_are_square_rings() {
        let d = pair(10.0);
        assert_eq!(annulus_of(&d, Point::new(5.0, 500.0), 5), 0);
        assert_eq!(annulus_of(&d, Point::new(150.0, 500.0), 5), 1);
        assert_eq!(annulus_of(&d, Point::new(500.0, 500.0), 5), 4);
    }
}
