//! Transport-capacity self-organisation over h-hop topologies.
//!
//! `T_h` joins every pair at hop distance exactly `h` on the critical graph.
//! A single-cell saturated slotted-Aloha network over `T_h` carries
//! `Psi_h` bit-meters per slot; the capacity model per link is
//!
//! ```text
//! Psi(d) = a d ln(1 + alpha0 P_t / (d^eta sigma^2))
//! ```
//!
//! and the node picks the `h` that maximises `Psi_h`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::geometry::Deployment;
use crate::graphs::{bfs, EdgeGraph};
use crate::math::{ln_1p, powf, sqrt};
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SelfOrgParams {
    /// Contention constant of the capacity model.
    pub a: f64,
    /// Power gain `alpha0`.
    pub alpha0: f64,
    pub tx_power: f64,
    pub noise: f64,
    pub path_loss_exp: f64,
    /// Bandwidth `W` (Hz).
    pub bandwidth: f64,
    /// Per-slot attempt probability `q` of a saturated node.
    pub attempt_prob: f64,
    pub slots: u64,
}

impl Default for SelfOrgParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            alpha0: 1.0,
            tx_power: 1.0,
            noise: 1.0e-9,
            path_loss_exp: 4.0,
            bandwidth: 1.0,
            attempt_prob: 0.001,
            slots: 200_000,
        }
    }
}

impl SelfOrgParams {
    /// `q = 1` is accepted: every slot then collides.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("alpha0", self.alpha0),
            ("tx_power", self.tx_power),
            ("noise", self.noise),
            ("path_loss_exp", self.path_loss_exp),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be positive",
                });
            }
        }
        if !(self.attempt_prob > 0.0 && self.attempt_prob <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "attempt_prob",
                reason: "must lie in (0, 1]",
            });
        }
        if self.slots == 0 {
            return Err(Error::InvalidParameter {
                name: "slots",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    /// Bit-meters credited for one successful transmission over `d`:
    /// `d W ln(1 + alpha0 P_t / (d^eta sigma^2))`.
    pub fn link_credit(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        let snr = self.alpha0 * self.tx_power / (powf(d, self.path_loss_exp) * self.noise);
        d * self.bandwidth * ln_1p(snr)
    }

    /// Probability that exactly one of `m` saturated nodes attempts.
    pub fn success_prob(&self, m: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let q = self.attempt_prob;
        m as f64 * q * powf(1.0 - q, (m - 1) as f64)
    }

    /// Contention constant matching the simulated MAC with `m` contenders.
    pub fn calibrated_a(&self, m: usize) -> f64 {
        self.success_prob(m) * self.bandwidth
    }
}

/// `Psi(d)` with the configured `a` (natural logarithm).
pub fn theoretical_psi(d: f64, p: &SelfOrgParams) -> f64 {
    p.a * p.link_credit(d) / p.bandwidth
}

/// Maximiser of `Psi(d)`: a 400-point log grid over `[1e-6, 1e6]` times
/// `(alpha0 P_t / sigma^2)^(1/eta)`, refined by golden-section search.
pub fn optimal_hop_length(p: &SelfOrgParams) -> f64 {
    let scale = powf(p.alpha0 * p.tx_power / p.noise, 1.0 / p.path_loss_exp);
    let (lo_exp, hi_exp, steps) = (-6.0f64, 6.0f64, 400usize);
    let at = |k: usize| scale * powf(10.0, lo_exp + (hi_exp - lo_exp) * k as f64 / steps as f64);
    let f = |d: f64| theoretical_psi(d, p);
    let mut best = 0;
    for k in 1..=steps {
        if f(at(k)) > f(at(best)) {
            best = k;
        }
    }
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(steps)));
    let g = (sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if b - a <= 1e-12 * b {
            break;
        }
    }
    (a + b) / 2.0
}

/// `T_h`: `(i, j)` iff the hop distance on `g` is exactly `h`.
pub fn build_h_hop_topology(g: &EdgeGraph, h: u32) -> Result<EdgeGraph> {
    if h == 0 {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: "must be at least 1",
        });
    }
    let mut edges = Vec::new();
    for i in 0..g.n() {
        for (j, d) in bfs(g, i).into_iter().enumerate().skip(i + 1) {
            if d == Some(h) {
                edges.push((i, j));
            }
        }
    }
    EdgeGraph::new(g.n(), edges)
}

/// `T_1 ..= T_h_max` from one BFS per node.
pub fn hop_topologies(g: &EdgeGraph, h_max: u32) -> Result<Vec<EdgeGraph>> {
    let mut lists: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); h_max as usize];
    for i in 0..g.n() {
        for (j, d) in bfs(g, i).into_iter().enumerate().skip(i + 1) {
            if let Some(h) = d {
                if h >= 1 && h <= h_max {
                    lists[h as usize - 1].push((i, j));
                }
            }
        }
    }
    lists
        .into_iter()
        .map(|e| EdgeGraph::new(g.n(), e))
        .collect()
}

/// Mean Euclidean length of the edges of `t`, 0 when it has none.
pub fn mean_hop_length(dep: &Deployment, t: &EdgeGraph) -> f64 {
    if t.edge_count() == 0 {
        return 0.0;
    }
    let total: f64 = t
        .edges()
        .iter()
        .map(|&(i, j)| dep.d(i as usize, j as usize))
        .sum();
    total / t.edge_count() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    /// Bit-meters per slot.
    pub psi: f64,
    /// Standard error of `psi` over slots.
    pub std_error: f64,
    /// Nodes with at least one `T_h` neighbour; only these contend.
    pub active: usize,
    /// Nodes with no `T_h` neighbour.
    pub idle: usize,
    pub successes: u64,
}

/// Saturated slotted Aloha over `t`: every active node attempts with
/// probability `q`; a slot succeeds iff exactly one attempts, and the winner
/// sends to a uniform `T_h` neighbour.
pub fn simulate_on_topology(
    dep: &Deployment,
    t: &EdgeGraph,
    p: &SelfOrgParams,
    seed: u64,
) -> Result<CapacityEstimate> {
    p.validate()?;
    if t.n() != dep.len() {
        return Err(Error::NodeCountMismatch {
            left: dep.len(),
            right: t.n(),
        });
    }
    let active: Vec<usize> = (0..t.n()).filter(|&i| t.degree(i) > 0).collect();
    let m = active.len();
    if m == 0 {
        return Err(Error::NoActiveNodes);
    }
    let mut rng = seeded(seed);
    let gap = Geometric::new(p.attempt_prob).map_err(|_| Error::InvalidParameter {
        name: "attempt_prob",
        reason: "must lie in (0, 1]",
    })?;
    // Nodes skipped before the next attempting one, capped at `m`.
    let skip =
        |rng: &mut crate::rng::ChaCha8Rng| -> usize { gap.sample(rng).min(m as u64) as usize };
    let (mut sum, mut sum2, mut successes) = (0.0, 0.0, 0u64);
    for _ in 0..p.slots {
        let first = skip(&mut rng);
        if first >= m {
            continue;
        }
        let rest = m - first - 1;
        if rest > 0 && skip(&mut rng) < rest {
            continue;
        }
        let i = active[first];
        let nbrs = t.neighbors(i);
        let j = nbrs[rng.random_range(0..nbrs.len())] as usize;
        let c = p.link_credit(dep.d(i, j));
        sum += c;
        sum2 += c * c;
        successes += 1;
    }
    let slots = p.slots as f64;
    let psi = sum / slots;
    let var = (sum2 / slots - psi * psi).max(0.0);
    Ok(CapacityEstimate {
        psi,
        std_error: sqrt(var / slots),
        active: m,
        idle: t.n() - m,
        successes,
    })
}

/// `Psi_h` of `T_h` built over `g_base`.
pub fn simulate_transport_capacity(
    dep: &Deployment,
    g_base: &EdgeGraph,
    h: u32,
    p: &SelfOrgParams,
    seed: u64,
) -> Result<CapacityEstimate> {
    simulate_on_topology(dep, &build_h_hop_topology(g_base, h)?, p, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiRow {
    pub h: u32,
    pub edges: usize,
    pub mean_hop_len: f64,
    pub psi_sim: f64,
    pub std_error: f64,
    /// Capacity model at the mean hop length with `a` calibrated to the
    /// row's active node count.
    pub psi_theory: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    pub h_opt: u32,
    pub rows: Vec<PsiRow>,
}

impl PsiTable {
    /// `h` maximising the theory column, smallest on ties.
    pub fn h_theory(&self) -> u32 {
        argmax(self.rows.iter().map(|r| (r.h, r.psi_theory)))
    }
}

fn argmax(it: impl Iterator<Item = (u32, f64)>) -> u32 {
    let mut best = (0, f64::NEG_INFINITY);
    for (h, v) in it {
        if v > best.1 {
            best = (h, v);
        }
    }
    best.0
}

/// Simulates `h = 1 ..= h_max` and picks the best (smallest `h` on ties).
/// Empty topologies get `Psi_h = 0`. Each `h` uses its own derived seed.
pub fn find_h_opt(
    dep: &Deployment,
    g_base: &EdgeGraph,
    p: &SelfOrgParams,
    h_max: u32,
    seed: u64,
) -> Result<PsiTable> {
    if h_max == 0 {
        return Err(Error::InvalidParameter {
            name: "h_max",
            reason: "must be at least 1",
        });
    }
    p.validate()?;
    let tops = hop_topologies(g_base, h_max)?;
    let mut rows = Vec::with_capacity(tops.len());
    for (k, t) in tops.iter().enumerate() {
        let h = k as u32 + 1;
        rows.push(psi_row(
            dep,
            t,
            h,
            p,
            crate::rng::derive_seed(seed, h as u64),
        )?);
    }
    let h_opt = argmax(rows.iter().map(|r| (r.h, r.psi_sim)));
    Ok(PsiTable { h_opt, rows })
}

/// One table row for topology `t` (= `T_h`).
pub fn psi_row(
    dep: &Deployment,
    t: &EdgeGraph,
    h: u32,
    p: &SelfOrgParams,
    seed: u64,
) -> Result<PsiRow> {
    let ell = mean_hop_length(dep, t);
    if t.edge_count() == 0 {
        return Ok(PsiRow {
            h,
            edges: 0,
            mean_hop_len: 0.0,
            psi_sim: 0.0,
            std_error: 0.0,
            psi_theory: 0.0,
        });
    }
    let est = simulate_on_topology(dep, t, p, seed)?;
    let calibrated = SelfOrgParams {
        a: p.calibrated_a(est.active),
        ..*p
    };
    Ok(PsiRow {
        h,
        edges: t.edge_count(),
        mean_hop_len: ell,
        psi_sim: est.psi,
        std_error: est.std_error,
        psi_theory: theoretical_psi(ell, &calibrated),
    })
}
