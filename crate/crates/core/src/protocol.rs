//! Round-synchronous min-max engine for the distance-based algorithm and
//! DISCRIT.
//!
//! Both algorithms are the same state machine in a "cost" space where a
//! smaller cost is a better neighbour: the cost of `j` at `i` is `d_ij` for
//! the range algorithm and `-p_hat(j, i)` for DISCRIT. Every node keeps a
//! threshold `t(i)` and the adjacent set `N(i) = {j : cost_i(j) <= t(i)}`
//! (always including `i` itself). A round is
//!
//! 1. every node `j` unicasts `t(j)` to each member of `N(j)`;
//! 2. every node sets `t(i) := max(t(i), received values)` and recomputes
//!    `N(i)`.
//!
//! Initially `t(i)` is the cost of the best neighbour. The run stops when a
//! round changes no threshold; the directed sets are then made symmetric.
//!
//! The invariants below are checked after every round and reported as
//! [`Error::InvariantViolation`]:
//!
//! * every threshold is one of the initial thresholds;
//! * no threshold exceeds the largest initial threshold;
//! * a node at the largest initial threshold stays there;
//! * thresholds never decrease.

use alloc::vec::Vec;

use crate::geometry::{pairs_within, Deployment};
use crate::graphs::{nearest_distances, EdgeGraph};
use crate::{Error, Result};

/// Directed link weights `weight(from, to)`: how strongly `to` hears `from`.
pub trait LinkWeights {
    fn node_count(&self) -> usize;
    fn weight(&self, from: usize, to: usize) -> f64;
}

/// Dense weight matrix, `w[from * n + to]`. Useful for synthetic weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWeights {
    n: usize,
    w: Vec<f64>,
}

impl SyntheticWeights {
    pub fn new(n: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != n * n {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "matrix must be n x n",
            });
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "must be finite",
            });
        }
        Ok(Self { n, w })
    }

    /// Symmetric weights `f(d_ij)` on a deployment.
    pub fn from_distance(dep: &Deployment, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = dep.len();
        let mut w = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w[i * n + j] = f(dep.d(i, j));
                }
            }
        }
        Self::new(n, w)
    }
}

impl LinkWeights for SyntheticWeights {
    fn node_count(&self) -> usize {
        self.n
    }

    fn weight(&self, from: usize, to: usize) -> f64 {
        self.w[from * self.n + to]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    /// Thresholds are ranges in meters.
    Range,
    /// Thresholds are p-thresholds on link weights.
    Weight,
}

/// How the run decides that it is over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Termination {
    /// Global check: stop at the first round with no threshold change.
    Centralised,
    /// Each node stops after `timeout` consecutive rounds without a
    /// threshold change or an incoming message; the run ends when all have.
    Quiescence { timeout: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EngineConfig {
    /// Only nodes whose threshold changed in the previous round send.
    pub suppress_unchanged: bool,
    pub termination: Termination,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            suppress_unchanged: true,
            termination: Termination::Centralised,
        }
    }
}

/// Per-round record of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Thresholds in natural units (meters or p).
    pub thresholds: Vec<f64>,
    /// `|N(i)|` without `i` itself.
    pub degrees: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    pub mode: Mode,
    /// `snapshots[0]` is the initial state, then one per executed round.
    pub snapshots: Vec<Snapshot>,
    /// Rounds that changed at least one threshold.
    pub iterations: u32,
    /// First round in which the run is known to be over: `iterations + 1`
    /// centrally, `iterations + timeout` under quiescence.
    pub termination_round: u32,
    /// Unicasts per executed round, self excluded.
    pub messages_per_round: Vec<u64>,
}

impl ProtocolTrace {
    pub fn messages(&self) -> u64 {
        self.messages_per_round.iter().sum()
    }

    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trace has an initial snapshot")
    }
}

/// Local termination bookkeeping for the quiescence mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiescenceDetector {
    timeout: u32,
    quiet: Vec<u32>,
}

impl QuiescenceDetector {
    pub fn new(n: usize, timeout: u32) -> Result<Self> {
        if timeout == 0 {
            return Err(Error::InvalidParameter {
                name: "timeout",
                reason: "must be at least 1",
            });
        }
        Ok(Self {
            timeout,
            quiet: alloc::vec![0; n],
        })
    }

    /// Records one round for `node`. An active node (changed or received)
    /// restarts its window, which also wakes a terminated node.
    pub fn observe(&mut self, node: usize, active: bool) {
        self.quiet[node] = if active {
            0
        } else {
            self.quiet[node].saturating_add(1)
        };
    }

    pub fn is_terminated(&self, node: usize) -> bool {
        self.quiet[node] >= self.timeout
    }

    pub fn all_terminated(&self) -> bool {
        (0..self.quiet.len()).all(|i| self.is_terminated(i))
    }
}

/// Whether every node of the in-progress run has been quiet for `timeout`
/// rounds, given per-round activity flags `activity[round][node]`.
pub fn detect_quiescence(activity: &[Vec<bool>], timeout: u32) -> Result<bool> {
    let n = activity.first().map_or(0, Vec::len);
    let mut det = QuiescenceDetector::new(n, timeout)?;
    for round in activity {
        for (i, &a) in round.iter().enumerate() {
            det.observe(i, a);
        }
    }
    Ok(n > 0 && det.all_terminated())
}

/// The per-node state machines of one run.
#[derive(Debug, Clone)]
pub struct Engine {
    mode: Mode,
    /// Candidates `(cost, j)` of each node, ascending, self excluded.
    cand: Vec<Vec<(f64, u32)>>,
    threshold: Vec<f64>,
    /// `N(i)` without self is `cand[i][..prefix[i]]`.
    prefix: Vec<usize>,
    changed: Vec<bool>,
    initial_sorted: Vec<f64>,
    max_initial: f64,
    round: u32,
}

/// Result of one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub changed: Vec<bool>,
    pub received: Vec<bool>,
    pub messages: u64,
}

impl RoundOutcome {
    pub fn any_change(&self) -> bool {
        self.changed.iter().any(|&c| c)
    }
}

impl Engine {
    /// Engine for the distance-based algorithm.
    pub fn range(dep: &Deployment) -> Result<Self> {
        let n = dep.len();
        if n < 2 {
            return Err(Error::TooFewNodes { n });
        }
        // Thresholds never exceed the largest nearest-neighbour distance, so
        // candidates beyond it can never join N(i).
        let r1 = nearest_distances(dep).into_iter().fold(0.0, f64::max);
        let mut cand: Vec<Vec<(f64, u32)>> = alloc::vec![Vec::new(); n];
        for (i, j) in pairs_within(dep, r1) {
            let d = dep.d(i as usize, j as usize);
            cand[i as usize].push((d, j));
            cand[j as usize].push((d, i));
        }
        Self::from_candidates(Mode::Range, cand)
    }

    /// Engine for DISCRIT; node `i` ranks `j` by `weight(j, i)` and ignores
    /// zero weights.
    pub fn discrit<W: LinkWeights + ?Sized>(weights: &W) -> Result<Self> {
        let n = weights.node_count();
        if n < 2 {
            return Err(Error::TooFewNodes { n });
        }
        let mut best = alloc::vec![0.0f64; n];
        for (i, b) in best.iter_mut().enumerate() {
            for j in (0..n).filter(|&j| j != i) {
                *b = b.max(weights.weight(j, i));
            }
            if !(*b > 0.0) {
                return Err(Error::IsolatedNode { node: i });
            }
        }
        let floor = best.iter().copied().fold(f64::INFINITY, f64::min);
        let mut cand = alloc::vec![Vec::new(); n];
        for (i, c) in cand.iter_mut().enumerate() {
            for j in (0..n).filter(|&j| j != i) {
                let w = weights.weight(j, i);
                if w > 0.0 && w >= floor {
                    c.push((-w, j as u32));
                }
            }
        }
        Self::from_candidates(Mode::Weight, cand)
    }

    fn from_candidates(mode: Mode, mut cand: Vec<Vec<(f64, u32)>>) -> Result<Self> {
        for c in &mut cand {
            c.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        let threshold: Vec<f64> = cand.iter().map(|c| c[0].0).collect();
        let prefix = cand
            .iter()
            .zip(&threshold)
            .map(|(c, &t)| prefix_len(c, t))
            .collect();
        let mut initial_sorted = threshold.clone();
        initial_sorted.sort_unstable_by(f64::total_cmp);
        initial_sorted.dedup();
        let max_initial = *initial_sorted.last().expect("n >= 2");
        let n = cand.len();
        Ok(Self {
            mode,
            cand,
            threshold,
            prefix,
            changed: alloc::vec![true; n],
            initial_sorted,
            max_initial,
            round: 0,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.cand.len()
    }

    /// Rounds executed so far.
    pub fn round(&self) -> u32 {
        self.round
    }

    /// Threshold of node `i` in natural units.
    pub fn threshold(&self, i: usize) -> f64 {
        self.natural(self.threshold[i])
    }

    /// `N(i)` without `i`.
    pub fn adjacent(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.cand[i][..self.prefix[i]]
            .iter()
            .map(|&(_, j)| j as usize)
    }

    fn natural(&self, cost: f64) -> f64 {
        match self.mode {
            Mode::Range => cost,
            Mode::Weight => -cost,
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            thresholds: (0..self.n()).map(|i| self.threshold(i)).collect(),
            degrees: self.prefix.iter().map(|&p| p as u32).collect(),
        }
    }

    /// Executes one round. With `suppress`, only nodes that changed in the
    /// previous round (every node in round 0) send.
    pub fn step(&mut self, suppress: bool) -> Result<RoundOutcome> {
        let n = self.n();
        let mut incoming = self.threshold.clone();
        let mut received = alloc::vec![false; n];
        let mut messages = 0u64;
        for j in 0..n {
            if suppress && !self.changed[j] {
                continue;
            }
            let t = self.threshold[j];
            for &(_, i) in &self.cand[j][..self.prefix[j]] {
                let i = i as usize;
                messages += 1;
                received[i] = true;
                if t > incoming[i] {
                    incoming[i] = t;
                }
            }
        }
        let mut changed = alloc::vec![false; n];
        for i in 0..n {
            let (old, new) = (self.threshold[i], incoming[i]);
            if new != old {
                changed[i] = true;
                self.threshold[i] = new;
                self.prefix[i] = prefix_len(&self.cand[i], new);
            }
            self.check(i, old, new)?;
        }
        self.changed.clone_from(&changed);
        self.round += 1;
        Ok(RoundOutcome {
            changed,
            received,
            messages,
        })
    }

    /// One extra round with every node sending; reports whether anything
    /// changed. At a fixed point this is always `false`.
    pub fn forced_round(&mut self) -> Result<bool> {
        Ok(self.step(false)?.any_change())
    }

    fn check(&self, node: usize, old: f64, new: f64) -> Result<()> {
        let fail = |invariant| {
            Err(Error::InvariantViolation {
                invariant,
                node,
                iteration: self.round,
            })
        };
        if self
            .initial_sorted
            .binary_search_by(|x| x.total_cmp(&new))
            .is_err()
        {
            return fail("threshold is an initial threshold");
        }
        if new > self.max_initial {
            return fail("threshold bounded by the largest initial threshold");
        }
        if old == self.max_initial && new != self.max_initial {
            return fail("largest initial threshold is absorbing");
        }
        if new < old {
            return fail("threshold is monotone");
        }
        Ok(())
    }

    /// Runs to termination.
    pub fn run(&mut self, config: EngineConfig) -> Result<ProtocolTrace> {
        let n = self.n();
        let timeout = match config.termination {
            Termination::Centralised => 0,
            Termination::Quiescence { timeout } => {
                if !config.suppress_unchanged {
                    return Err(Error::InvalidParameter {
                        name: "termination",
                        reason: "quiescence needs message suppression",
                    });
                }
                timeout
            }
        };
        let mut detector = match config.termination {
            Termination::Quiescence { timeout } => Some(QuiescenceDetector::new(n, timeout)?),
            Termination::Centralised => None,
        };
        let cap = n as u32 + timeout + 2;
        let mut trace = ProtocolTrace {
            mode: self.mode,
            snapshots: alloc::vec![self.snapshot()],
            iterations: 0,
            termination_round: 0,
            messages_per_round: Vec::new(),
        };
        let mut settled = false;
        loop {
            if self.round >= cap {
                return Err(Error::NoTermination { rounds: self.round });
            }
            let out = self.step(config.suppress_unchanged)?;
            trace.snapshots.push(self.snapshot());
            trace.messages_per_round.push(out.messages);
            let change = out.any_change();
            if change {
                if settled {
                    return Err(Error::InvariantViolation {
                        invariant: "no change after a quiet round",
                        node: out.changed.iter().position(|&c| c).unwrap_or(0),
                        iteration: self.round - 1,
                    });
                }
                trace.iterations += 1;
            } else {
                settled = true;
            }
            match detector.as_mut() {
                None => {
                    if !change {
                        trace.termination_round = self.round;
                        return Ok(trace);
                    }
                }
                Some(det) => {
                    for i in 0..n {
                        det.observe(i, out.changed[i] || out.received[i]);
                    }
                    if det.all_terminated() {
                        trace.termination_round = self.round - 1;
                        return Ok(trace);
                    }
                }
            }
        }
    }

    /// Directed adjacency `N(i)`, self excluded.
    pub fn directed(&self) -> Vec<Vec<u32>> {
        (0..self.n())
            .map(|i| self.adjacent(i).map(|j| j as u32).collect())
            .collect()
    }

    /// Output graph: `(i, j)` iff `j in N(i)` or `i in N(j)`.
    pub fn output(&self) -> Result<EdgeGraph> {
        bidirectionalize(&self.directed())
    }
}

fn prefix_len(cand: &[(f64, u32)], t: f64) -> usize {
    cand.partition_point(|&(c, _)| c <= t)
}

/// Undirected graph with `(i, j)` iff `j in adj[i]` or `i in adj[j]`;
/// self-loops are dropped.
pub fn bidirectionalize(adj: &[Vec<u32>]) -> Result<EdgeGraph> {
    let n = adj.len();
    EdgeGraph::new(
        n,
        adj.iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |&j| (i, j as usize))),
    )
}

/// Distance-based algorithm with range thresholds.
pub fn run_range_algorithm(
    dep: &Deployment,
    config: EngineConfig,
) -> Result<(EdgeGraph, ProtocolTrace)> {
    let mut engine = Engine::range(dep)?;
    let trace = engine.run(config)?;
    Ok((engine.output()?, trace))
}

/// DISCRIT over measured or synthetic link weights.
pub fn run_discrit<W: LinkWeights + ?Sized>(
    weights: &W,
    config: EngineConfig,
) -> Result<(EdgeGraph, ProtocolTrace)> {
    let mut engine = Engine::discrit(weights)?;
    let trace = engine.run(config)?;
    Ok((engine.output()?, trace))
}
