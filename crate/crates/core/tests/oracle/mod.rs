//! Brute-force reference implementations, independent of the library code
//! paths they check.

#![allow(dead_code)]

use discrit_core::channel::{ChannelParams, Fading};
use discrit_core::Deployment;

fn dist(dep: &Deployment, i: usize, j: usize) -> f64 {
    let (a, b) = (dep.positions[i], dep.positions[j]);
    ((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)).sqrt()
}

#[allow(clippy::needless_range_loop)]
fn connected_at(dep: &Deployment, r: f64) -> bool {
    let n = dep.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && dist(dep, u, v) <= r {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Smallest pairwise distance at which the closed-ball graph is connected,
/// found by testing every candidate.
pub fn critical_radius(dep: &Deployment) -> f64 {
    let n = dep.len();
    let mut cands: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| dist(dep, i, j))
        .collect();
    cands.sort_by(f64::total_cmp);
    *cands
        .iter()
        .find(|&&r| connected_at(dep, r))
        .expect("complete graph is connected")
}

/// Largest nearest-neighbour distance.
pub fn degree1_radius(dep: &Deployment) -> f64 {
    let n = dep.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| dist(dep, i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Closed-ball edge set at radius `r`, sorted.
pub fn gg_edges(dep: &Deployment, r: f64) -> Vec<(usize, usize)> {
    let n = dep.len();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| dist(dep, i, j) <= r)
        .collect()
}

/// Exact probability that a Hello of `i` is decoded at `j` under
/// deterministic fading, summing over every transmit pattern of the other
/// nodes.
pub fn hello_p(dep: &Deployment, params: &ChannelParams, i: usize, j: usize) -> f64 {
    assert_eq!(params.fading, Fading::Deterministic);
    let n = dep.len();
    let gain = |k: usize| params.tx_power / dist(dep, k, j).powf(params.path_loss_exp);
    let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    let a = params.tx_prob;
    let s = gain(i);
    let mut p = 0.0;
    for mask in 0u32..(1 << others.len()) {
        let mut prob = 1.0;
        let mut interference = 0.0;
        for (b, &k) in others.iter().enumerate() {
            if mask >> b & 1 == 1 {
                prob *= a;
                interference += gain(k);
            } else {
                prob *= 1.0 - a;
            }
        }
        if s >= params.sinr_threshold * (params.noise + interference) {
            p += prob;
        }
    }
    (1.0 - a) * p
}
