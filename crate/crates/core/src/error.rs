use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least 2 nodes, got {n}")]
    TooFewNodes { n: usize },
    #[error("grid deployment needs a perfect-square node count, got {n}")]
    NotPerfectSquare { n: usize },
    #[error("invalid region {width} x {height}")]
    InvalidRegion { width: f64, height: f64 },
    #[error("node {id} out of range (n = {n})")]
    NodeOutOfRange { id: usize, n: usize },
    #[error("margin {margin} out of range [0, {limit})")]
    MarginOutOfRange { margin: f64, limit: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("no broadcasts; weights undefined")]
    NoBroadcasts,
    #[error("graph has an empty edge set")]
    EmptyEdgeSet,
    #[error("node count mismatch: {left} vs {right}")]
    NodeCountMismatch { left: usize, right: usize },
    #[error("node {node} has no incoming link weight above zero")]
    IsolatedNode { node: usize },
    #[error("interior region is empty for radius {radius}")]
    EmptyInterior { radius: f64 },
    #[error("nodes {from} and {to} are not connected")]
    Unreachable { from: usize, to: usize },
    #[error("beacons must be pairwise distinct")]
    CoincidentBeacons,
    #[error("need at least {required} beacons, got {got}")]
    TooFewBeacons { required: usize, got: usize },
    #[error("node {node} is a beacon and cannot be localized")]
    BeaconTarget { node: usize },
    #[error("solver did not converge; best estimate ({x}, {y}) with residual {residual}")]
    NoConvergence { x: f64, y: f64, residual: f64 },
    #[error("every sampled pair was disconnected ({excluded} excluded)")]
    AllPairsExcluded { excluded: usize },
    #[error("no node has a neighbour in the h-hop topology")]
    NoActiveNodes,
    #[error("invariant `{invariant}` violated at node {node}, iteration {iteration}")]
    InvariantViolation {
        invariant: &'static str,
        node: usize,
        iteration: u32,
    },
    #[error("protocol did not terminate within {rounds} rounds")]
    NoTermination { rounds: u32 },
    #[error("graph is not connected")]
    NotConnected,
}
