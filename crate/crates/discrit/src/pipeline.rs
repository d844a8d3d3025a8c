//! Config-driven runs: deploy, hello, protocol, evaluation and the
//! applications, with a manifest of every artifact written.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use discrit_core::channel::{received_power_histogram, simulate_hello, LinkWeightTable};
use discrit_core::discretize::{rho_stats, rho_trend, PairSample};
use discrit_core::geometry::generate_deployment;
use discrit_core::graphs::{critical_radius, disparity, graph_diameter};
use discrit_core::localize::{error_pattern, BeaconSet, ErrorPattern};
use discrit_core::protocol::{run_discrit, run_range_algorithm, EngineConfig, ProtocolTrace};
use discrit_core::rng::derive_seed;
use discrit_core::selforg::find_h_opt;
use discrit_core::{Deployment, DeploymentKind, EdgeGraph, Error};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, HopGraph, ProtocolMode};
use crate::io::{self, DisparityRow};

/// Seed streams derived from a run seed; the deployment uses the seed itself.
pub mod stream {
    pub const HELLO: u64 = 1;
    pub const POWER: u64 = 2;
    pub const SELFORG: u64 = 3;
    pub const RHO: u64 = 4;
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub versions: Versions,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub discrit: &'static str,
    pub discrit_core: &'static str,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes artifacts under one root and records them.
struct Sink<'a> {
    root: &'a Path,
    written: Vec<Artifact>,
}

impl<'a> Sink<'a> {
    fn new(root: &'a Path) -> Self {
        Self {
            root,
            written: Vec::new(),
        }
    }

    fn put(&mut self, rel: impl Into<PathBuf>, bytes: Vec<u8>) -> Result<()> {
        let rel: PathBuf = rel.into();
        io::write_atomic(&self.root.join(&rel), &bytes)?;
        let path = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        self.written.push(Artifact {
            path,
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    fn put_graph(&mut self, rel: &str, g: &EdgeGraph) -> Result<()> {
        self.put(rel, io::graph_csv(g)?)?;
        self.put(io::header_path(Path::new(rel)), io::graph_header(g)?)
    }
}

/// Output of the protocol stage.
pub struct ProtocolRun {
    pub graph: EdgeGraph,
    pub trace: ProtocolTrace,
}

pub fn run_protocol(
    dep: &Deployment,
    mode: ProtocolMode,
    weights: Option<&LinkWeightTable>,
    engine: EngineConfig,
) -> Result<ProtocolRun> {
    let (graph, trace) = match (mode, weights) {
        (ProtocolMode::Distance, _) => run_range_algorithm(dep, engine)?,
        (ProtocolMode::Discrit, Some(w)) => run_discrit(w, engine)?,
        (ProtocolMode::Discrit, None) => anyhow::bail!("discrit mode needs link weights"),
    };
    Ok(ProtocolRun { graph, trace })
}

fn measure(a: &EdgeGraph, b: &EdgeGraph) -> Result<Option<f64>> {
    match disparity(a, b) {
        Ok(d) => Ok(Some(d)),
        Err(Error::EmptyEdgeSet) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Disparity of the protocol output against the critical graph, over all
/// nodes and over the interior nodes.
///
/// The interior row reruns both constructions on the interior nodes alone;
/// DISCRIT keeps the weights measured with every node active, and interior
/// nodes that hear no other interior node are left out.
pub fn disparity_rows(
    dep: &Deployment,
    out: &EdgeGraph,
    crit: &EdgeGraph,
    mode: ProtocolMode,
    weights: Option<&LinkWeightTable>,
    engine: EngineConfig,
    margin: f64,
) -> Result<Vec<DisparityRow>> {
    let row = |scope, nodes, o: &EdgeGraph, c: &EdgeGraph| -> Result<DisparityRow> {
        Ok(DisparityRow {
            kind: dep.kind,
            seed: dep.seed,
            scope,
            nodes,
            d_out_crit: measure(o, c)?,
            d_crit_out: measure(c, o)?,
        })
    };
    let mut rows = vec![row("all", dep.len(), out, crit)?];
    let mut ids = dep.interior_nodes(margin)?;
    if let Some(w) = weights {
        ids = heard_within(w, ids);
    }
    if ids.len() >= 2 {
        let sub = dep.subset(&ids)?;
        let (_, crit_in) = critical_radius(&sub)?;
        let w_in = weights.map(|w| w.restrict(&ids)).transpose()?;
        let out_in = run_protocol(&sub, mode, w_in.as_ref(), engine)?.graph;
        rows.push(row("interior", ids.len(), &out_in, &crit_in)?);
    }
    Ok(rows)
}

/// Drops nodes that hear no other node of the set, until none is left
/// isolated.
fn heard_within(w: &LinkWeightTable, mut ids: Vec<usize>) -> Vec<usize> {
    loop {
        let kept: Vec<usize> = ids
            .iter()
            .copied()
            .filter(|&i| ids.iter().any(|&j| j != i && w.p_hat(j, i) > 0.0))
            .collect();
        if kept.len() == ids.len() {
            return kept;
        }
        ids = kept;
    }
}

/// Localization over `g` with corner beacons. A graph on which no node
/// reaches every beacon yields an empty pattern.
pub fn localize_on(dep: &Deployment, g: &EdgeGraph, margin: f64) -> Result<ErrorPattern> {
    let beacons = BeaconSet::corners(dep)?;
    match error_pattern(dep, &beacons, g, margin) {
        Err(Error::NotConnected) => Ok(ErrorPattern {
            rows: Vec::new(),
            mean_error: f64::INFINITY,
            interior_mean_error: None,
            unreachable: (0..dep.len()).filter(|&i| !beacons.contains(i)).collect(),
        }),
        r => Ok(r?),
    }
}

fn run_dir(kind: DeploymentKind, seed: u64) -> PathBuf {
    PathBuf::from(kind.as_str()).join(format!("seed-{seed}"))
}

/// Every stage for one deployment. Returns the disparity rows.
fn run_job(
    cfg: &ExperimentConfig,
    kind: DeploymentKind,
    seed: u64,
    sink: &mut Sink,
) -> Result<Vec<DisparityRow>> {
    let dir = run_dir(kind, seed);
    let f = |name: &str| dir.join(name);
    let region = cfg.deployment.region()?;
    let dep = generate_deployment(kind, cfg.deployment.n, region, seed).context("stage deploy")?;
    sink.put(f("deployment.csv"), io::deployment_csv(&dep)?)?;

    let needs_crit = cfg.protocol.is_some()
        || cfg.selforg.is_some()
        || cfg.localize.is_some()
        || cfg.discretize.is_some();
    if !needs_crit {
        return Ok(Vec::new());
    }
    let (_, crit) = critical_radius(&dep).context("stage deploy: critical graph")?;
    sink.put_graph(f("graph_crit.csv").to_str().unwrap(), &crit)?;

    let mut rows = Vec::new();
    let mut protocol_graph = None;
    if let Some(p) = &cfg.protocol {
        let weights = match p.mode {
            ProtocolMode::Discrit => {
                let ch = cfg.channel.as_ref().expect("validated");
                let w = simulate_hello(&dep, ch, derive_seed(seed, stream::HELLO))
                    .context("stage hello")?;
                sink.put(f("weights.csv"), io::weights_csv(&w)?)?;
                Some(w)
            }
            ProtocolMode::Distance => None,
        };
        let run =
            run_protocol(&dep, p.mode, weights.as_ref(), p.engine).context("stage discrit")?;
        sink.put_graph(f("graph_protocol.csv").to_str().unwrap(), &run.graph)?;
        if p.trace {
            sink.put(f("trace.csv"), io::trace_csv(&run.trace)?)?;
        }
        rows = disparity_rows(
            &dep,
            &run.graph,
            &crit,
            p.mode,
            weights.as_ref(),
            p.engine,
            cfg.margin,
        )
        .context("stage eval")?;
        protocol_graph = Some(run.graph);
    }
    if let (Some(h), Some(ch)) = (&cfg.power_histogram, &cfg.channel) {
        let hist = received_power_histogram(&dep, ch, derive_seed(seed, stream::POWER), h.annuli)
            .context("stage hello: power histogram")?;
        sink.put(f("power_hist.csv"), io::power_histogram_csv(&hist)?)?;
    }
    if cfg.discretize.is_some() {
        let s = rho_stats(
            &dep,
            &crit,
            PairSample::Auto,
            derive_seed(seed, stream::RHO),
        )
        .context("stage discretize")?;
        sink.put(f("rho_hist.csv"), io::rho_histogram_csv(&s)?)?;
    }
    if let Some(s) = &cfg.selforg {
        let h_max = match s.h_max {
            Some(h) => h,
            None => graph_diameter(&crit)
                .context("stage selforg: critical graph has no diameter")?
                .max(1),
        };
        let table = find_h_opt(
            &dep,
            &crit,
            &s.params,
            h_max,
            derive_seed(seed, stream::SELFORG),
        )
        .context("stage selforg")?;
        sink.put(f("psi.csv"), io::psi_csv(&table)?)?;
    }
    if let Some(l) = &cfg.localize {
        for &which in &l.graphs {
            let g = match which {
                HopGraph::Critical => &crit,
                HopGraph::Protocol => protocol_graph.as_ref().expect("validated"),
            };
            let e = localize_on(&dep, g, cfg.margin)
                .with_context(|| format!("stage localize ({})", which.as_str()))?;
            sink.put(
                f(&format!("errors_{}.csv", which.as_str())),
                io::error_pattern_csv(&e)?,
            )?;
        }
    }
    Ok(rows)
}

/// Runs every configured stage and writes the artifacts plus
/// `manifest.json` under `cfg.output_dir`. Runs are independent per
/// (kind, seed) and may execute concurrently; outputs do not depend on
/// scheduling.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate().context("invalid config")?;
    let root = cfg.output_dir.as_path();
    let jobs: Vec<(DeploymentKind, u64)> = cfg
        .deployment
        .kinds
        .iter()
        .flat_map(|&k| cfg.seeds.iter().map(move |&s| (k, s)))
        .collect();
    let results: Vec<(Vec<Artifact>, Vec<DisparityRow>)> = jobs
        .par_iter()
        .map(|&(kind, seed)| {
            let mut sink = Sink::new(root);
            let rows = run_job(cfg, kind, seed, &mut sink)
                .with_context(|| format!("{kind} seed {seed}"))?;
            Ok((sink.written, rows))
        })
        .collect::<Result<_>>()?;

    let mut sink = Sink::new(root);
    let mut table = Vec::new();
    for (written, rows) in results {
        sink.written.extend(written);
        table.extend(rows);
    }
    if cfg.protocol.is_some() {
        sink.put("disparity.csv", io::disparity_csv(&table)?)?;
    }
    if let Some(d) = &cfg.discretize {
        let rows = rho_trend(
            cfg.deployment.region()?,
            &d.n_list,
            d.seeds_per_n,
            cfg.seeds[0],
        )
        .context("stage discretize")?;
        sink.put("rho_trend.csv", io::trend_csv(&rows)?)?;
    }
    let mut artifacts = sink.written;
    artifacts.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        config_sha256: sha256_hex(cfg.canonical_json()?.as_bytes()),
        config: cfg.clone(),
        seeds: cfg.seeds.clone(),
        versions: Versions {
            discrit: env!("CARGO_PKG_VERSION"),
            discrit_core: discrit_core::VERSION,
        },
        artifacts,
    };
    io::write_atomic(&root.join(MANIFEST), &io::to_json(&manifest)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pruning_repeats_until_stable() {
        // 0 <-> 1, 2 hears only 3, 3 hears only 4
        let n = 5;
        let mut counts = vec![0; n * n];
        for (i, j) in [(0, 1), (1, 0), (3, 2), (4, 3), (0, 4)] {
            counts[i * n + j] = 5;
        }
        let w = LinkWeightTable::from_counts(n, vec![10; n], counts).unwrap();
        assert_eq!(heard_within(&w, vec![0, 1, 2, 3]), [0, 1]);
        assert_eq!(heard_within(&w, (0..n).collect()), [0, 1, 2, 3, 4]);
    }
}
