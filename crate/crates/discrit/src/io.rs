//! CSV and JSON artifact formats.
//!
//! Floats are written in Rust's shortest round-trip form, so every reader
//! below recovers exactly the values that were written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use discrit_core::channel::{LinkWeightTable, PowerHistograms};
use discrit_core::discretize::{RhoStats, TrendRow};
use discrit_core::localize::ErrorPattern;
use discrit_core::protocol::ProtocolTrace;
use discrit_core::selforg::PsiTable;
use discrit_core::{Deployment, DeploymentKind, EdgeGraph, Point, Region};
use serde::{Deserialize, Serialize};

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// CSV with an explicit header, for tables that may have no rows.
fn to_csv_with_header<T: Serialize>(
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

fn from_csv<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<Vec<T>> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    id: usize,
    x: f64,
    y: f64,
}

pub fn deployment_csv(dep: &Deployment) -> Result<Vec<u8>> {
    to_csv_with_header(
        &["id", "x", "y"],
        dep.positions
            .iter()
            .enumerate()
            .map(|(id, p)| NodeRow { id, x: p.x, y: p.y }),
    )
}

/// Positions from `id,x,y` rows; ids must run `0..n` in order.
pub fn parse_deployment_csv(
    bytes: &[u8],
    kind: DeploymentKind,
    region: Region,
    seed: u64,
) -> Result<Deployment> {
    let rows: Vec<NodeRow> = from_csv(bytes)?;
    let mut pts = Vec::with_capacity(rows.len());
    for (k, r) in rows.into_iter().enumerate() {
        ensure!(
            r.id == k,
            "node ids must be 0..n in order; row {k} has id {}",
            r.id
        );
        pts.push(Point::new(r.x, r.y));
    }
    Ok(Deployment::from_positions(kind, region, seed, pts)?)
}

pub fn deployment_json(dep: &Deployment) -> Result<Vec<u8>> {
    to_json(dep)
}

pub fn read_deployment(path: &Path) -> Result<Deployment> {
    let dep: Deployment = serde_json::from_slice(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    dep.validate()?;
    Ok(dep)
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    i: u32,
    j: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphHeader {
    pub n: usize,
    #[serde(default)]
    pub radius: Option<f64>,
}

/// Header file accompanying an edge-list CSV.
pub fn header_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn graph_csv(g: &EdgeGraph) -> Result<Vec<u8>> {
    to_csv_with_header(
        &["i", "j"],
        g.edges().iter().map(|&(i, j)| EdgeRow { i, j }),
    )
}

pub fn graph_header(g: &EdgeGraph) -> Result<Vec<u8>> {
    to_json(&GraphHeader {
        n: g.n(),
        radius: g.radius(),
    })
}

pub fn parse_graph(csv: &[u8], header: &GraphHeader) -> Result<EdgeGraph> {
    let rows: Vec<EdgeRow> = from_csv(csv)?;
    let g = EdgeGraph::new(
        header.n,
        rows.into_iter().map(|r| (r.i as usize, r.j as usize)),
    )?;
    Ok(match header.radius {
        Some(r) => g.with_radius(r),
        None => g,
    })
}

/// Writes `path` (edges) and its JSON header.
pub fn write_graph(path: &Path, g: &EdgeGraph) -> Result<()> {
    write_atomic(path, &graph_csv(g)?)?;
    write_atomic(&header_path(path), &graph_header(g)?)
}

pub fn read_graph(path: &Path) -> Result<EdgeGraph> {
    let hp = header_path(path);
    let header: GraphHeader =
        serde_json::from_slice(&read(&hp)?).with_context(|| format!("parsing {}", hp.display()))?;
    parse_graph(&read(path)?, &header).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightRow {
    i: usize,
    j: usize,
    #[serde(rename = "C")]
    c: u64,
    #[serde(rename = "B")]
    b: u64,
    p_hat: f64,
}

/// Rows for every pair with a nonzero count, plus one `i,i,0,B_i,0` row per
/// node so that broadcasts survive a round trip.
pub fn weights_csv(w: &LinkWeightTable) -> Result<Vec<u8>> {
    let n = w.n();
    let rows = (0..n).flat_map(|i| {
        (0..n).filter_map(move |j| {
            let c = w.count(i, j);
            (i == j || c > 0).then(|| WeightRow {
                i,
                j,
                c,
                b: w.broadcasts(i),
                p_hat: w.p_hat(i, j),
            })
        })
    });
    to_csv_with_header(&["i", "j", "C", "B", "p_hat"], rows)
}

pub fn parse_weights(bytes: &[u8]) -> Result<LinkWeightTable> {
    let rows: Vec<WeightRow> = from_csv(bytes)?;
    let n = rows.iter().filter(|r| r.i == r.j).count();
    let mut broadcasts = vec![None; n];
    let mut counts = vec![0; n * n];
    for r in &rows {
        ensure!(
            r.i < n && r.j < n,
            "node id out of range in row {},{}",
            r.i,
            r.j
        );
        match broadcasts[r.i] {
            None => broadcasts[r.i] = Some(r.b),
            Some(b) if b != r.b => bail!("inconsistent B for node {}", r.i),
            Some(_) => {}
        }
        counts[r.i * n + r.j] = r.c;
    }
    let broadcasts = broadcasts
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.with_context(|| format!("missing self row for node {i}")))
        .collect::<Result<_>>()?;
    Ok(LinkWeightTable::from_counts(n, broadcasts, counts)?)
}

pub fn read_weights(path: &Path) -> Result<LinkWeightTable> {
    parse_weights(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize)]
struct HistRow {
    annulus: usize,
    bin_lo: f64,
    bin_hi: f64,
    freq: f64,
}

pub fn power_histogram_csv(h: &PowerHistograms) -> Result<Vec<u8>> {
    let w = h.bin_width;
    let rows = h.freqs.iter().enumerate().flat_map(|(a, f)| {
        f.iter().enumerate().map(move |(k, &freq)| HistRow {
            annulus: a,
            bin_lo: k as f64 * w,
            bin_hi: (k + 1) as f64 * w,
            freq,
        })
    });
    to_csv_with_header(&["annulus", "bin_lo", "bin_hi", "freq"], rows)
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iteration: usize,
    node: usize,
    threshold: f64,
    degree: u32,
}

/// One row per node per snapshot; iteration 0 is the initial state.
pub fn trace_csv(t: &ProtocolTrace) -> Result<Vec<u8>> {
    let rows =
        t.snapshots.iter().enumerate().flat_map(|(it, s)| {
            s.thresholds.iter().zip(&s.degrees).enumerate().map(
                move |(node, (&threshold, &degree))| TraceRow {
                    iteration: it,
                    node,
                    threshold,
                    degree,
                },
            )
        });
    to_csv_with_header(&["iteration", "node", "threshold", "degree"], rows)
}

#[derive(Debug, Serialize)]
struct TrendCsvRow {
    n: usize,
    var_rho: f64,
    cv_rho: f64,
    ci_var: Option<f64>,
    ci_cv: Option<f64>,
}

pub fn trend_csv(rows: &[TrendRow]) -> Result<Vec<u8>> {
    to_csv_with_header(
        &["n", "var_rho", "cv_rho", "ci_var", "ci_cv"],
        rows.iter().map(|r| TrendCsvRow {
            n: r.n,
            var_rho: r.var_rho,
            cv_rho: r.cv_rho,
            ci_var: r.ci_var,
            ci_cv: r.ci_cv,
        }),
    )
}

#[derive(Debug, Serialize)]
struct RhoHistRow {
    bin_lo: f64,
    bin_hi: f64,
    freq: f64,
}

pub fn rho_histogram_csv(s: &RhoStats) -> Result<Vec<u8>> {
    let w = s.bin_width;
    to_csv_with_header(
        &["bin_lo", "bin_hi", "freq"],
        s.histogram.iter().enumerate().map(|(k, &freq)| RhoHistRow {
            bin_lo: k as f64 * w,
            bin_hi: (k + 1) as f64 * w,
            freq,
        }),
    )
}

#[derive(Debug, Serialize)]
struct PsiCsvRow {
    h: u32,
    mean_hop_len_m: f64,
    psi_sim: f64,
    psi_theory: f64,
}

pub fn psi_csv(t: &PsiTable) -> Result<Vec<u8>> {
    to_csv_with_header(
        &["h", "mean_hop_len_m", "psi_sim", "psi_theory"],
        t.rows.iter().map(|r| PsiCsvRow {
            h: r.h,
            mean_hop_len_m: r.mean_hop_len,
            psi_sim: r.psi_sim,
            psi_theory: r.psi_theory,
        }),
    )
}

#[derive(Debug, Serialize)]
struct ErrorRow {
    node: usize,
    x_true: f64,
    y_true: f64,
    x_est: f64,
    y_est: f64,
    err_m: f64,
}

pub fn error_pattern_csv(e: &ErrorPattern) -> Result<Vec<u8>> {
    to_csv_with_header(
        &["node", "x_true", "y_true", "x_est", "y_est", "err_m"],
        e.rows.iter().map(|r| ErrorRow {
            node: r.node,
            x_true: r.truth.x,
            y_true: r.truth.y,
            x_est: r.estimate.x,
            y_est: r.estimate.y,
            err_m: r.error,
        }),
    )
}

/// One row of the disparity table; `None` marks an undefined measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisparityRow {
    pub kind: DeploymentKind,
    pub seed: u64,
    pub scope: &'static str,
    pub nodes: usize,
    /// `D(G_hat, G_crit)`.
    pub d_out_crit: Option<f64>,
    /// `D(G_crit, G_hat)`.
    pub d_crit_out: Option<f64>,
}

pub fn disparity_csv(rows: &[DisparityRow]) -> Result<Vec<u8>> {
    to_csv_with_header(
        &["kind", "seed", "scope", "nodes", "d_out_crit", "d_crit_out"],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use discrit_core::geometry::generate_deployment;
    use discrit_core::graphs::critical_radius;

    #[test]
    fn deployment_round_trips() {
        let dep = generate_deployment(
            DeploymentKind::RandomisedLattice,
            57,
            Region::new(300.0, 200.0).unwrap(),
            3,
        )
        .unwrap();
        let back = parse_deployment_csv(
            &deployment_csv(&dep).unwrap(),
            dep.kind,
            dep.region,
            dep.seed,
        )
        .unwrap();
        assert_eq!(back, dep);
        let json: Deployment = serde_json::from_slice(&deployment_json(&dep).unwrap()).unwrap();
        assert_eq!(json, dep);
    }

    #[test]
    fn graph_round_trips() {
        let dep =
            generate_deployment(DeploymentKind::UniformIid, 80, Region::default(), 1).unwrap();
        let (_, g) = critical_radius(&dep).unwrap();
        let header: GraphHeader = serde_json::from_slice(&graph_header(&g).unwrap()).unwrap();
        assert_eq!(parse_graph(&graph_csv(&g).unwrap(), &header).unwrap(), g);
        let empty = EdgeGraph::empty(5);
        assert_eq!(graph_csv(&empty).unwrap(), b"i,j\n");
        assert_eq!(
            parse_graph(b"i,j\n", &GraphHeader { n: 5, radius: None }).unwrap(),
            empty
        );
    }

    #[test]
    fn weights_round_trip() {
        let w = LinkWeightTable::from_counts(3, vec![10, 0, 4], vec![0, 3, 0, 0, 0, 0, 4, 1, 0])
            .unwrap();
        let bytes = weights_csv(&w).unwrap();
        assert_eq!(parse_weights(&bytes).unwrap(), w);
        assert!(parse_weights(b"i,j,C,B,p_hat\n0,0,0,5,0\n0,1,6,5,1.2\n1,1,0,1,0\n").is_err());
    }
}
