//! Experiment configuration: a single JSON document, see
//! `schema/experiment.schema.json`.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use discrit_core::channel::ChannelParams;
use discrit_core::protocol::EngineConfig;
use discrit_core::selforg::SelfOrgParams;
use discrit_core::{DeploymentKind, Region};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = include_str!("../schema/experiment.schema.json");

/// Environment variable that overrides `output_dir`.
pub const OUT_ENV: &str = "DISCRIT_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub deployment: DeploymentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSpec>,
    /// Interior margin (m) for the interior disparity rows and the
    /// localization edge zone.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_histogram: Option<PowerHistogramSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretize: Option<DiscretizeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selforg: Option<SelfOrgSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localize: Option<LocalizeSpec>,
    pub seeds: Vec<u64>,
    /// Where artifacts go; not part of the canonical form, so it does not
    /// affect the manifest.
    #[serde(default = "default_output", skip_serializing)]
    pub output_dir: PathBuf,
}

fn default_margin() -> f64 {
    100.0
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_side() -> f64 {
    discrit_core::geometry::DEFAULT_SIDE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentSpec {
    pub kinds: Vec<DeploymentKind>,
    pub n: usize,
    #[serde(default = "default_side")]
    pub width: f64,
    #[serde(default = "default_side")]
    pub height: f64,
}

impl DeploymentSpec {
    pub fn region(&self) -> Result<Region> {
        Ok(Region::new(self.width, self.height)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolMode {
    /// Min-max over true distances.
    Distance,
    /// Min-max over Hello link weights.
    Discrit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub mode: ProtocolMode,
    #[serde(default)]
    pub engine: EngineConfig,
    /// Also write the per-round trace.
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerHistogramSpec {
    pub annuli: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizeSpec {
    pub n_list: Vec<usize>,
    pub seeds_per_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfOrgSpec {
    #[serde(default)]
    pub params: SelfOrgParams,
    /// Largest `h`; the critical graph's diameter when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_max: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopGraph {
    Critical,
    Protocol,
}

impl HopGraph {
    pub fn as_str(self) -> &'static str {
        match self {
            HopGraph::Critical => "critical",
            HopGraph::Protocol => "protocol",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizeSpec {
    /// Graphs whose hop counts feed the estimator; beacons are the nodes
    /// nearest the region corners.
    pub graphs: Vec<HopGraph>,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub kind: Option<DeploymentKind>,
    pub margin: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("config does not match the schema")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Applies flags, then the output-directory environment variable.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seeds = vec![s];
        }
        if let Some(n) = o.n {
            self.deployment.n = n;
        }
        if let Some(k) = o.kind {
            self.deployment.kinds = vec![k];
        }
        if let Some(m) = o.margin {
            self.margin = m;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        } else if let Some(d) = std::env::var_os(OUT_ENV) {
            self.output_dir = PathBuf::from(d);
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.seeds.is_empty(), "seeds must be non-empty");
        ensure!(
            !self.deployment.kinds.is_empty(),
            "deployment.kinds must be non-empty"
        );
        ensure!(self.deployment.n >= 2, "deployment.n must be at least 2");
        let region = self.deployment.region()?;
        ensure!(
            self.margin >= 0.0 && 2.0 * self.margin < region.width.min(region.height),
            "margin must be in [0, min side / 2)"
        );
        if let Some(c) = &self.channel {
            c.validate().context("channel")?;
        }
        if let Some(p) = &self.protocol {
            if p.mode == ProtocolMode::Discrit && self.channel.is_none() {
                bail!("protocol.mode = discrit needs a channel block");
            }
        }
        if let Some(h) = &self.power_histogram {
            ensure!(h.annuli >= 1, "power_histogram.annuli must be at least 1");
            ensure!(
                self.channel.is_some(),
                "power_histogram needs a channel block"
            );
        }
        if let Some(d) = &self.discretize {
            ensure!(!d.n_list.is_empty(), "discretize.n_list must be non-empty");
            ensure!(
                d.n_list.iter().all(|&n| n >= 2),
                "discretize.n_list entries must be at least 2"
            );
            ensure!(
                d.seeds_per_n >= 1,
                "discretize.seeds_per_n must be at least 1"
            );
        }
        if let Some(s) = &self.selforg {
            s.params.validate().context("selforg.params")?;
            ensure!(s.h_max != Some(0), "selforg.h_max must be at least 1");
        }
        if let Some(l) = &self.localize {
            ensure!(!l.graphs.is_empty(), "localize.graphs must be non-empty");
            if l.graphs.contains(&HopGraph::Protocol) {
                ensure!(
                    self.protocol.is_some(),
                    "localize over the protocol graph needs a protocol block"
                );
            }
        }
        Ok(())
    }

    /// Canonical serialisation, the input of the manifest hash.
    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
