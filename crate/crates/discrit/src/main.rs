use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use discrit::config::{ExperimentConfig, Overrides, ProtocolMode, SCHEMA};
use discrit::io;
use discrit::pipeline::{self, disparity_rows, localize_on, run_protocol, stream};
use discrit_core::channel::{received_power_histogram, simulate_hello, ChannelParams, Fading};
use discrit_core::discretize::{rho_stats, rho_trend, PairSample};
use discrit_core::geometry::{generate_deployment, DEFAULT_SIDE};
use discrit_core::graphs::{critical_radius, disparity, graph_diameter};
use discrit_core::protocol::{EngineConfig, Termination};
use discrit_core::rng::derive_seed;
use discrit_core::selforg::{find_h_opt, SelfOrgParams};
use discrit_core::{DeploymentKind, Error, Region};

#[derive(Parser)]
#[command(
    name = "discrit",
    version,
    about = "Critical geometric graph experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deployment.
    Deploy(DeployArgs),
    /// Run the Hello protocol and write link weights.
    Hello(HelloArgs),
    /// Run the min-max protocol (over distances or link weights).
    Discrit(DiscritArgs),
    /// Disparity of a graph against the critical graph.
    Eval(EvalArgs),
    /// Trend of hop-distance discretisation statistics over n.
    Discretize(DiscretizeArgs),
    /// Transport capacity per hop topology and the best h.
    Selforg(SelforgArgs),
    /// Hop-ratio localization with corner beacons.
    Localize(LocalizeArgs),
    /// Run an experiment config end to end.
    Pipeline(PipelineArgs),
    /// Disparity between two edge-list files, both directions.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = DEFAULT_SIDE)]
    width: f64,
    #[arg(long, default_value_t = DEFAULT_SIDE)]
    height: f64,
}

impl RegionArgs {
    fn region(&self) -> Result<Region> {
        Ok(Region::new(self.width, self.height)?)
    }
}

#[derive(Args)]
struct DeployArgs {
    #[arg(long, default_value = "uniform-iid")]
    kind: DeploymentKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    region: RegionArgs,
    /// Deployment document (JSON, carries kind, seed and region).
    #[arg(long)]
    out: PathBuf,
    /// Also write `id,x,y` rows here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Preset {
    Deterministic,
    Rayleigh,
}

#[derive(Args)]
struct ChannelArgs {
    /// Base parameter set; the flags below override single fields.
    #[arg(long, value_enum, default_value = "deterministic")]
    preset: Preset,
    #[arg(long)]
    tx_power: Option<f64>,
    #[arg(long)]
    path_loss_exp: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    sinr_threshold: Option<f64>,
    #[arg(long)]
    tx_prob: Option<f64>,
    /// Mean power of Rayleigh fading; switches fading on.
    #[arg(long)]
    rayleigh_mean: Option<f64>,
    #[arg(long)]
    slots: Option<u64>,
}

impl ChannelArgs {
    fn params(&self) -> ChannelParams {
        let mut p = match self.preset {
            Preset::Deterministic => ChannelParams::default(),
            Preset::Rayleigh => ChannelParams::rayleigh_preset(),
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.tx_power, self.tx_power);
        set(&mut p.path_loss_exp, self.path_loss_exp);
        set(&mut p.noise, self.noise);
        set(&mut p.sinr_threshold, self.sinr_threshold);
        set(&mut p.tx_prob, self.tx_prob);
        if let Some(mean) = self.rayleigh_mean {
            p.fading = Fading::RayleighPower { mean };
        }
        if let Some(s) = self.slots {
            p.slots = s;
        }
        p
    }
}

#[derive(Args)]
struct HelloArgs {
    #[arg(long)]
    deployment: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Link weights CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also write received-power histograms per annulus.
    #[arg(long)]
    power_hist: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    annuli: usize,
}

#[derive(Args)]
struct EngineArgs {
    /// Per-node quiescence timeout; centralised stop when absent.
    #[arg(long)]
    quiescence: Option<u32>,
    /// Let every node send in every round.
    #[arg(long)]
    no_suppress: bool,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            suppress_unchanged: !self.no_suppress,
            termination: match self.quiescence {
                Some(timeout) => Termination::Quiescence { timeout },
                None => Termination::Centralised,
            },
        }
    }
}

#[derive(Args)]
struct DiscritArgs {
    #[arg(long, value_enum, default_value = "discrit")]
    mode: ProtocolMode,
    /// Deployment document; needed in distance mode.
    #[arg(long)]
    deployment: Option<PathBuf>,
    /// Link weights CSV; needed in discrit mode.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Output edge list (a JSON header is written next to it).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    deployment: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Weights the graph was built from; the interior row then reruns
    /// DISCRIT, otherwise the distance-based algorithm.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 100.0)]
    margin: f64,
    #[command(flatten)]
    engine: EngineArgs,
    /// Disparity table CSV; printed when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiscretizeArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [100, 300, 1000, 3000])]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    seeds_per_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    region: RegionArgs,
    /// Trend table CSV.
    #[arg(long)]
    out: PathBuf,
    /// Deployment whose critical graph gives a rho histogram.
    #[arg(long, requires = "hist")]
    deployment: Option<PathBuf>,
    #[arg(long)]
    hist: Option<PathBuf>,
}

#[derive(Args)]
struct SelforgArgs {
    #[arg(long)]
    deployment: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest h; the critical graph's diameter when absent.
    #[arg(long)]
    h_max: Option<u32>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    attempt_prob: Option<f64>,
    #[arg(long)]
    slots: Option<u64>,
    #[arg(long)]
    path_loss_exp: Option<f64>,
    /// Psi table CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LocalizeArgs {
    #[arg(long)]
    deployment: PathBuf,
    /// Hop graph; the exact critical graph when absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 100.0)]
    margin: f64,
    /// Error pattern CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, required_unless_present = "print_schema")]
    config: Option<PathBuf>,
    /// Print the config schema and exit.
    #[arg(long)]
    print_schema: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    kind: Option<DeploymentKind>,
    #[arg(long)]
    margin: Option<f64>,
    /// Output directory; overrides the config and the environment.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
}

fn deploy(a: DeployArgs) -> Result<()> {
    let dep = generate_deployment(a.kind, a.n, a.region.region()?, a.seed)?;
    io::write_atomic(&a.out, &io::deployment_json(&dep)?)?;
    if let Some(p) = &a.csv {
        io::write_atomic(p, &io::deployment_csv(&dep)?)?;
    }
    Ok(())
}

fn hello(a: HelloArgs) -> Result<()> {
    let dep = io::read_deployment(&a.deployment)?;
    let params = a.channel.params();
    let w = simulate_hello(&dep, &params, derive_seed(a.seed, stream::HELLO))?;
    io::write_atomic(&a.out, &io::weights_csv(&w)?)?;
    if let Some(p) = &a.power_hist {
        let h =
            received_power_histogram(&dep, &params, derive_seed(a.seed, stream::POWER), a.annuli)?;
        io::write_atomic(p, &io::power_histogram_csv(&h)?)?;
    }
    Ok(())
}

fn discrit(a: DiscritArgs) -> Result<()> {
    let (dep, weights) = match a.mode {
        ProtocolMode::Distance => {
            let p = a
                .deployment
                .as_ref()
                .context("distance mode needs --deployment")?;
            (Some(io::read_deployment(p)?), None)
        }
        ProtocolMode::Discrit => {
            let p = a.weights.as_ref().context("discrit mode needs --weights")?;
            (None, Some(io::read_weights(p)?))
        }
    };
    let engine = a.engine.config();
    let run = match (&dep, &weights) {
        (Some(d), _) => run_protocol(d, a.mode, None, engine)?,
        (None, Some(w)) => {
            let (graph, trace) = discrit_core::protocol::run_discrit(w, engine)?;
            pipeline::ProtocolRun { graph, trace }
        }
        (None, None) => unreachable!(),
    };
    io::write_graph(&a.out, &run.graph)?;
    if let Some(t) = &a.trace {
        io::write_atomic(t, &io::trace_csv(&run.trace)?)?;
    }
    println!(
        "edges {} iterations {} termination_round {} messages {}",
        run.graph.edge_count(),
        run.trace.iterations,
        run.trace.termination_round,
        run.trace.messages()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let dep = io::read_deployment(&a.deployment)?;
    let g = io::read_graph(&a.graph)?;
    let weights = a
        .weights
        .as_ref()
        .map(|p| io::read_weights(p))
        .transpose()?;
    let mode = if weights.is_some() {
        ProtocolMode::Discrit
    } else {
        ProtocolMode::Distance
    };
    let (_, crit) = critical_radius(&dep)?;
    let rows = disparity_rows(
        &dep,
        &g,
        &crit,
        mode,
        weights.as_ref(),
        a.engine.config(),
        a.margin,
    )?;
    let csv = io::disparity_csv(&rows)?;
    match &a.out {
        Some(p) => io::write_atomic(p, &csv)?,
        None => print!("{}", String::from_utf8(csv)?),
    }
    Ok(())
}

fn discretize(a: DiscretizeArgs) -> Result<()> {
    let rows = rho_trend(a.region.region()?, &a.n_list, a.seeds_per_n, a.seed)?;
    io::write_atomic(&a.out, &io::trend_csv(&rows)?)?;
    if let (Some(d), Some(h)) = (&a.deployment, &a.hist) {
        let dep = io::read_deployment(d)?;
        let (_, g) = critical_radius(&dep)?;
        let s = rho_stats(&dep, &g, PairSample::Auto, derive_seed(a.seed, stream::RHO))?;
        io::write_atomic(h, &io::rho_histogram_csv(&s)?)?;
    }
    for r in &rows {
        println!("n {} var_rho {:.4} cv_rho {:.4}", r.n, r.var_rho, r.cv_rho);
    }
    Ok(())
}

fn selforg(a: SelforgArgs) -> Result<()> {
    let dep = io::read_deployment(&a.deployment)?;
    let (_, crit) = critical_radius(&dep)?;
    let mut p = SelfOrgParams::default();
    if let Some(v) = a.noise {
        p.noise = v;
    }
    if let Some(v) = a.attempt_prob {
        p.attempt_prob = v;
    }
    if let Some(v) = a.slots {
        p.slots = v;
    }
    if let Some(v) = a.path_loss_exp {
        p.path_loss_exp = v;
    }
    let h_max = match a.h_max {
        Some(h) => h,
        None => graph_diameter(&crit)
            .context("critical graph has no diameter")?
            .max(1),
    };
    let t = find_h_opt(&dep, &crit, &p, h_max, derive_seed(a.seed, stream::SELFORG))?;
    io::write_atomic(&a.out, &io::psi_csv(&t)?)?;
    println!("h_opt simulated {} theory {}", t.h_opt, t.h_theory());
    Ok(())
}

fn localize(a: LocalizeArgs) -> Result<()> {
    let dep = io::read_deployment(&a.deployment)?;
    let g = match &a.graph {
        Some(p) => io::read_graph(p)?,
        None => critical_radius(&dep)?.1,
    };
    let e = localize_on(&dep, &g, a.margin)?;
    io::write_atomic(&a.out, &io::error_pattern_csv(&e)?)?;
    println!(
        "localized {} unreachable {} mean_error_m {:.2}",
        e.rows.len(),
        e.unreachable.len(),
        e.mean_error
    );
    Ok(())
}

fn run_pipeline(a: PipelineArgs) -> Result<()> {
    if a.print_schema {
        print!("{SCHEMA}");
        return Ok(());
    }
    let mut cfg = ExperimentConfig::load(a.config.as_deref().expect("required by clap"))?;
    cfg.apply(&Overrides {
        seed: a.seed,
        n: a.n,
        kind: a.kind,
        margin: a.margin,
        output_dir: a.out,
    });
    let m = pipeline::run_pipeline(&cfg)?;
    println!(
        "{} artifacts in {} (config {})",
        m.artifacts.len(),
        cfg.output_dir.display(),
        &m.config_sha256[..12]
    );
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let ga = io::read_graph(&a.a)?;
    let gb = io::read_graph(&a.b)?;
    if ga.n() != gb.n() {
        bail!(
            "node counts differ: {} has {}, {} has {}",
            a.a.display(),
            ga.n(),
            a.b.display(),
            gb.n()
        );
    }
    for (name, x, y) in [("D(a, b)", &ga, &gb), ("D(b, a)", &gb, &ga)] {
        match disparity(x, y) {
            Ok(d) => println!("{name} = {d}"),
            Err(Error::EmptyEdgeSet) => println!("{name} = undefined (empty edge set)"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Deploy(a) => deploy(a),
        Command::Hello(a) => hello(a),
        Command::Discrit(a) => discrit(a),
        Command::Eval(a) => eval(a),
        Command::Discretize(a) => discretize(a),
        Command::Selforg(a) => selforg(a),
        Command::Localize(a) => localize(a),
        Command::Pipeline(a) => run_pipeline(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
